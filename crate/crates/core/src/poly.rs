//! Exact multivariate polynomials over the rationals.
//!
//! Monomials are dense exponent vectors ordered by graded reverse
//! lexicographic order; a [`Poly`] keeps its terms in that order so the
//! leading term is always the last entry of the map. [`HomogeneousPoly`]
//! wraps a [`Poly`] whose terms all share one total degree.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Parses `"p"` or `"p/q"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let parsed = match t.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).ok();
            let d = BigInt::from_str(d.trim()).ok();
            match (n, d) {
                (Some(n), Some(d)) if !d.is_zero() => Some(Rational::new(n, d)),
                _ => None,
            }
        }
        None => BigInt::from_str(t).ok().map(Rational::from_integer),
    };
    parsed.ok_or_else(|| Error::Invalid(format!("not a rational: {text:?}")))
}

/// Canonical `"p/q"` rendering, denominators always present.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(num_vars: usize) -> Self {
        Monomial(vec![0; num_vars])
    }

    pub fn var(num_vars: usize, i: usize) -> Self {
        let mut e = vec![0; num_vars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn num_vars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self.divides(other)`.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        Monomial(other.0.iter().zip(&self.0).map(|(b, a)| b - a).collect())
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| *a.max(b))
                .collect(),
        )
    }

    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a == 0 || *b == 0)
    }

    /// Indices of variables with a positive exponent.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, e)| **e > 0)
            .map(|(i, _)| i)
    }

    fn extended(&self, extra: usize) -> Monomial {
        let mut e = self.0.clone();
        e.extend(std::iter::repeat_n(0, extra));
        Monomial(e)
    }
}

impl Ord for Monomial {
    // grevlex: higher degree wins; on ties, the smaller exponent in the last
    // differing variable wins
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        for (a, b) in self.0.iter().zip(&other.0).rev() {
            if a != b {
                return b.cmp(a);
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial with rational coefficients in `num_vars` variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    num_vars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero(num_vars: usize) -> Self {
        Poly {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_vars: usize, c: Rational) -> Self {
        Self::from_terms(num_vars, [(Monomial::one(num_vars), c)])
    }

    pub fn var(num_vars: usize, i: usize) -> Self {
        Self::from_terms(num_vars, [(Monomial::var(num_vars, i), Rational::one())])
    }

    /// Builds a polynomial, combining like terms and dropping zeros.
    pub fn from_terms(
        num_vars: usize,
        terms: impl IntoIterator<Item = (Monomial, Rational)>,
    ) -> Self {
        let mut p = Poly::zero(num_vars);
        for (m, c) in terms {
            assert_eq!(m.num_vars(), num_vars, "monomial arity mismatch");
            p.add_term(m, c);
        }
        p
    }

    pub(crate) fn pop_leading(&mut self) -> Option<(Monomial, Rational)> {
        self.terms.pop_last()
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_monomial(&self) -> Option<&Monomial> {
        self.terms.keys().next_back()
    }

    /// Nonzero constant polynomial.
    pub fn is_nonzero_constant(&self) -> bool {
        self.terms.len() == 1 && self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(Monomial::degree);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.num_vars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.num_vars);
        }
        Poly {
            num_vars: self.num_vars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    /// `self - c * m * g`, in place.
    pub(crate) fn sub_scaled_shift(&mut self, c: &Rational, m: &Monomial, g: &Poly) {
        for (gm, gc) in &g.terms {
            self.add_term(m.mul(gm), -(c * gc));
        }
    }

    /// Scales so the leading coefficient is 1.
    pub fn monic(&self) -> Poly {
        match self.leading_term() {
            None => self.clone(),
            Some((_, lc)) => {
                let inv = lc.recip();
                self.scale(&inv)
            }
        }
    }

    /// Adds `extra` trailing variables (with zero exponents).
    pub fn extend_vars(&self, extra: usize) -> Poly {
        Poly {
            num_vars: self.num_vars + extra,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.extended(extra), c.clone()))
                .collect(),
        }
    }

    /// Homogeneous component of total degree `d`.
    pub fn component(&self, d: u32) -> Poly {
        Poly {
            num_vars: self.num_vars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn evaluate(&self, x: &[Rational]) -> Result<Rational> {
        if x.len() != self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                got: x.len(),
            });
        }
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &e) in x.iter().zip(m.exponents()) {
                if e > 0 {
                    t *= num_traits::pow(xi.clone(), e as usize);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Least common multiple of coefficient denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    pub fn coefficients(&self) -> impl Iterator<Item = &Rational> {
        self.terms.values()
    }

    /// Parses with the polynomial grammar; the result need not be homogeneous.
    pub fn parse(text: &str, num_vars: usize) -> Result<Poly> {
        Parser::new(text, num_vars).parse_poly()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let factors: Vec<String> = m
                .exponents()
                .iter()
                .enumerate()
                .filter(|(_, e)| **e > 0)
                .map(|(v, &e)| {
                    if e == 1 {
                        format!("x{v}")
                    } else {
                        format!("x{v}^{e}")
                    }
                })
                .collect();
            let coeff = if abs.is_integer() {
                abs.numer().to_string()
            } else {
                format!("{}/{}", abs.numer(), abs.denom())
            };
            if factors.is_empty() {
                f.write_str(&coeff)?;
            } else {
                if !abs.is_one() {
                    write!(f, "{coeff}*")?;
                }
                f.write_str(&factors.join("*"))?;
            }
        }
        Ok(())
    }
}

/// A polynomial all of whose monomials have the same total degree.
///
/// The zero polynomial is representable (degree 0, no terms); operations that
/// need a genuine form reject it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HomogeneousPoly {
    poly: Poly,
    degree: u32,
}

impl HomogeneousPoly {
    pub fn new(poly: Poly) -> Result<Self> {
        let mut degrees: Vec<u32> = poly.terms().map(|(m, _)| m.degree()).collect();
        degrees.sort_unstable();
        degrees.dedup();
        if degrees.len() > 1 {
            return Err(Error::NotHomogeneous { degrees });
        }
        let degree = degrees.first().copied().unwrap_or(0);
        Ok(HomogeneousPoly { poly, degree })
    }

    /// Like [`HomogeneousPoly::new`] but rejects the zero polynomial.
    pub fn form(poly: Poly) -> Result<Self> {
        if poly.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        Self::new(poly)
    }

    pub fn parse(text: &str, num_vars: usize) -> Result<Self> {
        parse_poly(text, num_vars)
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn into_poly(self) -> Poly {
        self.poly
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn num_vars(&self) -> usize {
        self.poly.num_vars()
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn evaluate(&self, x: &[Rational]) -> Result<Rational> {
        self.poly.evaluate(x)
    }

    pub fn mul(&self, other: &HomogeneousPoly) -> HomogeneousPoly {
        let poly = self.poly.mul(&other.poly);
        let degree = if poly.is_zero() {
            0
        } else {
            self.degree + other.degree
        };
        HomogeneousPoly { poly, degree }
    }

    pub fn scale(&self, c: &Rational) -> HomogeneousPoly {
        let poly = self.poly.scale(c);
        let degree = if poly.is_zero() { 0 } else { self.degree };
        HomogeneousPoly { poly, degree }
    }
}

impl fmt::Display for HomogeneousPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.poly.fmt(f)
    }
}

/// Parses a homogeneous polynomial in variables `x0..x{num_vars-1}`.
pub fn parse_poly(text: &str, num_vars: usize) -> Result<HomogeneousPoly> {
    if num_vars == 0 {
        return Err(Error::Invalid("num_vars must be positive".into()));
    }
    HomogeneousPoly::new(Poly::parse(text, num_vars)?)
}

/// Checks `Q(t x) == t^deg(Q) * Q(x)` exactly.
pub fn scale_invariance_exponent(
    q: &HomogeneousPoly,
    x: &[Rational],
    t: &Rational,
) -> Result<bool> {
    if t.is_zero() {
        return Err(Error::Precondition("scaling factor must be nonzero".into()));
    }
    let tx: Vec<Rational> = x.iter().map(|xi| xi * t).collect();
    let lhs = q.evaluate(&tx)?;
    let rhs = q.evaluate(x)? * num_traits::pow(t.clone(), q.degree() as usize);
    Ok(lhs == rhs)
}

/// Number of monomials of total degree `d` in `num_vars` variables.
pub fn monomial_count(d: u32, num_vars: usize) -> u128 {
    assert!(num_vars > 0, "num_vars must be positive");
    num_integer::binomial(d as u128 + num_vars as u128 - 1, num_vars as u128 - 1)
}

/// The factors `Q_1, ..., Q_q` of a semi-decomposable form.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyFamily {
    members: Vec<HomogeneousPoly>,
}

impl PolyFamily {
    pub fn new(members: Vec<HomogeneousPoly>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::Invalid("family must have at least one member".into()))?;
        let n = first.num_vars();
        for m in &members {
            if m.num_vars() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: m.num_vars(),
                });
            }
            if m.is_zero() {
                return Err(Error::ZeroPolynomial);
            }
        }
        Ok(PolyFamily { members })
    }

    pub fn parse<S: AsRef<str>>(texts: &[S], num_vars: usize) -> Result<Self> {
        let members = texts
            .iter()
            .map(|t| parse_poly(t.as_ref(), num_vars))
            .collect::<Result<Vec<_>>>()?;
        Self::new(members)
    }

    pub fn members(&self) -> &[HomogeneousPoly] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn num_vars(&self) -> usize {
        self.members[0].num_vars()
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.members.iter().map(HomogeneousPoly::degree).collect()
    }

    /// `d`, the largest member degree.
    pub fn max_degree(&self) -> u32 {
        self.members
            .iter()
            .map(HomogeneousPoly::degree)
            .max()
            .unwrap_or(0)
    }

    /// `ℓ`, the degree of the product.
    pub fn total_degree(&self) -> u32 {
        self.members.iter().map(HomogeneousPoly::degree).sum()
    }

    pub fn product(&self) -> HomogeneousPoly {
        let mut it = self.members.iter();
        let first = it.next().expect("family is nonempty").clone();
        it.fold(first, |acc, q| acc.mul(q))
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    num_vars: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, num_vars: usize) -> Self {
        Parser {
            src: text.as_bytes(),
            pos: 0,
            num_vars,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected integer");
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(BigInt::from_str(digits).expect("digits parse"))
    }

    fn small_integer(&mut self, what: &str) -> Result<u32> {
        let at = self.pos;
        let n = self.integer()?;
        u32::try_from(n).or_else(|_| {
            self.pos = at;
            self.err(format!("{what} too large"))
        })
    }

    fn parse_poly(&mut self) -> Result<Poly> {
        let mut poly = Poly::zero(self.num_vars);
        let mut sign = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -1
            }
            Some(b'+') => {
                self.pos += 1;
                1
            }
            _ => 1,
        };
        loop {
            let (m, c) = self.term()?;
            poly.add_term(m, if sign < 0 { -c } else { c });
            match self.peek() {
                None => break,
                Some(b'+') => sign = 1,
                Some(b'-') => sign = -1,
                Some(ch) => return self.err(format!("unexpected character {:?}", ch as char)),
            }
            self.pos += 1;
        }
        Ok(poly)
    }

    fn term(&mut self) -> Result<(Monomial, Rational)> {
        let mut coeff = Rational::one();
        let mut exps = vec![0u32; self.num_vars];
        match self.peek() {
            Some(ch) if ch.is_ascii_digit() => {
                let num = self.integer()?;
                let den = if self.peek() == Some(b'/') {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.integer()?;
                    if d.is_zero() {
                        self.pos = at;
                        return self.err("zero denominator");
                    }
                    d
                } else {
                    BigInt::one()
                };
                coeff = Rational::new(num, den);
                if self.peek() != Some(b'*') {
                    return Ok((Monomial(exps), coeff));
                }
                self.pos += 1;
            }
            Some(b'x') => {}
            Some(ch) => return self.err(format!("unexpected character {:?}", ch as char)),
            None => return self.err("unexpected end of input"),
        }
        loop {
            self.factor(&mut exps)?;
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok((Monomial(exps), coeff))
    }

    fn factor(&mut self, exps: &mut [u32]) -> Result<()> {
        if self.peek() != Some(b'x') {
            return self.err("expected variable");
        }
        let at = self.pos;
        self.pos += 1;
        if !self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            return self.err("expected variable index after 'x'");
        }
        let idx = self.small_integer("variable index")? as usize;
        if idx >= self.num_vars {
            self.pos = at;
            return self.err(format!(
                "variable x{idx} out of range for {} variables",
                self.num_vars
            ));
        }
        let e = if self.peek() == Some(b'^') {
            self.pos += 1;
            self.small_integer("exponent")?
        } else {
            1
        };
        exps[idx] = exps[idx].checked_add(e).ok_or(Error::Syntax {
            pos: at,
            msg: "exponent overflow".into(),
        })?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn m(e: &[u32]) -> Monomial {
        Monomial::new(e.to_vec())
    }

    #[test]
    fn parses_difference_of_squares() {
        let p = parse_poly("x0^2 - 2*x1^2", 2).unwrap();
        assert_eq!(p.degree(), 2);
        assert_eq!(p.poly().len(), 2);
        assert_eq!(p.poly().coeff(&m(&[2, 0])), q(1));
        assert_eq!(p.poly().coeff(&m(&[0, 2])), q(-2));
    }

    #[test]
    fn rejects_inhomogeneous() {
        match parse_poly("x0 + x1^2", 2) {
            Err(Error::NotHomogeneous { degrees }) => assert_eq!(degrees, vec![1, 2]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parses_rational_coefficient() {
        let p = parse_poly("1/2*x0*x1 + x2^2", 3).unwrap();
        assert_eq!(p.degree(), 2);
        assert_eq!(
            p.poly().coeff(&m(&[1, 1, 0])),
            Rational::new(1.into(), 2.into())
        );
        assert_eq!(p.poly().coeff(&m(&[0, 0, 2])), q(1));
    }

    #[test]
    fn combines_like_terms_and_drops_zeros() {
        let p = parse_poly("x0*x1 + x1*x0 - 2*x0*x1 + x0^2", 2).unwrap();
        assert_eq!(p.to_string(), "x0^2");
        let z = parse_poly("x0 - x0", 2).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.to_string(), "0");
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_poly("x0 + * x1", 2) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("unexpected {other:?}"),
        }
        match parse_poly("x0 + x5", 2) {
            Err(Error::Syntax { pos, msg }) => {
                assert_eq!(pos, 5);
                assert!(msg.contains("x5"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_poly("x0 +", 2), Err(Error::Syntax { .. })));
        assert!(matches!(parse_poly("3/0*x0", 2), Err(Error::Syntax { .. })));
        assert!(matches!(parse_poly("x0 x1", 2), Err(Error::Syntax { .. })));
        assert!(matches!(parse_poly("", 2), Err(Error::Syntax { .. })));
    }

    #[test]
    fn evaluates_exactly() {
        let p = parse_poly("x0^2 - 2*x1^2", 2).unwrap();
        assert_eq!(p.evaluate(&[q(3), q(2)]).unwrap(), q(1));
        let p = parse_poly("x0*x1*x2", 3).unwrap();
        assert_eq!(p.evaluate(&[q(1), q(0), q(5)]).unwrap(), q(0));
        let p = parse_poly("x0^2 + x1*x2", 3).unwrap();
        assert_eq!(p.evaluate(&[q(1), q(2), q(3)]).unwrap(), q(7));
        assert!(matches!(
            p.evaluate(&[q(1)]),
            Err(Error::DimensionMismatch {
                expected: 3,
                got: 1
            })
        ));
    }

    #[test]
    fn scale_invariance_examples() {
        let p = parse_poly("x0^2 - 2*x1^2", 2).unwrap();
        assert!(scale_invariance_exponent(&p, &[q(3), q(2)], &q(2)).unwrap());
        assert!(scale_invariance_exponent(&p, &[q(3), q(2)], &q(1)).unwrap());
        let p = parse_poly("x0*x1", 2).unwrap();
        assert!(scale_invariance_exponent(&p, &[q(1), q(1)], &q(-3)).unwrap());
        assert!(scale_invariance_exponent(&p, &[q(1), q(1)], &q(0)).is_err());
    }

    #[test]
    fn monomial_count_examples() {
        assert_eq!(monomial_count(1, 3), 3);
        assert_eq!(monomial_count(2, 2), 3);
        assert_eq!(monomial_count(3, 4), 20);
    }

    #[test]
    fn monomial_count_matches_enumeration() {
        fn enumerate(d: u32, n: usize) -> u128 {
            if n == 1 {
                return 1;
            }
            (0..=d).map(|i| enumerate(d - i, n - 1)).sum()
        }
        for d in 0..=5 {
            for n in 1..=4 {
                assert_eq!(monomial_count(d, n), enumerate(d, n), "d={d} n={n}");
            }
        }
    }

    #[test]
    fn grevlex_order() {
        // x0 > x1 > x2 for linear terms; x1^2 > x0*x2 in grevlex
        assert!(m(&[1, 0, 0]) > m(&[0, 1, 0]));
        assert!(m(&[0, 1, 0]) > m(&[0, 0, 1]));
        assert!(m(&[0, 2, 0]) > m(&[1, 0, 1]));
        assert!(m(&[2, 0, 0]) > m(&[1, 1, 0]));
        assert!(m(&[0, 0, 2]) > m(&[1, 0, 0]));
    }

    #[test]
    fn family_degrees() {
        let fam = PolyFamily::parse(&["x0", "x1^2", "x0*x1 + x1^2"], 2).unwrap();
        assert_eq!(fam.degrees(), vec![1, 2, 2]);
        assert_eq!(fam.max_degree(), 2);
        assert_eq!(fam.total_degree(), 5);
        assert_eq!(fam.product().degree(), 5);
        assert!(PolyFamily::parse(&["x0", "x0 - x0"], 2).is_err());
        assert!(PolyFamily::parse::<&str>(&[], 2).is_err());
    }

    #[test]
    fn display_formats() {
        let p = parse_poly("-x0^2 + 1/2*x0*x1 - 3*x1^2", 2).unwrap();
        assert_eq!(p.to_string(), "-x0^2 + 1/2*x0*x1 - 3*x1^2");
        let c = Poly::parse("-7/3", 2).unwrap();
        assert_eq!(c.to_string(), "-7/3");
    }

    #[test]
    fn rational_strings() {
        assert_eq!(
            parse_rational("3/2").unwrap(),
            Rational::new(3.into(), 2.into())
        );
        assert_eq!(parse_rational(" -4 ").unwrap(), q(-4));
        assert_eq!(format_rational(&q(3)), "3/1");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }
}
