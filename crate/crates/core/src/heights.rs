//! Places of ℚ, normalized absolute values, heights, S-heights, Weil
//! functions and S-unit arithmetic. Every multiplicative quantity is an exact
//! rational; logarithms are derived for reporting.
//!
//! Over ℚ every local degree is 1, so `‖x‖_v = |x|_v` with `|p|_p = 1/p`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::poly::{format_rational, HomogeneousPoly, Rational};

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        r
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'outer: for &a in &WITNESSES {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Infinite,
    Prime(u64),
}

impl Place {
    pub fn prime(p: u64) -> Result<Place> {
        if is_prime(p) {
            Ok(Place::Prime(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    pub fn is_archimedean(&self) -> bool {
        matches!(self, Place::Infinite)
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinite => f.write_str("inf"),
            Place::Prime(p) => write!(f, "{p}"),
        }
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A finite set of places containing the archimedean one. Stored as the
/// ascending list of its primes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PlaceSet {
    primes: Vec<u64>,
}

impl PlaceSet {
    pub fn new(primes: &[u64]) -> Result<Self> {
        let mut ps = primes.to_vec();
        for &p in &ps {
            Place::prime(p)?;
        }
        ps.sort_unstable();
        ps.dedup();
        Ok(PlaceSet { primes: ps })
    }

    pub fn archimedean_only() -> Self {
        PlaceSet { primes: Vec::new() }
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn places(&self) -> impl Iterator<Item = Place> + '_ {
        std::iter::once(Place::Infinite).chain(self.primes.iter().map(|&p| Place::Prime(p)))
    }

    pub fn contains(&self, v: Place) -> bool {
        match v {
            Place::Infinite => true,
            Place::Prime(p) => self.primes.binary_search(&p).is_ok(),
        }
    }
}

impl Serialize for PlaceSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(&self.primes)
    }
}

/// Natural log of a nonzero big integer's absolute value.
pub fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.abs().to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (n.abs() >> shift).to_f64().expect("64-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a positive rational.
pub fn ln_rational(r: &Rational) -> f64 {
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

/// An exact positive rational on the multiplicative scale.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct NormValue(Rational);

impl NormValue {
    pub fn new(exact: Rational) -> Result<Self> {
        if !exact.is_positive() {
            return Err(Error::Invariant(format!(
                "norm value {} is not positive",
                format_rational(&exact)
            )));
        }
        Ok(NormValue(exact))
    }

    pub fn exact(&self) -> &Rational {
        &self.0
    }

    pub fn into_exact(self) -> Rational {
        self.0
    }

    pub fn ln(&self) -> f64 {
        ln_rational(&self.0)
    }
}

impl Serialize for NormValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

/// `p`-adic valuation of a nonzero integer.
pub fn ord_p(n: &BigInt, p: u64) -> u64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut k = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return k;
        }
        n = q;
        k += 1;
    }
}

/// `p`-adic valuation of a nonzero rational.
pub fn valuation(x: &Rational, p: u64) -> i64 {
    ord_p(x.numer(), p) as i64 - ord_p(x.denom(), p) as i64
}

fn pow_p(p: u64, e: i64) -> Rational {
    let base = Rational::from_integer(BigInt::from(p));
    if e >= 0 {
        num_traits::pow(base, e as usize)
    } else {
        num_traits::pow(base.recip(), (-e) as usize)
    }
}

/// `|x|_v`, normalized so that `|p|_p = 1/p`.
pub fn norm_at(x: &Rational, v: Place) -> Result<NormValue> {
    if x.is_zero() {
        return Err(Error::ZeroInput("absolute value of zero".into()));
    }
    match v {
        Place::Infinite => NormValue::new(x.abs()),
        Place::Prime(p) => NormValue::new(pow_p(p, -valuation(x, p))),
    }
}

fn zero_or_norm(x: &Rational, v: Place) -> Result<Rational> {
    if x.is_zero() {
        Ok(Rational::zero())
    } else {
        Ok(norm_at(x, v)?.into_exact())
    }
}

fn require_nonzero(x: &[Rational]) -> Result<()> {
    if x.iter().all(Zero::is_zero) {
        return Err(Error::ZeroInput("all-zero vector".into()));
    }
    Ok(())
}

/// `‖x‖_v = max_i ‖x_i‖_v`.
pub fn tuple_norm_at(x: &[Rational], v: Place) -> Result<NormValue> {
    require_nonzero(x)?;
    let mut best = Rational::zero();
    for xi in x {
        let n = zero_or_norm(xi, v)?;
        if n > best {
            best = n;
        }
    }
    NormValue::new(best)
}

/// Scales to coprime integers, keeping signs.
pub fn primitive_integer_vector(x: &[Rational]) -> Result<Vec<BigInt>> {
    require_nonzero(x)?;
    let l = x.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = x.iter().map(|c| (c * &l).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    Ok(ints.into_iter().map(|c| c / &g).collect())
}

/// Multiplicative height of a projective point: `max |x_i|` over coprime
/// integer coordinates (the product over all places collapses to this).
pub fn proj_height_exact(x: &[Rational]) -> Result<BigInt> {
    let v = primitive_integer_vector(x)?;
    Ok(v.iter().map(|c| c.abs()).max().expect("nonempty"))
}

/// Absolute logarithmic height `h(x)` of a projective point.
pub fn proj_height(x: &[Rational]) -> Result<f64> {
    Ok(ln_bigint(&proj_height_exact(x)?))
}

/// `exp h(x)` for a nonzero rational `a/b` in lowest terms: `max(|a|, |b|)`.
pub fn scalar_height_exact(x: &Rational) -> Result<BigInt> {
    if x.is_zero() {
        return Err(Error::ZeroInput("height of zero".into()));
    }
    Ok(x.numer().abs().max(x.denom().abs()))
}

pub fn scalar_height(x: &Rational) -> Result<f64> {
    Ok(ln_bigint(&scalar_height_exact(x)?))
}

fn require_form(q: &HomogeneousPoly) -> Result<()> {
    if q.is_zero() {
        Err(Error::ZeroPolynomial)
    } else {
        Ok(())
    }
}

/// `‖Q‖_v`, the largest coefficient norm.
pub fn poly_norm_at(q: &HomogeneousPoly, v: Place) -> Result<NormValue> {
    require_form(q)?;
    let coeffs: Vec<Rational> = q.poly().coefficients().cloned().collect();
    tuple_norm_at(&coeffs, v)
}

/// Positive rational content: `gcd(numerators) / lcm(denominators)`.
fn content(q: &HomogeneousPoly) -> Rational {
    let (g, l) = q
        .poly()
        .coefficients()
        .fold((BigInt::zero(), BigInt::one()), |(g, l), c| {
            (g.gcd(c.numer()), l.lcm(c.denom()))
        });
    Rational::new(g, l)
}

/// `∏_v ‖Q‖_v` over all places of ℚ.
///
/// Only finitely many factors differ from 1: the archimedean one and the
/// primes dividing the content. The finite part multiplies out to
/// `1 / content(Q)`, so no factorization is needed.
pub fn poly_height_exact(q: &HomogeneousPoly) -> Result<Rational> {
    let arch = poly_norm_at(q, Place::Infinite)?.into_exact();
    Ok(arch / content(q))
}

/// `h(Q) = Σ_v log ‖Q‖_v`.
pub fn poly_height(q: &HomogeneousPoly) -> Result<f64> {
    Ok(ln_rational(&poly_height_exact(q)?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeilValue {
    /// `‖x‖_v^d ‖Q‖_v / ‖Q(x)‖_v`.
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub exact: Rational,
    #[serde(serialize_with = "crate::report::ser_log")]
    pub log: f64,
}

/// Weil function `λ_{Q,v}(x)` in exact multiplicative form plus its log.
pub fn weil(q: &HomogeneousPoly, v: Place, x: &[Rational]) -> Result<WeilValue> {
    let exact = weil_exact(q, v, x)?;
    let log = ln_rational(&exact);
    Ok(WeilValue { exact, log })
}

pub fn weil_exact(q: &HomogeneousPoly, v: Place, x: &[Rational]) -> Result<Rational> {
    require_form(q)?;
    let qx = q.evaluate(x)?;
    if qx.is_zero() {
        return Err(Error::ZeroInput("point lies on the hypersurface".into()));
    }
    let xn = tuple_norm_at(x, v)?.into_exact();
    let qn = poly_norm_at(q, v)?.into_exact();
    let qxn = norm_at(&qx, v)?.into_exact();
    Ok(num_traits::pow(xn, q.degree() as usize) * qn / qxn)
}

/// `H_S(x) = ∏_{v∈S} ‖x‖_v`.
pub fn s_height(x: &[Rational], s: &PlaceSet) -> Result<NormValue> {
    let mut acc = Rational::one();
    for v in s.places() {
        acc *= tuple_norm_at(x, v)?.into_exact();
    }
    NormValue::new(acc)
}

/// `h_S(x) = log H_S(x)`.
pub fn log_s_height(x: &[Rational], s: &PlaceSet) -> Result<f64> {
    Ok(s_height(x, s)?.ln())
}

/// Divides out every prime of `s` from `n`.
pub fn strip_primes(n: &BigInt, s: &PlaceSet) -> BigInt {
    let mut n = n.clone();
    if n.is_zero() {
        return n;
    }
    for &p in s.primes() {
        let p = BigInt::from(p);
        loop {
            let (q, r) = n.div_rem(&p);
            if !r.is_zero() {
                break;
            }
            n = q;
        }
    }
    n
}

/// Positive S-unit part `∏_{p∈S} p^{ord_p(n)}` of a nonzero integer.
pub fn s_unit_part(n: &BigInt, s: &PlaceSet) -> BigInt {
    n.abs() / strip_primes(&n.abs(), s)
}

pub fn is_s_integer(x: &Rational, s: &PlaceSet) -> bool {
    strip_primes(x.denom(), s).is_one()
}

pub fn is_s_unit(x: &Rational, s: &PlaceSet) -> bool {
    !x.is_zero() && strip_primes(x.denom(), s).is_one() && strip_primes(x.numer(), s).abs().is_one()
}

/// Canonical representative of the `O_S^*`-proportionality class of a
/// nonzero tuple of S-integers: the tuple divided by the S-unit part of its
/// content, signed so the first nonzero coordinate is positive. The result
/// is an integer vector whose gcd is prime to every prime of `S`.
pub fn canonical_rep(x: &[Rational], s: &PlaceSet) -> Result<Vec<BigInt>> {
    require_nonzero(x)?;
    for c in x {
        if !is_s_integer(c, s) {
            return Err(Error::NotSInteger(format_rational(c)));
        }
    }
    let l = x.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = x.iter().map(|c| (c * &l).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    // l is an S-unit, so the non-S part of the content is the non-S part of g
    let keep = strip_primes(&g, s);
    let mut out: Vec<BigInt> = ints.into_iter().map(|c| c / &g * &keep).collect();
    if out
        .iter()
        .find(|c| !c.is_zero())
        .is_some_and(|c| c.is_negative())
    {
        out.iter_mut().for_each(|c| *c = -c.clone());
    }
    Ok(out)
}

pub fn to_rationals(v: &[BigInt]) -> Vec<Rational> {
    v.iter()
        .map(|c| Rational::from_integer(c.clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn z(n: i64) -> Rational {
        r(n, 1)
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&c| BigInt::from(c)).collect()
    }

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..40).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
        assert!(is_prime(18_446_744_073_709_551_557));
        assert_eq!(Place::prime(9), Err(Error::NotPrime(9)));
        assert!(PlaceSet::new(&[2, 4]).is_err());
    }

    #[test]
    fn place_set_normalizes() {
        let s = PlaceSet::new(&[5, 2, 5]).unwrap();
        assert_eq!(s.primes(), &[2, 5]);
        assert_eq!(
            s.places().collect::<Vec<_>>(),
            vec![Place::Infinite, Place::Prime(2), Place::Prime(5)]
        );
        assert!(s.contains(Place::Infinite));
        assert!(!s.contains(Place::Prime(3)));
        assert_eq!(serde_json::to_string(&s).unwrap(), "[2,5]");
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norm_at(&z(12), Place::Prime(2)).unwrap().exact(), &r(1, 4));
        assert_eq!(norm_at(&r(-3, 10), Place::Prime(5)).unwrap().exact(), &z(5));
        assert_eq!(
            norm_at(&r(-3, 10), Place::Infinite).unwrap().exact(),
            &r(3, 10)
        );
        assert!(norm_at(&z(0), Place::Infinite).is_err());
    }

    #[test]
    fn tuple_norm_examples() {
        assert_eq!(
            tuple_norm_at(&[z(6), z(4)], Place::Prime(2))
                .unwrap()
                .exact(),
            &r(1, 2)
        );
        assert_eq!(
            tuple_norm_at(&[z(6), z(4)], Place::Infinite)
                .unwrap()
                .exact(),
            &z(6)
        );
        assert_eq!(
            tuple_norm_at(&[z(0), z(5)], Place::Prime(5))
                .unwrap()
                .exact(),
            &r(1, 5)
        );
        assert!(tuple_norm_at(&[z(0), z(0)], Place::Infinite).is_err());
    }

    #[test]
    fn projective_height_examples() {
        close(proj_height(&[z(1), z(2)]).unwrap(), 2f64.ln());
        close(proj_height(&[r(3, 2), z(5)]).unwrap(), 10f64.ln());
        assert_eq!(proj_height(&[z(7), z(7)]).unwrap(), 0.0);
        assert!(proj_height(&[z(0)]).is_err());
    }

    #[test]
    fn scalar_height_examples() {
        close(scalar_height(&r(3, 2)).unwrap(), 3f64.ln());
        close(scalar_height(&z(-5)).unwrap(), 5f64.ln());
        assert_eq!(scalar_height(&z(1)).unwrap(), 0.0);
        assert!(scalar_height(&z(0)).is_err());
    }

    #[test]
    fn poly_norm_and_height_examples() {
        let q = parse_poly("6*x0^2 - 15*x1^2", 2).unwrap();
        assert_eq!(poly_norm_at(&q, Place::Prime(5)).unwrap().exact(), &z(1));
        assert_eq!(
            poly_height(&parse_poly("x0 - x1", 2).unwrap()).unwrap(),
            0.0
        );
        let q = parse_poly("1/2*x0^2 + 3*x1^2", 2).unwrap();
        assert_eq!(poly_height_exact(&q).unwrap(), z(6));
        close(poly_height(&q).unwrap(), 2f64.ln() + 3f64.ln());
    }

    #[test]
    fn poly_height_agrees_with_placewise_sum() {
        // sum over the places where some coefficient has nonzero valuation
        let q = parse_poly("12/35*x0^2 - 18/7*x0*x1 + 45/14*x1^2", 2).unwrap();
        let mut primes = vec![2u64, 3, 5, 7];
        primes.retain(|&p| q.poly().coefficients().any(|c| valuation(c, p) != 0));
        let mut total = poly_norm_at(&q, Place::Infinite).unwrap().into_exact();
        for p in primes {
            total *= poly_norm_at(&q, Place::Prime(p)).unwrap().into_exact();
        }
        assert_eq!(poly_height_exact(&q).unwrap(), total);
    }

    #[test]
    fn weil_examples() {
        let q = parse_poly("x1", 2).unwrap();
        assert_eq!(weil(&q, Place::Infinite, &[z(1), z(2)]).unwrap().log, 0.0);
        let w = weil(&q, Place::Prime(2), &[z(1), z(4)]).unwrap();
        assert_eq!(w.exact, z(4));
        close(w.log, 4f64.ln());
        let q = parse_poly("x0^2 - 2*x1^2", 2).unwrap();
        let w = weil(&q, Place::Infinite, &[z(3), z(2)]).unwrap();
        assert_eq!(w.exact, z(18));
        assert!(weil(&q, Place::Infinite, &[z(0), z(0)]).is_err());
        let q = parse_poly("x0 - x1", 2).unwrap();
        assert!(matches!(
            weil(&q, Place::Infinite, &[z(2), z(2)]),
            Err(Error::ZeroInput(_))
        ));
    }

    #[test]
    fn s_height_examples() {
        let s2 = PlaceSet::new(&[2]).unwrap();
        assert_eq!(s_height(&[z(6), z(4)], &s2).unwrap().exact(), &z(3));
        assert_eq!(
            s_height(&[z(1), z(1)], &PlaceSet::new(&[3, 7]).unwrap())
                .unwrap()
                .exact(),
            &z(1)
        );
        assert_eq!(
            s_height(&[z(9), z(3)], &PlaceSet::new(&[3]).unwrap())
                .unwrap()
                .exact(),
            &z(3)
        );
    }

    #[test]
    fn s_integer_and_unit_examples() {
        let s = PlaceSet::new(&[2, 3]).unwrap();
        assert!(is_s_integer(&r(-1, 12), &s));
        assert!(is_s_unit(&r(-1, 12), &s));
        assert!(is_s_integer(&z(5), &s));
        assert!(!is_s_unit(&z(5), &s));
        assert!(!is_s_integer(&r(1, 5), &s));
        assert!(is_s_integer(&z(0), &s));
        assert!(!is_s_unit(&z(0), &s));
    }

    #[test]
    fn canonical_rep_examples() {
        let s = PlaceSet::new(&[2]).unwrap();
        assert_eq!(
            canonical_rep(&[z(4), z(8), z(12)], &s).unwrap(),
            ints(&[1, 2, 3])
        );
        assert_eq!(canonical_rep(&[z(-2), z(6)], &s).unwrap(), ints(&[1, -3]));
        assert_eq!(canonical_rep(&[z(3), z(6)], &s).unwrap(), ints(&[3, 6]));
        assert_eq!(
            canonical_rep(&[r(3, 4), r(-1, 2)], &s).unwrap(),
            ints(&[3, -2])
        );
        assert!(matches!(
            canonical_rep(&[r(1, 3), z(1)], &s),
            Err(Error::NotSInteger(_))
        ));
        assert!(canonical_rep(&[z(0), z(0)], &s).is_err());
    }

    #[test]
    fn big_logs() {
        let n = num_traits::pow(BigInt::from(10), 400);
        close(ln_bigint(&n), 400.0 * 10f64.ln());
    }
}
