//! Gröbner bases over ℚ (grevlex) and projective dimensions of zero sets.

use std::collections::{BTreeSet, HashSet};

use num_traits::One;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::poly::{HomogeneousPoly, Monomial, Poly, Rational};

/// Limits on a single Gröbner computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_basis: usize,
    pub max_steps: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_basis: 5_000,
            max_steps: 20_000_000,
        }
    }
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget {
            max_basis: usize::MAX,
            max_steps: u64::MAX,
        }
    }
}

struct Meter {
    steps: u64,
    max: u64,
}

impl Meter {
    fn new(max: u64) -> Self {
        Meter { steps: 0, max }
    }

    fn tick(&mut self) -> Result<()> {
        self.steps += 1;
        if self.steps > self.max {
            return Err(Error::BudgetExceeded(format!(
                "more than {} reduction steps",
                self.max
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ideal {
    num_vars: usize,
    generators: Vec<Poly>,
}

impl Ideal {
    pub fn new(num_vars: usize, generators: Vec<Poly>) -> Result<Self> {
        for g in &generators {
            if g.num_vars() != num_vars {
                return Err(Error::DimensionMismatch {
                    expected: num_vars,
                    got: g.num_vars(),
                });
            }
        }
        Ok(Ideal {
            num_vars,
            generators,
        })
    }

    pub fn from_forms(num_vars: usize, forms: &[HomogeneousPoly]) -> Result<Self> {
        Self::new(num_vars, forms.iter().map(|f| f.poly().clone()).collect())
    }

    pub fn zero(num_vars: usize) -> Self {
        Ideal {
            num_vars,
            generators: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn generators(&self) -> &[Poly] {
        &self.generators
    }

    pub fn is_homogeneous(&self) -> bool {
        self.generators.iter().all(Poly::is_homogeneous)
    }

    pub fn with_generators(&self, extra: impl IntoIterator<Item = Poly>) -> Result<Ideal> {
        let mut gens = self.generators.clone();
        gens.extend(extra);
        Ideal::new(self.num_vars, gens)
    }
}

/// Reduced Gröbner basis in grevlex order. Elements are monic and sorted by
/// leading monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroebnerBasis {
    num_vars: usize,
    basis: Vec<Poly>,
    reduced: bool,
}

impl GroebnerBasis {
    pub const ORDER: &'static str = "grevlex";

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn basis(&self) -> &[Poly] {
        &self.basis
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn order(&self) -> &'static str {
        Self::ORDER
    }

    /// The ideal contains a nonzero constant.
    pub fn is_unit_ideal(&self) -> bool {
        self.basis.iter().any(Poly::is_nonzero_constant)
    }

    pub fn contains(&self, p: &Poly) -> bool {
        normal_form(p, self).is_zero()
    }

    pub fn leading_monomials(&self) -> Vec<&Monomial> {
        self.basis
            .iter()
            .filter_map(Poly::leading_monomial)
            .collect()
    }
}

/// S-polynomial of two nonzero polynomials.
pub fn s_polynomial(f: &Poly, g: &Poly) -> Poly {
    let (fm, fc) = f.leading_term().expect("nonzero");
    let (gm, gc) = g.leading_term().expect("nonzero");
    let l = fm.lcm(gm);
    let mut s = Poly::zero(f.num_vars());
    s.sub_scaled_shift(&-fc.recip(), &fm.quotient_of(&l), f);
    s.sub_scaled_shift(&gc.recip(), &gm.quotient_of(&l), g);
    s
}

fn reduce(p: &Poly, basis: &[Poly], meter: &mut Meter) -> Result<Poly> {
    let mut p = p.clone();
    let mut rem = Poly::zero(p.num_vars());
    while let Some((lm, lc)) = p.leading_term().map(|(m, c)| (m.clone(), c.clone())) {
        let divisor = basis
            .iter()
            .find(|g| g.leading_monomial().is_some_and(|gm| gm.divides(&lm)));
        match divisor {
            Some(g) => {
                meter.tick()?;
                let (gm, gc) = g.leading_term().expect("nonzero");
                let shift = gm.quotient_of(&lm);
                let c: Rational = &lc / gc;
                p.sub_scaled_shift(&c, &shift, g);
            }
            None => {
                let (m, c) = p.pop_leading().expect("nonzero");
                rem.add_term(m, c);
            }
        }
    }
    Ok(rem)
}

/// Remainder of `p` under full multivariate division by `gb`.
pub fn normal_form(p: &Poly, gb: &GroebnerBasis) -> Poly {
    let mut meter = Meter::new(u64::MAX);
    reduce(p, &gb.basis, &mut meter).expect("unbounded meter")
}

/// Buchberger's algorithm with the product and chain criteria, followed by
/// inter-reduction. Pairs are processed smallest-lcm first, so the output is
/// a deterministic function of the generator list.
pub fn groebner_basis(ideal: &Ideal, budget: &Budget) -> Result<GroebnerBasis> {
    let n = ideal.num_vars();
    let mut meter = Meter::new(budget.max_steps);
    let mut basis: Vec<Poly> = Vec::new();
    let mut pending: BTreeSet<(Monomial, usize, usize)> = BTreeSet::new();
    let mut pending_ids: HashSet<(usize, usize)> = HashSet::new();

    let unit = || GroebnerBasis {
        num_vars: n,
        basis: vec![Poly::constant(n, Rational::one())],
        reduced: true,
    };

    // returns true when the ideal became the unit ideal
    let insert = |h: Poly,
                  basis: &mut Vec<Poly>,
                  pending: &mut BTreeSet<(Monomial, usize, usize)>,
                  pending_ids: &mut HashSet<(usize, usize)>|
     -> Result<bool> {
        if h.is_nonzero_constant() {
            return Ok(true);
        }
        if basis.len() >= budget.max_basis {
            return Err(Error::BudgetExceeded(format!(
                "basis grew past {} elements",
                budget.max_basis
            )));
        }
        let h = h.monic();
        let k = basis.len();
        let hm = h.leading_monomial().expect("nonzero").clone();
        for (i, g) in basis.iter().enumerate() {
            let l = g.leading_monomial().expect("nonzero").lcm(&hm);
            pending.insert((l, i, k));
            pending_ids.insert((i, k));
        }
        basis.push(h);
        Ok(false)
    };

    for g in ideal.generators() {
        let h = reduce(g, &basis, &mut meter)?;
        if !h.is_zero() && insert(h, &mut basis, &mut pending, &mut pending_ids)? {
            return Ok(unit());
        }
    }

    while let Some((lcm, i, j)) = pending.pop_first() {
        pending_ids.remove(&(i, j));
        let mi = basis[i].leading_monomial().expect("nonzero");
        let mj = basis[j].leading_monomial().expect("nonzero");
        if mi.is_coprime(mj) {
            continue;
        }
        let chain = (0..basis.len()).any(|k| {
            k != i
                && k != j
                && basis[k].leading_monomial().expect("nonzero").divides(&lcm)
                && !pending_ids.contains(&(i.min(k), i.max(k)))
                && !pending_ids.contains(&(j.min(k), j.max(k)))
        });
        if chain {
            continue;
        }
        let s = s_polynomial(&basis[i], &basis[j]);
        let h = reduce(&s, &basis, &mut meter)?;
        if !h.is_zero() && insert(h, &mut basis, &mut pending, &mut pending_ids)? {
            return Ok(unit());
        }
    }

    // minimalize
    basis.sort_by(|a, b| a.leading_monomial().cmp(&b.leading_monomial()));
    let mut minimal: Vec<Poly> = Vec::new();
    for (idx, g) in basis.iter().enumerate() {
        let gm = g.leading_monomial().expect("nonzero");
        let redundant = basis.iter().enumerate().any(|(other, h)| {
            let hm = h.leading_monomial().expect("nonzero");
            other != idx && hm.divides(gm) && (hm != gm || other < idx)
        });
        if !redundant {
            minimal.push(g.clone());
        }
    }
    // inter-reduce tails
    let mut reduced = Vec::with_capacity(minimal.len());
    for idx in 0..minimal.len() {
        let others: Vec<Poly> = minimal
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != idx)
            .map(|(_, g)| g.clone())
            .collect();
        let r = reduce(&minimal[idx], &others, &mut meter)?;
        reduced.push(r.monic());
    }
    reduced.sort_by(|a, b| a.leading_monomial().cmp(&b.leading_monomial()));
    Ok(GroebnerBasis {
        num_vars: n,
        basis: reduced,
        reduced: true,
    })
}

/// Projective dimension of a zero set in `P^{n-1}`; `Empty` stands for the
/// dimension of the empty set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProjDim {
    Empty,
    Dim(usize),
}

impl ProjDim {
    pub fn is_empty(&self) -> bool {
        matches!(self, ProjDim::Empty)
    }

    pub fn value(&self) -> Option<usize> {
        match self {
            ProjDim::Empty => None,
            ProjDim::Dim(d) => Some(*d),
        }
    }

    /// From the dimension of the affine cone (`None` when the cone is empty).
    pub fn from_cone(cone: Option<usize>) -> ProjDim {
        match cone {
            None | Some(0) => ProjDim::Empty,
            Some(k) => ProjDim::Dim(k - 1),
        }
    }
}

impl std::fmt::Display for ProjDim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProjDim::Empty => f.write_str("empty"),
            ProjDim::Dim(d) => write!(f, "{d}"),
        }
    }
}

impl Serialize for ProjDim {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ProjDim::Empty => s.serialize_str("empty"),
            ProjDim::Dim(d) => s.serialize_u64(*d as u64),
        }
    }
}

const MAX_DIM_VARS: usize = 24;

/// Dimension of `k[x]/(monomials)`: the largest set of variables containing
/// the support of no monomial. `None` if a constant is among the monomials.
pub fn monomial_cone_dim(monomials: &[&Monomial], num_vars: usize) -> Result<Option<usize>> {
    if num_vars > MAX_DIM_VARS {
        return Err(Error::BudgetExceeded(format!(
            "independent-set search limited to {MAX_DIM_VARS} variables"
        )));
    }
    let supports: Vec<u32> = monomials
        .iter()
        .map(|m| m.support().fold(0u32, |acc, i| acc | (1 << i)))
        .collect();
    let mut best: Option<usize> = None;
    for set in 0u32..(1u32 << num_vars) {
        let size = set.count_ones() as usize;
        if best.is_some_and(|b| b >= size) {
            continue;
        }
        if supports.iter().all(|s| s & !set != 0) {
            best = Some(size);
        }
    }
    Ok(best)
}

/// Exact projective dimension of the zero set of a homogeneous ideal.
pub fn proj_dim(ideal: &Ideal, budget: &Budget) -> Result<ProjDim> {
    if !ideal.is_homogeneous() {
        return Err(Error::Invalid(
            "projective dimension needs a homogeneous ideal".into(),
        ));
    }
    let gb = groebner_basis(ideal, budget)?;
    dim_of_basis(&gb)
}

fn dim_of_basis(gb: &GroebnerBasis) -> Result<ProjDim> {
    let lms = gb.leading_monomials();
    Ok(ProjDim::from_cone(monomial_cone_dim(&lms, gb.num_vars())?))
}

/// A projective variety given by a homogeneous ideal, with its basis and
/// dimension cached.
#[derive(Clone, Debug)]
pub struct ProjectiveVariety {
    ideal: Ideal,
    gb: GroebnerBasis,
    dim: ProjDim,
}

impl ProjectiveVariety {
    pub fn new(ideal: Ideal, budget: &Budget) -> Result<Self> {
        if !ideal.is_homogeneous() {
            return Err(Error::Invalid("variety ideal must be homogeneous".into()));
        }
        let gb = groebner_basis(&ideal, budget)?;
        let dim = dim_of_basis(&gb)?;
        Ok(ProjectiveVariety { ideal, gb, dim })
    }

    pub fn from_forms(num_vars: usize, forms: &[HomogeneousPoly], budget: &Budget) -> Result<Self> {
        Self::new(Ideal::from_forms(num_vars, forms)?, budget)
    }

    /// `P^{num_vars - 1}`.
    pub fn full_space(num_vars: usize) -> Self {
        let ideal = Ideal::zero(num_vars);
        let gb = GroebnerBasis {
            num_vars,
            basis: Vec::new(),
            reduced: true,
        };
        let dim = if num_vars == 0 {
            ProjDim::Empty
        } else {
            ProjDim::Dim(num_vars - 1)
        };
        ProjectiveVariety { ideal, gb, dim }
    }

    pub fn num_vars(&self) -> usize {
        self.ideal.num_vars()
    }

    pub fn ideal(&self) -> &Ideal {
        &self.ideal
    }

    pub fn groebner(&self) -> &GroebnerBasis {
        &self.gb
    }

    pub fn dim(&self) -> ProjDim {
        self.dim
    }

    pub fn is_full_space(&self) -> bool {
        self.gb.basis().is_empty()
    }

    /// Whether `sub ⊆ self`, via `I(self) ⊆ I(sub)`.
    pub fn contains_variety(&self, sub: &ProjectiveVariety) -> bool {
        self.ideal.generators().iter().all(|g| sub.gb.contains(g))
    }

    /// Whether the point (exact coordinates) lies on the variety.
    pub fn contains_point(&self, x: &[Rational]) -> Result<bool> {
        for g in self.gb.basis() {
            if !num_traits::Zero::is_zero(&g.evaluate(x)?) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Basis of this variety's ideal extended by `extra` generators.
    pub fn intersect(&self, extra: &[&Poly], budget: &Budget) -> Result<GroebnerBasis> {
        let ideal = Ideal::new(
            self.num_vars(),
            self.gb
                .basis()
                .iter()
                .cloned()
                .chain(extra.iter().map(|p| (*p).clone()))
                .collect(),
        )?;
        groebner_basis(&ideal, budget)
    }

    pub fn intersection_dim(&self, extra: &[&Poly], budget: &Budget) -> Result<ProjDim> {
        dim_of_basis(&self.intersect(extra, budget)?)
    }
}

/// Dimension of the zero set described by a basis (already computed).
pub fn basis_dim(gb: &GroebnerBasis) -> Result<ProjDim> {
    dim_of_basis(gb)
}

/// Whether `q` vanishes identically on `v`, i.e. `q ∈ rad I(v)`, decided with
/// the Rabinowitsch trick: `1 ∈ I(v) + (1 - t q)`.
pub fn vanishes_on(q: &HomogeneousPoly, v: &ProjectiveVariety, budget: &Budget) -> Result<bool> {
    let n = v.num_vars();
    if q.num_vars() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: q.num_vars(),
        });
    }
    if q.is_zero() {
        return Ok(true);
    }
    let t = Poly::var(n + 1, n);
    let one = Poly::constant(n + 1, Rational::one());
    let rabinowitsch = one.sub(&t.mul(&q.poly().extend_vars(1)));
    let gens: Vec<Poly> = v
        .groebner()
        .basis()
        .iter()
        .map(|g| g.extend_vars(1))
        .chain(std::iter::once(rabinowitsch))
        .collect();
    let gb = groebner_basis(&Ideal::new(n + 1, gens)?, budget)?;
    Ok(gb.is_unit_ideal())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    fn ideal(n: usize, gens: &[&str]) -> Ideal {
        Ideal::new(n, gens.iter().map(|g| Poly::parse(g, n).unwrap()).collect()).unwrap()
    }

    fn gb_strings(gb: &GroebnerBasis) -> Vec<String> {
        gb.basis().iter().map(|p| p.to_string()).collect()
    }

    fn b() -> Budget {
        Budget::default()
    }

    #[test]
    fn basis_of_coordinate_ideal() {
        let gb = groebner_basis(&ideal(2, &["x0", "x1"]), &b()).unwrap();
        assert_eq!(gb_strings(&gb), vec!["x1", "x0"]);
        assert!(gb.is_reduced());
        assert_eq!(gb.order(), "grevlex");
    }

    #[test]
    fn basis_of_linear_combinations() {
        let gb = groebner_basis(&ideal(2, &["x0 + x1", "x0 - x1"]), &b()).unwrap();
        assert_eq!(gb_strings(&gb), vec!["x1", "x0"]);
    }

    #[test]
    fn basis_of_single_conic() {
        let gb = groebner_basis(&ideal(3, &["x0*x2 - x1^2"]), &b()).unwrap();
        assert_eq!(gb.basis().len(), 1);
        // x1^2 leads in grevlex
        assert_eq!(gb.basis()[0].to_string(), "x1^2 - x0*x2");
    }

    #[test]
    fn normal_form_examples() {
        let gb = groebner_basis(&ideal(3, &["x0", "x1"]), &b()).unwrap();
        assert!(normal_form(&Poly::parse("x0 + x1", 3).unwrap(), &gb).is_zero());
        assert_eq!(
            normal_form(&Poly::parse("x2", 3).unwrap(), &gb).to_string(),
            "x2"
        );
        let gb = groebner_basis(&ideal(3, &["x0*x2 - x1^2"]), &b()).unwrap();
        assert_eq!(
            normal_form(&Poly::parse("x1^2", 3).unwrap(), &gb).to_string(),
            "x0*x2"
        );
    }

    #[test]
    fn unit_ideal_detected() {
        let gb = groebner_basis(&ideal(2, &["x0 - 1", "x0 + 1"]), &b()).unwrap();
        assert!(gb.is_unit_ideal());
    }

    #[test]
    fn projective_dimension_examples() {
        assert_eq!(proj_dim(&ideal(3, &["x0"]), &b()).unwrap(), ProjDim::Dim(1));
        assert_eq!(
            proj_dim(&ideal(3, &["x0", "x1", "x2"]), &b()).unwrap(),
            ProjDim::Empty
        );
        assert_eq!(
            proj_dim(&ideal(3, &["x0*x2 - x1^2"]), &b()).unwrap(),
            ProjDim::Dim(1)
        );
        assert_eq!(proj_dim(&Ideal::zero(4), &b()).unwrap(), ProjDim::Dim(3));
        assert!(proj_dim(&ideal(2, &["x0 + x1^2"]), &b()).is_err());
    }

    #[test]
    fn twisted_cubic_is_a_curve() {
        let i = ideal(4, &["x0*x2 - x1^2", "x1*x3 - x2^2", "x0*x3 - x1*x2"]);
        assert_eq!(proj_dim(&i, &b()).unwrap(), ProjDim::Dim(1));
    }

    #[test]
    fn vanishing_examples() {
        let v = ProjectiveVariety::new(ideal(2, &["x0^2"]), &b()).unwrap();
        assert!(vanishes_on(&parse_poly("x0", 2).unwrap(), &v, &b()).unwrap());
        let v = ProjectiveVariety::new(ideal(2, &["x0"]), &b()).unwrap();
        assert!(!vanishes_on(&parse_poly("x1", 2).unwrap(), &v, &b()).unwrap());
        let v = ProjectiveVariety::new(ideal(3, &["x0", "x1"]), &b()).unwrap();
        assert!(vanishes_on(&parse_poly("x0 + x1", 3).unwrap(), &v, &b()).unwrap());
    }

    #[test]
    fn budget_exhaustion_is_distinct() {
        let tight = Budget {
            max_basis: 100,
            max_steps: 1,
        };
        let err = groebner_basis(
            &ideal(3, &["x0*x2 - x1^2", "x1*x2 - x0^2", "x0*x1 - x2^2"]),
            &tight,
        )
        .unwrap_err();
        assert!(err.is_budget());
    }

    #[test]
    fn containment() {
        let plane = ProjectiveVariety::full_space(3);
        let line = ProjectiveVariety::new(ideal(3, &["x2"]), &b()).unwrap();
        let point = ProjectiveVariety::new(ideal(3, &["x2", "x1"]), &b()).unwrap();
        assert!(plane.contains_variety(&line));
        assert!(line.contains_variety(&point));
        assert!(!point.contains_variety(&line));
    }

    #[test]
    fn monomial_cone_dimension() {
        let m = |e: &[u32]| Monomial::new(e.to_vec());
        let a = m(&[1, 1]);
        assert_eq!(monomial_cone_dim(&[&a], 2).unwrap(), Some(1));
        let one = m(&[0, 0]);
        assert_eq!(monomial_cone_dim(&[&one], 2).unwrap(), None);
        assert_eq!(monomial_cone_dim(&[], 3).unwrap(), Some(3));
    }
}
