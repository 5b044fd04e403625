//! Distributive constant of a family of forms with respect to a projective
//! variety, together with the two structural bounds it satisfies.
//!
//! For every nonempty subset `Γ` of the family the ratio
//! `|Γ| / (dim V - dim(V ∩ ⋂_{j∈Γ} Q_j = 0))` is evaluated; the constant is
//! the maximum. Subsets whose common zero locus misses `V` contribute 0, and a
//! zero denominator (some member vanishing on a component of top dimension)
//! makes the constant infinite.

use std::cmp::Ordering;
use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ideal::{
    basis_dim, vanishes_on, Budget, GroebnerBasis, Ideal, ProjDim, ProjectiveVariety,
};
use crate::poly::{format_rational, Poly, PolyFamily, Rational};

/// A nonnegative rational or `+∞`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ratio {
    Finite(Rational),
    Infinite,
}

impl Ratio {
    pub fn zero() -> Self {
        Ratio::Finite(Rational::zero())
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Ratio::Finite(r) => Some(r),
            Ratio::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Ratio::Infinite)
    }

    pub fn scale(&self, k: &Rational) -> Ratio {
        match self {
            Ratio::Finite(r) => Ratio::Finite(r * k),
            Ratio::Infinite => Ratio::Infinite,
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(r) => f.write_str(&format_rational(r)),
            Ratio::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubsetRecord {
    /// 1-based member indices, ascending.
    pub gamma: Vec<usize>,
    pub intersection_dim: ProjDim,
    pub ratio: Ratio,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeltaReport {
    pub delta: Ratio,
    /// 1-based indices of the smallest (then lexicographically first) maximizer.
    pub witness: Vec<usize>,
    pub variety_dim: usize,
    pub q: usize,
    /// True when `records` holds only the subsets the pruned search evaluated.
    pub pruned: bool,
    pub evaluated: usize,
    pub records: Vec<SubsetRecord>,
}

impl DeltaReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["gamma", "dim", "ratio"])
            .expect("in-memory write");
        for r in &self.records {
            let gamma = format!("{{{}}}", r.gamma.iter().join(","));
            w.write_record([gamma, r.intersection_dim.to_string(), r.ratio.to_string()])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DeltaOptions {
    /// Skip branches whose best achievable ratio cannot beat the running max.
    pub prune: bool,
    /// Evaluate subsets of one size on the rayon pool.
    pub parallel: bool,
    pub budget: Budget,
}

impl Default for DeltaOptions {
    fn default() -> Self {
        DeltaOptions {
            prune: true,
            parallel: true,
            budget: Budget::default(),
        }
    }
}

struct Node {
    gamma: Vec<usize>,
    gb: GroebnerBasis,
    dim: ProjDim,
}

fn ratio_for(size: usize, dim: ProjDim, dim_v: usize) -> Result<Ratio> {
    match dim {
        ProjDim::Empty => Ok(Ratio::zero()),
        ProjDim::Dim(c) if c > dim_v => Err(Error::Invariant(format!(
            "intersection dimension {c} exceeds variety dimension {dim_v}"
        ))),
        ProjDim::Dim(c) if c == dim_v => Ok(Ratio::Infinite),
        ProjDim::Dim(c) => Ok(Ratio::Finite(Rational::new(
            BigInt::from(size),
            BigInt::from(dim_v - c),
        ))),
    }
}

fn one_based(gamma: &[usize]) -> Vec<usize> {
    gamma.iter().map(|j| j + 1).collect()
}

fn with_gamma(err: Error, gamma: &[usize]) -> Error {
    match err {
        Error::BudgetExceeded(msg) => Error::BudgetExceeded(format!(
            "{msg} (subset {{{}}})",
            one_based(gamma).iter().join(",")
        )),
        other => other,
    }
}

fn map_maybe_par<T: Sync, U: Send>(
    items: &[T],
    parallel: bool,
    f: impl Fn(&T) -> Result<U> + Sync + Send,
) -> Result<Vec<U>> {
    if parallel {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

fn check_inputs(family: &PolyFamily, v: &ProjectiveVariety) -> Result<usize> {
    if family.num_vars() != v.num_vars() {
        return Err(Error::DimensionMismatch {
            expected: v.num_vars(),
            got: family.num_vars(),
        });
    }
    v.dim().value().ok_or(Error::EmptyVariety)
}

/// Exact distributive constant of `family` with respect to `v`.
pub fn distributive_constant(
    family: &PolyFamily,
    v: &ProjectiveVariety,
    opts: &DeltaOptions,
) -> Result<DeltaReport> {
    let dim_v = check_inputs(family, v)?;
    let q = family.len();
    let members: Vec<&Poly> = family.members().iter().map(|m| m.poly()).collect();

    let mut records = Vec::new();
    if opts.prune {
        let evaluate = |parent: Option<&Node>, j: usize| -> Result<Node> {
            let (base, parent_dim, mut gamma) = match parent {
                Some(p) => (p.gb.basis(), p.dim, p.gamma.clone()),
                None => (v.groebner().basis(), v.dim(), Vec::new()),
            };
            gamma.push(j);
            let gens: Vec<Poly> = base
                .iter()
                .cloned()
                .chain(std::iter::once(members[j].clone()))
                .collect();
            let gb = crate::ideal::groebner_basis(&Ideal::new(v.num_vars(), gens)?, &opts.budget)
                .map_err(|e| with_gamma(e, &gamma))?;
            let dim = basis_dim(&gb)?;
            if dim > parent_dim {
                return Err(Error::Invariant(format!(
                    "adding a member raised the intersection dimension at subset {:?}",
                    one_based(&gamma)
                )));
            }
            Ok(Node { gamma, gb, dim })
        };

        let singles: Vec<usize> = (0..q).collect();
        let mut frontier = map_maybe_par(&singles, opts.parallel, |&j| evaluate(None, j))?;
        let mut best = Ratio::zero();
        while !frontier.is_empty() {
            for node in &frontier {
                let r = ratio_for(node.gamma.len(), node.dim, dim_v)?;
                if r > best {
                    best = r.clone();
                }
                records.push(SubsetRecord {
                    gamma: one_based(&node.gamma),
                    intersection_dim: node.dim,
                    ratio: r,
                });
            }
            let mut expansions: Vec<(&Node, usize)> = Vec::new();
            for node in &frontier {
                let last = *node.gamma.last().expect("nonempty subset");
                let ProjDim::Dim(c) = node.dim else { continue };
                if best.is_infinite() || c >= dim_v || last + 1 >= q {
                    continue;
                }
                let reachable = node.gamma.len() + (q - 1 - last);
                let bound = Rational::new(BigInt::from(reachable), BigInt::from(dim_v - c));
                if Ratio::Finite(bound) <= best {
                    continue;
                }
                expansions.extend((last + 1..q).map(|j| (node, j)));
            }
            frontier = map_maybe_par(&expansions, opts.parallel, |(node, j)| {
                evaluate(Some(node), *j)
            })?;
        }
    } else {
        let subsets: Vec<Vec<usize>> = (1..=q).flat_map(|k| (0..q).combinations(k)).collect();
        records = map_maybe_par(&subsets, opts.parallel, |gamma| {
            let extra: Vec<&Poly> = gamma.iter().map(|&j| members[j]).collect();
            let dim = v
                .intersection_dim(&extra, &opts.budget)
                .map_err(|e| with_gamma(e, gamma))?;
            Ok(SubsetRecord {
                gamma: one_based(gamma),
                intersection_dim: dim,
                ratio: ratio_for(gamma.len(), dim, dim_v)?,
            })
        })?;
    }

    records.sort_by(|a, b| match a.gamma.len().cmp(&b.gamma.len()) {
        Ordering::Equal => a.gamma.cmp(&b.gamma),
        o => o,
    });
    let delta = records
        .iter()
        .map(|r| r.ratio.clone())
        .max()
        .expect("q >= 1");
    let witness = records
        .iter()
        .find(|r| r.ratio == delta)
        .expect("max is attained")
        .gamma
        .clone();
    Ok(DeltaReport {
        delta,
        witness,
        variety_dim: dim_v,
        q,
        pruned: opts.prune,
        evaluated: records.len(),
        records,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubvarietyBound {
    pub delta_sub: Ratio,
    pub delta_full: Ratio,
    /// `dim V - dim V' + 1`.
    pub factor: usize,
    pub bound: Ratio,
    pub holds: bool,
}

/// Compares the constant on a subvariety `sub ⊆ v` with
/// `(dim V - dim V' + 1)` times the constant on `v`.
pub fn check_subvariety_bound(
    family: &PolyFamily,
    v: &ProjectiveVariety,
    sub: &ProjectiveVariety,
    opts: &DeltaOptions,
) -> Result<SubvarietyBound> {
    let dim_v = check_inputs(family, v)?;
    let dim_sub = check_inputs(family, sub)?;
    if !v.contains_variety(sub) {
        return Err(Error::Precondition(
            "subvariety is not contained in the variety".into(),
        ));
    }
    for (j, q) in family.members().iter().enumerate() {
        if vanishes_on(q, sub, &opts.budget)? {
            return Err(Error::Precondition(format!(
                "member {} vanishes on the subvariety",
                j + 1
            )));
        }
    }
    let delta_full = distributive_constant(family, v, opts)?.delta;
    let delta_sub = distributive_constant(family, sub, opts)?.delta;
    let factor = dim_v - dim_sub + 1;
    let bound = delta_full.scale(&Rational::from_integer(BigInt::from(factor)));
    let holds = delta_sub <= bound;
    Ok(SubvarietyBound {
        delta_sub,
        delta_full,
        factor,
        bound,
        holds,
    })
}

/// Every `ell + 1` members have no common zero on `v`.
pub fn is_subgeneral_position(
    family: &PolyFamily,
    v: &ProjectiveVariety,
    ell: usize,
    budget: &Budget,
) -> Result<bool> {
    check_inputs(family, v)?;
    if family.len() <= ell {
        return Err(Error::Precondition(format!(
            "need more than {ell} members for {ell}-subgeneral position, have {}",
            family.len()
        )));
    }
    let members: Vec<&Poly> = family.members().iter().map(|m| m.poly()).collect();
    for subset in members.iter().copied().combinations(ell + 1) {
        if !v.intersection_dim(&subset, budget)?.is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubgeneralBound {
    pub delta: Ratio,
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub bound: Rational,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub holds: bool,
}

/// For a family in `ell`-subgeneral position, checks `1 <= Δ <= ell - dim V + 1`.
pub fn check_subgeneral_bound(
    family: &PolyFamily,
    v: &ProjectiveVariety,
    ell: usize,
    opts: &DeltaOptions,
) -> Result<SubgeneralBound> {
    if !is_subgeneral_position(family, v, ell, &opts.budget)? {
        return Err(Error::Precondition(format!(
            "family is not in {ell}-subgeneral position"
        )));
    }
    let dim_v = check_inputs(family, v)?;
    let delta = distributive_constant(family, v, opts)?.delta;
    let bound = Rational::from_integer(BigInt::from(ell as i64 - dim_v as i64 + 1));
    let lower_ok = delta >= Ratio::Finite(Rational::from_integer(1.into()));
    let upper_ok = delta <= Ratio::Finite(bound.clone());
    Ok(SubgeneralBound {
        delta,
        bound,
        lower_ok,
        upper_ok,
        holds: lower_ok && upper_ok,
    })
}
