//! Bounded-height searches over S-integer points.
//!
//! Points are enumerated one `O_S^*`-class at a time. A canonical
//! representative (see [`canonical_rep`]) is an integer vector whose gcd is
//! prime to `S`, so its S-height is simply `max |x_i|`; the enumeration walks
//! the shells `max |x_i| = 1, 2, ..., B` in lexicographic order inside each
//! shell.
//!
//! All verdicts are exact. Floating-point logarithms are only used as a
//! prefilter, and anything within the prefilter's margin is re-decided with
//! rational arithmetic.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::distributive::{distributive_constant, DeltaOptions, Ratio};
use crate::error::{Error, Result};
use crate::heights::{
    canonical_rep, ln_bigint, ln_rational, norm_at, poly_height_exact, proj_height_exact, s_height,
    strip_primes, to_rationals, weil_exact, PlaceSet,
};
use crate::ideal::ProjectiveVariety;
use crate::poly::{HomogeneousPoly, Poly, PolyFamily, Rational};
use crate::report::{
    format_point, ser_log, ser_opt_log, ser_rational, ser_rational_vec, ser_rational_vecs,
};

/// Constants of the inequality `0 < ∏_{v∈S} ‖F(x)‖_v <= c H_S(x)^λ` and the
/// search bound on `H_S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchParams {
    pub c: Rational,
    pub lambda: Rational,
    pub height_bound: Rational,
    pub s: PlaceSet,
}

impl SearchParams {
    pub fn new(c: Rational, lambda: Rational, height_bound: Rational, s: PlaceSet) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::Invalid("c must be positive".into()));
        }
        if height_bound < Rational::one() {
            return Err(Error::Invalid("height bound must be at least 1".into()));
        }
        Ok(SearchParams {
            c,
            lambda,
            height_bound,
            s,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    /// Upper bound on the number of enumerated points.
    pub max_points: u128,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_points: 2_000_000_000,
        }
    }
}

fn floor_bound(b: &Rational) -> Result<i64> {
    if b < &Rational::one() {
        return Ok(0);
    }
    b.floor()
        .to_integer()
        .to_i64()
        .filter(|v| *v < i64::MAX / 4)
        .ok_or_else(|| Error::Invalid("height bound too large".into()))
}

/// Number of points the enumeration visits up to `bound`, ignoring the gcd
/// filter: half of the nonzero vectors in `[-B, B]^n`.
fn point_estimate(ncoords: usize, bound: i64) -> u128 {
    let side = 2 * bound as u128 + 1;
    side.checked_pow(ncoords as u32)
        .map(|t| (t - 1) / 2)
        .unwrap_or(u128::MAX)
}

fn check_budget(ncoords: usize, bound: i64, limits: &SearchLimits) -> Result<()> {
    let est = point_estimate(ncoords, bound);
    if est > limits.max_points {
        return Err(Error::BudgetExceeded(format!(
            "enumeration would visit {est} points, limit is {}",
            limits.max_points
        )));
    }
    Ok(())
}

fn divisible_by_s_prime(w: &[i64], primes: &[u64]) -> bool {
    primes
        .iter()
        .any(|&p| w.iter().all(|&c| c.rem_euclid(p as i64) == 0))
}

/// Visits every canonical representative with `max |x_i| = h`, in
/// lexicographic order.
fn for_each_shell_point(
    h: i64,
    ncoords: usize,
    primes: &[u64],
    f: &mut dyn FnMut(&[i64]) -> Result<()>,
) -> Result<()> {
    fn rec(
        pos: usize,
        buf: &mut [i64],
        h: i64,
        seen_nonzero: bool,
        has_max: bool,
        primes: &[u64],
        f: &mut dyn FnMut(&[i64]) -> Result<()>,
    ) -> Result<()> {
        let n = buf.len();
        if pos == n {
            if seen_nonzero && has_max && !divisible_by_s_prime(buf, primes) {
                f(buf)?;
            }
            return Ok(());
        }
        let lo = if seen_nonzero { -h } else { 0 };
        if pos == n - 1 && !has_max {
            // the last coordinate has to reach the shell
            for v in [-h, h] {
                if v >= lo {
                    buf[pos] = v;
                    rec(pos + 1, buf, h, true, true, primes, f)?;
                }
            }
            return Ok(());
        }
        for v in lo..=h {
            buf[pos] = v;
            rec(
                pos + 1,
                buf,
                h,
                seen_nonzero || v != 0,
                has_max || v.abs() == h,
                primes,
                f,
            )?;
        }
        Ok(())
    }
    if ncoords == 0 || h < 1 {
        return Ok(());
    }
    let mut buf = vec![0i64; ncoords];
    rec(0, &mut buf, h, false, false, primes, f)
}

/// Stream of canonical representatives in increasing S-height, produced one
/// shell at a time.
pub struct SPointStream {
    ncoords: usize,
    primes: Vec<u64>,
    bound: i64,
    shell: i64,
    buffer: VecDeque<Vec<i64>>,
}

impl Iterator for SPointStream {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        while self.buffer.is_empty() && self.shell < self.bound {
            self.shell += 1;
            let buffer = &mut self.buffer;
            for_each_shell_point(self.shell, self.ncoords, &self.primes, &mut |w| {
                buffer.push_back(w.to_vec());
                Ok(())
            })
            .expect("collecting points cannot fail");
        }
        self.buffer.pop_front()
    }
}

/// One canonical representative per `O_S^*`-class of nonzero tuples in
/// `O_S^{ncoords}` with `H_S <= bound`.
pub fn enumerate_s_points(
    s: &PlaceSet,
    ncoords: usize,
    bound: &Rational,
    limits: &SearchLimits,
) -> Result<SPointStream> {
    if ncoords == 0 {
        return Err(Error::Invalid("need at least one coordinate".into()));
    }
    let b = floor_bound(bound)?;
    check_budget(ncoords, b, limits)?;
    Ok(SPointStream {
        ncoords,
        primes: s.primes().to_vec(),
        bound: b,
        shell: 0,
        buffer: VecDeque::new(),
    })
}

/// Visits every shell `1..=bound` on the rayon pool. `init` builds per-shell
/// state once; results keep shell order, then lexicographic order.
fn shells_par<C, T: Send>(
    bound: i64,
    ncoords: usize,
    primes: &[u64],
    init: impl Fn(i64) -> C + Sync + Send,
    visit: impl Fn(&C, i64, &[i64]) -> Result<Option<T>> + Sync + Send,
) -> Result<Vec<T>> {
    let per_shell: Vec<Vec<T>> = (1..=bound)
        .into_par_iter()
        .map(|h| {
            let ctx = init(h);
            let mut out = Vec::new();
            for_each_shell_point(h, ncoords, primes, &mut |w| {
                if let Some(t) = visit(&ctx, h, w)? {
                    out.push(t);
                }
                Ok(())
            })?;
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(per_shell.into_iter().flatten().collect())
}

fn ints_to_rationals(w: &[i64]) -> Vec<Rational> {
    w.iter()
        .map(|&c| Rational::from_integer(BigInt::from(c)))
        .collect()
}

fn ints_to_big(w: &[i64]) -> Vec<BigInt> {
    w.iter().map(|&c| BigInt::from(c)).collect()
}

/// A form with integer coefficients `D * F`, evaluated in checked `i128`.
struct FastForm {
    terms: Vec<(Vec<u32>, i128)>,
    degree: usize,
    denom: BigInt,
}

const TABLE_VARS: usize = 4;
const TABLE_DEG: usize = 8;

impl FastForm {
    fn new(p: &Poly) -> Option<FastForm> {
        let denom = p.denominator_lcm();
        let terms = p
            .terms()
            .map(|(m, c)| Some((m.exponents().to_vec(), (c * &denom).to_integer().to_i128()?)))
            .collect::<Option<Vec<_>>>()?;
        let degree = p.total_degree().unwrap_or(0) as usize;
        Some(FastForm {
            terms,
            degree,
            denom,
        })
    }

    fn eval(&self, x: &[i64]) -> Option<i128> {
        if x.len() <= TABLE_VARS && self.degree < TABLE_DEG {
            if let Some(v) = self.eval_table(x) {
                return Some(v);
            }
        }
        self.eval_direct(x)
    }

    /// Powers are shared across terms; `None` on any overflow.
    fn eval_table(&self, x: &[i64]) -> Option<i128> {
        let mut pw = [[1i128; TABLE_DEG]; TABLE_VARS];
        for (row, &xi) in pw.iter_mut().zip(x) {
            for e in 1..=self.degree {
                row[e] = row[e - 1].checked_mul(xi as i128)?;
            }
        }
        let mut acc: i128 = 0;
        for (exps, c) in &self.terms {
            let mut t = *c;
            for (row, &e) in pw.iter().zip(exps) {
                if e > 0 {
                    t = t.checked_mul(row[e as usize])?;
                }
            }
            acc = acc.checked_add(t)?;
        }
        Some(acc)
    }

    fn eval_direct(&self, x: &[i64]) -> Option<i128> {
        let mut acc: i128 = 0;
        for (exps, c) in &self.terms {
            let mut t = *c;
            for (&xi, &e) in x.iter().zip(exps) {
                if e > 0 {
                    t = t.checked_mul((xi as i128).checked_pow(e)?)?;
                }
            }
            acc = acc.checked_add(t)?;
        }
        Some(acc)
    }
}

fn strip_u128(mut n: u128, primes: &[u64]) -> u128 {
    for &p in primes {
        let p = p as u128;
        while n.is_multiple_of(p) {
            n /= p;
        }
    }
    n
}

fn rational_pow(base: &Rational, e: &BigInt) -> Result<Rational> {
    let k = e
        .abs()
        .to_usize()
        .filter(|k| *k <= 1 << 20)
        .ok_or_else(|| Error::Invalid("exponent too large for exact comparison".into()))?;
    let p = num_traits::pow(base.clone(), k);
    Ok(if e.is_negative() { p.recip() } else { p })
}

/// Decides `l <= c * h^λ` for positive `l`, `c`, `h` exactly, by raising both
/// sides to the denominator of `λ`.
pub fn le_c_pow(l: &Rational, c: &Rational, h: &Rational, lambda: &Rational) -> Result<bool> {
    let a = lambda.numer();
    let b = lambda.denom();
    let lhs = rational_pow(&(l / c), b)?;
    let rhs = rational_pow(h, a)?;
    Ok(lhs <= rhs)
}

fn require_s_integral(x: &[Rational], s: &PlaceSet) -> Result<()> {
    for c in x {
        if !crate::heights::is_s_integer(c, s) {
            return Err(Error::NotSInteger(crate::poly::format_rational(c)));
        }
    }
    Ok(())
}

/// `∏_{v∈S} ‖y‖_v` for a nonzero rational `y`.
pub fn s_norm_product(y: &Rational, s: &PlaceSet) -> Result<Rational> {
    let mut acc = Rational::one();
    for v in s.places() {
        acc *= norm_at(y, v)?.into_exact();
    }
    Ok(acc)
}

/// Exact test of `0 < ∏_{v∈S} ‖F(x)‖_v <= c H_S(x)^λ`.
pub fn check_inequality(
    f: &HomogeneousPoly,
    x: &[Rational],
    params: &SearchParams,
) -> Result<bool> {
    require_s_integral(x, &params.s)?;
    let fx = f.evaluate(x)?;
    if fx.is_zero() {
        return Ok(false);
    }
    let l = s_norm_product(&fx, &params.s)?;
    let h = s_height(x, &params.s)?.into_exact();
    le_c_pow(&l, &params.c, &h, &params.lambda)
}

/// An `O_S^*`-proportionality class of solutions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolutionClass {
    #[serde(serialize_with = "ser_big_vec")]
    pub representative: Vec<BigInt>,
    /// `H_S` of the class (equal for every member).
    #[serde(serialize_with = "ser_big")]
    pub s_height: BigInt,
    #[serde(serialize_with = "ser_rational_vecs")]
    pub members_found: Vec<Vec<Rational>>,
    /// `∏_{v∈S} ‖F(x)‖_v` at the representative.
    #[serde(serialize_with = "ser_rational")]
    pub fs_value: Rational,
}

fn ser_big<S: serde::Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn ser_big_vec<S: serde::Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|c| c.to_string()))
}

struct InequalityKernel<'a> {
    f: &'a HomogeneousPoly,
    fast: Option<FastForm>,
    params: &'a SearchParams,
    /// `c * nonS(D)`: with `n = nonS(|D F(x)|)` the test reads `n <= k h^λ`.
    k: Rational,
    k_f: f64,
    lambda_f: f64,
}

impl<'a> InequalityKernel<'a> {
    fn new(f: &'a HomogeneousPoly, params: &'a SearchParams) -> Self {
        let fast = FastForm::new(f.poly());
        let denom = fast
            .as_ref()
            .map(|ff| ff.denom.clone())
            .unwrap_or_else(BigInt::one);
        let k = &params.c * Rational::from_integer(strip_primes(&denom, &params.s));
        let k_f = k.to_f64().unwrap_or(f64::NAN);
        let lambda_f = params.lambda.to_f64().unwrap_or(f64::NAN);
        InequalityKernel {
            f,
            fast,
            params,
            k,
            k_f,
            lambda_f,
        }
    }

    /// `k h^λ` in floating point, or NaN when it is out of range.
    fn threshold(&self, h: i64) -> f64 {
        let t = self.k_f * (h as f64).powf(self.lambda_f);
        if t.is_finite() && t > 0.0 {
            t
        } else {
            f64::NAN
        }
    }

    /// `Some(fs_value)` when the canonical point `w` (with `H_S = h`) satisfies
    /// the inequality.
    fn accept(&self, w: &[i64], h: i64, threshold: f64) -> Result<Option<Rational>> {
        if let Some(ff) = &self.fast {
            if let Some(g) = ff.eval(w) {
                if g == 0 {
                    return Ok(None);
                }
                let n = strip_u128(g.unsigned_abs(), self.params.s.primes());
                let nf = n as f64;
                // relative error of nf and threshold is far below 1e-9
                if nf > threshold * (1.0 + 1e-9) {
                    return Ok(None);
                }
                let fs = Rational::new(BigInt::from(n), strip_primes(&ff.denom, &self.params.s));
                if nf < threshold * (1.0 - 1e-9) {
                    return Ok(Some(fs));
                }
                let n_big = Rational::from_integer(BigInt::from(n));
                let hit = le_c_pow(
                    &n_big,
                    &self.k,
                    &Rational::from_integer(BigInt::from(h)),
                    &self.params.lambda,
                )?;
                return Ok(hit.then_some(fs));
            }
        }
        let x = ints_to_rationals(w);
        let fx = self.f.evaluate(&x)?;
        if fx.is_zero() {
            return Ok(None);
        }
        let l = s_norm_product(&fx, &self.params.s)?;
        let hit = le_c_pow(
            &l,
            &self.params.c,
            &Rational::from_integer(BigInt::from(h)),
            &self.params.lambda,
        )?;
        Ok(hit.then_some(l))
    }
}

/// Every `O_S^*`-class with `H_S <= B` whose points satisfy the inequality,
/// ordered by S-height, then lexicographically.
pub fn search_solutions(
    f: &HomogeneousPoly,
    params: &SearchParams,
    limits: &SearchLimits,
) -> Result<Vec<SolutionClass>> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let n = f.num_vars();
    let bound = floor_bound(&params.height_bound)?;
    check_budget(n, bound, limits)?;
    let kernel = InequalityKernel::new(f, params);
    shells_par(
        bound,
        n,
        params.s.primes(),
        |h| kernel.threshold(h),
        |thr, h, w| {
            Ok(kernel.accept(w, h, *thr)?.map(|fs_value| SolutionClass {
                representative: ints_to_big(w),
                s_height: BigInt::from(h),
                members_found: vec![ints_to_rationals(w)],
                fs_value,
            }))
        },
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabilityRung {
    #[serde(serialize_with = "ser_rational")]
    pub bound: Rational,
    pub classes: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabilityReport {
    pub rungs: Vec<StabilityRung>,
    /// The last two rungs have equal counts.
    pub stable: bool,
}

/// Class counts along an increasing ladder of height bounds. One search runs
/// at the top rung; lower rungs are read off by S-height.
pub fn growth_stability(
    f: &HomogeneousPoly,
    params: &SearchParams,
    ladder: &[Rational],
    limits: &SearchLimits,
) -> Result<StabilityReport> {
    if ladder.is_empty() || ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition(
            "bound ladder must be nonempty and strictly increasing".into(),
        ));
    }
    let top = SearchParams {
        height_bound: ladder.last().expect("nonempty").clone(),
        ..params.clone()
    };
    let classes = search_solutions(f, &top, limits)?;
    let rungs: Vec<StabilityRung> = ladder
        .iter()
        .map(|b| StabilityRung {
            bound: b.clone(),
            classes: classes
                .iter()
                .filter(|c| Rational::from_integer(c.s_height.clone()) <= *b)
                .count(),
        })
        .collect();
    let stable =
        rungs.len() >= 2 && rungs[rungs.len() - 1].classes == rungs[rungs.len() - 2].classes;
    Ok(StabilityReport { rungs, stable })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquationReport {
    pub form_degree: u32,
    pub rhs_degree: u32,
    /// Every solution found, grouped by class in enumeration order.
    #[serde(serialize_with = "ser_rational_vecs")]
    pub solutions: Vec<Vec<Rational>>,
    pub classes: Vec<SolutionClass>,
}

/// S-unit roots of `Σ_k coeffs[k] η^k`.
fn s_unit_roots(coeffs: &[Rational], s: &PlaceSet) -> Result<Vec<Rational>> {
    let nonzero: Vec<usize> = (0..coeffs.len())
        .filter(|&k| !coeffs[k].is_zero())
        .collect();
    let candidates_all = || -> Vec<Rational> { vec![Rational::one(), -Rational::one()] };
    if nonzero.is_empty() {
        if !s.primes().is_empty() {
            return Err(Error::Invalid(
                "every S-unit multiple of a point solves the equation; the solution set is infinite".into(),
            ));
        }
        return Ok(candidates_all());
    }
    let lo = nonzero[0];
    let hi = *nonzero.last().expect("nonempty");
    if lo == hi {
        return Ok(Vec::new());
    }
    let l = coeffs
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let lead = (&coeffs[hi] * &l).to_integer();
    let trail = (&coeffs[lo] * &l).to_integer();
    // η = ±∏ p^e with -ord_p(lead) <= e <= ord_p(trail)
    let mut magnitudes = vec![Rational::one()];
    for &p in s.primes() {
        let lo_e = -(crate::heights::ord_p(&lead, p) as i64);
        let hi_e = crate::heights::ord_p(&trail, p) as i64;
        let pr = Rational::from_integer(BigInt::from(p));
        let mut next = Vec::new();
        for m in &magnitudes {
            for e in lo_e..=hi_e {
                next.push(m * rational_pow(&pr, &BigInt::from(e))?);
            }
        }
        magnitudes = next;
    }
    let eval = |eta: &Rational| {
        coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * eta + c)
    };
    let mut roots: Vec<Rational> = magnitudes
        .into_iter()
        .flat_map(|m| [m.clone(), -m])
        .filter(|eta| eval(eta).is_zero())
        .collect();
    roots.sort();
    Ok(roots)
}

/// Coefficients of `η ↦ F(η w) - G(η w)`, indexed by the power of `η`.
fn eta_polynomial(
    f: &HomogeneousPoly,
    fw: &Rational,
    rhs: &Poly,
    x: &[Rational],
) -> Result<Vec<Rational>> {
    let top = rhs.total_degree().unwrap_or(0).max(f.degree()) as usize;
    let mut coeffs = vec![Rational::zero(); top + 1];
    coeffs[f.degree() as usize] += fw;
    for k in 0..=rhs.total_degree().unwrap_or(0) {
        let comp = rhs.component(k);
        if !comp.is_zero() {
            coeffs[k as usize] -= comp.evaluate(x)?;
        }
    }
    Ok(coeffs)
}

/// All S-integer solutions of `F(x) = G(x) != 0` with `H_S(x) <= B`.
///
/// Solutions are not closed under `O_S^*` scaling, so each class is solved
/// for the unit multiples that work; classes only group the report.
pub fn equation_search(
    f: &HomogeneousPoly,
    rhs: &Poly,
    s: &PlaceSet,
    bound: &Rational,
    limits: &SearchLimits,
) -> Result<EquationReport> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if rhs.is_zero() {
        return Err(Error::Invalid("right-hand side must be nonzero".into()));
    }
    let n = f.num_vars();
    if rhs.num_vars() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rhs.num_vars(),
        });
    }
    let b = floor_bound(bound)?;
    check_budget(n, b, limits)?;
    let fast_f = FastForm::new(f.poly());
    let fast_g = if rhs.is_homogeneous() {
        FastForm::new(rhs)
    } else {
        None
    };
    let primes = s.primes();
    let nons_df = fast_f.as_ref().map(|ff| strip_primes(&ff.denom, s));
    let nons_dg = fast_g.as_ref().map(|fg| strip_primes(&fg.denom, s));

    let classes = shells_par(
        b,
        n,
        primes,
        |_| (),
        |_, h, w| {
            // G(ηw)/F(ηw) is an S-unit multiple of G(w)/F(w) when G is homogeneous,
            // so that ratio must itself be an S-unit
            if let (Some(ff), Some(fg), Some(df), Some(dg)) = (&fast_f, &fast_g, &nons_df, &nons_dg)
            {
                if let (Some(fv), Some(gv)) = (ff.eval(w), fg.eval(w)) {
                    if fv == 0 || gv == 0 {
                        return Ok(None);
                    }
                    let lhs = BigInt::from(strip_u128(gv.unsigned_abs(), primes)) * df;
                    let rhs_ = BigInt::from(strip_u128(fv.unsigned_abs(), primes)) * dg;
                    if lhs != rhs_ {
                        return Ok(None);
                    }
                }
            }
            let x = ints_to_rationals(w);
            let fw = f.evaluate(&x)?;
            if fw.is_zero() {
                return Ok(None);
            }
            let coeffs = eta_polynomial(f, &fw, rhs, &x)?;
            let roots = s_unit_roots(&coeffs, s)?;
            if roots.is_empty() {
                return Ok(None);
            }
            let members: Vec<Vec<Rational>> = roots
                .iter()
                .map(|eta| x.iter().map(|c| c * eta).collect())
                .collect();
            Ok(Some(SolutionClass {
                representative: ints_to_big(w),
                s_height: BigInt::from(h),
                members_found: members,
                fs_value: s_norm_product(&fw, s)?,
            }))
        },
    )?;
    let solutions = classes
        .iter()
        .flat_map(|c| c.members_found.iter().cloned())
        .collect();
    Ok(EquationReport {
        form_degree: f.degree(),
        rhs_degree: rhs.total_degree().unwrap_or(0),
        solutions,
        classes,
    })
}

/// Outcome of comparing a family against the degree hypothesis
/// `ℓ > d Δ (m/2 + 1)^2` and `λ < ℓ - d Δ (m/2 + 1)^2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HypothesisVerdict {
    pub ell: u32,
    pub d: u32,
    pub q: usize,
    pub delta: Ratio,
    pub m: usize,
    #[serde(serialize_with = "ser_rational")]
    pub lambda: Rational,
    /// `d Δ (m + 2)^2 / 4`.
    pub bound: Ratio,
    pub degree_ok: bool,
    pub lambda_ok: bool,
}

/// The verdict for given numerical data; `Δ = ∞` fails both checks.
pub fn verdict_from(
    ell: u32,
    d: u32,
    q: usize,
    delta: Ratio,
    m: usize,
    lambda: Rational,
) -> HypothesisVerdict {
    let factor = Rational::new(
        BigInt::from(d) * BigInt::from(m + 2).pow(2),
        BigInt::from(4),
    );
    let bound = delta.scale(&factor);
    let ell_q = Rational::from_integer(BigInt::from(ell));
    let (degree_ok, lambda_ok) = match bound.finite() {
        Some(b) => (&ell_q > b, lambda < (&ell_q - b)),
        None => (false, false),
    };
    HypothesisVerdict {
        ell,
        d,
        q,
        delta,
        m,
        lambda,
        bound,
        degree_ok,
        lambda_ok,
    }
}

pub fn hypothesis_verdict(
    family: &PolyFamily,
    v: &ProjectiveVariety,
    lambda: &Rational,
    opts: &DeltaOptions,
) -> Result<HypothesisVerdict> {
    let report = distributive_constant(family, v, opts)?;
    Ok(verdict_from(
        family.total_degree(),
        family.max_degree(),
        family.len(),
        report.delta,
        report.variety_dim,
        lambda.clone(),
    ))
}

/// Which coefficient multiplies `h(x)` on the right-hand side of an audit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditMode {
    /// `Δ (m + 1) + ε`, expected to hold off a proper Zariski-closed subset.
    Linear,
    /// `Δ (m/2 + 1)^2 + ε`, expected to hold for all but finitely many points.
    Quadratic,
}

impl AuditMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(AuditMode::Linear),
            "quadratic" => Ok(AuditMode::Quadratic),
            other => Err(Error::Invalid(format!("unknown audit mode {other:?}"))),
        }
    }

    /// Factor multiplying `Δ`, as a function of `m = dim V`.
    pub fn dimension_factor(&self, m: usize) -> Rational {
        match self {
            AuditMode::Linear => Rational::from_integer(BigInt::from(m + 1)),
            AuditMode::Quadratic => Rational::new(BigInt::from(m + 2).pow(2), BigInt::from(4)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violator {
    #[serde(serialize_with = "ser_big_vec")]
    pub point: Vec<BigInt>,
    #[serde(serialize_with = "ser_big")]
    pub s_height: BigInt,
    /// `Σ_{v∈S} Σ_j λ_{Q_j,v}(x) / deg Q_j`.
    #[serde(serialize_with = "ser_log")]
    pub lhs: f64,
    /// coefficient times `h(x)`.
    #[serde(serialize_with = "ser_log")]
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditRung {
    #[serde(serialize_with = "ser_rational")]
    pub bound: Rational,
    pub points_checked: usize,
    pub violators: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub mode: AuditMode,
    #[serde(serialize_with = "ser_rational")]
    pub epsilon: Rational,
    pub delta: Ratio,
    pub m: usize,
    /// Right-hand side coefficient of `h(x)`.
    pub coefficient: Ratio,
    pub points_checked: usize,
    pub points_skipped: usize,
    pub rungs: Vec<AuditRung>,
    /// Violators at the top rung, in enumeration order.
    pub violators: Vec<Violator>,
    /// The violator sets of the top two rungs coincide.
    pub stabilized: bool,
}

/// Exact per-point evaluation used by the audit.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditPoint {
    /// `∏_j (∏_{v∈S} weil)^{D / d_j}` with `D = lcm(d_j)`.
    pub lhs_pow: Rational,
    pub lcm_degree: u32,
    pub height: BigInt,
    pub lhs_log: f64,
}

/// Evaluates the audit's left-hand side at `x`; `None` if `x` lies on some
/// member's zero set.
pub fn audit_point(
    family: &PolyFamily,
    s: &PlaceSet,
    x: &[Rational],
) -> Result<Option<AuditPoint>> {
    let lcm_degree = family
        .degrees()
        .into_iter()
        .fold(1u32, |acc, d| acc.lcm(&d.max(1)));
    let mut lhs_pow = Rational::one();
    let mut lhs_log = 0.0;
    for q in family.members() {
        if q.evaluate(x)?.is_zero() {
            return Ok(None);
        }
        let mut w = Rational::one();
        for v in s.places() {
            w *= weil_exact(q, v, x)?;
        }
        let d = q.degree().max(1);
        lhs_log += ln_rational(&w) / d as f64;
        lhs_pow *= num_traits::pow(w, (lcm_degree / d) as usize);
    }
    Ok(Some(AuditPoint {
        lhs_pow,
        lcm_degree,
        height: proj_height_exact(x)?,
        lhs_log,
    }))
}

/// Whether the audit inequality `lhs <= coefficient * h(x)` fails, decided
/// exactly as `lhs_pow^b > H^{a D}` for `coefficient = a/b`.
pub fn audit_violates(p: &AuditPoint, coefficient: &Rational) -> Result<bool> {
    let rhs_log = coefficient.to_f64().unwrap_or(f64::NAN) * ln_bigint(&p.height);
    let margin = 1e-9 * (1.0 + p.lhs_log.abs() + rhs_log.abs());
    if p.lhs_log.is_finite() && rhs_log.is_finite() {
        if p.lhs_log > rhs_log + margin {
            return Ok(true);
        }
        if p.lhs_log < rhs_log - margin {
            return Ok(false);
        }
    }
    let a = coefficient.numer() * BigInt::from(p.lcm_degree);
    let b = coefficient.denom();
    let lhs = rational_pow(&p.lhs_pow, b)?;
    let rhs = rational_pow(&Rational::from_integer(p.height.clone()), &a)?;
    Ok(lhs > rhs)
}

enum FastLhs {
    OnZeroSet,
    Value(f64),
    Overflow,
}

/// Floating-point audit left-hand side at integer points, with member values
/// in `i128`. Weil functions are unchanged by scaling a form, so each member
/// is used with integer coefficients.
struct FastAudit {
    /// form, degree, `ln ‖Q‖_∞`, `min ord_p` of the coefficients per prime
    members: Vec<(FastForm, u32, f64, Vec<u32>)>,
    primes: Vec<u64>,
    ln_primes: Vec<f64>,
}

fn ord_i128(mut n: i128, p: u64) -> u32 {
    let p = p as i128;
    let mut e = 0;
    while n != 0 && n % p == 0 {
        n /= p;
        e += 1;
    }
    e
}

impl FastAudit {
    fn new(family: &PolyFamily, s: &PlaceSet) -> Option<FastAudit> {
        let primes = s.primes().to_vec();
        let mut members = Vec::with_capacity(family.len());
        for q in family.members() {
            let ff = FastForm::new(q.poly())?;
            let sup = ff.terms.iter().map(|(_, c)| c.unsigned_abs()).max()?;
            let min_ord = primes
                .iter()
                .map(|&p| {
                    ff.terms
                        .iter()
                        .map(|(_, c)| ord_i128(*c, p))
                        .min()
                        .unwrap_or(0)
                })
                .collect();
            members.push((ff, q.degree().max(1), (sup as f64).ln(), min_ord));
        }
        let ln_primes = primes.iter().map(|&p| (p as f64).ln()).collect();
        Some(FastAudit {
            members,
            primes,
            ln_primes,
        })
    }

    fn lhs(&self, w: &[i64]) -> FastLhs {
        let sup = w.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
        let ln_sup = (sup as f64).ln();
        let w_ord: Vec<u32> = self
            .primes
            .iter()
            .map(|&p| {
                w.iter()
                    .filter(|&&c| c != 0)
                    .map(|&c| ord_i128(c as i128, p))
                    .min()
                    .unwrap_or(0)
            })
            .collect();
        let mut total = 0.0;
        for (ff, d, ln_coef, coef_ord) in &self.members {
            let Some(g) = ff.eval(w) else {
                return FastLhs::Overflow;
            };
            if g == 0 {
                return FastLhs::OnZeroSet;
            }
            let mut lam = *d as f64 * ln_sup + ln_coef - (g.unsigned_abs() as f64).ln();
            for (k, &p) in self.primes.iter().enumerate() {
                let e = ord_i128(g, p) as f64 - *d as f64 * w_ord[k] as f64 - coef_ord[k] as f64;
                lam += e * self.ln_primes[k];
            }
            total += lam / *d as f64;
        }
        FastLhs::Value(total)
    }
}

/// `log H(w)` for an integer vector: the sup norm over the content.
fn ln_height_i64(w: &[i64]) -> f64 {
    let g = w.iter().fold(0u64, |acc, c| acc.gcd(&c.unsigned_abs()));
    let sup = w.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
    ((sup / g.max(1)) as f64).ln()
}

/// Checks the subspace-type inequality at every enumerated point of `v` off
/// the members' zero sets, recording violators per rung of `ladder`.
#[allow(clippy::too_many_arguments)]
pub fn subspace_audit(
    family: &PolyFamily,
    v: &ProjectiveVariety,
    s: &PlaceSet,
    epsilon: &Rational,
    mode: AuditMode,
    ladder: &[Rational],
    opts: &DeltaOptions,
    limits: &SearchLimits,
) -> Result<AuditReport> {
    if !epsilon.is_positive() {
        return Err(Error::Invalid("epsilon must be positive".into()));
    }
    if ladder.is_empty() || ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition(
            "bound ladder must be nonempty and strictly increasing".into(),
        ));
    }
    let delta_report = distributive_constant(family, v, opts)?;
    let m = delta_report.variety_dim;
    let coefficient = match delta_report.delta.scale(&mode.dimension_factor(m)) {
        Ratio::Finite(r) => Ratio::Finite(r + epsilon),
        Ratio::Infinite => Ratio::Infinite,
    };
    let n = family.num_vars();
    let top = floor_bound(ladder.last().expect("nonempty"))?;
    check_budget(n, top, limits)?;

    enum Outcome {
        Skipped,
        Checked(i64, Option<Violator>),
    }
    let fast = FastAudit::new(family, s);
    let coefficient_f = coefficient
        .finite()
        .and_then(|c| c.to_f64())
        .unwrap_or(f64::INFINITY);
    let outcomes = shells_par(
        top,
        n,
        s.primes(),
        |_| (),
        |_, h, w| {
            if !v.is_full_space() && !v.contains_point(&ints_to_rationals(w))? {
                return Ok(None);
            }
            let violator = |lhs: f64, rhs: f64| Violator {
                point: ints_to_big(w),
                s_height: BigInt::from(h),
                lhs,
                rhs,
            };
            if let Some(fast) = &fast {
                match fast.lhs(w) {
                    FastLhs::OnZeroSet => return Ok(Some(Outcome::Skipped)),
                    FastLhs::Value(lhs) => {
                        let rhs = coefficient_f * ln_height_i64(w);
                        let margin = 1e-9 * (1.0 + lhs.abs() + rhs.abs());
                        if coefficient.is_infinite() || lhs < rhs - margin {
                            return Ok(Some(Outcome::Checked(h, None)));
                        }
                        if lhs > rhs + margin {
                            return Ok(Some(Outcome::Checked(h, Some(violator(lhs, rhs)))));
                        }
                    }
                    FastLhs::Overflow => {}
                }
            }
            let x = ints_to_rationals(w);
            let Some(p) = audit_point(family, s, &x)? else {
                return Ok(Some(Outcome::Skipped));
            };
            let violates = match &coefficient {
                Ratio::Infinite => false,
                Ratio::Finite(c) => audit_violates(&p, c)?,
            };
            let violator =
                violates.then(|| violator(p.lhs_log, coefficient_f * ln_bigint(&p.height)));
            Ok(Some(Outcome::Checked(h, violator)))
        },
    )?;

    let mut checked_heights = Vec::new();
    let mut violators = Vec::new();
    let mut skipped = 0;
    for o in outcomes {
        match o {
            Outcome::Skipped => skipped += 1,
            Outcome::Checked(h, viol) => {
                checked_heights.push(h);
                violators.extend(viol);
            }
        }
    }
    let rungs: Vec<AuditRung> = ladder
        .iter()
        .map(|b| {
            let within = |h: i64| Rational::from_integer(BigInt::from(h)) <= *b;
            AuditRung {
                bound: b.clone(),
                points_checked: checked_heights.iter().filter(|&&h| within(h)).count(),
                violators: violators
                    .iter()
                    .filter(|vi| Rational::from_integer(vi.s_height.clone()) <= *b)
                    .count(),
            }
        })
        .collect();
    let stabilized =
        rungs.len() >= 2 && rungs[rungs.len() - 1].violators == rungs[rungs.len() - 2].violators;
    Ok(AuditReport {
        mode,
        epsilon: epsilon.clone(),
        delta: delta_report.delta,
        m,
        coefficient,
        points_checked: checked_heights.len(),
        points_skipped: skipped,
        rungs,
        violators,
        stabilized,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Decreasing,
    Increasing,
    Constant,
    Mixed,
    Insufficient,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LittleORow {
    pub form: String,
    #[serde(serialize_with = "ser_rational_vec")]
    pub point: Vec<Rational>,
    #[serde(serialize_with = "ser_log")]
    pub form_height: f64,
    #[serde(serialize_with = "ser_opt_log")]
    pub point_height: Option<f64>,
    /// `h(F) / h(x)`.
    #[serde(serialize_with = "ser_opt_log")]
    pub ratio: Option<f64>,
    /// `log ∏_{v∈S} ‖F‖_v / log H_S(x)`, when a place set is given.
    #[serde(serialize_with = "ser_opt_log")]
    pub s_ratio: Option<f64>,
    pub rejected: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LittleOReport {
    pub rows: Vec<LittleORow>,
    pub trend: Trend,
}

fn trend_of(values: &[f64]) -> Trend {
    if values.len() < 2 {
        return Trend::Insufficient;
    }
    let tol = |a: f64, b: f64| 1e-12 * (1.0 + a.abs().max(b.abs()));
    let pairs: Vec<(f64, f64)> = values.windows(2).map(|w| (w[0], w[1])).collect();
    if pairs.iter().all(|&(a, b)| (a - b).abs() <= tol(a, b)) {
        Trend::Constant
    } else if pairs.iter().all(|&(a, b)| b < a - tol(a, b)) {
        Trend::Decreasing
    } else if pairs.iter().all(|&(a, b)| b > a + tol(a, b)) {
        Trend::Increasing
    } else {
        Trend::Mixed
    }
}

/// Tabulates `h(F_n) / h(x_n)` for a sequence of pairs. Logarithms are
/// double precision (relative error about 1e-15); no limit is asserted.
pub fn little_o_report(
    pairs: &[(HomogeneousPoly, Vec<Rational>)],
    s: Option<&PlaceSet>,
) -> Result<LittleOReport> {
    let mut rows = Vec::with_capacity(pairs.len());
    for (f, x) in pairs {
        let form_height = ln_rational(&poly_height_exact(f)?);
        let hx = proj_height_exact(x)?;
        let point_height = ln_bigint(&hx);
        let s_ratio = match s {
            Some(s) => {
                let mut fs = Rational::one();
                for v in s.places() {
                    fs *= crate::heights::poly_norm_at(f, v)?.into_exact();
                }
                let hs = s_height(x, s)?;
                (!hs.exact().is_one()).then(|| ln_rational(&fs) / hs.ln())
            }
            None => None,
        };
        let (ratio, rejected) = if hx.is_one() {
            (None, Some(format!("h(x) = 0 at {}", format_point(x))))
        } else {
            (Some(form_height / point_height), None)
        };
        rows.push(LittleORow {
            form: f.to_string(),
            point: x.clone(),
            form_height,
            point_height: Some(point_height),
            ratio,
            s_ratio,
            rejected,
        });
    }
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    Ok(LittleOReport {
        trend: trend_of(&ratios),
        rows,
    })
}

/// Canonical representative as exact rationals (convenience for callers
/// holding arbitrary S-integer tuples).
pub fn canonical_point(x: &[Rational], s: &PlaceSet) -> Result<Vec<Rational>> {
    Ok(to_rationals(&canonical_rep(x, s)?))
}
