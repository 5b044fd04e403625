//! JSON problem specifications, command drivers and report emission.
//!
//! Every command returns a [`Payload`]: the JSON document (resolved spec plus
//! result) and, where a table makes sense, a CSV rendering. Payloads carry no
//! timestamps or timings; those go in a separate run metadata file.

use std::fs;
use std::path::Path;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::distributive::{distributive_constant, DeltaOptions};
use crate::error::{Error, Result};
use crate::heights::{
    canonical_rep, ln_rational, poly_height_exact, poly_norm_at, proj_height_exact, s_height,
    weil_exact, PlaceSet,
};
use crate::ideal::{Budget, ProjectiveVariety};
use crate::poly::{format_rational, parse_rational, HomogeneousPoly, Poly, PolyFamily, Rational};
use crate::report::{format_log, format_point, ser_log, ser_rational, ser_rational_vec};
use crate::search::{
    equation_search, growth_stability, hypothesis_verdict, little_o_report, search_solutions,
    subspace_audit, verdict_from, AuditMode, AuditReport, EquationReport, HypothesisVerdict,
    LittleOReport, SearchLimits, SearchParams, SolutionClass, StabilityReport,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verb {
    Delta,
    Verify,
    Search,
    Equation,
    Audit,
    Heights,
    Stability,
}

impl Verb {
    pub fn parse(s: &str) -> Result<Verb> {
        Ok(match s {
            "delta" => Verb::Delta,
            "verify" => Verb::Verify,
            "search" => Verb::Search,
            "equation" => Verb::Equation,
            "audit" => Verb::Audit,
            "heights" => Verb::Heights,
            "stability" => Verb::Stability,
            other => return Err(Error::Invalid(format!("unknown command {other:?}"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verb::Delta => "delta",
            Verb::Verify => "verify",
            Verb::Search => "search",
            Verb::Equation => "equation",
            Verb::Audit => "audit",
            Verb::Heights => "heights",
            Verb::Stability => "stability",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub form: String,
    pub point: Vec<String>,
}

/// A problem specification. Rationals are strings (`"3/2"`). Omitted
/// `variety` means the whole projective space; omitted `S` means `{∞}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_vars: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub family: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variety: Option<Vec<String>>,
    #[serde(
        default,
        rename = "S",
        alias = "primes",
        skip_serializing_if = "Option::is_none"
    )]
    pub s: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<String>,
    /// Height bounds; searches use the largest, ladders use all of them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<String>>,
    /// Audit mode: `linear`, `quadratic` or `both`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prune: Option<bool>,
    /// Right-hand side of `F(x) = G(x)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<String>,
    /// The form `F`; defaults to the product of the family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<PairSpec>>,
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<ProblemSpec> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("problem spec: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}

fn field_err(field: &str, e: Error) -> Error {
    match e {
        Error::Syntax { pos, msg } => Error::Syntax {
            pos,
            msg: format!("{field}: {msg}"),
        },
        Error::BudgetExceeded(_) | Error::Invariant(_) => e,
        other => Error::Invalid(format!("{field}: {other}")),
    }
}

fn rational_field(field: &str, text: &Option<String>) -> Result<Option<Rational>> {
    text.as_ref()
        .map(|t| parse_rational(t.trim()).map_err(|e| field_err(field, e)))
        .transpose()
}

fn require<T>(field: &str, v: Option<T>) -> Result<T> {
    v.ok_or_else(|| Error::Invalid(format!("missing field {field:?}")))
}

/// Accepts `"(6, 4)"`, `"6,4"` or `"6 4"`.
pub fn parse_point(text: &str) -> Result<Vec<Rational>> {
    let inner = text.trim().trim_start_matches('(').trim_end_matches(')');
    let parts: Vec<&str> = inner
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|p| !p.is_empty())
        .collect();
    if parts.is_empty() {
        return Err(Error::Invalid(format!("empty point {text:?}")));
    }
    parts.iter().map(|p| parse_rational(p)).collect()
}

/// Number of variables implied by the largest `x<i>` in `text`.
fn implied_num_vars(text: &str) -> usize {
    let b = text.as_bytes();
    let mut best = 0;
    let mut i = 0;
    while i < b.len() {
        if b[i] == b'x' {
            let start = i + 1;
            let mut j = start;
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            if let Ok(k) = text[start..j].parse::<usize>() {
                best = best.max(k + 1);
            }
            i = j;
        } else {
            i += 1;
        }
    }
    best
}

/// Parsed, validated inputs shared by the drivers.
struct Inputs {
    num_vars: usize,
    family: Option<PolyFamily>,
    variety: ProjectiveVariety,
    s: PlaceSet,
    c: Rational,
    lambda: Option<Rational>,
    epsilon: Option<Rational>,
    bounds: Vec<Rational>,
    modes: Vec<AuditMode>,
    prune: bool,
    rhs: Option<Poly>,
    form: Option<HomogeneousPoly>,
    point: Option<Vec<Rational>>,
    pairs: Vec<(HomogeneousPoly, Vec<Rational>)>,
}

/// Limits applied to one run.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunConfig {
    /// Caps both Buchberger reduction steps and enumerated search points.
    pub budget: Option<u64>,
}

impl RunConfig {
    fn groebner_budget(&self) -> Budget {
        match self.budget {
            Some(n) => Budget {
                max_steps: n,
                ..Budget::default()
            },
            None => Budget::default(),
        }
    }

    fn search_limits(&self) -> SearchLimits {
        match self.budget {
            Some(n) => SearchLimits {
                max_points: n as u128,
            },
            None => SearchLimits::default(),
        }
    }
}

/// Fills defaults and normalizes every field, so that resolving the result
/// again is the identity.
pub fn resolve(spec: &ProblemSpec, verb: Verb) -> Result<ProblemSpec> {
    let inputs = parse_inputs(spec, verb, &RunConfig::default().groebner_budget())?;
    Ok(render_inputs(&inputs, verb))
}

fn render_inputs(inputs: &Inputs, verb: Verb) -> ProblemSpec {
    let n = inputs.num_vars;
    let render_rational = |r: &Rational| format_rational(r);
    let mut out = ProblemSpec {
        num_vars: Some(n),
        family: inputs
            .family
            .as_ref()
            .map(|f| f.members().iter().map(|m| m.to_string()).collect())
            .unwrap_or_default(),
        variety: Some(
            inputs
                .variety
                .ideal()
                .generators()
                .iter()
                .map(|g| g.to_string())
                .collect(),
        ),
        s: Some(inputs.s.primes().to_vec()),
        ..ProblemSpec::default()
    };
    match verb {
        Verb::Delta => {
            out.prune = Some(inputs.prune);
        }
        Verb::Verify => {
            out.prune = Some(inputs.prune);
            out.lambda = inputs.lambda.as_ref().map(render_rational);
        }
        Verb::Search | Verb::Stability => {
            out.form = inputs.form.as_ref().map(|f| f.to_string());
            out.c = Some(render_rational(&inputs.c));
            out.lambda = inputs.lambda.as_ref().map(render_rational);
            out.bounds = Some(inputs.bounds.iter().map(render_rational).collect());
        }
        Verb::Equation => {
            out.form = inputs.form.as_ref().map(|f| f.to_string());
            out.rhs = inputs.rhs.as_ref().map(|r| r.to_string());
            out.bounds = Some(inputs.bounds.iter().map(render_rational).collect());
            if inputs.family.is_some() {
                out.prune = Some(inputs.prune);
            }
        }
        Verb::Audit => {
            out.prune = Some(inputs.prune);
            out.epsilon = inputs.epsilon.as_ref().map(render_rational);
            out.bounds = Some(inputs.bounds.iter().map(render_rational).collect());
            out.mode = Some(if inputs.modes.len() == 2 {
                "both".into()
            } else {
                mode_name(inputs.modes[0]).into()
            });
        }
        Verb::Heights => {
            out.form = inputs.form.as_ref().map(|f| f.to_string());
            out.point = inputs
                .point
                .as_ref()
                .map(|p| p.iter().map(render_rational).collect());
            if !inputs.pairs.is_empty() {
                out.pairs = Some(
                    inputs
                        .pairs
                        .iter()
                        .map(|(f, x)| PairSpec {
                            form: f.to_string(),
                            point: x.iter().map(render_rational).collect(),
                        })
                        .collect(),
                );
            }
        }
    }
    out
}

fn mode_name(m: AuditMode) -> &'static str {
    match m {
        AuditMode::Linear => "linear",
        AuditMode::Quadratic => "quadratic",
    }
}

fn parse_inputs(spec: &ProblemSpec, verb: Verb, budget: &Budget) -> Result<Inputs> {
    let point = spec
        .point
        .as_ref()
        .map(|p| {
            p.iter()
                .map(|c| parse_rational(c.trim()))
                .collect::<Result<Vec<_>>>()
        })
        .transpose()
        .map_err(|e| field_err("point", e))?;
    let num_vars = match spec.num_vars {
        Some(n) => n,
        None if verb == Verb::Heights => {
            let from_point = point.as_ref().map(|p| p.len()).unwrap_or(0);
            let from_form = spec.form.as_deref().map(implied_num_vars).unwrap_or(0);
            let from_pairs = spec
                .pairs
                .iter()
                .flatten()
                .map(|p| p.point.len().max(implied_num_vars(&p.form)))
                .max()
                .unwrap_or(0);
            from_point.max(from_form).max(from_pairs).max(1)
        }
        None => return Err(Error::Invalid("missing field \"num_vars\"".into())),
    };
    if num_vars == 0 {
        return Err(Error::Invalid("num_vars must be positive".into()));
    }
    let family = if spec.family.is_empty() {
        None
    } else {
        let mut members = Vec::with_capacity(spec.family.len());
        for (i, t) in spec.family.iter().enumerate() {
            members.push(
                HomogeneousPoly::parse(t, num_vars)
                    .map_err(|e| field_err(&format!("family[{i}]"), e))?,
            );
        }
        Some(PolyFamily::new(members).map_err(|e| field_err("family", e))?)
    };
    let variety = match &spec.variety {
        None => ProjectiveVariety::full_space(num_vars),
        Some(gens) if gens.is_empty() => ProjectiveVariety::full_space(num_vars),
        Some(gens) => {
            let mut forms = Vec::with_capacity(gens.len());
            for (i, t) in gens.iter().enumerate() {
                forms.push(
                    HomogeneousPoly::parse(t, num_vars)
                        .map_err(|e| field_err(&format!("variety[{i}]"), e))?,
                );
            }
            ProjectiveVariety::from_forms(num_vars, &forms, budget)
                .map_err(|e| field_err("variety", e))?
        }
    };
    let s = PlaceSet::new(spec.s.as_deref().unwrap_or(&[])).map_err(|e| field_err("S", e))?;
    let c = rational_field("c", &spec.c)?.unwrap_or_else(|| Rational::from_integer(1.into()));
    let lambda = rational_field("lambda", &spec.lambda)?;
    let epsilon = rational_field("epsilon", &spec.epsilon)?;
    let mut bounds = Vec::new();
    for (i, b) in spec.bounds.iter().flatten().enumerate() {
        bounds.push(parse_rational(b.trim()).map_err(|e| field_err(&format!("bounds[{i}]"), e))?);
    }
    let modes = match spec.mode.as_deref() {
        None => vec![AuditMode::Quadratic],
        Some("both") => vec![AuditMode::Linear, AuditMode::Quadratic],
        Some(m) => vec![AuditMode::parse(m)?],
    };
    let rhs = spec
        .rhs
        .as_ref()
        .map(|t| Poly::parse(t, num_vars))
        .transpose()
        .map_err(|e| field_err("rhs", e))?;
    let form = match &spec.form {
        Some(t) => Some(
            HomogeneousPoly::form(Poly::parse(t, num_vars).map_err(|e| field_err("form", e))?)
                .map_err(|e| field_err("form", e))?,
        ),
        None => match (&family, verb) {
            (Some(f), Verb::Search | Verb::Equation | Verb::Stability) => Some(f.product()),
            _ => None,
        },
    };
    let mut pairs = Vec::new();
    for (i, p) in spec.pairs.iter().flatten().enumerate() {
        let f = HomogeneousPoly::parse(&p.form, num_vars)
            .map_err(|e| field_err(&format!("pairs[{i}].form"), e))?;
        let x = p
            .point
            .iter()
            .map(|c| parse_rational(c.trim()))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| field_err(&format!("pairs[{i}].point"), e))?;
        pairs.push((f, x));
    }

    let need_family = || {
        family
            .as_ref()
            .ok_or_else(|| Error::Invalid("missing field \"family\"".into()))
            .map(|_| ())
    };
    let need_bounds = || {
        if bounds.is_empty() {
            Err(Error::Invalid("missing field \"bounds\"".into()))
        } else {
            Ok(())
        }
    };
    match verb {
        Verb::Delta => need_family()?,
        Verb::Verify => {
            need_family()?;
            require("lambda", lambda.as_ref())?;
        }
        Verb::Search | Verb::Stability => {
            require("form", form.as_ref())?;
            require("lambda", lambda.as_ref())?;
            need_bounds()?;
        }
        Verb::Equation => {
            require("form", form.as_ref())?;
            require("rhs", rhs.as_ref())?;
            need_bounds()?;
        }
        Verb::Audit => {
            need_family()?;
            require("epsilon", epsilon.as_ref())?;
            need_bounds()?;
        }
        Verb::Heights => {
            if point.is_none() && form.is_none() && pairs.is_empty() {
                return Err(Error::Invalid(
                    "heights needs a point, a form or pairs".into(),
                ));
            }
        }
    }
    if let Some(p) = &point {
        if p.len() != num_vars {
            return Err(Error::DimensionMismatch {
                expected: num_vars,
                got: p.len(),
            });
        }
    }
    Ok(Inputs {
        num_vars,
        family,
        variety,
        s,
        c,
        lambda,
        epsilon,
        bounds,
        modes,
        prune: spec.prune.unwrap_or(true),
        rhs,
        form,
        point,
        pairs,
    })
}

/// Output of one command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Payload {
    pub json: String,
    pub csv: Option<String>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'static str,
    spec: &'a ProblemSpec,
    result: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlaceValue {
    pub place: String,
    #[serde(serialize_with = "ser_rational")]
    pub exact: Rational,
    #[serde(serialize_with = "ser_log")]
    pub log: f64,
}

fn place_value(place: String, exact: Rational) -> PlaceValue {
    let log = ln_rational(&exact);
    PlaceValue { place, exact, log }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointHeights {
    #[serde(serialize_with = "ser_rational_vec")]
    pub point: Vec<Rational>,
    /// `H(x)` as an integer.
    pub height: String,
    #[serde(serialize_with = "ser_log")]
    pub log_height: f64,
    #[serde(serialize_with = "ser_rational")]
    pub s_height: Rational,
    #[serde(serialize_with = "ser_log")]
    pub log_s_height: f64,
    /// Absent unless every coordinate is an S-integer.
    pub canonical_rep: Option<Vec<String>>,
    pub norms: Vec<PlaceValue>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FormHeights {
    pub form: String,
    #[serde(serialize_with = "ser_rational")]
    pub height: Rational,
    #[serde(serialize_with = "ser_log")]
    pub log_height: f64,
    pub norms: Vec<PlaceValue>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeightsReport {
    pub places: PlaceSet,
    pub point: Option<PointHeights>,
    pub form: Option<FormHeights>,
    /// Weil function values of the form at the point, per place.
    pub weil: Option<Vec<PlaceValue>>,
    pub little_o: Option<LittleOReport>,
}

#[derive(Serialize)]
struct SearchResult<'a> {
    verdict: Option<HypothesisVerdict>,
    count: usize,
    classes: &'a [SolutionClass],
}

#[derive(Serialize)]
struct EquationResult {
    /// Verdict with `λ` set to the degree of the right-hand side.
    verdict: Option<HypothesisVerdict>,
    report: EquationReport,
}

#[derive(Serialize)]
struct AuditResult {
    reports: Vec<AuditReport>,
    /// With both modes: the quadratic violators are among the linear ones.
    nested: Option<bool>,
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

fn envelope<T: Serialize>(verb: Verb, spec: &ProblemSpec, result: T) -> String {
    let mut s = serde_json::to_string_pretty(&Envelope {
        command: verb.name(),
        spec,
        result,
    })
    .expect("report serializes");
    s.push('\n');
    s
}

fn join_ints<T: ToString>(v: &[T]) -> String {
    v.iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn delta_options(inputs: &Inputs, config: &RunConfig) -> DeltaOptions {
    DeltaOptions {
        prune: inputs.prune,
        parallel: true,
        budget: config.groebner_budget(),
    }
}

fn heights_report(inputs: &Inputs) -> Result<HeightsReport> {
    let s = &inputs.s;
    let point = inputs
        .point
        .as_ref()
        .map(|x| -> Result<PointHeights> {
            let h = proj_height_exact(x)?;
            let hs = s_height(x, s)?;
            let canonical = match canonical_rep(x, s) {
                Ok(w) => Some(w.iter().map(|c| c.to_string()).collect()),
                Err(Error::NotSInteger(_)) => None,
                Err(e) => return Err(e),
            };
            let mut norms = Vec::new();
            for v in s.places() {
                norms.push(place_value(
                    v.to_string(),
                    crate::heights::tuple_norm_at(x, v)?.into_exact(),
                ));
            }
            Ok(PointHeights {
                point: x.clone(),
                log_height: crate::heights::ln_bigint(&h),
                height: h.to_string(),
                log_s_height: hs.ln(),
                s_height: hs.into_exact(),
                canonical_rep: canonical,
                norms,
            })
        })
        .transpose()?;
    let form = inputs
        .form
        .as_ref()
        .map(|f| -> Result<FormHeights> {
            let h = poly_height_exact(f)?;
            let mut norms = Vec::new();
            for v in s.places() {
                norms.push(place_value(v.to_string(), poly_norm_at(f, v)?.into_exact()));
            }
            Ok(FormHeights {
                form: f.to_string(),
                log_height: ln_rational(&h),
                height: h,
                norms,
            })
        })
        .transpose()?;
    let weil = match (&inputs.form, &inputs.point) {
        (Some(f), Some(x)) if !f.evaluate(x)?.is_zero() => {
            let mut vals = Vec::new();
            for v in s.places() {
                vals.push(place_value(v.to_string(), weil_exact(f, v, x)?));
            }
            Some(vals)
        }
        _ => None,
    };
    let little_o = if inputs.pairs.is_empty() {
        None
    } else {
        Some(little_o_report(
            &inputs.pairs,
            (!s.primes().is_empty()).then_some(s),
        )?)
    };
    Ok(HeightsReport {
        places: s.clone(),
        point,
        form,
        weil,
        little_o,
    })
}

/// Runs one command on a spec.
pub fn run(verb: Verb, spec: &ProblemSpec, config: &RunConfig) -> Result<Payload> {
    let inputs = parse_inputs(spec, verb, &config.groebner_budget())?;
    let resolved = render_inputs(&inputs, verb);
    let limits = config.search_limits();
    match verb {
        Verb::Delta => {
            let family = inputs.family.as_ref().expect("validated");
            let report =
                distributive_constant(family, &inputs.variety, &delta_options(&inputs, config))?;
            Ok(Payload {
                csv: Some(report.to_csv()),
                json: envelope(verb, &resolved, &report),
            })
        }
        Verb::Verify => {
            let family = inputs.family.as_ref().expect("validated");
            let v = hypothesis_verdict(
                family,
                &inputs.variety,
                inputs.lambda.as_ref().expect("validated"),
                &delta_options(&inputs, config),
            )?;
            let csv = csv_table(
                &[
                    "ell",
                    "d",
                    "q",
                    "delta",
                    "m",
                    "lambda",
                    "bound",
                    "degree_ok",
                    "lambda_ok",
                ],
                [vec![
                    v.ell.to_string(),
                    v.d.to_string(),
                    v.q.to_string(),
                    v.delta.to_string(),
                    v.m.to_string(),
                    format_rational(&v.lambda),
                    v.bound.to_string(),
                    v.degree_ok.to_string(),
                    v.lambda_ok.to_string(),
                ]],
            );
            Ok(Payload {
                csv: Some(csv),
                json: envelope(verb, &resolved, &v),
            })
        }
        Verb::Search => {
            let lambda = inputs.lambda.clone().expect("validated");
            let bound = inputs.bounds.iter().max().expect("validated").clone();
            let params =
                SearchParams::new(inputs.c.clone(), lambda.clone(), bound, inputs.s.clone())?;
            let classes =
                search_solutions(inputs.form.as_ref().expect("validated"), &params, &limits)?;
            let verdict = match &inputs.family {
                Some(f) => Some(hypothesis_verdict(
                    f,
                    &inputs.variety,
                    &lambda,
                    &delta_options(&inputs, config),
                )?),
                None => None,
            };
            let csv = csv_table(
                &["representative", "s_height", "fs_value"],
                classes.iter().map(|c| {
                    vec![
                        join_ints(&c.representative),
                        c.s_height.to_string(),
                        format_rational(&c.fs_value),
                    ]
                }),
            );
            let result = SearchResult {
                verdict,
                count: classes.len(),
                classes: &classes,
            };
            Ok(Payload {
                csv: Some(csv),
                json: envelope(verb, &resolved, result),
            })
        }
        Verb::Equation => {
            let bound = inputs.bounds.iter().max().expect("validated");
            let f = inputs.form.as_ref().expect("validated");
            let rhs = inputs.rhs.as_ref().expect("validated");
            let report = equation_search(f, rhs, &inputs.s, bound, &limits)?;
            let verdict = match &inputs.family {
                Some(fam) => {
                    let d = distributive_constant(
                        fam,
                        &inputs.variety,
                        &delta_options(&inputs, config),
                    )?;
                    Some(verdict_from(
                        fam.total_degree(),
                        fam.max_degree(),
                        fam.len(),
                        d.delta,
                        d.variety_dim,
                        Rational::from_integer(report.rhs_degree.into()),
                    ))
                }
                None => None,
            };
            let csv = csv_table(
                &["solution"],
                report
                    .solutions
                    .iter()
                    .map(|x| vec![x.iter().map(format_rational).collect::<Vec<_>>().join(" ")]),
            );
            Ok(Payload {
                csv: Some(csv),
                json: envelope(verb, &resolved, EquationResult { verdict, report }),
            })
        }
        Verb::Audit => {
            let family = inputs.family.as_ref().expect("validated");
            let eps = inputs.epsilon.as_ref().expect("validated");
            let opts = delta_options(&inputs, config);
            let mut reports = Vec::new();
            for &mode in &inputs.modes {
                reports.push(subspace_audit(
                    family,
                    &inputs.variety,
                    &inputs.s,
                    eps,
                    mode,
                    &inputs.bounds,
                    &opts,
                    &limits,
                )?);
            }
            let nested = (reports.len() == 2).then(|| {
                reports[1]
                    .violators
                    .iter()
                    .all(|q| reports[0].violators.iter().any(|l| l.point == q.point))
            });
            let csv = csv_table(
                &["mode", "point", "s_height", "lhs", "rhs"],
                reports.iter().flat_map(|r| {
                    r.violators.iter().map(move |v| {
                        vec![
                            mode_name(r.mode).to_string(),
                            join_ints(&v.point),
                            v.s_height.to_string(),
                            format_log(v.lhs),
                            format_log(v.rhs),
                        ]
                    })
                }),
            );
            Ok(Payload {
                csv: Some(csv),
                json: envelope(verb, &resolved, AuditResult { reports, nested }),
            })
        }
        Verb::Heights => {
            let report = heights_report(&inputs)?;
            let mut rows = Vec::new();
            if let Some(p) = &report.point {
                rows.push(vec!["point".into(), format_point(&p.point)]);
                rows.push(vec!["H".into(), p.height.clone()]);
                rows.push(vec!["h".into(), format_log(p.log_height)]);
                rows.push(vec!["H_S".into(), format_rational(&p.s_height)]);
                rows.push(vec!["log H_S".into(), format_log(p.log_s_height)]);
            }
            if let Some(f) = &report.form {
                rows.push(vec!["form".into(), f.form.clone()]);
                rows.push(vec!["H(F)".into(), format_rational(&f.height)]);
                rows.push(vec!["h(F)".into(), format_log(f.log_height)]);
            }
            for w in report.weil.iter().flatten() {
                rows.push(vec![format!("weil@{}", w.place), format_log(w.log)]);
            }
            let csv = csv_table(&["quantity", "value"], rows);
            Ok(Payload {
                csv: Some(csv),
                json: envelope(verb, &resolved, &report),
            })
        }
        Verb::Stability => {
            let lambda = inputs.lambda.clone().expect("validated");
            let top = inputs.bounds.iter().max().expect("validated").clone();
            let params = SearchParams::new(inputs.c.clone(), lambda, top, inputs.s.clone())?;
            let report: StabilityReport = growth_stability(
                inputs.form.as_ref().expect("validated"),
                &params,
                &inputs.bounds,
                &limits,
            )?;
            let csv = csv_table(
                &["bound", "classes"],
                report
                    .rungs
                    .iter()
                    .map(|r| vec![format_rational(&r.bound), r.classes.to_string()]),
            );
            Ok(Payload {
                csv: Some(csv),
                json: envelope(verb, &resolved, &report),
            })
        }
    }
}

/// Entry point used by foreign callers: spec as JSON in, JSON payload out.
pub fn run_command(verb: &str, spec_json: &str, budget: Option<u64>) -> Result<String> {
    let verb = Verb::parse(verb)?;
    let spec = ProblemSpec::from_json(spec_json)?;
    Ok(run(verb, &spec, &RunConfig { budget })?.json)
}

/// Process exit code for an error: 1 input, 2 budget, 3 internal.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded(_) => 2,
        Error::Invariant(_) => 3,
        _ => 1,
    }
}

#[derive(Serialize)]
pub struct RunMetadata {
    pub version: &'static str,
    pub command: &'static str,
    pub workers: usize,
    pub elapsed_ms: u128,
}

/// Writes `<command>.json`, `<command>.csv` when available, and
/// `run_meta.json` under `dir`.
pub fn write_outputs(
    dir: &Path,
    verb: Verb,
    payload: &Payload,
    meta: &RunMetadata,
) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(format!("{}.json", verb.name())), &payload.json)?;
    if let Some(csv) = &payload.csv {
        fs::write(dir.join(format!("{}.csv", verb.name())), csv)?;
    }
    let mut m = serde_json::to_string_pretty(meta).expect("metadata serializes");
    m.push('\n');
    fs::write(dir.join("run_meta.json"), m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(json: &str) -> ProblemSpec {
        ProblemSpec::from_json(json).unwrap()
    }

    fn result_field(payload: &Payload, path: &[&str]) -> serde_json::Value {
        let v: serde_json::Value = serde_json::from_str(&payload.json).unwrap();
        path.iter()
            .fold(v["result"].clone(), |acc, k| acc[*k].clone())
    }

    #[test]
    fn delta_commands() {
        let p = run(
            Verb::Delta,
            &spec(r#"{"family":["x0","x1","x2"],"num_vars":3}"#),
            &RunConfig::default(),
        )
        .unwrap();
        assert_eq!(result_field(&p, &["delta"]), "1/1");
        let p = run(
            Verb::Delta,
            &spec(r#"{"family":["x0","x0"],"num_vars":2}"#),
            &RunConfig::default(),
        )
        .unwrap();
        assert_eq!(result_field(&p, &["delta"]), "2/1");
        assert!(p.csv.unwrap().starts_with("gamma,dim,ratio\n"));
    }

    #[test]
    fn malformed_polynomial_reports_position() {
        let e = run(
            Verb::Delta,
            &spec(r#"{"family":["x0 + * x1"],"num_vars":2}"#),
            &RunConfig::default(),
        )
        .unwrap_err();
        assert_eq!(exit_code(&e), 1);
        assert!(matches!(e, Error::Syntax { .. }));
        assert!(e.to_string().contains("position"));
    }

    #[test]
    fn verify_quintic() {
        let s = spec(
            r#"{"family":["x0","x1","x0 + x1","x0 - x1","x0 + 2*x1"],"num_vars":2,"lambda":"1/2"}"#,
        );
        let p = run(Verb::Verify, &s, &RunConfig::default()).unwrap();
        assert_eq!(result_field(&p, &["degree_ok"]), true);
        assert_eq!(result_field(&p, &["lambda_ok"]), true);
    }

    #[test]
    fn search_pell() {
        let s = spec(r#"{"num_vars":2,"form":"x0^2 - 2*x1^2","lambda":"0","bounds":["100"]}"#);
        let p = run(Verb::Search, &s, &RunConfig::default()).unwrap();
        let classes = result_field(&p, &["classes"]);
        assert!(classes
            .as_array()
            .unwrap()
            .iter()
            .any(|c| c["representative"] == serde_json::json!(["3", "2"])));
    }

    #[test]
    fn heights_s_height() {
        let s = ProblemSpec {
            point: Some(vec!["6".into(), "4".into()]),
            s: Some(vec![2]),
            ..Default::default()
        };
        let p = run(Verb::Heights, &s, &RunConfig::default()).unwrap();
        assert_eq!(result_field(&p, &["point", "s_height"]), "3/1");
    }

    #[test]
    fn budget_exit_code() {
        let s =
            spec(r#"{"num_vars":3,"form":"x0^2 - 2*x1^2 + x2^2","lambda":"0","bounds":["1000"]}"#);
        let e = run(Verb::Search, &s, &RunConfig { budget: Some(1000) }).unwrap_err();
        assert_eq!(exit_code(&e), 2);
    }

    #[test]
    fn resolve_is_idempotent() {
        let s =
            spec(r#"{"family":["x1 + x0","2*x0"],"num_vars":2,"primes":[3,2,3],"lambda":"2/4"}"#);
        let r1 = resolve(&s, Verb::Verify).unwrap();
        assert_eq!(r1.s, Some(vec![2, 3]));
        assert_eq!(r1.lambda.as_deref(), Some("1/2"));
        assert_eq!(resolve(&r1, Verb::Verify).unwrap(), r1);
    }

    #[test]
    fn point_parsing() {
        let p = parse_point("(6, 4)").unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(
            parse_point("1/2,3").unwrap()[0],
            Rational::new(1.into(), 2.into())
        );
        assert!(parse_point("()").is_err());
    }
}
