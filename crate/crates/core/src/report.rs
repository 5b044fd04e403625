//! Serialization helpers shared by the report types: rationals render as
//! `"p/q"` strings, real logarithms as decimals with 15 significant digits.

use serde::Serializer;

use crate::poly::{format_rational, Rational};

pub fn ser_rational<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

pub fn ser_rational_vec<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(format_rational))
}

pub fn ser_rational_vecs<S: Serializer>(v: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(
        v.iter()
            .map(|t| t.iter().map(format_rational).collect::<Vec<_>>()),
    )
}

pub fn ser_log<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_log(*x))
}

pub fn ser_opt_log<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_str(&format_log(*v)),
        None => s.serialize_none(),
    }
}

/// Fixed-point decimal with 15 significant digits.
pub fn format_log(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (14 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // -0.000... after rounding
    if s.trim_start_matches('-')
        .chars()
        .all(|c| c == '0' || c == '.')
    {
        return "0".into();
    }
    s
}

/// Renders a point as `"(a, b, ...)"` with `"p/q"` only where needed.
pub fn format_point(x: &[Rational]) -> String {
    let parts: Vec<String> = x
        .iter()
        .map(|c| {
            if c.is_integer() {
                c.numer().to_string()
            } else {
                format!("{}/{}", c.numer(), c.denom())
            }
        })
        .collect();
    format!("({})", parts.join(", "))
}
