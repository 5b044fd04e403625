#![allow(dead_code)]

use num_bigint::BigInt;
use rand::Rng;
use semidec::poly::{HomogeneousPoly, Monomial, Poly, Rational};

pub fn z(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn r(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Exponent vectors of total degree `d` in `n` variables.
pub fn monomials(n: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == n - 1 {
            prefix.push(d);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in 0..=d {
            prefix.push(e);
            rec(n, d - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, d, &mut Vec::new(), &mut out);
    out
}

/// The form with the given coefficients on `monomials(n, d)`, or `None` if
/// every coefficient is zero.
pub fn form_from_coeffs(n: usize, d: u32, coeffs: &[i64]) -> Option<HomogeneousPoly> {
    let terms: Vec<(Monomial, Rational)> = monomials(n, d)
        .into_iter()
        .zip(coeffs)
        .filter(|(_, c)| **c != 0)
        .map(|(m, c)| (Monomial::new(m), z(*c)))
        .collect();
    if terms.is_empty() {
        return None;
    }
    Some(HomogeneousPoly::form(Poly::from_terms(n, terms)).unwrap())
}

pub fn random_form<R: Rng>(rng: &mut R, n: usize, d: u32, coeff: i64) -> HomogeneousPoly {
    let k = monomials(n, d).len();
    loop {
        let coeffs: Vec<i64> = (0..k).map(|_| rng.gen_range(-coeff..=coeff)).collect();
        if let Some(f) = form_from_coeffs(n, d, &coeffs) {
            return f;
        }
    }
}

/// Prime factors of `|n|` by trial division (test sizes only).
pub fn prime_factors(n: &BigInt) -> Vec<u64> {
    use num_traits::{One, Signed, ToPrimitive, Zero};
    let mut m = n.abs();
    let mut out = Vec::new();
    let mut p = 2u64;
    while !m.is_one() && !m.is_zero() {
        let bp = BigInt::from(p);
        if &bp * &bp > m {
            out.push(m.to_u64().expect("small cofactor"));
            break;
        }
        if (&m % &bp).is_zero() {
            out.push(p);
            while (&m % &bp).is_zero() {
                m /= &bp;
            }
        }
        p += 1;
    }
    out
}
