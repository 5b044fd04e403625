mod common;

use common::{form_from_coeffs, monomials, prime_factors, z};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use semidec::heights::{
    canonical_rep, norm_at, s_height, to_rationals, weil_exact, Place, PlaceSet,
};
use semidec::ideal::{
    groebner_basis, normal_form, s_polynomial, Budget, Ideal, ProjDim, ProjectiveVariety,
};
use semidec::poly::{monomial_count, scale_invariance_exponent, HomogeneousPoly, Poly, Rational};
use semidec::search::{enumerate_s_points, SearchLimits};

fn form_strategy(n: usize, d: u32) -> impl Strategy<Value = HomogeneousPoly> {
    let k = monomials(n, d).len();
    prop::collection::vec(-3i64..=3, k)
        .prop_filter_map("zero form", move |c| form_from_coeffs(n, d, &c))
}

fn any_form() -> impl Strategy<Value = HomogeneousPoly> {
    (2usize..=3, 1u32..=3).prop_flat_map(|(n, d)| form_strategy(n, d))
}

fn rational() -> impl Strategy<Value = Rational> {
    (-500i64..=500, 1i64..=500).prop_map(|(a, b)| Rational::new(a.into(), b.into()))
}

fn nonzero_rational() -> impl Strategy<Value = Rational> {
    rational().prop_filter("nonzero", |r| !r.is_zero())
}

fn place_set() -> impl Strategy<Value = PlaceSet> {
    prop::sample::subsequence(vec![2u64, 3, 5, 7], 0..=3).prop_map(|p| PlaceSet::new(&p).unwrap())
}

/// An S-integer: integer over a product of S-primes.
fn s_integer(s: PlaceSet) -> impl Strategy<Value = Rational> {
    let primes = s.primes().to_vec();
    (-60i64..=60, prop::collection::vec(0u32..=2, primes.len())).prop_map(move |(a, es)| {
        let den = primes
            .iter()
            .zip(&es)
            .fold(BigInt::one(), |acc, (p, e)| acc * BigInt::from(*p).pow(*e));
        Rational::new(a.into(), den)
    })
}

fn s_unit(s: PlaceSet) -> impl Strategy<Value = Rational> {
    let primes = s.primes().to_vec();
    (
        any::<bool>(),
        prop::collection::vec(-3i32..=3, primes.len()),
    )
        .prop_map(move |(neg, es)| {
            let mut u = Rational::one();
            for (p, e) in primes.iter().zip(es) {
                let pr = Rational::from_integer(BigInt::from(*p));
                u *= if e >= 0 {
                    num_traits::pow(pr, e as usize)
                } else {
                    num_traits::pow(pr.recip(), (-e) as usize)
                };
            }
            if neg {
                -u
            } else {
                u
            }
        })
}

fn all_places(values: &[Rational]) -> Vec<Place> {
    let mut primes: Vec<u64> = values
        .iter()
        .filter(|v| !v.is_zero())
        .flat_map(|v| {
            prime_factors(v.numer())
                .into_iter()
                .chain(prime_factors(v.denom()))
        })
        .collect();
    primes.sort_unstable();
    primes.dedup();
    std::iter::once(Place::Infinite)
        .chain(primes.into_iter().map(|p| Place::prime(p).unwrap()))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn forms_are_homogeneous(f in any_form(), t in nonzero_rational(), xs in prop::collection::vec(rational(), 3)) {
        let x = &xs[..f.num_vars()];
        prop_assert!(scale_invariance_exponent(&f, x, &t).unwrap());
    }

    #[test]
    fn parser_round_trip(f in any_form()) {
        let text = f.to_string();
        let back = HomogeneousPoly::parse(&text, f.num_vars()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn groebner_basis_is_reduced_and_closed(
        gens in (2usize..=3).prop_flat_map(|n| prop::collection::vec((1u32..=2).prop_flat_map(move |d| form_strategy(n, d)), 1..=3))
    ) {
        let n = gens[0].num_vars();
        let ideal = Ideal::from_forms(n, &gens).unwrap();
        let gb = groebner_basis(&ideal, &Budget::default()).unwrap();
        for g in ideal.generators() {
            prop_assert!(normal_form(g, &gb).is_zero());
        }
        let basis = gb.basis();
        for i in 0..basis.len() {
            for j in i + 1..basis.len() {
                prop_assert!(normal_form(&s_polynomial(&basis[i], &basis[j]), &gb).is_zero());
            }
        }
        for (i, g) in basis.iter().enumerate() {
            let (_, lc) = g.leading_term().unwrap();
            prop_assert!(lc.is_one());
            for (j, h) in basis.iter().enumerate() {
                if i != j {
                    let lm = h.leading_monomial().unwrap();
                    prop_assert!(g.terms().all(|(m, _)| !lm.divides(m)));
                }
            }
        }
    }

    #[test]
    fn intersection_dimension_is_monotone(
        fs in prop::collection::vec((1u32..=2).prop_flat_map(|d| form_strategy(3, d)), 2..=3)
    ) {
        let v = ProjectiveVariety::full_space(3);
        let budget = Budget::default();
        let mut prev = ProjDim::Dim(2);
        for k in 1..=fs.len() {
            let polys: Vec<&Poly> = fs[..k].iter().map(|f| f.poly()).collect();
            let d = v.intersection_dim(&polys, &budget).unwrap();
            prop_assert!(d <= prev);
            prev = d;
        }
    }

    #[test]
    fn hyperplane_slices_drop_dimension_by_at_most_one(
        q in (1u32..=2).prop_flat_map(|d| form_strategy(4, d)),
        l in form_strategy(4, 1)
    ) {
        let budget = Budget::default();
        let v = ProjectiveVariety::from_forms(4, &[q], &budget).unwrap();
        prop_assert_eq!(v.dim(), ProjDim::Dim(2));
        let d = v.intersection_dim(&[l.poly()], &budget).unwrap();
        prop_assert!(d == ProjDim::Dim(1) || d == ProjDim::Dim(2));
        let full = ProjectiveVariety::full_space(4);
        prop_assert_eq!(full.intersection_dim(&[l.poly()], &budget).unwrap(), ProjDim::Dim(2));
    }

    #[test]
    fn product_formula(x in nonzero_rational()) {
        let mut acc = Rational::one();
        for v in all_places(std::slice::from_ref(&x)) {
            acc *= norm_at(&x, v).unwrap().into_exact();
        }
        prop_assert!(acc.is_one());
    }

    #[test]
    fn s_height_is_unit_invariant(
        (s, x, eta) in place_set().prop_flat_map(|s| {
            (Just(s.clone()), prop::collection::vec(s_integer(s.clone()), 3), s_unit(s))
        })
    ) {
        prop_assume!(x.iter().any(|c| !c.is_zero()));
        let scaled: Vec<Rational> = x.iter().map(|c| c * &eta).collect();
        prop_assert_eq!(s_height(&x, &s).unwrap(), s_height(&scaled, &s).unwrap());
        let w = canonical_rep(&x, &s).unwrap();
        prop_assert_eq!(&canonical_rep(&scaled, &s).unwrap(), &w);
        prop_assert_eq!(&canonical_rep(&to_rationals(&w), &s).unwrap(), &w);
        // for a canonical integer representative the S-height is the sup norm
        let sup = w.iter().map(|c| c.abs()).max().unwrap();
        prop_assert_eq!(s_height(&to_rationals(&w), &s).unwrap().into_exact(), Rational::from_integer(sup));
    }

    #[test]
    fn weil_lower_bounds(f in any_form(), xs in prop::collection::vec(-20i64..=20, 3)) {
        let x: Vec<Rational> = xs[..f.num_vars()].iter().map(|c| z(*c)).collect();
        prop_assume!(!f.evaluate(&x).unwrap().is_zero());
        let vals: Vec<Rational> = f.poly().coefficients().cloned().chain(x.iter().cloned()).collect();
        let floor = Rational::new(BigInt::one(), BigInt::from(monomial_count(f.degree(), f.num_vars())));
        for v in all_places(&vals).into_iter().chain([Place::prime(11).unwrap()]) {
            let w = weil_exact(&f, v, &x).unwrap();
            if v.is_archimedean() {
                prop_assert!(w >= floor);
            } else {
                prop_assert!(w >= Rational::one());
            }
        }
    }

    #[test]
    fn enumeration_matches_brute_force(s in place_set(), n in 1usize..=3, b in 1i64..=4) {
        let got: Vec<Vec<i64>> = enumerate_s_points(&s, n, &z(b), &SearchLimits::default()).unwrap().collect();
        // every nonzero integer vector in the box, reduced to its class
        let mut want = std::collections::BTreeSet::new();
        let mut idx = vec![-b; n];
        loop {
            if idx.iter().any(|c| *c != 0) {
                let x: Vec<Rational> = idx.iter().map(|c| z(*c)).collect();
                let w = canonical_rep(&x, &s).unwrap();
                let sup = w.iter().map(|c| c.abs()).max().unwrap();
                if sup <= BigInt::from(b) {
                    want.insert(w);
                }
            }
            let mut k = 0;
            while k < n && idx[k] == b {
                idx[k] = -b;
                k += 1;
            }
            if k == n {
                break;
            }
            idx[k] += 1;
        }
        let got_set: std::collections::BTreeSet<Vec<BigInt>> =
            got.iter().map(|w| w.iter().map(|c| BigInt::from(*c)).collect()).collect();
        prop_assert_eq!(got_set.len(), got.len());
        prop_assert_eq!(got_set, want);
        let heights: Vec<i64> = got.iter().map(|w| w.iter().map(|c| c.abs()).max().unwrap()).collect();
        prop_assert!(heights.windows(2).all(|h| h[0] <= h[1]));
        for w in &got {
            let x: Vec<Rational> = w.iter().map(|c| z(*c)).collect();
            prop_assert!(s_height(&x, &s).unwrap().into_exact() >= Rational::one());
        }
    }
}

#[test]
fn canonical_rep_rejects_non_s_integers() {
    let s = PlaceSet::new(&[2]).unwrap();
    assert!(canonical_rep(&[Rational::new(1.into(), 3.into()), z(1)], &s).is_err());
    assert!(canonical_rep(&[z(0), z(0)], &s).is_err());
    assert!(s_height(&[z(0), z(0)], &s).is_err());
    let neg = canonical_rep(&[z(0), z(-12), z(8)], &s).unwrap();
    assert_eq!(
        neg,
        vec![BigInt::from(0), BigInt::from(3), BigInt::from(-2)]
    );
    assert!(neg[1].is_positive());
}
