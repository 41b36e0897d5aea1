use std::sync::Arc;

use num_bigint::BigInt;
use proptest::prelude::*;
use species_idr::calculus::{Calculus, Distance, Order};
use species_idr::linear::{lin_compose, lin_from_set_species, LinSpecies};
use species_idr::localization::LocContext;
use species_idr::oracle::{enumerate_count, ConcreteExpr};
use species_idr::rational::{binomial, int};
use species_idr::series::{gs, EGFSeries};
use species_idr::towers::{joyal_integral, DifferentialTower};
use species_idr::{IdRing, Monomial, Rational, SetSpeciesRing, SpeciesPoly};

const N: usize = 6;

fn poly_from(terms: Vec<(usize, usize, i64)>, trunc: usize) -> SpeciesPoly {
    let terms = terms.into_iter().map(|(d, i, c)| {
        let ms = Monomial::all_of_degree(d);
        (ms[i % ms.len()].clone(), int(c))
    });
    SpeciesPoly::exact(trunc, terms)
}

fn poly() -> impl Strategy<Value = SpeciesPoly> {
    prop::collection::vec((0..=N, 0usize..16, -4i64..=4), 0..5).prop_map(|t| poly_from(t, N))
}

/// Elements with nonnegative integer coefficients, so their counts are integral.
fn species() -> impl Strategy<Value = SpeciesPoly> {
    prop::collection::vec((0..=N, 0usize..16, 0i64..=3), 0..4).prop_map(|t| poly_from(t, N))
}

fn unit() -> impl Strategy<Value = SpeciesPoly> {
    (poly(), 1i64..=3).prop_map(|(p, c)| {
        let shift = int(c) - p.constant_term();
        p + SpeciesPoly::constant(N, shift)
    })
}

fn constant() -> impl Strategy<Value = SpeciesPoly> {
    // 1 + sum k_i (X^i - i C_i), the tower constants with integer coefficients
    prop::collection::vec(-2i64..=2, 2).prop_map(|ks| {
        let mut k = SpeciesPoly::one(N);
        for (i, c) in ks.into_iter().enumerate() {
            let deg = i + 2;
            let piece = SpeciesPoly::x(N).pow(deg)
                - SpeciesPoly::cycle_species(N, deg).scale(&int(deg as i64));
            k = k + piece.scale(&int(c));
        }
        k
    })
}

/// Independent EGF product: `c_n = Σ C(n,k) a_k b_{n-k}` on counts.
fn count_convolution(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    (0..a.len().min(b.len()))
        .map(|n| (0..=n).map(|k| binomial(n, k) * &a[k] * &b[n - k]).sum())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_laws(a in poly(), b in poly(), c in poly()) {
        prop_assert!((&a + &b).eq_within(&(&b + &a)));
        prop_assert!((&a * &b).eq_within(&(&b * &a)));
        prop_assert!((&(&a * &b) * &c).eq_within(&(&a * &(&b * &c))));
        prop_assert!((&a * &(&b + &c)).eq_within(&(&(&a * &b) + &(&a * &c))));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn leibniz(a in poly(), b in poly()) {
        let lhs = (&a * &b).derive();
        let rhs = &a.derive() * &b + &a * &b.derive();
        prop_assert!(lhs.eq_within(&rhs));
    }

    #[test]
    fn joyal_integral_is_a_section(a in poly(), k in constant()) {
        for tower in [
            DifferentialTower::analytic(N),
            DifferentialTower::combinatorial(N),
            DifferentialTower::from_constant(&k).unwrap(),
        ] {
            prop_assert!(joyal_integral(&tower, &a).derive().eq_within(&a));
        }
    }

    #[test]
    fn tower_constant_round_trip(k in constant()) {
        let tower = DifferentialTower::from_constant(&k).unwrap();
        prop_assert!(tower.constant().eq_within(&k));
    }

    #[test]
    fn evaluation_lands_in_constants(a in poly()) {
        let ring = SetSpeciesRing::analytic(N);
        let e = ring.evaluate(&a);
        prop_assert!(e.derive().is_zero());
        prop_assert!(ring.evaluate(&e).eq_within(&e));
    }

    #[test]
    fn graded_components_sum_back(a in poly()) {
        let total = (0..=N)
            .map(|d| a.graded_component(d).unwrap())
            .fold(SpeciesPoly::zero(N), |acc, p| acc + p);
        prop_assert_eq!(total, a);
    }

    #[test]
    fn gs_is_a_homomorphism(a in poly(), b in poly()) {
        prop_assert!(gs(&(&a + &b)).eq_within(&gs(&a).add(&gs(&b)).unwrap()));
        prop_assert!(gs(&(&a * &b)).eq_within(&gs(&a).mul(&gs(&b)).unwrap()));
        prop_assert!(gs(&a.derive()).eq_within(&gs(&a).derive()));
        let tower = DifferentialTower::analytic(N);
        prop_assert!(gs(&tower.integrate(&a)).eq_within(&gs(&a).integrate()));
    }

    #[test]
    fn inverse_of_unit(u in unit()) {
        let inv = u.mult_inverse().unwrap();
        prop_assert!((&u * &inv).eq_within(&SpeciesPoly::one(N)));
    }

    #[test]
    fn linear_counts_multiply_by_convolution(a in species(), b in species()) {
        let (la, lb) = (lin_from_set_species(&a).unwrap(), lin_from_set_species(&b).unwrap());
        let prod = lin_from_set_species(&(&a * &b)).unwrap();
        prop_assert_eq!(prod.counts(), &count_convolution(la.counts(), lb.counts())[..]);
        prop_assert!(la.mul(&lb).unwrap().eq_within(&prod));
    }

    #[test]
    fn linear_calculus(counts in prop::collection::vec(-20i64..=20, N + 1)) {
        let f = LinSpecies::from_i64(N, &counts);
        prop_assert!(f.integrate().derive().eq_within(&f));
        let df = f.derive();
        prop_assert_eq!(&df.counts()[..N], &f.counts()[1..]);
        let id = LinSpecies::x(N);
        prop_assert!(lin_compose(&f, &id).unwrap().eq_within(&f));
    }

    #[test]
    fn linear_composition_matches_series(
        f in prop::collection::vec(-5i64..=5, N + 1),
        g in prop::collection::vec(-5i64..=5, N),
    ) {
        let f = LinSpecies::from_i64(N, &f);
        let mut gc = vec![0];
        gc.extend(g);
        let g = LinSpecies::from_i64(N, &gc);
        let composed = lin_compose(&f, &g).unwrap().series();
        prop_assert!(composed.eq_within(&f.series().compose(&g.series()).unwrap()));
    }

    #[test]
    fn localized_fractions(a in poly(), b in poly(), i in 0usize..3, j in 0usize..3) {
        let ctx = LocContext::new(SpeciesPoly::combinatorial_exp(N)).unwrap();
        let fa = ctx.fraction(a.clone(), i);
        let fb = ctx.fraction(b.clone(), j);
        // Φ/K^i = ΦK/K^{i+1}
        let lifted = ctx.fraction(&a * ctx.k(), i + 1);
        prop_assert!(fa.equals(&lifted).unwrap());
        prop_assert!(fa.add(&fb).unwrap().equals(&fb.add(&fa).unwrap()).unwrap());
        // D(fg) = D(f)g + fD(g) - fg D(1), and the modified integral is a section
        let prod = fa.mul(&fb).unwrap();
        let lhs = ctx.d_mod(&prod);
        let d_one = ctx.d_mod(&ctx.from_poly(SpeciesPoly::one(N)));
        let rhs = ctx.d_mod(&fa).mul(&fb).unwrap().add(&fa.mul(&ctx.d_mod(&fb)).unwrap()).unwrap();
        let rhs = rhs.sub(&prod.mul(&d_one).unwrap()).unwrap();
        prop_assert!(lhs.equals(&rhs).unwrap());
        prop_assert!(ctx.d_mod(&ctx.p_mod(&fa)).equals(&fa).unwrap());
    }

    #[test]
    fn calculus_identities(a in poly(), b in poly()) {
        let ring = SetSpeciesRing::analytic(N);
        let calc = Calculus::new(&ring);
        let (ka, kb) = (&a - &ring.evaluate(&a), &b - &ring.evaluate(&b));
        let lhs = calc.exp(&(&ka + &kb)).unwrap();
        let rhs = &calc.exp(&ka).unwrap() * &calc.exp(&kb).unwrap();
        prop_assert!(lhs.eq_within(&rhs));
        let back = calc.log(&calc.exp(&ka).unwrap()).unwrap();
        prop_assert!(back.eq_within(&ka));
        prop_assert!(calc.id_compose(&a, &SpeciesPoly::x(N)).unwrap().eq_within(&a));
    }

    #[test]
    fn distance_is_ultrametric(a in poly(), b in poly(), c in poly()) {
        let ring = SetSpeciesRing::analytic(N);
        let calc = Calculus::new(&ring);
        let value = |d: Distance| match d {
            Distance::Exact(q) | Distance::AtMost(q) => q,
            Distance::Zero => Rational::from_integer(0.into()),
        };
        let exact = |d: &Distance| !matches!(d, Distance::AtMost(_));
        let (ab, bc, ac) = (calc.dist(&a, &b), calc.dist(&b, &c), calc.dist(&a, &c));
        prop_assert_eq!(calc.dist(&b, &a), ab.clone());
        if exact(&ab) && exact(&bc) && exact(&ac) {
            let bound = value(ab).max(value(bc));
            prop_assert!(value(ac) <= bound);
        }
    }

    #[test]
    fn order_of_monomial_powers(k in 0usize..=N) {
        let ring = SetSpeciesRing::analytic(N);
        let calc = Calculus::new(&ring);
        prop_assert_eq!(calc.ord(&SpeciesPoly::x(N).pow(k)), Order::Finite(k));
    }
}

fn primitive() -> impl Strategy<Value = ConcreteExpr> {
    prop_oneof![
        Just(ConcreteExpr::One),
        Just(ConcreteExpr::X),
        Just(ConcreteExpr::E),
        Just(ConcreteExpr::L),
        Just(ConcreteExpr::Cycles),
        (1usize..4).prop_map(ConcreteExpr::Ek),
        (1usize..4).prop_map(ConcreteExpr::Ck),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_derivative_shifts_counts(f in primitive(), n in 0usize..6) {
        let d = ConcreteExpr::derivative(f.clone());
        prop_assert_eq!(enumerate_count(&d, n).unwrap(), enumerate_count(&f, n + 1).unwrap());
    }

    #[test]
    fn oracle_products_convolve(f in primitive(), g in primitive(), n in 0usize..6) {
        let counts = |e: &ConcreteExpr| -> Vec<BigInt> {
            (0..=n).map(|k| enumerate_count(e, k).unwrap()).collect()
        };
        let expected = count_convolution(&counts(&f), &counts(&g))[n].clone();
        let prod = ConcreteExpr::product(f, g);
        prop_assert_eq!(enumerate_count(&prod, n).unwrap(), expected);
    }

    #[test]
    fn oracle_matches_series(f in primitive(), g in primitive()) {
        let expr = ConcreteExpr::sum(ConcreteExpr::product(f.clone(), g), f);
        let report = species_idr::oracle::verify_counts(&expr, 6).unwrap();
        prop_assert!(report.pass, "{:?}", report.first_mismatch);
    }
}

#[test]
fn egf_series_of_exponential_has_unit_counts() {
    let s: EGFSeries = gs(&SpeciesPoly::combinatorial_exp(N));
    for n in 0..=N {
        assert_eq!(s.count(n), Some(BigInt::from(1)));
    }
    let ctx: Arc<LocContext> = LocContext::new(SpeciesPoly::one(N)).unwrap();
    assert!(ctx.is_constant());
}
