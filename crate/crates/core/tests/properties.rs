//! Property tests for the invariants of each module.
//!
//! Identities that hold bit-for-bit in floating point are asserted with
//! `==`. Identities that pass through `√w · (1/√w)` or `(h·w)/w` can lose an
//! ulp per atom; those are asserted exactly on dyadic weights, where every
//! intermediate is representable, and to a few ulps otherwise.

use kfcalc_core::composition::{compose, pushforward_setfn, s_adjoint};
use kfcalc_core::gaussian::{
    brownian_rv, expectation_product, ito_integral, q_mu_project, t_mu, t_mu_adjoint, v_adjoint,
    GaussianElement,
};
use kfcalc_core::krein_feller::{nabla, nabla_adjoint, rkhs_inner, HmuElement};
use kfcalc_core::measure::{
    check_pairwise_disjoint, DensityVector, MeasurableSet, MeasureSpace, SimpleFunction,
};
use kfcalc_core::multi::{
    anticipating_check, chain_rule_check, cross_cov, joint_ito, mutually_singular, MeasureFamily,
    UhsClass,
};
use kfcalc_core::random::random_invariant_pair;
use kfcalc_core::rkhs::partitions::for_each_partition;
use kfcalc_core::rkhs::{
    gram_psd_check, membership_test, partition_functional, AdditiveSetFunction, Mode,
    DEFAULT_PSD_TOL,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
    (a - b).norm() <= rel * a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

/// Weights in [0, 10], about one in six null.
fn weights(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![1 => Just(0.0), 5 => 0.0..=10.0f64],
        1..=max_len,
    )
}

/// Multiples of 1/8 in [0, 10].
fn dyadic_weights(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0u32..=80).prop_map(|k| f64::from(k) / 8.0), 1..=max_len)
}

fn space(w: &[f64]) -> MeasureSpace {
    MeasureSpace::from_weights(w).unwrap()
}

fn density(len: usize, seed: u64) -> DensityVector {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    kfcalc_core::random::random_density(&mut r, len)
}

fn mask_set(n: usize, mask: u64) -> MeasurableSet {
    MeasurableSet::from_mask(n, mask & ((1u64 << n) - 1))
}

fn density_setfn(s: &MeasureSpace, h: &DensityVector) -> AdditiveSetFunction {
    let m: Vec<Complex64> = (0..s.len()).map(|x| h[x] * s.weight(x)).collect();
    AdditiveSetFunction::from_atom_values(&m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn measure_is_additive_on_dyadic_weights(w in dyadic_weights(40), a in any::<u64>(), b in any::<u64>()) {
        let s = space(&w);
        let n = s.len();
        let a = mask_set(n, a);
        let b = mask_set(n, b).difference(&a);
        prop_assert_eq!(
            s.measure_of(&a.union(&b)).unwrap(),
            s.measure_of(&a).unwrap() + s.measure_of(&b).unwrap()
        );
    }

    #[test]
    fn measure_is_additive_to_rounding(w in weights(40), a in any::<u64>(), b in any::<u64>()) {
        let s = space(&w);
        let n = s.len();
        let a = mask_set(n, a);
        let b = mask_set(n, b).difference(&a);
        let whole = s.measure_of(&a.union(&b)).unwrap();
        let parts = s.measure_of(&a).unwrap() + s.measure_of(&b).unwrap();
        // both sides are correctly rounded sums; the right side adds one rounding
        prop_assert!((whole - parts).abs() <= f64::EPSILON * whole);
    }

    #[test]
    fn disjointify_preserves_values(
        n in 1usize..12,
        terms in prop::collection::vec((-4i32..=4, -4i32..=4, any::<u64>()), 0..8),
    ) {
        let mut f = SimpleFunction::new(n);
        for (re, im, mask) in terms {
            f.push(c(f64::from(re), f64::from(im)), mask_set(n, mask)).unwrap();
        }
        let d = f.disjointify();
        let parts: Vec<MeasurableSet> = d.terms().iter().map(|(_, s)| s.clone()).collect();
        prop_assert!(check_pairwise_disjoint(&parts).is_ok());
        for x in 0..n {
            prop_assert_eq!(d.eval(x), f.eval(x));
        }
        let again = d.disjointify();
        prop_assert_eq!(again.terms(), d.terms());
    }

    #[test]
    fn gram_matrices_are_psd(w in weights(20), masks in prop::collection::vec(any::<u64>(), 1..12)) {
        let s = space(&w);
        let sets: Vec<MeasurableSet> = masks.iter().map(|&m| mask_set(s.len(), m)).collect();
        prop_assert!(gram_psd_check(&s, &sets, DEFAULT_PSD_TOL).unwrap().psd);
    }

    #[test]
    fn partitions_never_exceed_the_norm(w in weights(7), seed in any::<u64>(), p in prop_oneof![Just(1.5), Just(2.0), Just(3.0)]) {
        let s = space(&w);
        let h = density(s.len(), seed).canonical(&s);
        let m = density_setfn(&s, &h);
        let atomic = membership_test(&s, &m, p, Mode::Atomic).unwrap().best_constant;
        let mut worst_ratio = 0.0f64;
        for_each_partition(s.len(), |blocks| {
            let parts: Vec<MeasurableSet> =
                blocks.iter().map(|&b| MeasurableSet::from_mask(s.len(), b)).collect();
            let v = partition_functional(&s, &m, &parts, p).unwrap();
            if atomic > 0.0 {
                worst_ratio = worst_ratio.max(v / atomic);
            } else {
                worst_ratio = worst_ratio.max(if v > 0.0 { f64::INFINITY } else { 0.0 });
            }
        });
        prop_assert!(worst_ratio <= 1.0 + 1e-12, "ratio {}", worst_ratio);
    }

    #[test]
    fn refinement_never_decreases(w in weights(8), seed in any::<u64>(), split in any::<u64>()) {
        let s = space(&w);
        let n = s.len();
        let h = density(n, seed).canonical(&s);
        let m = density_setfn(&s, &h);
        let whole = s.full_set();
        let left = mask_set(n, split);
        let right = whole.difference(&left);
        let coarse = partition_functional(&s, &m, &[whole], 2.0).unwrap();
        let fine = partition_functional(&s, &m, &[left, right], 2.0).unwrap();
        prop_assert!(fine >= coarse * (1.0 - 1e-12));
    }

    #[test]
    fn recovered_density_matches(w in dyadic_weights(30), seed in any::<u64>()) {
        let s = space(&w);
        // dyadic values times dyadic weights divide back exactly
        let h = DensityVector::new(
            density(s.len(), seed).values().iter()
                .map(|z| c((z.re * 64.0).round() / 64.0, (z.im * 64.0).round() / 64.0))
                .collect(),
        ).unwrap().canonical(&s);
        let report = membership_test(&s, &density_setfn(&s, &h), 2.0, Mode::Atomic).unwrap();
        prop_assert_eq!(report.recovered_density.unwrap(), h);
    }

    #[test]
    fn unitarity_and_reproducing_property(w in weights(24), seed in any::<u64>(), masks in prop::collection::vec(any::<u64>(), 1..6)) {
        let s = space(&w);
        let n = s.len();
        let g = density(n, seed);
        let m = nabla_adjoint(&s, &g).unwrap();
        prop_assert_eq!(nabla(&m), g.canonical(&s));

        let other = density(n, seed ^ 0x5555);
        let lhs = rkhs_inner(&s, &nabla_adjoint(&s, &other).unwrap(), &m).unwrap();
        let rhs = other.inner(&nabla(&m), &s).unwrap();
        prop_assert_eq!(lhs, rhs);

        for mask in masks {
            let a = mask_set(n, mask);
            let ka = nabla_adjoint(&s, &DensityVector::indicator(&a)).unwrap();
            let got = rkhs_inner(&s, &m, &ka).unwrap();
            prop_assert!(close(got, m.value(&s, &a).unwrap(), 1e-12));
        }
    }

    #[test]
    fn ito_covariance_is_measure_of_intersection(w in dyadic_weights(30), a in any::<u64>(), b in any::<u64>()) {
        let s = space(&w);
        let n = s.len();
        let (a, b) = (mask_set(n, a), mask_set(n, b));
        let cov = expectation_product(&brownian_rv(&s, &a).unwrap(), &brownian_rv(&s, &b).unwrap()).unwrap();
        let want = s.measure_of(&a.intersection(&b)).unwrap();
        prop_assert!(close(cov, c(want, 0.0), 4.0 * f64::EPSILON));
    }

    #[test]
    fn v_adjoint_inverts_v(w in weights(30), seed in any::<u64>()) {
        let s = space(&w);
        let f = density(s.len(), seed);
        let back = v_adjoint(&s, &ito_integral(&s, &f).unwrap()).unwrap();
        let want = f.canonical(&s);
        for x in 0..s.len() {
            prop_assert!(close(back[x], want[x], 4.0 * f64::EPSILON));
        }
    }

    #[test]
    fn v_v_adjoint_is_the_projection(w in weights(30), seed in any::<u64>()) {
        let s = space(&w);
        let psi = GaussianElement::new(density(s.len(), seed).into_values());
        let round = ito_integral(&s, &v_adjoint(&s, &psi).unwrap()).unwrap();
        let q = q_mu_project(&s, &psi).unwrap();
        for (x, y) in round.coeffs().iter().zip(q.coeffs()) {
            prop_assert!(close(*x, *y, 4.0 * f64::EPSILON));
        }
        // on weights 4^k the square roots are powers of two and the round trip is exact
        let squares: Vec<f64> = w
            .iter()
            .map(|&v| if v == 0.0 { 0.0 } else { 4f64.powi(v as i32 % 4 - 1) })
            .collect();
        let s = space(&squares);
        let round = ito_integral(&s, &v_adjoint(&s, &psi).unwrap()).unwrap();
        prop_assert_eq!(round, q_mu_project(&s, &psi).unwrap());
    }

    #[test]
    fn t_mu_factors_and_projects(w in weights(30), seed in any::<u64>(), mask in any::<u64>()) {
        let s = space(&w);
        let psi = GaussianElement::new(density(s.len(), seed).into_values());
        let t = t_mu(&s, &psi).unwrap();
        let via = nabla_adjoint(&s, &v_adjoint(&s, &psi).unwrap()).unwrap();
        let a = mask_set(s.len(), mask);
        prop_assert_eq!(t.value(&s, &a).unwrap(), via.value(&s, &a).unwrap());

        let back = t_mu_adjoint(&s, &t).unwrap();
        let q = q_mu_project(&s, &psi).unwrap();
        for (x, y) in back.coeffs().iter().zip(q.coeffs()) {
            prop_assert!(close(*x, *y, 4.0 * f64::EPSILON));
        }
    }

    #[test]
    fn equivalent_pairs_give_identical_integrals(
        nu in dyadic_weights(20),
        scales in prop::collection::vec((0i32..=3, 0i32..=3), 20),
        seed in any::<u64>(),
    ) {
        // ρᵢ = 4^kᵢ, so √ρᵢ = 2^kᵢ exactly and the witness f₂ = f₁·2^(k₁−k₂) is exact
        let n = nu.len();
        let rho1: Vec<f64> = scales[..n].iter().map(|&(k, _)| 4f64.powi(k)).collect();
        let rho2: Vec<f64> = scales[..n].iter().map(|&(_, k)| 4f64.powi(k)).collect();
        let fam = MeasureFamily::new(space(&nu), vec![rho1, rho2]).unwrap();
        let f1 = density(n, seed);
        let f2 = DensityVector::new(
            (0..n).map(|x| f1[x] * 2f64.powi(scales[x].0 - scales[x].1)).collect(),
        ).unwrap();
        prop_assert!(kfcalc_core::multi::uhs_equivalent(
            &fam, &UhsClass::new(f1.clone(), 0), &UhsClass::new(f2.clone(), 1), 0.0
        ).unwrap());
        prop_assert_eq!(joint_ito(&fam, 0, &f1).unwrap(), joint_ito(&fam, 1, &f2).unwrap());
    }

    #[test]
    fn cross_cov_is_symmetric(nu in weights(20), seed in any::<u64>(), a in any::<u64>(), b in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let n = nu.len();
        let fam = MeasureFamily::new(
            space(&nu),
            (0..2).map(|_| kfcalc_core::random::random_weights(&mut r, n, 0.3)).collect(),
        ).unwrap();
        let (a, b) = (mask_set(n, a), mask_set(n, b));
        prop_assert_eq!(
            cross_cov(&fam, 0, 1, &a, &b).unwrap(),
            cross_cov(&fam, 1, 0, &b, &a).unwrap()
        );
    }

    #[test]
    fn singular_iff_singleton_covariances_vanish(nu in weights(10), seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let n = nu.len();
        let fam = MeasureFamily::new(
            space(&nu),
            (0..2).map(|_| kfcalc_core::random::random_weights(&mut r, n, 0.5)).collect(),
        ).unwrap();
        let all_zero = (0..n).all(|x| (0..n).all(|y| {
            cross_cov(&fam, 0, 1, &MeasurableSet::singleton(n, x), &MeasurableSet::singleton(n, y)).unwrap() == 0.0
        }));
        prop_assert_eq!(mutually_singular(&fam, 0, 1).unwrap(), all_zero);
    }

    #[test]
    fn anticipation_implies_chain_rule(p in prop::collection::vec(0u64..8, 3), seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let densities = p.iter().map(|&bits| {
            (0..3).map(|x| if (bits >> x) & 1 == 1 {
                kfcalc_core::random::random_weights(&mut r, 1, 0.0)[0] + 0.1
            } else { 0.0 }).collect()
        }).collect();
        let fam = MeasureFamily::new(space(&[1.0, 2.0, 0.5]), densities).unwrap();
        if anticipating_check(&fam, 1, 2).unwrap() {
            for l in 0..3 {
                prop_assert!(chain_rule_check(&fam, l, 1, 2, 1e-12).unwrap().holds);
            }
        }
    }

    #[test]
    fn composition_is_an_isometry(seed in any::<u64>(), n in 1usize..24, collapse in any::<bool>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (s, sigma) = random_invariant_pair(&mut r, n, collapse);
        let f = density(n, seed);
        let sf = compose(&s, &sigma, &f).unwrap();
        let (a, b) = (sf.norm_sq(&s).unwrap(), f.norm_sq(&s).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a.max(b));

        // S*S = I off null atoms
        let back = s_adjoint(&s, &sigma, &sf).unwrap();
        for x in (0..n).filter(|&x| !s.is_null(x)) {
            prop_assert!(close(back[x], f[x], 4.0 * f64::EPSILON));
        }
    }

    #[test]
    fn pushforward_is_additive(seed in any::<u64>(), n in 1usize..16, a in any::<u64>(), b in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (s, sigma) = random_invariant_pair(&mut r, n, true);
        let g = density(n, seed);
        let m = pushforward_setfn(&s, &sigma, &g).unwrap();
        let a = mask_set(n, a);
        let b = mask_set(n, b).difference(&a);
        let whole = m.value(&s, &a.union(&b)).unwrap();
        let parts = m.value(&s, &a).unwrap() + m.value(&s, &b).unwrap();
        prop_assert!(close(whole, parts, 4.0 * f64::EPSILON) || (whole - parts).norm() <= 1e-15);
    }
}

#[test]
fn certified_members_round_trip() {
    let s = space(&[0.5, 0.0, 2.0]);
    let m = density_setfn(&s, &DensityVector::from_real(&[2.0, 0.0, -1.0]).unwrap());
    let h = HmuElement::certify(&s, &m).unwrap();
    assert_eq!(h.norm_sq(), 4.0);
    assert_eq!(nabla_adjoint(&s, &nabla(&h)).unwrap(), h);
}
