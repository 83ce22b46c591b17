//! Cross-module invariants and property tests.
#![allow(clippy::needless_range_loop)]

use loewner_core::circle::FourierField;
use loewner_core::grunsky::{faber_grunsky_residual, grunsky_disc, grunsky_infinity};
use loewner_core::loewner::{normalized_affine_coords, radial_flow, HerglotzMeasure};
use loewner_core::scalar::{max_abs_diff, rat, Coeff, Rat, C64};
use loewner_core::series::{TruncatedLaurentInf, TruncatedTaylor};
use loewner_core::sle::{closed_form_chordal, hierarchy_ensemble, EnsembleConfig, Observable};
use proptest::prelude::*;

fn rat_series(coeffs: &[i32], order: usize) -> TruncatedTaylor<Rat> {
    let mut f = TruncatedTaylor::constant(Rat::zero(), order);
    f.set_coeff(1, Rat::one());
    for (i, &c) in coeffs.iter().enumerate() {
        if i + 2 <= order {
            f.set_coeff(i + 2, rat(c as i64, 1));
        }
    }
    f
}

fn small_coeffs(len: usize) -> impl Strategy<Value = Vec<i32>> {
    proptest::collection::vec(-4i32..=4, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn compose_is_associative(a in small_coeffs(10), b in small_coeffs(10), c in small_coeffs(10)) {
        let n = 12;
        let f = rat_series(&a, n);
        let g = rat_series(&b, n);
        let h = rat_series(&c, n);
        let left = f.compose(&g).unwrap().compose(&h).unwrap();
        let right = f.compose(&g.compose(&h).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn reversion_is_two_sided_inverse(a in small_coeffs(11)) {
        let n = 12;
        let f = rat_series(&a, n);
        let inv = f.reversion().unwrap();
        let id = TruncatedTaylor::<Rat>::identity(n);
        prop_assert_eq!(f.compose(&inv).unwrap(), id.clone());
        prop_assert_eq!(inv.compose(&f).unwrap(), id);
    }

    #[test]
    fn exp_log_round_trip_exact(a in small_coeffs(10)) {
        let n = 11;
        let f = rat_series(&a, n);
        // f/z is a unit series; exp(log(f/z)) * z = f.
        let ratio = TruncatedTaylor::from_coeffs(
            (1..=n).map(|k| f.coeff(k)).collect::<Vec<_>>(),
        );
        let back = ratio.log().unwrap().exp().unwrap();
        prop_assert_eq!(back, ratio);
    }

    #[test]
    fn inversion_round_trip_exact(a in small_coeffs(9)) {
        let n = 10;
        let f = rat_series(&a, n);
        let g = f.invert_at_infinity().unwrap();
        let back = g.invert_at_origin().unwrap();
        for k in 0..=n {
            prop_assert_eq!(back.coeff(k), f.coeff(k));
        }
    }

    #[test]
    fn schwarzian_cocycle(a in small_coeffs(9), b in small_coeffs(9)) {
        // S(f∘g) = (S(f)∘g) (g')^2 + S(g), exact over the rationals.
        let n = 12;
        let f = rat_series(&a, n);
        let g = rat_series(&b, n);
        let lhs = f.compose(&g).unwrap().schwarzian().unwrap();
        let sf_g = f.schwarzian().unwrap().compose(&g.truncated(n - 3)).unwrap();
        let dg = g.derivative().truncated(n - 3);
        let rhs = sf_g.mul(&dg).mul(&dg).add(&g.schwarzian().unwrap());
        let order = lhs.order().min(rhs.order());
        prop_assert_eq!(lhs.truncated(order), rhs.truncated(order));
    }

    #[test]
    fn hilbert_and_j_square_to_minus_id(a in proptest::collection::vec(-1.0f64..1.0, 32),
                                        b in proptest::collection::vec(-1.0f64..1.0, 32)) {
        let mut v = FourierField::zero(32);
        v.a[1..=32].copy_from_slice(&a);
        v.b.copy_from_slice(&b);
        let twice = loewner_core::circle::hilbert_transform(
            &loewner_core::circle::hilbert_transform(&v),
        );
        prop_assert!(twice.add(&v).max_abs_coeff() < 1e-12);
        let jj = loewner_core::circle::complex_structure_j(
            &loewner_core::circle::complex_structure_j(&v).unwrap(),
        ).unwrap();
        prop_assert!(jj.add(&v).max_abs_coeff() < 1e-12);
    }
}

// ---------------------------------------------------------------------------
// Faber–Grunsky identities
// ---------------------------------------------------------------------------

fn c64_poly_disc(coeffs: &[f64], order: usize) -> TruncatedTaylor<C64> {
    let mut f = TruncatedTaylor::constant(C64::new(0.0, 0.0), order);
    f.set_coeff(1, C64::new(1.0, 0.0));
    for (i, &c) in coeffs.iter().enumerate() {
        if i + 2 <= order {
            f.set_coeff(i + 2, C64::new(c, 0.0));
        }
    }
    f
}

#[test]
fn faber_grunsky_identities_random_pairs() {
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    for trial in 0..20 {
        let fc: Vec<f64> = (0..5).map(|_| 0.3 * next()).collect();
        let f = c64_poly_disc(&fc, 12);
        let gb: Vec<f64> = (0..4).map(|_| 0.5 * next()).collect();
        let g = TruncatedLaurentInf::new(
            C64::new(1.0, 0.0),
            gb.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>(),
        );
        let res = faber_grunsky_residual(&f, &g, 5, 8).unwrap();
        assert!(res < 1e-10, "trial {trial}: residual {res}");
    }
}

#[test]
fn unified_b_through_inversion() {
    // For the pair (f, 1/f(1/z)) the d block coincides with the c block on
    // positive indices, tying the two single-map routes together.
    let f = c64_poly_disc(&[0.2, -0.1, 0.05, 0.02, -0.01, 0.005, 0.01, -0.005, 0.002], 24);
    let n = 6usize;
    let c = grunsky_disc(&f, n).unwrap();
    let g = f.invert_at_infinity().unwrap();
    let d = grunsky_infinity(&g, n).unwrap();
    for i in 1..=n {
        for j in 1..=n {
            assert!((c.get(i, j) - d.get(i, j)).norm() < 1e-12, "({i},{j})");
        }
    }
}

// ---------------------------------------------------------------------------
// Flow invariants
// ---------------------------------------------------------------------------

#[test]
fn radial_uniform_flow_preserves_class_s_normalization() {
    // e^t f_t stays normalized: a_1(t) e^t = 1 for the mass-one uniform flow.
    let f0 = TruncatedTaylor::<C64>::koebe(8);
    let flow = radial_flow(&f0, |_| HerglotzMeasure::uniform(1.0), 1.0, 0.25, &Default::default())
        .unwrap();
    for (t, ft) in &flow {
        let a1 = ft.coeff(1);
        assert!((a1 * C64::new(t.exp(), 0.0) - C64::new(1.0, 0.0)).norm() < 1e-9);
        // The renormalized map has coordinates c_k(t) = c_k(0) e^{-kt}.
        let c = normalized_affine_coords(ft).unwrap();
        for (k, ck) in c.iter().enumerate() {
            let expect = C64::new((k as f64 + 2.0) * (-((k + 1) as f64) * t).exp(), 0.0);
            assert!((ck - expect).norm() < 1e-8);
        }
    }
}

#[test]
fn chordal_scaling_property_at_kappa_zero() {
    // g_{λ^2 t}(λ z) = λ g_t(z) for the closed form.
    let lambda = 1.7f64;
    for &t in &[0.1, 0.5, 1.2] {
        for &(re, im) in &[(0.5, 0.8), (-1.2, 0.4), (2.0, 2.0)] {
            let z = C64::new(re, im);
            let left = closed_form_chordal(z * lambda, lambda * lambda * t);
            let right = closed_form_chordal(z, t) * lambda;
            assert!((left - right).norm() < 1e-12);
        }
    }
}

#[test]
fn euler_maruyama_weak_error_decay() {
    // |E[b_2(T)] - reference| halves (within MC error) when dt halves,
    // at kappa = 2, T = 0.5; the reference comes from the finest grid.
    let obs: Vec<Observable> = vec![Box::new(|b: &[f64]| b[2])];
    let run = |dt: f64, seed: u64| {
        hierarchy_ensemble(
            &EnsembleConfig {
                kappa: 2.0,
                seed,
                n_coeffs: 2,
                t_end: 0.5,
                dt,
                paths: 40_000,
                checkpoints: 1,
            },
            &obs,
        )
    };
    let coarse = run(4e-3, 101);
    let mid = run(2e-3, 102);
    let fine = run(5e-4, 103);
    let reference = fine.mean[0][0];
    let err_coarse = (coarse.mean[0][0] - reference).abs();
    let err_mid = (mid.mean[0][0] - reference).abs();
    let band = 3.0 * (coarse.se[0][0] + mid.se[0][0] + fine.se[0][0]);
    assert!(
        err_mid <= err_coarse / 2.0 + band,
        "halving dt did not halve the error: {err_coarse} -> {err_mid} (band {band})"
    );
}

#[test]
fn float_vs_rational_reversion_batch() {
    // A quick two-backend agreement check over a batch of random maps.
    let mut state = 42u64;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 33) as i64 % 9) - 4
    };
    for _ in 0..25 {
        let coeffs: Vec<i32> = (0..10).map(|_| next() as i32).collect();
        let fr = rat_series(&coeffs, 12);
        let fc = {
            let mut f = TruncatedTaylor::constant(C64::new(0.0, 0.0), 12);
            f.set_coeff(1, C64::new(1.0, 0.0));
            for (i, &c) in coeffs.iter().enumerate() {
                if i + 2 <= 12 {
                    f.set_coeff(i + 2, C64::new(c as f64, 0.0));
                }
            }
            f
        };
        let hr = fr.reversion().unwrap();
        let hc = fc.reversion().unwrap();
        let as_f64: Vec<C64> = hr
            .coeffs()
            .iter()
            .map(|r| C64::new(loewner_core::scalar::rat_to_f64(r), 0.0))
            .collect();
        assert!(max_abs_diff(&as_f64, hc.coeffs()) < 1e-9);
    }
}

#[test]
fn polyakov_alvarez_vanishes_on_disc_automorphisms() {
    // For a Möbius disc automorphism f(z) = (z + a)/(1 + a z) the image
    // domain is the disc itself, so the determinant-ratio exponent must
    // vanish; the boundary-energy term cancels the length term exactly.
    // Truncation tails decay like a^N, so a high order makes this sharp.
    for a in [0.2f64, 0.3, -0.25] {
        let order = 24usize;
        let mut coeffs = vec![C64::new(a, 0.0)];
        for k in 1..=order {
            coeffs.push(C64::new((-a).powi(k as i32 - 1) * (1.0 - a * a), 0.0));
        }
        let f = TruncatedTaylor::from_coeffs(coeffs);
        let pa = loewner_core::circle::polyakov_alvarez(&f).unwrap();
        assert!(
            pa.exponent.abs() < 1e-10,
            "a = {a}: exponent {} should vanish",
            pa.exponent
        );
    }
}

#[test]
fn trace_points_swallow_at_their_trace_time() {
    // gamma(t) = lim g_t^{-1}(W_t): flowing a trace point forward drives it
    // into the singularity at its trace time. For kappa <= 4 the hull has
    // empty interior, so the backward/forward discretization mismatch keeps
    // |g - W| from reaching a tight tolerance; a coarse proximity tolerance
    // captures the time consistently, while a generic far point never
    // triggers it.
    use loewner_core::sle::{chordal_map, sle_trace, ChordalOptions, Driving};
    let kappa = 2.0;
    let t_end = 0.8;
    let n_steps = 1600;
    let driving = Driving::brownian(kappa, 31, t_end / n_steps as f64, t_end);
    let trace = sle_trace(&driving, t_end, n_steps);
    let opts = ChordalOptions { swallow_tol: 0.05, ..Default::default() };
    for &frac in &[0.25f64, 0.5, 0.75] {
        let idx = (frac * n_steps as f64) as usize;
        let (t_star, gamma) = trace[idx];
        let point = chordal_map(gamma, &driving, t_end, &opts).unwrap();
        let tau = point.tau.expect("trace point must approach the singularity");
        assert!(
            (tau - t_star).abs() < 0.15 * t_star + 0.05,
            "trace time {t_star}, proximity time {tau}"
        );
    }
    let far = chordal_map(C64::new(3.0, 2.0), &driving, t_end, &opts).unwrap();
    assert!(far.tau.is_none());
}

#[test]
fn radial_flow_rotation_covariance() {
    // A slit flow driven at angle u0 is the rotation conjugate of the flow
    // driven at angle 0: a_k(t; u0) = e^{i u0 (1-k)} a_k(t; 0).
    let order = 8usize;
    let u0 = 1.1f64;
    let t_end = 0.4;
    let base = radial_flow(
        &TruncatedTaylor::<C64>::identity(order),
        |_| HerglotzMeasure::dirac(0.0, 1.0),
        t_end,
        t_end,
        &Default::default(),
    )
    .unwrap();
    let rotated = radial_flow(
        &TruncatedTaylor::<C64>::identity(order),
        |_| HerglotzMeasure::dirac(u0, 1.0),
        t_end,
        t_end,
        &Default::default(),
    )
    .unwrap();
    let f0 = &base.last().unwrap().1;
    let fu = &rotated.last().unwrap().1;
    for k in 1..=order {
        let phase = C64::new(0.0, u0 * (1.0 - k as f64)).exp();
        let expect = f0.coeff(k) * phase;
        assert!(
            (fu.coeff(k) - expect).norm() < 1e-9,
            "a_{k}: {} vs {}",
            fu.coeff(k),
            expect
        );
    }
}
