//! Closed-form jump transforms against adaptive quadrature of the ν-integrals.

use num_complex::Complex64;
use proptest::prelude::*;
use qhedge::quadrature::{expm1, expm1_minus_linear};
use qhedge::{LevyModel, LogDrift, MmmTransform, Violation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A random model that passes validation, either family.
fn random_valid(rng: &mut ChaCha8Rng) -> LevyModel {
    loop {
        let model = if rng.random_bool(0.6) {
            LevyModel::variance_gamma(
                rng.random_range(0.5..20.0),
                rng.random_range(5.0..60.0),
                rng.random_range(6.0..60.0),
                rng.random_range(10.0..5000.0),
                rng.random_range(0.1..3.0),
            )
            .unwrap()
            .with_sigma(if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.05..0.4) })
            .unwrap()
        } else {
            LevyModel::jump_diffusion(
                rng.random_range(0.05..0.4),
                rng.random_range(0.1..5.0),
                rng.random_range(-0.2..0.1),
                rng.random_range(0.02..0.3),
                rng.random_range(10.0..5000.0),
                rng.random_range(0.1..3.0),
            )
            .unwrap()
        };
        let model = model.with_drift(LogDrift::Rate(rng.random_range(-0.3..0.1)));
        if model.validate().ok {
            return model;
        }
    }
}

fn random_in_strip(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> Complex64 {
    let lo = lo.max(-8.0) + 0.5;
    let hi = hi.min(8.0) - 0.5;
    c(rng.random_range(lo..hi), rng.random_range(-30.0..30.0))
}

fn rel(a: Complex64, b: Complex64, scale: f64) -> f64 {
    (a - b).norm() / scale
}

#[test]
fn martingale_normalization_on_random_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let tr = MmmTransform::new(random_valid(&mut rng)).unwrap();
        assert!(tr.char_exponent(c(1.0, 0.0)).unwrap().norm() < 1e-12);
        assert!(tr.char_exponent(c(0.0, 0.0)).unwrap().norm() < 1e-12);
    }
}

#[test]
fn moments_match_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let model = random_valid(&mut rng);
        let m = model.levy_moments().unwrap();
        let jump = model
            .integrate_jumps(|z| expm1_minus_linear(c(z, 0.0)), 0.0, 1.0)
            .value
            .re;
        let half_var = 0.5 * model.sigma() * model.sigma();
        let mu = model.mu_log();
        let oracle_mu = mu + half_var + jump;
        // Relative to the size of the terms being summed.
        let scale = mu.abs() + half_var + jump.abs();
        assert!((m.mu_s - oracle_mu).abs() < 1e-8 * scale, "{model:?}");
        let oracle_gamma = model
            .integrate_jumps(|z| c(z.exp_m1().powi(2), 0.0), 0.0, 2.0)
            .value
            .re;
        assert!((m.gamma - oracle_gamma).abs() < 1e-8 * oracle_gamma, "{model:?}");
    }
}

#[test]
fn exponents_match_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let model = random_valid(&mut rng);
        let tr = MmmTransform::new(model).unwrap();
        let s2 = model.sigma() * model.sigma();

        let w = random_in_strip(&mut rng, model.strip());
        let jump = model
            .integrate_jumps(|z| expm1_minus_linear(w * z), w.re.min(0.0), w.re.max(0.0))
            .value;
        let oracle = w * model.mu_log() + w * w * (0.5 * s2) + jump;
        let closed = model.char_exponent(w).unwrap();
        assert!(rel(closed, oracle, oracle.norm()) < 1e-8, "psi {w}: {closed} {oracle}");

        let w = random_in_strip(&mut rng, tr.strip());
        let jump = model
            .integrate_jumps(
                |z| (expm1_minus_linear(w * z) - w * expm1_minus_linear(c(z, 0.0))) * tr.density_factor(z),
                w.re.min(0.0),
                w.re.max(1.0) + 1.0,
            )
            .value;
        let oracle = (w * w - w) * (0.5 * s2) + jump;
        let closed = tr.char_exponent(w).unwrap();
        assert!(rel(closed, oracle, oracle.norm()) < 1e-8, "psi* {w}: {closed} {oracle}");

        let w = random_in_strip(&mut rng, tr.gamma_hat_strip());
        let oracle = model
            .integrate_jumps(|z| expm1(w * z) * z.exp_m1(), w.re.min(0.0), w.re.max(0.0) + 1.0)
            .value;
        let closed = tr.gamma_hat(w).unwrap();
        assert!(rel(closed, oracle, oracle.norm()) < 1e-8, "gamma_hat {w}: {closed} {oracle}");
    }
}

#[test]
fn measure_change_at_two_matches_quadrature() {
    // E*[(S_T/S_0)^2] = exp(T ψ*(2)); the exponent against ∫ … ν*(dz).
    let model = LevyModel::variance_gamma(6.7910, 30.1807, 33.1507, 2000.0, 1.0).unwrap();
    let tr = MmmTransform::new(model).unwrap();
    let w = c(2.0, 0.0);
    let oracle = model
        .integrate_jumps(
            |z| (expm1_minus_linear(w * z) - w * expm1_minus_linear(c(z, 0.0))) * tr.density_factor(z),
            0.0,
            3.0,
        )
        .value;
    assert!((tr.char_exponent(w).unwrap() - oracle).norm() < 1e-10 * oracle.norm());
}

#[test]
fn fourth_moment_check_is_monotone_in_m() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let (cc, g) = (rng.random_range(0.5..10.0), rng.random_range(2.0..50.0));
        let m = rng.random_range(2.5..8.0);
        let fails = |m: f64| {
            let model = LevyModel::variance_gamma(cc, g, m, 100.0, 1.0).unwrap();
            model
                .validate()
                .violations
                .iter()
                .any(|v| matches!(v, Violation::FourthMoment { .. } | Violation::MomentsUndefined { .. }))
        };
        if !fails(m) {
            for bump in [0.1, 1.0, 10.0, 100.0] {
                assert!(!fails(m + bump));
            }
        }
    }
}

#[test]
fn jump_bound_is_not_monotone_in_m() {
    // With the natural drift, μ^S → -C/G... as M grows, so c0 leaves (-1, 0]:
    // a model passing at one M can fail at a larger one.
    let pass = LevyModel::variance_gamma(6.7910, 30.1807, 33.1507, 2000.0, 1.0).unwrap();
    assert!(pass.validate().ok);
    let fail = LevyModel::variance_gamma(6.7910, 30.1807, 1000.0, 2000.0, 1.0).unwrap();
    assert!(!fail.validate().ok);
}

proptest! {
    #[test]
    fn exponents_respect_conjugation(
        re in -5.0f64..5.0,
        im in -50.0f64..50.0,
        cc in 0.5f64..10.0,
        g in 10.0f64..40.0,
        m in 10.0f64..40.0,
    ) {
        let model = LevyModel::variance_gamma(cc, g, m, 1.0, 1.0).unwrap().with_drift(LogDrift::Rate(-0.1));
        let w = c(re, im);
        let a = model.char_exponent(w.conj()).unwrap();
        let b = model.char_exponent(w).unwrap().conj();
        prop_assert!((a - b).norm() <= 1e-14 * b.norm().max(1.0));
        if let Ok(tr) = MmmTransform::new(model) {
            let a = tr.char_exponent(w.conj()).unwrap();
            let b = tr.char_exponent(w).unwrap().conj();
            prop_assert!((a - b).norm() <= 1e-14 * b.norm().max(1.0));
        }
    }

    #[test]
    fn density_factor_positive_when_valid(
        cc in 0.5f64..10.0,
        g in 5.0f64..40.0,
        m in 5.0f64..40.0,
        mu in -0.5f64..0.2,
    ) {
        let model = LevyModel::variance_gamma(cc, g, m, 1.0, 1.0).unwrap().with_mu_log(mu);
        if let Ok(tr) = MmmTransform::new(model) {
            // ±20 jump-size scales, log-spaced toward zero.
            let scale = 1.0 / g.min(m);
            for k in 0..=200 {
                let z = 20.0 * scale * 10f64.powf(-6.0 + 6.0 * k as f64 / 200.0);
                prop_assert!(tr.density_factor(z) > 0.0);
                prop_assert!(tr.density_factor(-z) > 0.0);
            }
        }
    }
}
