//! FFT values against direct quadrature, grid refinement and the nested
//! jump-sensitivity oracle.

use num_complex::Complex64;
use qhedge::{FourierEngine, FourierGrid, Interpolation, Kernel, LevyModel, MmmTransform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn calibrated_model() -> LevyModel {
    LevyModel::variance_gamma(6.7910, 30.1807, 33.1507, 2000.0, 1.0).unwrap()
}

fn engine(model: LevyModel, grid: FourierGrid) -> FourierEngine {
    FourierEngine::new(MmmTransform::new(model).unwrap(), grid).unwrap()
}

fn close(a: f64, b: f64, tol: f64, scale: f64) -> bool {
    (a - b).abs() <= tol * scale
}

#[test]
fn batch_matches_adaptive_quadrature_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let vg = engine(calibrated_model(), FourierGrid::default());
    let jd = engine(
        LevyModel::jump_diffusion(0.2, 1.0, -0.05, 0.1, 100.0, 1.0).unwrap(),
        FourierGrid::default(),
    );
    for _ in 0..20 {
        let (e, s0) = if rng.random_bool(0.5) { (&vg, 2000.0) } else { (&jd, 100.0) };
        let s = s0 * rng.random_range(0.85..1.15);
        let tau = rng.random_range(0.25..1.0);
        let strike = s * rng.random_range(-0.15f64..0.15).exp();
        let v = e.batch_over_strikes(s, tau, &[strike]).unwrap()[0];
        let h = e.quadrature_value(Kernel::Call, s, tau, strike).unwrap();
        let i = e.quadrature_value(Kernel::Exercise, s, tau, strike).unwrap();
        let k = e.quadrature_value(Kernel::Jump, s, tau, strike).unwrap();
        assert!(close(v.h, h, 1e-6, h), "H {s} {tau} {strike}: {} {h}", v.h);
        assert!(close(v.i, i, 1e-6, i.abs().max(1e-12)), "I {s} {tau} {strike}: {} {i}", v.i);
        assert!(close(v.k, k, 1e-6, k.abs()), "K {s} {tau} {strike}: {} {k}", v.k);
    }
}

#[test]
fn strike_ladder_matches_direct_quadrature() {
    let e = engine(calibrated_model(), FourierGrid::default());
    let strikes: Vec<f64> = (0..21).map(|i| 1500.0 + 50.0 * i as f64).collect();
    let batch = e.batch_over_strikes(2000.0, 0.5, &strikes).unwrap();
    assert_eq!(batch.len(), 21);
    for v in &batch {
        let h = e.quadrature_value(Kernel::Call, 2000.0, 0.5, v.strike).unwrap();
        let k = e.quadrature_value(Kernel::Jump, 2000.0, 0.5, v.strike).unwrap();
        assert!(close(v.h, h, 1e-6, h), "{} {h}", v.h);
        assert!(close(v.k, k, 1e-6, k), "{} {k}", v.k);
    }
}

#[test]
fn grid_refinement_changes_little() {
    let base = FourierGrid::default();
    let fine = FourierGrid {
        n: base.n * 2,
        eta: base.eta / 2.0,
        ..base
    };
    let a = engine(calibrated_model(), base);
    let b = engine(calibrated_model(), fine);
    let strikes: Vec<f64> = (0..21).map(|i| 1500.0 + 50.0 * i as f64).collect();
    for tau in [0.25, 0.5, 1.0] {
        let va = a.batch_over_strikes(2000.0, tau, &strikes).unwrap();
        let vb = b.batch_over_strikes(2000.0, tau, &strikes).unwrap();
        for (x, y) in va.iter().zip(&vb) {
            assert!(close(x.h, y.h, 1e-7, y.h), "tau {tau} K {}: {} {}", x.strike, x.h, y.h);
            assert!(close(x.k, y.k, 1e-7, y.k), "tau {tau} K {}: {} {}", x.strike, x.k, y.k);
        }
    }
}

#[test]
fn exact_and_cubic_interpolation_agree() {
    let cubic = engine(calibrated_model(), FourierGrid::default());
    let exact = engine(
        calibrated_model(),
        FourierGrid {
            interpolation: Interpolation::Exact,
            ..FourierGrid::default()
        },
    );
    let strikes = [1525.0, 1987.3, 2222.2];
    let a = cubic.batch_over_strikes(2010.0, 0.7, &strikes).unwrap();
    let b = exact.batch_over_strikes(2010.0, 0.7, &strikes).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!(close(x.h, y.h, 1e-8, y.h));
        assert!(close(x.k, y.k, 1e-8, y.k));
    }
}

/// `K = ∫ (C(S e^z) - C(S)) (e^z - 1) ν(dz)` with `C` the call value: the
/// jump sensitivity as a spot-shifted call, integrated over jump sizes.
fn nested_k(e: &FourierEngine, s: f64, tau: f64, strike: f64) -> f64 {
    let base = e.call_value(s, tau, strike).unwrap();
    e.transform()
        .model()
        .integrate_jumps(
            |z| {
                let shifted = e.call_value(s * z.exp(), tau, strike).unwrap();
                Complex64::new((shifted - base) * z.exp_m1(), 0.0)
            },
            0.0,
            2.0,
        )
        .value
        .re
}

#[test]
fn jump_kernel_matches_nested_oracle() {
    let e = engine(calibrated_model(), FourierGrid::default());
    for (tau, strike) in [(0.5, 2000.0), (0.25, 1800.0), (1.0, 2200.0)] {
        let k = e.compute_k(2000.0, tau, strike).unwrap();
        let oracle = nested_k(&e, 2000.0, tau, strike);
        assert!(close(k, oracle, 1e-6, oracle), "tau {tau} K {strike}: {k} {oracle}");
    }
}

#[test]
fn jump_diffusion_kernels_match_nested_oracle() {
    let e = engine(
        LevyModel::jump_diffusion(0.2, 1.0, -0.05, 0.1, 100.0, 1.0).unwrap(),
        FourierGrid::default(),
    );
    let k = e.compute_k(100.0, 0.5, 105.0).unwrap();
    let oracle = nested_k(&e, 100.0, 0.5, 105.0);
    assert!(close(k, oracle, 1e-6, oracle.abs()), "{k} {oracle}");
}

#[test]
fn pure_diffusion_lrm_is_black_scholes_delta() {
    use statrs::distribution::{ContinuousCDF, Normal};
    let phi = Normal::new(0.0, 1.0).unwrap();
    let sigma = 0.25;
    let e = engine(
        LevyModel::pure_diffusion(sigma, 100.0, 1.0).unwrap().with_mu_log(0.04),
        FourierGrid::default(),
    );
    for (s, tau, k) in [(100.0f64, 1.0f64, 100.0f64), (95.0, 0.3, 110.0), (130.0, 0.6, 90.0)] {
        let d1 = ((s / k).ln() + 0.5 * sigma * sigma * tau) / (sigma * tau.sqrt());
        let xi = qhedge::lrm_ratio(&e, s, tau, k).unwrap();
        assert!((xi - phi.cdf(d1)).abs() < 1e-4);
    }
}

/// `E[(e^X - e^k)^+]` and `E[e^X 1{X > k}]` for `X ~ N(mu, v)`.
fn gaussian_call(k: f64, mu: f64, v: f64) -> (f64, f64) {
    use statrs::distribution::{ContinuousCDF, Normal};
    if v <= 0.0 {
        return ((mu.exp() - k.exp()).max(0.0), if mu > k { mu.exp() } else { 0.0 });
    }
    let phi = Normal::new(0.0, 1.0).unwrap();
    let sd = v.sqrt();
    let d1 = (mu + v - k) / sd;
    let forward = (mu + 0.5 * v).exp();
    let exercise = forward * phi.cdf(d1);
    (exercise - k.exp() * phi.cdf(d1 - sd), exercise)
}

/// Under P* the calibrated model is `b* τ` plus two independent VG laws, each a
/// Brownian motion with drift run on a gamma clock. Conditional on the two
/// clocks the log-return is Gaussian, so the call is a two-dimensional
/// mixture of Gaussian calls, integrated here over `log Γ`.
fn vg_mixture_call(model: &LevyModel, tau: f64, k: f64) -> f64 {
    use qhedge::quadrature::{integrate_real, Tolerance};
    use qhedge::JumpMeasure;
    use statrs::function::gamma::{gamma_lr, ln_gamma};
    let tr = MmmTransform::new(*model).unwrap();
    let JumpMeasure::VarianceGamma { c, g, m } = model.jumps() else { unreachable!() };
    let c0 = tr.c0();
    let drift = -tr.jump_transform_star(Complex64::new(1.0, 0.0)).re;
    let clock = |cc: f64, g: f64, m: f64| {
        // (shape, scale, mean per unit clock, variance per unit clock)
        (cc * tau, 1.0 / cc, cc * (1.0 / m - 1.0 / g), 2.0 * cc / (g * m))
    };
    let parts = [clock(c * (1.0 + c0), g, m), clock(-c0 * c, g + 1.0, m - 1.0)];
    let tol = Tolerance { abs: 1e-15, rel: 1e-12, max_intervals: 4000 };
    let eps: f64 = 1e-30;
    // E f(Γ) = f(0) P(Γ ≤ ε) + ∫_{log ε} f(e^t) p(e^t) e^t dt
    let expect = |(a, theta, _, _): (f64, f64, f64, f64), f: &dyn Fn(f64) -> f64| {
        let norm = -a * theta.ln() - ln_gamma(a);
        let body = integrate_real(
            |t: f64| f(t.exp()) * (a * t - t.exp() / theta + norm).exp(),
            eps.ln(),
            (theta * (a + 60.0)).ln(),
            tol,
        )
        .0;
        f(0.0) * gamma_lr(a, eps / theta) + body
    };
    let (p1, p2) = (parts[0], parts[1]);
    expect(p2, &|x2: f64| {
        expect(p1, &|x1: f64| {
            let mu = drift * tau + p1.2 * x1 + p2.2 * x2;
            gaussian_call(k, mu, p1.3 * x1 + p2.3 * x2).0
        })
    })
}

#[test]
fn short_maturity_vg_matches_gamma_clock_mixture() {
    let model = calibrated_model();
    let e = engine(model, FourierGrid::default());
    for tau in [1.0 / 250.0, 5.0 / 250.0, 0.1] {
        let table = e.table(tau).unwrap();
        assert!(table.uses_contour(), "tau {tau}");
        for k in [-0.08, -0.01, 0.0, 0.004, 0.03] {
            let oracle = vg_mixture_call(&model, tau, k);
            let strike = 2000.0 * f64::exp(k);
            let claim = qhedge::ClaimSpec::call(strike, 1.0).unwrap();
            let v = e.values_from_table(&table, &claim, 2000.0).unwrap();
            let single = e.call_value(2000.0, tau, strike).unwrap();
            assert!(close(v.h, 2000.0 * oracle, 1e-8, 2000.0 * oracle), "tau {tau} k {k}: {} {}", v.h, 2000.0 * oracle);
            assert_eq!(v.h, single);
            let nested = nested_k(&e, 2000.0, tau, strike);
            assert!(close(v.k, nested, 1e-7, nested.abs()), "tau {tau} k {k}: {} {nested}", v.k);
        }
    }
}

/// Merton under P*: two compound Poisson parts with normal jumps, so given
/// the jump counts the log-return is Gaussian.
fn merton_mixture(model: &LevyModel, tau: f64, k: f64) -> (f64, f64) {
    use qhedge::JumpMeasure;
    let tr = MmmTransform::new(*model).unwrap();
    let JumpMeasure::Normal { rate, mean, sd } = model.jumps() else { unreachable!() };
    let c0 = tr.c0();
    let sigma = model.sigma();
    let drift = -0.5 * sigma * sigma - tr.jump_transform_star(Complex64::new(1.0, 0.0)).re;
    let l1 = (1.0 + c0) * rate * tau;
    let l2 = -c0 * rate * (mean + 0.5 * sd * sd).exp() * tau;
    let pois = |l: f64, n: usize| (-l + n as f64 * l.ln() - statrs::function::gamma::ln_gamma(n as f64 + 1.0)).exp();
    let (mut h, mut x) = (0.0, 0.0);
    for n1 in 0..40 {
        for n2 in 0..40 {
            let p = pois(l1, n1) * pois(l2, n2);
            let mu = drift * tau + n1 as f64 * mean + n2 as f64 * (mean + sd * sd);
            let v = sigma * sigma * tau + (n1 + n2) as f64 * sd * sd;
            let (c, ex) = gaussian_call(k, mu, v);
            h += p * c;
            x += p * ex;
        }
    }
    (h, x)
}

#[test]
fn short_maturity_merton_matches_poisson_mixture() {
    use qhedge::quadrature::{integrate_real, Tolerance};
    let model = LevyModel::jump_diffusion(0.03, 1.0, -0.05, 0.1, 100.0, 1.0)
        .unwrap()
        .with_drift(qhedge::LogDrift::Rate(-0.01));
    assert!(model.validate().ok);
    let e = engine(model, FourierGrid::default());
    let tol = Tolerance { abs: 1e-15, rel: 1e-12, max_intervals: 4000 };
    for tau in [1.0 / 250.0, 0.02] {
        assert!(e.table(tau).unwrap().uses_contour());
        for k in [-0.05, -0.002, 0.0, 0.01, 0.2] {
            let strike = 100.0 * f64::exp(k);
            let v = e.batch_over_strikes(100.0, tau, &[strike]).unwrap()[0];
            let (h, x) = merton_mixture(&model, tau, k);
            assert!(close(v.h, 100.0 * h, 1e-9, 100.0), "tau {tau} k {k}: {} {}", v.h, 100.0 * h);
            assert!(close(v.i, 0.03 * 100.0 * x, 1e-9, 100.0), "tau {tau} k {k}");
            // K = ∫ (e^z H(k - z) - H(k)) (e^z - 1) ν(dz), per unit spot.
            let jump = integrate_real(
                |z| {
                    let shifted = z.exp() * merton_mixture(&model, tau, k - z).0;
                    (shifted - h) * z.exp_m1() * model.jump_density(z)
                },
                -1.5,
                1.5,
                tol,
            )
            .0;
            assert!(close(v.k, 100.0 * jump, 1e-9, 100.0), "tau {tau} k {k}: {} {}", v.k, 100.0 * jump);
        }
    }
}
