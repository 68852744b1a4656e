//! Monte Carlo estimators of `I_t` and `K_t` for Asian and lookback calls.
//!
//! Both simulate the remaining path under P* forward from `(t, S_{t-})`. A
//! jump of size `z` at `t` scales every later price by `e^z`, so the jump
//! sensitivity `J_{t,z}` is a deterministic function of the simulated path
//! and `z`; the `z`-integral of `K_t = ∫ J_{t,z} (e^z - 1) ν(dz)` is done per
//! sample on a fixed quadrature rule, and the standard error comes from the
//! per-sample values.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{path_rng, McEstimate, Measure, StepSampler};
use crate::error::{Error, Result};
use crate::levy_model::LevyModel;
use crate::mmm::MmmTransform;

/// Sample sizes for the conditional estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McSettings {
    pub n_paths: usize,
    /// Simulation steps over the remaining horizon `[t, T]`.
    pub n_steps: usize,
    pub seed: u64,
}

/// Conditioning data for `H = ((1/T) ∫_0^T S_u du - K)^+`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsianConditioning {
    pub t: f64,
    pub s_prev: f64,
    /// `A_t = (1/t) ∫_0^t S_u du`, e.g. from [`trapezoid_average`]; ignored at
    /// `t = 0`.
    pub prefix_average: f64,
}

/// Conditioning data for `H = (sup_{[0, T]} S - K)^+`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LookbackConditioning {
    pub t: f64,
    pub s_prev: f64,
    /// `M_t = sup_{u < t} S_u` (at least `s_prev`).
    pub running_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathDependentEstimate {
    /// `H_t = E*[H | F_{t-}]`.
    pub h: McEstimate,
    pub i: McEstimate,
    pub k: McEstimate,
}

/// `(1/t) ∫_0^t S_u du` by the trapezoid rule on observation dates.
pub fn trapezoid_average(times: &[f64], prices: &[f64]) -> Result<f64> {
    if times.len() != prices.len() || times.len() < 2 {
        return Err(Error::InsufficientData(
            "trapezoid average needs at least two dated prices".into(),
        ));
    }
    let span = times[times.len() - 1] - times[0];
    if !(span > 0.0) {
        return Err(Error::InvalidPath("times must increase".into()));
    }
    let area: f64 = times
        .windows(2)
        .zip(prices.windows(2))
        .map(|(t, s)| 0.5 * (t[1] - t[0]) * (s[0] + s[1]))
        .sum();
    Ok(area / span)
}

fn check_settings(mc: &McSettings) -> Result<()> {
    if mc.n_paths < 2 || mc.n_steps == 0 {
        return Err(Error::Simulation(
            "need at least two paths and one step".into(),
        ));
    }
    Ok(())
}

fn check_time(model: &LevyModel, t: f64, s_prev: f64, strike: f64) -> Result<()> {
    let maturity = model.maturity();
    if !(t >= 0.0 && t <= maturity) {
        return Err(Error::param("t", format!("must lie in [0, {maturity}], got {t}")));
    }
    if !(s_prev.is_finite() && s_prev > 0.0) {
        return Err(Error::param("s_prev", format!("must be > 0, got {s_prev}")));
    }
    if !(strike.is_finite() && strike > 0.0) {
        return Err(Error::param("strike", format!("must be > 0, got {strike}")));
    }
    Ok(())
}

/// Forward P* paths from `(t, s)`: each sample maps the remaining price grid
/// to per-sample `(h, i, k)` contributions.
fn forward<F>(model: &LevyModel, t: f64, s: f64, mc: &McSettings, f: F) -> Result<PathDependentEstimate>
where
    F: Fn(&[f64]) -> (f64, f64, f64) + Sync,
{
    check_settings(mc)?;
    let tr = MmmTransform::new(*model)?;
    let sampler = StepSampler::new(&tr, Measure::Pstar)?;
    let remaining = model.maturity() - t;
    let steps = if remaining > 0.0 { mc.n_steps } else { 0 };
    let dt = if steps > 0 { remaining / steps as f64 } else { 0.0 };
    let samples: Vec<Result<(f64, f64, f64)>> = (0..mc.n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = path_rng(mc.seed, p);
            let mut path = Vec::with_capacity(steps + 1);
            let mut x = 0.0;
            path.push(s);
            for _ in 0..steps {
                x += sampler.step(&mut rng, dt)?.dx;
                path.push(s * x.exp());
            }
            Ok(f(&path))
        })
        .collect();
    let samples = samples.into_iter().collect::<Result<Vec<_>>>()?;
    let pick = |sel: fn(&(f64, f64, f64)) -> f64| {
        McEstimate::from_samples(&samples.iter().map(sel).collect::<Vec<_>>())
    };
    Ok(PathDependentEstimate {
        h: pick(|x| x.0),
        i: pick(|x| x.1),
        k: pick(|x| x.2),
    })
}

/// Jump rule `(e^z, (e^z - 1) × weight)` for the `z`-integral of `K_t`.
fn jump_nodes(model: &LevyModel) -> Vec<(f64, f64)> {
    model
        .jump_rule(2.0)
        .into_iter()
        .map(|(z, w)| (z.exp(), z.exp_m1() * w))
        .collect()
}

/// `I_t`, `K_t` (and `H_t`) for an Asian call conditional on `F_{t-}`.
///
/// `V_t = (1/T) ∫_t^T S_u du` is integrated by the trapezoid rule on the
/// simulation grid, and `V_0 = (t/T) A_t + V_t`.
pub fn asian_ij(
    model: &LevyModel,
    cond: &AsianConditioning,
    strike: f64,
    mc: &McSettings,
) -> Result<PathDependentEstimate> {
    check_time(model, cond.t, cond.s_prev, strike)?;
    let maturity = model.maturity();
    let prefix = if cond.t > 0.0 {
        cond.t / maturity * cond.prefix_average
    } else {
        0.0
    };
    let sigma = model.sigma();
    let nodes = jump_nodes(model);
    let remaining = maturity - cond.t;
    forward(model, cond.t, cond.s_prev, mc, |path| {
        let n = path.len() - 1;
        let v = if n == 0 {
            0.0
        } else {
            let dt = remaining / n as f64;
            let inner: f64 = path.windows(2).map(|w| 0.5 * (w[0] + w[1])).sum();
            inner * dt / maturity
        };
        let v0 = prefix + v;
        let base = (v0 - strike).max(0.0);
        let i = if sigma > 0.0 && v0 > strike { sigma * v } else { 0.0 };
        let k: f64 = nodes
            .iter()
            .map(|&(ez, w)| ((prefix + ez * v - strike).max(0.0) - base) * w)
            .sum();
        (base, i, k)
    })
}

/// `I_t`, `K_t` (and `H_t`) for a fixed-strike lookback call conditional on
/// `F_{t-}`.
///
/// The remaining supremum is the maximum over the simulation grid, biased low
/// by the discrete monitoring. With `σ > 0`, `I_t` involves the time the
/// supremum is attained; that branch is not implemented.
pub fn lookback_ij(
    model: &LevyModel,
    cond: &LookbackConditioning,
    strike: f64,
    mc: &McSettings,
) -> Result<PathDependentEstimate> {
    check_time(model, cond.t, cond.s_prev, strike)?;
    if model.sigma() > 0.0 {
        return Err(Error::Unsupported(
            "lookback I_t with a Brownian component".into(),
        ));
    }
    if !(cond.running_max >= cond.s_prev) {
        return Err(Error::param(
            "running_max",
            format!("must be at least s_prev = {}, got {}", cond.s_prev, cond.running_max),
        ));
    }
    let m_t = cond.running_max;
    let nodes = jump_nodes(model);
    forward(model, cond.t, cond.s_prev, mc, |path| {
        let sup = path.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let base = (m_t.max(sup) - strike).max(0.0);
        let k: f64 = nodes
            .iter()
            .map(|&(ez, w)| ((m_t.max(ez * sup) - strike).max(0.0) - base) * w)
            .sum();
        (base, 0.0, k)
    })
}
