//! LRM and MVH hedge ratios from discretely observed prices.
//!
//! Given observations `S_{t_0}, …, S_{t_n}` and a date `t > t_n`, the MVH
//! ratio is approximated by
//!
//! ```text
//! θ̃_t ≈ ξ̃_t + μ^S E_{t_n} / (S_{t_n}(σ² + Γ)) · ( Σ_k (ΔH_{t_k} - ξ̃_{t_k} ΔS_{t_k}) / E_{t_k}
//!                                              + Σ_k μ^S σ (Γ I_{t_k} - σ K_{t_k}) Δt_k / (E_{t_{k-1}} (σ² + Γ)²) )
//! E_{t_k} = E_{t_{k-1}} (1 - c0 ΔS_{t_k} / S_{t_{k-1}}),   E_{t_0} = 1
//! ξ̃_{t_k} = (σ I_{t_k} + K_{t_k}) / (S_{t_{k-1}} (σ² + Γ))
//! ```
//!
//! `H_{t_k}` is conditioned on `S_{t_k}`; `I_{t_k}`, `K_{t_k}` and `ξ̃_{t_k}` on
//! `S_{t_{k-1}}` with the remaining horizon `T - t_{k-1}`. `H_{t_0}` is the
//! initial capital `c̃ = E*[H]`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{ClaimKind, ClaimSpec, FourierEngine, FourierGrid, MoneynessTable, StrikeValues};
use crate::levy_model::ModelSpec;
use crate::mmm::{MmmTransform, TransformSummary};

/// Timestamped price observations, `times[0] = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservedPath {
    times: Vec<f64>,
    prices: Vec<f64>,
}

impl ObservedPath {
    pub fn new(times: Vec<f64>, prices: Vec<f64>) -> Result<Self> {
        if times.len() != prices.len() {
            return Err(Error::InvalidPath(format!(
                "{} times but {} prices",
                times.len(),
                prices.len()
            )));
        }
        if times.is_empty() {
            return Err(Error::InvalidPath("no observations".into()));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidPath(format!(
                "first observation must be at t = 0, got {}",
                times[0]
            )));
        }
        if let Some(i) = (1..times.len()).find(|&i| !(times[i] > times[i - 1]) || !times[i].is_finite()) {
            return Err(Error::InvalidPath(format!(
                "times must be strictly increasing: t[{}] = {} after t[{}] = {}",
                i,
                times[i],
                i - 1,
                times[i - 1]
            )));
        }
        if let Some(i) = prices.iter().position(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::InvalidPath(format!(
                "price {} at observation {i} is not positive",
                prices[i]
            )));
        }
        Ok(Self { times, prices })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of observations strictly before `t`.
    pub fn count_before(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s < t)
    }

    /// The next date on the observation calendar: `t_n + (t_n - t_{n-1})`.
    pub fn next_date(&self) -> f64 {
        let n = self.times.len();
        if n < 2 {
            return self.times[0];
        }
        self.times[n - 1] + (self.times[n - 1] - self.times[n - 2])
    }
}

/// Running state of the discretized recursion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HedgeState {
    /// `E_{t_k}`.
    pub e: f64,
    /// `Σ (ΔH - ξ̃ ΔS) / E_{t_k}`.
    pub sum_main: f64,
    /// `Σ μ^S σ (Γ I - σ K) Δt / (E_{t_{k-1}} (σ² + Γ)²)`.
    pub sum_drift: f64,
    /// Steps taken.
    pub k: usize,
    /// Steps whose factor `1 - c0 ΔS / S` was not positive.
    pub degenerate_steps: Vec<usize>,
}

impl Default for HedgeState {
    fn default() -> Self {
        Self {
            e: 1.0,
            sum_main: 0.0,
            sum_drift: 0.0,
            k: 0,
            degenerate_steps: Vec::new(),
        }
    }
}

/// One observation interval `(t_{k-1}, t_k]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub dt: f64,
    pub s_prev: f64,
    pub s: f64,
}

/// Per-step claim quantities: `ΔH_{t_k}`, `ξ̃_{t_k}`, `I_{t_k}`, `K_{t_k}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInputs {
    pub delta_h: f64,
    pub xi: f64,
    pub i: f64,
    pub k: f64,
}

/// Advances the recursion by one observation.
///
/// A non-positive factor `1 - c0 ΔS / S` (an observed move the model rules
/// out) is recorded in `degenerate_steps` and the signed value is kept.
pub fn advance_state(state: &HedgeState, tr: &MmmTransform, obs: Observation, inputs: StepInputs) -> HedgeState {
    let delta_s = obs.s - obs.s_prev;
    let factor = 1.0 - tr.c0() * delta_s / obs.s_prev;
    let e_prev = state.e;
    let e = e_prev * factor;
    let mut degenerate_steps = state.degenerate_steps.clone();
    if !(factor > 0.0) {
        degenerate_steps.push(state.k + 1);
    }
    let sigma = tr.model().sigma();
    let denom = tr.denom();
    let drift_step = if sigma == 0.0 {
        0.0
    } else {
        tr.mu_s() * sigma * (tr.gamma() * inputs.i - sigma * inputs.k) * obs.dt
            / (e_prev * denom * denom)
    };
    HedgeState {
        e,
        sum_main: state.sum_main + (inputs.delta_h - inputs.xi * delta_s) / e,
        sum_drift: state.sum_drift + drift_step,
        k: state.k + 1,
        degenerate_steps,
    }
}

/// `ξ̃ = (σ I + K) / (S_{t-} (σ² + Γ))`.
pub fn lrm_from_values(tr: &MmmTransform, s_prev: f64, i: f64, k: f64) -> f64 {
    (tr.model().sigma() * i + k) / (s_prev * tr.denom())
}

/// LRM ratio for a call conditioned on `S_{t-} = s_prev` with `tau` left.
pub fn lrm_ratio(engine: &FourierEngine, s_prev: f64, tau: f64, strike: f64) -> Result<f64> {
    let i = engine.compute_i(s_prev, tau, strike)?;
    let k = engine.compute_k(s_prev, tau, strike)?;
    Ok(lrm_from_values(engine.transform(), s_prev, i, k))
}

/// One row of the per-date audit trail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DateRecord {
    pub t: f64,
    pub s: f64,
    pub h: f64,
    /// `I_{t_k}`, `K_{t_k}`, `ξ̃_{t_k}` are undefined at `t_0`.
    pub i: Option<f64>,
    pub k: Option<f64>,
    pub xi: Option<f64>,
    pub e: f64,
}

/// Full output of [`mvh_strategy`] for one claim.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HedgeReport {
    pub claim: ClaimSpec,
    /// Date `t` the ratios are posted for.
    pub report_time: f64,
    pub c_tilde: f64,
    pub xi_tilde: f64,
    pub theta_tilde: f64,
    /// `θ̃ - ξ̃`.
    pub correction: f64,
    pub sum_main: f64,
    pub sum_drift: f64,
    /// True when `σ = 0`, so the drift sum vanishes identically.
    pub drift_sum_is_zero: bool,
    pub degenerate_steps: Vec<usize>,
    pub records: Vec<DateRecord>,
    pub transform: TransformSummary,
    pub model: ModelSpec,
    pub grid: FourierGrid,
}

/// `tables` is empty when no claim needs them.
fn values(engine: &FourierEngine, tables: &[MoneynessTable], k: usize, claim: &ClaimSpec, s: f64) -> Result<StrikeValues> {
    match claim.kind {
        ClaimKind::Underlying => Ok(engine.underlying_values(s)),
        ClaimKind::Call => engine.values_from_table(&tables[k], claim, s),
    }
}

fn initial_capital(engine: &FourierEngine, claim: &ClaimSpec, s0: f64, tau: f64) -> Result<f64> {
    match claim.kind {
        ClaimKind::Underlying => Ok(s0),
        ClaimKind::Call => engine.call_value(s0, tau, claim.strike),
    }
}

/// Moneyness tables at `T - t_k` for every usable observation.
fn tables_for(engine: &FourierEngine, times: &[f64]) -> Result<Vec<MoneynessTable>> {
    let maturity = engine.transform().model().maturity();
    times
        .par_iter()
        .map(|&t| engine.table(maturity - t))
        .collect()
}

fn check_claim(engine: &FourierEngine, claim: &ClaimSpec) -> Result<()> {
    let maturity = engine.transform().model().maturity();
    if (claim.maturity - maturity).abs() > 1e-12 * maturity {
        return Err(Error::param(
            "maturity",
            format!("claim maturity {} differs from model horizon {maturity}", claim.maturity),
        ));
    }
    Ok(())
}

fn run_path(
    engine: &FourierEngine,
    tables: &[MoneynessTable],
    times: &[f64],
    prices: &[f64],
    claim: &ClaimSpec,
    at: f64,
) -> Result<HedgeReport> {
    check_claim(engine, claim)?;
    let tr = engine.transform();
    let maturity = tr.model().maturity();
    let n = times.len() - 1;

    let c_tilde = initial_capital(engine, claim, prices[0], maturity - times[0])?;
    let mut state = HedgeState::default();
    let mut records = Vec::with_capacity(n + 1);
    records.push(DateRecord {
        t: times[0],
        s: prices[0],
        h: c_tilde,
        i: None,
        k: None,
        xi: None,
        e: state.e,
    });
    let mut h_prev = c_tilde;
    for k in 1..=n {
        let s_prev = prices[k - 1];
        let s = prices[k];
        let h = values(engine, tables, k, claim, s)?.h;
        let cond = values(engine, tables, k - 1, claim, s_prev)?;
        let xi = lrm_from_values(tr, s_prev, cond.i, cond.k);
        state = advance_state(
            &state,
            tr,
            Observation {
                dt: times[k] - times[k - 1],
                s_prev,
                s,
            },
            StepInputs {
                delta_h: h - h_prev,
                xi,
                i: cond.i,
                k: cond.k,
            },
        );
        records.push(DateRecord {
            t: times[k],
            s,
            h,
            i: Some(cond.i),
            k: Some(cond.k),
            xi: Some(xi),
            e: state.e,
        });
        h_prev = h;
    }

    let s_n = prices[n];
    let last = values(engine, tables, n, claim, s_n)?;
    let xi_tilde = lrm_from_values(tr, s_n, last.i, last.k);
    let correction =
        tr.mu_s() * state.e / (s_n * tr.denom()) * (state.sum_main + state.sum_drift);
    Ok(HedgeReport {
        claim: *claim,
        report_time: at,
        c_tilde,
        xi_tilde,
        theta_tilde: xi_tilde + correction,
        correction,
        sum_main: state.sum_main,
        sum_drift: state.sum_drift,
        drift_sum_is_zero: tr.model().sigma() == 0.0,
        degenerate_steps: state.degenerate_steps,
        records,
        transform: tr.summary(),
        model: ModelSpec::from(tr.model()),
        grid: *engine.grid(),
    })
}

/// Usable observations for a strategy posted at `at`.
fn usable<'a>(path: &'a ObservedPath, at: f64, maturity: f64) -> Result<(&'a [f64], &'a [f64])> {
    if !(at > 0.0 && at <= maturity) {
        return Err(Error::param(
            "report_time",
            format!("must lie in (0, {maturity}], got {at}"),
        ));
    }
    let used = path.count_before(at);
    if used < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least two observations before t = {at}, have {used}"
        )));
    }
    Ok((&path.times[..used], &path.prices[..used]))
}

/// MVH strategy `(c̃, θ̃_t)` and LRM ratio `ξ̃_t` for one claim, using only
/// observations strictly before `at`.
pub fn mvh_strategy(engine: &FourierEngine, path: &ObservedPath, claim: &ClaimSpec, at: f64) -> Result<HedgeReport> {
    let mut reports = mvh_strategies(engine, path, std::slice::from_ref(claim), at)?;
    Ok(reports.remove(0))
}

/// [`mvh_strategy`] for many claims sharing one set of Fourier tables.
pub fn mvh_strategies(
    engine: &FourierEngine,
    path: &ObservedPath,
    claims: &[ClaimSpec],
    at: f64,
) -> Result<Vec<HedgeReport>> {
    let maturity = engine.transform().model().maturity();
    let (times, prices) = usable(path, at, maturity)?;
    let tables = if claims.iter().any(|c| c.kind == ClaimKind::Call) {
        tables_for(engine, times)?
    } else {
        Vec::new()
    };
    claims
        .par_iter()
        .map(|claim| run_path(engine, &tables, times, prices, claim, at))
        .collect()
}
