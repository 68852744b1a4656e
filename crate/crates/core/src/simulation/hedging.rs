//! Hedging-error backtests with discrete rebalancing on simulated paths.

use rayon::prelude::*;
use serde::Serialize;

use super::{simulate_paths, McEstimate, Measure};
use crate::error::{Error, Result};
use crate::fourier::{ClaimKind, ClaimSpec, FourierEngine, MoneynessTable, StrikeValues};
use crate::levy_model::LevyModel;
use crate::strategies::{advance_state, lrm_from_values, HedgeState, Observation, StepInputs};

/// A trading rule evaluated on one price path.
///
/// `positions` returns `θ_1, …, θ_n` where `θ_k` is held over
/// `(t_{k-1}, t_k]`; it may only read `prices[..k]`.
pub trait HedgeRule: Sync {
    fn name(&self) -> &str;
    fn positions(&self, times: &[f64], prices: &[f64]) -> Result<Vec<f64>>;
}

/// Holds nothing.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroHedge;

impl HedgeRule for ZeroHedge {
    fn name(&self) -> &str {
        "zero"
    }

    fn positions(&self, times: &[f64], _prices: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![0.0; times.len().saturating_sub(1)])
    }
}

/// LRM or MVH ratios computed online along a path from Fourier tables
/// precomputed at every rebalancing date.
pub struct FourierHedge<'a> {
    engine: &'a FourierEngine,
    claim: ClaimSpec,
    times: Vec<f64>,
    tables: Vec<MoneynessTable>,
    c_tilde: f64,
    mvh: bool,
    name: String,
}

impl<'a> FourierHedge<'a> {
    fn new(engine: &'a FourierEngine, claim: ClaimSpec, times: &[f64], mvh: bool) -> Result<Self> {
        let maturity = engine.transform().model().maturity();
        if times.len() < 2 || times[0] != 0.0 {
            return Err(Error::param("times", "need t_0 = 0 and at least one step"));
        }
        if (claim.maturity - maturity).abs() > 1e-12 * maturity {
            return Err(Error::param("maturity", "claim maturity differs from the model horizon"));
        }
        let rebalance = &times[..times.len() - 1];
        let tables = rebalance
            .par_iter()
            .map(|&t| engine.table(maturity - t))
            .collect::<Result<Vec<_>>>()?;
        let c_tilde = match claim.kind {
            ClaimKind::Underlying => engine.transform().model().s0(),
            ClaimKind::Call => engine.call_value(engine.transform().model().s0(), maturity, claim.strike)?,
        };
        let kind = if mvh { "mvh" } else { "lrm" };
        Ok(Self {
            engine,
            claim,
            times: times.to_vec(),
            tables,
            c_tilde,
            mvh,
            name: kind.to_string(),
        })
    }

    /// `ξ̃` held over each interval.
    pub fn lrm(engine: &'a FourierEngine, claim: ClaimSpec, times: &[f64]) -> Result<Self> {
        Self::new(engine, claim, times, false)
    }

    /// `θ̃` held over each interval; the first interval has no history and
    /// holds `ξ̃`.
    pub fn mvh(engine: &'a FourierEngine, claim: ClaimSpec, times: &[f64]) -> Result<Self> {
        Self::new(engine, claim, times, true)
    }

    /// `c̃ = E*[H]` at the model spot.
    pub fn initial_capital(&self) -> f64 {
        self.c_tilde
    }

    fn values(&self, k: usize, s: f64) -> Result<StrikeValues> {
        match self.claim.kind {
            ClaimKind::Underlying => Ok(self.engine.underlying_values(s)),
            ClaimKind::Call => self.engine.values_from_table(&self.tables[k], &self.claim, s),
        }
    }
}

impl HedgeRule for FourierHedge<'_> {
    fn name(&self) -> &str {
        &self.name
    }

    fn positions(&self, times: &[f64], prices: &[f64]) -> Result<Vec<f64>> {
        let same_grid = times.len() == self.times.len()
            && times
                .iter()
                .zip(&self.times)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs().max(1.0));
        if !same_grid || prices.len() != times.len() {
            return Err(Error::param("times", "path grid differs from the precomputed one"));
        }
        let tr = self.engine.transform();
        let n = times.len() - 1;
        let mut out = Vec::with_capacity(n);
        let mut state = HedgeState::default();
        let mut h_prev = self.c_tilde;
        let mut cond = self.values(0, prices[0])?;
        for k in 1..=n {
            let s_prev = prices[k - 1];
            let xi = lrm_from_values(tr, s_prev, cond.i, cond.k);
            let theta = if self.mvh {
                xi + tr.mu_s() * state.e / (s_prev * tr.denom()) * (state.sum_main + state.sum_drift)
            } else {
                xi
            };
            out.push(theta);
            if k < n {
                let now = self.values(k, prices[k])?;
                state = advance_state(
                    &state,
                    tr,
                    Observation {
                        dt: times[k] - times[k - 1],
                        s_prev,
                        s: prices[k],
                    },
                    StepInputs {
                        delta_h: now.h - h_prev,
                        xi,
                        i: cond.i,
                        k: cond.k,
                    },
                );
                h_prev = now.h;
                cond = now;
            }
        }
        Ok(out)
    }
}

/// Mean squared hedging error of one rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HedgeErrorStats {
    pub rule: String,
    /// `E[(H - c - Σ θ ΔS)²]` and its standard error.
    pub mse: f64,
    pub se: f64,
    /// Mean of `H - c - Σ θ ΔS`.
    pub mean_error: f64,
}

/// `MSE(a) - MSE(b)` on common paths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedDifference {
    pub a: String,
    pub b: String,
    pub mean: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HedgeComparison {
    pub claim: ClaimSpec,
    pub initial_capital: f64,
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub rules: Vec<HedgeErrorStats>,
    /// Every ordered pair `(rules[i], rules[j])`, `i < j`.
    pub paired: Vec<PairedDifference>,
}

impl HedgeComparison {
    pub fn rule(&self, name: &str) -> Option<&HedgeErrorStats> {
        self.rules.iter().find(|r| r.rule == name)
    }

    pub fn pair(&self, a: &str, b: &str) -> Option<&PairedDifference> {
        self.paired.iter().find(|p| p.a == a && p.b == b)
    }
}

/// Hedging errors `H - c - Σ_k θ_{t_k} (S_{t_k} - S_{t_{k-1}})` of several
/// rules on the same `n_paths` P-paths with `n_steps` rebalancing dates.
pub fn hedging_error(
    model: &LevyModel,
    rules: &[&dyn HedgeRule],
    claim: &ClaimSpec,
    initial_capital: f64,
    n_paths: usize,
    n_steps: usize,
    seed: u64,
) -> Result<HedgeComparison> {
    let ensemble = simulate_paths(model, n_paths, n_steps, seed, Measure::P)?;
    let times = ensemble.times().to_vec();
    let errors: Vec<Result<Vec<f64>>> = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let prices = ensemble.prices(p);
            let payoff = claim.payoff(prices[n_steps]);
            rules
                .iter()
                .map(|rule| {
                    let theta = rule.positions(&times, &prices)?;
                    let gains: f64 = theta
                        .iter()
                        .zip(prices.windows(2))
                        .map(|(th, s)| th * (s[1] - s[0]))
                        .sum();
                    Ok(payoff - initial_capital - gains)
                })
                .collect()
        })
        .collect();
    let errors = errors.into_iter().collect::<Result<Vec<_>>>()?;

    let column = |r: usize| -> Vec<f64> { errors.iter().map(|e| e[r]).collect() };
    let squared = |r: usize| -> Vec<f64> { errors.iter().map(|e| e[r] * e[r]).collect() };
    let stats = rules
        .iter()
        .enumerate()
        .map(|(r, rule)| {
            let sq = McEstimate::from_samples(&squared(r));
            HedgeErrorStats {
                rule: rule.name().to_string(),
                mse: sq.mean,
                se: sq.se,
                mean_error: McEstimate::from_samples(&column(r)).mean,
            }
        })
        .collect();
    let mut paired = Vec::new();
    for a in 0..rules.len() {
        for b in a + 1..rules.len() {
            let d: Vec<f64> = errors.iter().map(|e| e[a] * e[a] - e[b] * e[b]).collect();
            let est = McEstimate::from_samples(&d);
            paired.push(PairedDifference {
                a: rules[a].name().to_string(),
                b: rules[b].name().to_string(),
                mean: est.mean,
                se: est.se,
            });
        }
    }
    Ok(HedgeComparison {
        claim: *claim,
        initial_capital,
        n_paths,
        n_steps,
        seed,
        rules: stats,
        paired,
    })
}
