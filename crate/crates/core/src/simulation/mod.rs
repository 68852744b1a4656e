//! Monte Carlo engine: paths under P or P*, the density process `Z`,
//! hedging-error backtests and conditional estimators for path-dependent
//! claims.
//!
//! Path `i` of a run with seed `s` draws from `ChaCha8Rng::seed_from_u64(s)`
//! on stream `i`, so results do not depend on the thread count and any path
//! can be regenerated alone.
//!
//! Under P the log-price increment over `Δ` is `b Δ + σ ΔW + ΔL` with `L`
//! the raw jump sum (a gamma time-changed Brownian motion for variance gamma,
//! a compound Poisson sum for Gaussian jumps). Under P* the jump measure
//! `ν* = (1 + c0) ν + (-c0) e^z ν` is simulated directly as two independent
//! components of the same family: for variance gamma `VG(C(1 + c0), G, M)`
//! plus `VG(-c0 C, G + 1, M - 1)`, for Gaussian jumps rates `λ(1 + c0)` on
//! `N(m, s²)` plus `-c0 λ e^{m + s²/2}` on `N(m + s², s²)`.
//!
//! Paths under P carry the density process `Z = E(-∫ λ dM)`. Its continuous
//! part and the Gaussian-jump factors `1 - c0 (e^z - 1)` are exact. Variance
//! gamma has infinitely many jumps per step, so its factor is taken per
//! increment, `1 - c0 (e^{ΔL} - e^{Δ g(1)})`: this keeps `E[Z] = 1` exactly
//! and matches the exact density to weak order one in `Δ`.

mod hedging;
mod path_dependent;
mod vg;

pub use hedging::{
    hedging_error, FourierHedge, HedgeComparison, HedgeErrorStats, HedgeRule, PairedDifference,
    ZeroHedge,
};
pub use path_dependent::{
    asian_ij, lookback_ij, trapezoid_average, AsianConditioning, LookbackConditioning, McSettings,
    PathDependentEstimate,
};
pub use vg::VgTimeChange;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy_model::{JumpMeasure, LevyModel};
use crate::mmm::MmmTransform;

/// Probability measure paths are simulated under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    P,
    Pstar,
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl McEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: f64::NAN, se: f64::NAN, n };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Self { mean, se: f64::NAN, n };
        }
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        Self {
            mean,
            se: (var / n as f64).sqrt(),
            n,
        }
    }

    /// `|mean - target| ≤ k se`.
    pub fn covers(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.se
    }
}

#[derive(Debug, Clone, Copy)]
enum Component {
    Vg { c: f64, m: f64, delta: f64 },
    Normal { rate: f64, mean: f64, sd: f64 },
}

#[derive(Debug, Clone, Copy)]
struct DensityTerms {
    c0: f64,
    g1: f64,
}

/// One step's draw: log-price increment and, under P, the density factor.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Draw {
    pub dx: f64,
    pub z_factor: f64,
    /// Smallest jump factor `Z_t / Z_{t-}` met in the step (1 without jumps).
    pub jump_ratio: f64,
}

/// Samples log-price increments of a validated model.
#[derive(Debug, Clone)]
pub(crate) struct StepSampler {
    drift: f64,
    sigma: f64,
    components: Vec<Component>,
    density: Option<DensityTerms>,
}

impl StepSampler {
    pub(crate) fn new(tr: &MmmTransform, measure: Measure) -> Result<Self> {
        let model = tr.model();
        let sigma = model.sigma();
        let c0 = tr.c0();
        let (w_base, w_tilt) = tr.component_weights();
        let mut components = Vec::new();
        let mut push = |c: Component| components.push(c);
        let vg = |c: f64, g: f64, m: f64| -> Result<Component> {
            let tc = VgTimeChange::from_cgm(c, g, m)?;
            Ok(Component::Vg {
                c,
                m: tc.m,
                delta: tc.delta,
            })
        };
        match (measure, model.jumps()) {
            (_, JumpMeasure::None) => {}
            (Measure::P, JumpMeasure::VarianceGamma { c, g, m }) => push(vg(c, g, m)?),
            (Measure::P, JumpMeasure::Normal { rate, mean, sd }) => {
                if rate > 0.0 {
                    push(Component::Normal { rate, mean, sd })
                }
            }
            (Measure::Pstar, JumpMeasure::VarianceGamma { c, g, m }) => {
                if w_base > 0.0 {
                    push(vg(w_base * c, g, m)?);
                }
                if w_tilt > 0.0 {
                    push(vg(w_tilt * c, g + 1.0, m - 1.0)?);
                }
            }
            (Measure::Pstar, JumpMeasure::Normal { rate, mean, sd }) => {
                let v = sd * sd;
                if w_base > 0.0 && rate > 0.0 {
                    push(Component::Normal {
                        rate: w_base * rate,
                        mean,
                        sd,
                    });
                }
                if w_tilt > 0.0 && rate > 0.0 {
                    push(Component::Normal {
                        rate: w_tilt * rate * (mean + 0.5 * v).exp(),
                        mean: mean + v,
                        sd,
                    });
                }
            }
        }
        if model.has_jumps() && (w_base < 0.0 || w_tilt < 0.0) {
            return Err(Error::Simulation(format!(
                "nu* is not a positive combination of jump families (c0 = {c0})"
            )));
        }
        let one = Complex64::new(1.0, 0.0);
        let (drift, density) = match measure {
            Measure::P => (
                model.raw_drift(),
                Some(DensityTerms {
                    c0,
                    g1: model.jump_transform(one).re,
                }),
            ),
            Measure::Pstar => (-0.5 * sigma * sigma - tr.jump_transform_star(one).re, None),
        };
        Ok(Self {
            drift,
            sigma,
            components,
            density,
        })
    }

    pub(crate) fn step<R: Rng>(&self, rng: &mut R, dt: f64) -> Result<Draw> {
        let dw = if self.sigma > 0.0 {
            let n: f64 = rng.sample(StandardNormal);
            n * dt.sqrt()
        } else {
            0.0
        };
        let mut dx = self.drift * dt + self.sigma * dw;
        let mut z_factor = 1.0;
        let mut jump_ratio = 1.0f64;
        if let Some(d) = self.density {
            z_factor = (-d.c0 * self.sigma * dw - 0.5 * d.c0 * d.c0 * self.sigma * self.sigma * dt).exp();
        }
        for comp in &self.components {
            match *comp {
                Component::Vg { c, m, delta } => {
                    let gamma = Gamma::new(c * dt, 1.0 / c)
                        .map_err(|e| Error::Simulation(format!("gamma increment: {e}")))?;
                    let clock: f64 = gamma.sample(rng);
                    let n: f64 = rng.sample(StandardNormal);
                    let jump = m * clock + delta * clock.sqrt() * n;
                    dx += jump;
                    if let Some(d) = self.density {
                        let ratio = 1.0 - d.c0 * (jump.exp() - (dt * d.g1).exp());
                        jump_ratio = jump_ratio.min(ratio);
                        z_factor *= ratio;
                    }
                }
                Component::Normal { rate, mean, sd } => {
                    let count = Poisson::new(rate * dt)
                        .map_err(|e| Error::Simulation(format!("jump count: {e}")))?
                        .sample(rng) as u64;
                    for _ in 0..count {
                        let n: f64 = rng.sample(StandardNormal);
                        let z = mean + sd * n;
                        dx += z;
                        if let Some(d) = self.density {
                            let ratio = 1.0 - d.c0 * z.exp_m1();
                            jump_ratio = jump_ratio.min(ratio);
                            z_factor *= ratio;
                        }
                    }
                    if let Some(d) = self.density {
                        z_factor *= (d.c0 * dt * d.g1).exp();
                    }
                }
            }
        }
        if !(jump_ratio > 0.0) {
            return Err(Error::Simulation(format!(
                "non-positive jump factor {jump_ratio} in the density process"
            )));
        }
        Ok(Draw {
            dx,
            z_factor,
            jump_ratio,
        })
    }
}

/// The RNG for path `index` of a run seeded with `seed`.
pub fn path_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Simulated log-price paths on an equally spaced grid over `[0, T]`.
///
/// Memory is `n_paths × (n_steps + 1)` doubles for the log-prices, plus the
/// same again for `Z` under P.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    measure: Measure,
    seed: u64,
    n_paths: usize,
    n_steps: usize,
    s0: f64,
    times: Vec<f64>,
    log_prices: Vec<f64>,
    density: Option<Vec<f64>>,
    min_jump_ratio: f64,
}

/// Simulates `n_paths` paths of `n_steps` equal steps over the model horizon.
pub fn simulate_paths(
    model: &LevyModel,
    n_paths: usize,
    n_steps: usize,
    seed: u64,
    measure: Measure,
) -> Result<PathEnsemble> {
    if n_paths == 0 || n_steps == 0 {
        return Err(Error::Simulation("n_paths and n_steps must be positive".into()));
    }
    let tr = MmmTransform::new(*model)?;
    let sampler = StepSampler::new(&tr, measure)?;
    let horizon = model.maturity();
    let dt = horizon / n_steps as f64;
    let times: Vec<f64> = (0..=n_steps).map(|k| k as f64 * dt).collect();
    let width = n_steps + 1;
    let mut log_prices = vec![0.0; n_paths * width];
    let mut density = (measure == Measure::P).then(|| vec![1.0; n_paths * width]);

    let run = |index: usize, x: &mut [f64], z: Option<&mut [f64]>| -> Result<f64> {
        let mut rng = path_rng(seed, index);
        let mut min_ratio = 1.0f64;
        let mut zbuf = z;
        for k in 1..width {
            let d = sampler.step(&mut rng, dt)?;
            x[k] = x[k - 1] + d.dx;
            if let Some(z) = zbuf.as_deref_mut() {
                z[k] = z[k - 1] * d.z_factor;
            }
            min_ratio = min_ratio.min(d.jump_ratio);
        }
        Ok(min_ratio)
    };

    let ratios: Vec<Result<f64>> = match density.as_mut() {
        Some(z) => log_prices
            .par_chunks_mut(width)
            .zip(z.par_chunks_mut(width))
            .enumerate()
            .map(|(i, (x, z))| run(i, x, Some(z)))
            .collect(),
        None => log_prices
            .par_chunks_mut(width)
            .enumerate()
            .map(|(i, x)| run(i, x, None))
            .collect(),
    };
    let mut min_jump_ratio = 1.0f64;
    for r in ratios {
        min_jump_ratio = min_jump_ratio.min(r?);
    }
    Ok(PathEnsemble {
        measure,
        seed,
        n_paths,
        n_steps,
        s0: model.s0(),
        times,
        log_prices,
        density,
        min_jump_ratio,
    })
}

impl PathEnsemble {
    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// `log(S_{t_k} / S_0)` for `k = 0..=n_steps`.
    pub fn log_prices(&self, path: usize) -> &[f64] {
        let w = self.n_steps + 1;
        &self.log_prices[path * w..(path + 1) * w]
    }

    pub fn log_increments(&self, path: usize) -> Vec<f64> {
        self.log_prices(path).windows(2).map(|p| p[1] - p[0]).collect()
    }

    pub fn prices(&self, path: usize) -> Vec<f64> {
        self.log_prices(path).iter().map(|x| self.s0 * x.exp()).collect()
    }

    /// `S_{t_k}` on every path.
    pub fn prices_at(&self, k: usize) -> Vec<f64> {
        (0..self.n_paths)
            .map(|p| self.s0 * self.log_prices(p)[k].exp())
            .collect()
    }

    /// `Z_{t_k}` on every path (P ensembles only).
    pub fn density_at(&self, k: usize) -> Option<Vec<f64>> {
        let w = self.n_steps + 1;
        self.density
            .as_ref()
            .map(|z| (0..self.n_paths).map(|p| z[p * w + k]).collect())
    }

    /// Smallest jump factor `Z_t / Z_{t-}` over all simulated steps (1 when no
    /// jumps were drawn, or under P*).
    pub fn min_jump_ratio(&self) -> f64 {
        self.min_jump_ratio
    }

    /// Summary statistics per monitoring date.
    pub fn stats(&self) -> EnsembleStats {
        let dates = (0..=self.n_steps)
            .map(|k| {
                let rel: Vec<f64> = self.prices_at(k).iter().map(|s| s / self.s0).collect();
                DateStats {
                    t: self.times[k],
                    relative_price: McEstimate::from_samples(&rel),
                    density: self.density_at(k).map(|z| McEstimate::from_samples(&z)),
                }
            })
            .collect();
        EnsembleStats {
            measure: self.measure,
            seed: self.seed,
            n_paths: self.n_paths,
            n_steps: self.n_steps,
            s0: self.s0,
            min_jump_ratio: self.min_jump_ratio,
            dates,
        }
    }
}

/// `Z` along one path of a P ensemble.
pub fn density_process(ensemble: &PathEnsemble, path: usize) -> Result<&[f64]> {
    if path >= ensemble.n_paths {
        return Err(Error::Simulation(format!(
            "path {path} out of range ({} paths)",
            ensemble.n_paths
        )));
    }
    let w = ensemble.n_steps + 1;
    ensemble
        .density
        .as_ref()
        .map(|z| &z[path * w..(path + 1) * w])
        .ok_or_else(|| Error::Simulation("the density process is only tracked under P".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DateStats {
    pub t: f64,
    /// `S_t / S_0`.
    pub relative_price: McEstimate,
    pub density: Option<McEstimate>,
}

/// Audit summary of an ensemble; raw paths are not exported.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub measure: Measure,
    pub seed: u64,
    pub n_paths: usize,
    pub n_steps: usize,
    pub s0: f64,
    pub min_jump_ratio: f64,
    pub dates: Vec<DateStats>,
}
