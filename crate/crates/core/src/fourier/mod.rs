//! Damped Fourier evaluation of `H_t`, `I_t` and `K_t` for European calls.
//!
//! With `w = α + i u` and `k = log(K/S)`, every quantity is a contour integral
//!
//! ```text
//! V = S / π · Re ∫_0^∞ e^{(1-w) k} e^{τ ψ*(w)} κ(w) du
//! ```
//!
//! where the kernel `κ` is
//!
//! | quantity                        | `κ(w)`                    |
//! |---------------------------------|---------------------------|
//! | call `E*[(S_T - K)^+]`          | `1 / (w (w - 1))`         |
//! | put (contour `1 - α`)           | `1 / (w (w - 1))`         |
//! | `E*[S_T 1{S_T > K}]`            | `1 / (w - 1)`             |
//! | `K_t = ∫ J_{t,z}(e^z - 1) ν(dz)`| `Γ̂(w) / (w (w - 1))`      |
//!
//! The `u`-integral is discretized on `u_j = j η` with Simpson weights. A
//! single strike is a direct O(N) sum; a batch evaluates the same sum on the
//! whole log-strike grid `k_m = -π/η + m 2π/(L N η)` with one zero-padded FFT
//! of length `L N` per kernel, then interpolates. Padding refines the strike
//! grid without changing the frequency nodes, so every grid value is exactly
//! the direct sum. Values are homogeneous of degree one in `(S, K)`, so a
//! slice computed at unit spot serves every spot.
//!
//! Truncation at `u_max = N η` is checked by the contribution of the upper
//! half of the frequency nodes. For pure-jump models the characteristic
//! function decays only like `|u|^{-2Cτ}`, so at short maturities no
//! practical grid converges; those slices and strikes are evaluated on a
//! deformed contour instead (see [`FourierGrid::contour_fallback`]).

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy_model::JumpMeasure;
use crate::mmm::MmmTransform;
use crate::quadrature::{self, Tolerance};

mod contour;

use contour::ContourSlice;

/// How requested strikes are filled from the FFT log-strike grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Four-point Lagrange interpolation on the log-strike grid.
    #[default]
    Cubic,
    /// Direct single-strike sums (no interpolation error, O(N) per strike).
    Exact,
}

/// Discretization of the Fourier inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FourierGrid {
    /// Damping exponent: the contour `Re(w) = alpha`.
    pub alpha: f64,
    /// Number of frequency nodes (power of two).
    pub n: usize,
    /// Frequency spacing.
    pub eta: f64,
    /// Largest change, per unit of spot, tolerated when the frequency
    /// truncation is doubled from `u_max / 2` to `u_max`.
    pub convergence_tol: f64,
    pub interpolation: Interpolation,
    /// Zero-padding factor `L` of the batch FFT (power of two).
    pub oversample: usize,
    /// Half-width of the log-moneyness window `|log(K/S)|` kept by a batch.
    pub window: f64,
    /// When the truncated sum has not converged, evaluate on a deformed
    /// contour instead of reporting non-convergence.
    pub contour_fallback: bool,
}

impl Default for FourierGrid {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            n: 1 << 14,
            eta: 0.05,
            convergence_tol: 1e-9,
            interpolation: Interpolation::Cubic,
            oversample: 4,
            window: 2.0,
            contour_fallback: true,
        }
    }
}

impl FourierGrid {
    pub fn u_max(&self) -> f64 {
        self.n as f64 * self.eta
    }

    /// Spacing of the FFT log-strike grid, `2π / (L N η)`.
    pub fn log_strike_spacing(&self) -> f64 {
        2.0 * PI / (self.oversample as f64 * self.u_max())
    }

    /// Half-width of the log-moneyness window served by a batch.
    pub fn window(&self) -> f64 {
        self.window
    }

    /// Checks the grid on its own and against the transform's strips.
    pub fn check(&self, tr: &MmmTransform) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 1.0) {
            return Err(Error::Grid(format!("alpha must be > 1, got {}", self.alpha)));
        }
        if self.n < 16 || !self.n.is_power_of_two() {
            return Err(Error::Grid(format!(
                "n must be a power of two >= 16, got {}",
                self.n
            )));
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::Grid(format!("eta must be > 0, got {}", self.eta)));
        }
        if self.oversample == 0 || !self.oversample.is_power_of_two() {
            return Err(Error::Grid(format!(
                "oversample must be a power of two, got {}",
                self.oversample
            )));
        }
        if !(self.window > 0.0 && self.window <= 0.5 * PI / self.eta) {
            return Err(Error::Grid(format!(
                "window must lie in (0, pi / (2 eta)] = (0, {}], got {}",
                0.5 * PI / self.eta,
                self.window
            )));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::Grid("convergence_tol must be > 0".into()));
        }
        if let JumpMeasure::VarianceGamma { g, m, .. } = tr.model().jumps() {
            if !(self.alpha + 1.0 < m - 1.0) {
                return Err(Error::Grid(format!(
                    "alpha + 1 = {} must stay below M - 1 = {} for the jump kernel",
                    self.alpha + 1.0,
                    m - 1.0
                )));
            }
            if !(1.0 - self.alpha > -g) {
                return Err(Error::Grid(format!(
                    "put contour 1 - alpha = {} must stay above -G = {}",
                    1.0 - self.alpha,
                    -g
                )));
            }
        }
        Ok(())
    }

    fn simpson_weight(&self, j: usize) -> f64 {
        let s = if j == 0 {
            1.0 / 3.0
        } else if j % 2 == 1 {
            4.0 / 3.0
        } else {
            2.0 / 3.0
        };
        s * self.eta
    }
}

/// Integrand families sharing the damped-inversion machinery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    Call,
    Put,
    /// `E*[S_T 1{S_T > K}]`; `I_t` is `σ` times this.
    Exercise,
    /// `K_t`.
    Jump,
}

/// Payoff family of a claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimKind {
    /// `(S_T - K)^+`.
    Call,
    /// `S_T` itself (the `K → 0` limit of the call), evaluated analytically.
    Underlying,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClaimSpec {
    pub kind: ClaimKind,
    pub strike: f64,
    pub maturity: f64,
}

impl ClaimSpec {
    pub fn call(strike: f64, maturity: f64) -> Result<Self> {
        if !(strike.is_finite() && strike > 0.0) {
            return Err(Error::param("strike", format!("must be > 0, got {strike}")));
        }
        if !(maturity.is_finite() && maturity > 0.0) {
            return Err(Error::param("maturity", format!("must be > 0, got {maturity}")));
        }
        Ok(Self {
            kind: ClaimKind::Call,
            strike,
            maturity,
        })
    }

    pub fn underlying(maturity: f64) -> Self {
        Self {
            kind: ClaimKind::Underlying,
            strike: 0.0,
            maturity,
        }
    }

    pub fn payoff(&self, s_t: f64) -> f64 {
        match self.kind {
            ClaimKind::Call => (s_t - self.strike).max(0.0),
            ClaimKind::Underlying => s_t,
        }
    }
}

/// `H`, `I` and `K` for one strike.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrikeValues {
    pub strike: f64,
    pub h: f64,
    pub i: f64,
    pub k: f64,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    u: f64,
    weight: f64,
    psi: Complex64,
    /// `1 / (w (w - 1))`
    call: Complex64,
    /// `1 / (w - 1)`
    exercise: Complex64,
    /// `Γ̂(w) / (w (w - 1))`
    jump: Complex64,
}

/// Values of one kernel at unit spot on the FFT log-strike grid.
#[derive(Debug, Clone)]
pub struct LogStrikeSlice {
    k0: f64,
    dk: f64,
    window: f64,
    values: Vec<f64>,
}

impl LogStrikeSlice {
    /// Value at log-moneyness `k = log(K/S)`, per unit spot.
    pub fn at(&self, k: f64) -> Option<f64> {
        if !(k.abs() <= self.window) {
            return None;
        }
        let x = (k - self.k0) / self.dk;
        let i = x.floor() as isize;
        let t = x - i as f64;
        let n = self.values.len() as isize;
        if i < 1 || i + 2 >= n {
            return None;
        }
        let v = |d: isize| self.values[(i + d) as usize];
        // Lagrange weights on nodes -1, 0, 1, 2.
        let wm1 = -t * (t - 1.0) * (t - 2.0) / 6.0;
        let w0 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        let w1 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        let w2 = (t + 1.0) * t * (t - 1.0) / 6.0;
        Some(wm1 * v(-1) + w0 * v(0) + w1 * v(1) + w2 * v(2))
    }

    /// Log-moneyness of grid node `m`.
    pub fn node(&self, m: usize) -> f64 {
        self.k0 + m as f64 * self.dk
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone)]
enum KernelSlice {
    Grid(LogStrikeSlice),
    Contour(ContourSlice),
}

/// The three kernels at one time-to-maturity, ready to serve any `(S, K)`.
#[derive(Debug, Clone)]
pub struct MoneynessTable {
    tau: f64,
    sigma: f64,
    call: Option<KernelSlice>,
    exercise: Option<KernelSlice>,
    jump: Option<KernelSlice>,
}

impl MoneynessTable {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Whether the FFT grid did not converge at this `τ` and values come from
    /// the deformed contour.
    pub fn uses_contour(&self) -> bool {
        [&self.call, &self.exercise, &self.jump]
            .iter()
            .any(|s| matches!(s, Some(KernelSlice::Contour(_))))
    }
}

/// Fourier engine bound to one measure change and one grid.
pub struct FourierEngine {
    transform: MmmTransform,
    grid: FourierGrid,
    nodes: Vec<Node>,
    put_nodes: Vec<Node>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FourierEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierEngine")
            .field("transform", &self.transform)
            .field("grid", &self.grid)
            .finish_non_exhaustive()
    }
}

fn check_inputs(s: f64, tau: f64, strike: f64, maturity: f64) -> Result<()> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::param("spot", format!("must be > 0, got {s}")));
    }
    if !(strike.is_finite() && strike > 0.0) {
        return Err(Error::param("strike", format!("must be > 0, got {strike}")));
    }
    if !(tau >= 0.0 && tau <= maturity * (1.0 + 1e-12)) {
        return Err(Error::param(
            "tau",
            format!("must lie in [0, {maturity}], got {tau}"),
        ));
    }
    Ok(())
}

impl FourierEngine {
    pub fn new(transform: MmmTransform, grid: FourierGrid) -> Result<Self> {
        grid.check(&transform)?;
        let build = |alpha: f64| -> Vec<Node> {
            (0..grid.n)
                .map(|j| {
                    let u = j as f64 * grid.eta;
                    let w = Complex64::new(alpha, u);
                    let call = (w * (w - 1.0)).inv();
                    Node {
                        u,
                        weight: grid.simpson_weight(j),
                        psi: transform.char_exponent_unchecked(w),
                        call,
                        exercise: (w - 1.0).inv(),
                        jump: transform.gamma_hat_unchecked(w) * call,
                    }
                })
                .collect()
        };
        let nodes = build(grid.alpha);
        let put_nodes = build(1.0 - grid.alpha);
        let fft = FftPlanner::new().plan_fft_forward(grid.n * grid.oversample);
        Ok(Self {
            transform,
            grid,
            nodes,
            put_nodes,
            fft,
        })
    }

    pub fn transform(&self) -> &MmmTransform {
        &self.transform
    }

    pub fn grid(&self) -> &FourierGrid {
        &self.grid
    }

    fn maturity(&self) -> f64 {
        self.transform.model().maturity()
    }

    fn contour(&self, kernel: Kernel) -> (f64, &[Node]) {
        match kernel {
            Kernel::Put => (1.0 - self.grid.alpha, &self.put_nodes),
            _ => (self.grid.alpha, &self.nodes),
        }
    }

    fn factor(node: &Node, kernel: Kernel) -> Complex64 {
        match kernel {
            Kernel::Call | Kernel::Put => node.call,
            Kernel::Exercise => node.exercise,
            Kernel::Jump => node.jump,
        }
    }

    /// Direct Simpson sum at log-moneyness `k`, per unit spot; also returns
    /// the change relative to the sum truncated at `u_max / 2`.
    fn direct_unit(&self, kernel: Kernel, tau: f64, k: f64) -> (f64, f64) {
        let (alpha, nodes) = self.contour(kernel);
        let half = nodes.len() / 2;
        let mut lower = Complex64::new(0.0, 0.0);
        let mut upper = Complex64::new(0.0, 0.0);
        for (j, node) in nodes.iter().enumerate() {
            let term = (node.psi * tau - Complex64::new(0.0, node.u * k)).exp()
                * Self::factor(node, kernel)
                * node.weight;
            if j < half {
                lower += term;
            } else {
                upper += term;
            }
        }
        let scale = ((1.0 - alpha) * k).exp() / PI;
        (scale * (lower + upper).re, (scale * upper.re).abs())
    }

    fn direct(&self, kernel: Kernel, s: f64, tau: f64, strike: f64) -> Result<f64> {
        let k = (strike / s).ln();
        let (unit, change) = self.direct_unit(kernel, tau, k);
        if change <= self.grid.convergence_tol {
            return Ok(s * unit);
        }
        if !self.grid.contour_fallback {
            return Err(Error::NotConverged {
                tau,
                change,
                tolerance: self.grid.convergence_tol,
            });
        }
        Ok(s * self.contour_value(&self.contour_slice(kernel, tau), tau, k)?)
    }

    /// `E*[(S_T - K)^+ | S_t = s]` with `tau = T - t`.
    pub fn call_value(&self, s: f64, tau: f64, strike: f64) -> Result<f64> {
        check_inputs(s, tau, strike, self.maturity())?;
        if tau == 0.0 {
            return Ok((s - strike).max(0.0));
        }
        self.direct(Kernel::Call, s, tau, strike)
    }

    /// `E*[(K - S_T)^+ | S_t = s]` from the same machinery on the contour
    /// `Re(w) = 1 - α`.
    pub fn put_value(&self, s: f64, tau: f64, strike: f64) -> Result<f64> {
        check_inputs(s, tau, strike, self.maturity())?;
        if tau == 0.0 {
            return Ok((strike - s).max(0.0));
        }
        self.direct(Kernel::Put, s, tau, strike)
    }

    /// `I = σ E*[S_T 1{S_T > K} | S_{t-} = s]`; exactly zero when `σ = 0`.
    pub fn compute_i(&self, s: f64, tau: f64, strike: f64) -> Result<f64> {
        check_inputs(s, tau, strike, self.maturity())?;
        let sigma = self.transform.model().sigma();
        if sigma == 0.0 {
            return Ok(0.0);
        }
        if tau == 0.0 {
            return Ok(if s > strike { sigma * s } else { 0.0 });
        }
        Ok(sigma * self.direct(Kernel::Exercise, s, tau, strike)?)
    }

    /// `K = ∫ J_{t,z} (e^z - 1) ν(dz)` with `J_{t,z}` the call's jump
    /// sensitivity conditional on `S_{t-} = s`.
    pub fn compute_k(&self, s: f64, tau: f64, strike: f64) -> Result<f64> {
        check_inputs(s, tau, strike, self.maturity())?;
        if !self.transform.model().has_jumps() {
            return Ok(0.0);
        }
        if tau == 0.0 {
            return Ok(self.terminal_jump_sensitivity(s, strike));
        }
        self.direct(Kernel::Jump, s, tau, strike)
    }

    /// `∫ ((s e^z - K)^+ - (s - K)^+)(e^z - 1) ν(dz)`: `K_t` with no time
    /// left, where the transform has nothing to damp.
    fn terminal_jump_sensitivity(&self, s: f64, strike: f64) -> f64 {
        let intrinsic = (s - strike).max(0.0);
        self.transform
            .model()
            .integrate_jumps(
                |z| Complex64::new(((s * z.exp() - strike).max(0.0) - intrinsic) * z.exp_m1(), 0.0),
                0.0,
                2.0,
            )
            .value
            .re
    }

    /// Audit route: adaptive quadrature of the damped integrand over
    /// `u ∈ [0, ∞)`, independent of the frequency grid.
    pub fn quadrature_value(&self, kernel: Kernel, s: f64, tau: f64, strike: f64) -> Result<f64> {
        check_inputs(s, tau, strike, self.maturity())?;
        if tau == 0.0 {
            return Err(Error::param("tau", "quadrature audit needs tau > 0"));
        }
        let alpha = match kernel {
            Kernel::Put => 1.0 - self.grid.alpha,
            _ => self.grid.alpha,
        };
        let k = (strike / s).ln();
        let tr = &self.transform;
        let integrand = |u: f64| {
            let w = Complex64::new(alpha, u);
            let call = (w * (w - 1.0)).inv();
            let factor = match kernel {
                Kernel::Call | Kernel::Put => call,
                Kernel::Exercise => (w - 1.0).inv(),
                Kernel::Jump => tr.gamma_hat_unchecked(w) * call,
            };
            let v = ((1.0 - w) * k + tr.char_exponent_unchecked(w) * tau).exp() * factor;
            Complex64::new(v.re, 0.0)
        };
        let tol = Tolerance {
            abs: 1e-15,
            rel: 1e-12,
            max_intervals: 20_000,
        };
        let est = quadrature::integrate_semi_infinite(integrand, 0.0, tol);
        let unit = est.value.re / PI;
        Ok(match kernel {
            Kernel::Exercise => self.transform.model().sigma() * s * unit,
            _ => s * unit,
        })
    }

    /// One kernel on the whole log-strike grid at unit spot, via one FFT.
    pub fn slice(&self, kernel: Kernel, tau: f64) -> LogStrikeSlice {
        self.slice_with_change(kernel, tau).0
    }

    /// The slice and the largest contribution, over the window, of the upper
    /// half of the frequency nodes.
    fn slice_with_change(&self, kernel: Kernel, tau: f64) -> (LogStrikeSlice, f64) {
        let (alpha, nodes) = self.contour(kernel);
        let len = self.grid.n * self.grid.oversample;
        let dk = self.grid.log_strike_spacing();
        let b = 0.5 * len as f64 * dk;
        let mut buf: Vec<Complex64> = nodes
            .iter()
            .map(|node| {
                (node.psi * tau + Complex64::new(0.0, node.u * b)).exp()
                    * Self::factor(node, kernel)
                    * node.weight
            })
            .collect();
        buf.resize(len, Complex64::new(0.0, 0.0));
        let mut upper = buf.clone();
        upper[..nodes.len() / 2].fill(Complex64::new(0.0, 0.0));
        self.fft.process(&mut buf);
        self.fft.process(&mut upper);
        // Keep the window plus the interpolation stencil.
        let half = (self.grid.window() / dk).ceil() as usize + 3;
        let first = (len / 2).saturating_sub(half);
        let last = (len / 2 + half).min(len - 1);
        let scale = |m: usize| ((1.0 - alpha) * (-b + m as f64 * dk)).exp() / PI;
        let values = (first..=last).map(|m| scale(m) * buf[m].re).collect();
        let change = (first..=last)
            .map(|m| (scale(m) * upper[m].re).abs())
            .fold(0.0, f64::max);
        let slice = LogStrikeSlice {
            k0: -b + first as f64 * dk,
            dk,
            window: self.grid.window(),
            values,
        };
        (slice, change)
    }

    /// Crossing point and analyticity interval on the real axis for the
    /// deformed contour of `kernel`.
    fn contour_strip(&self, kernel: Kernel) -> (f64, (f64, f64)) {
        let (lo, hi) = self.transform.strip();
        let alpha = self.grid.alpha;
        match kernel {
            Kernel::Put => (1.0 - alpha, (lo, 0.0)),
            Kernel::Call | Kernel::Exercise => (alpha, (1.0, hi)),
            Kernel::Jump => (alpha, (1.0, hi.min(self.transform.gamma_hat_strip().1))),
        }
    }

    fn contour_slice(&self, kernel: Kernel, tau: f64) -> ContourSlice {
        let (x0, strip) = self.contour_strip(kernel);
        ContourSlice::new(&self.transform, kernel, x0, strip, tau)
    }

    fn kernel_slice(&self, kernel: Kernel, tau: f64) -> Result<KernelSlice> {
        let (slice, change) = self.slice_with_change(kernel, tau);
        if change <= self.grid.convergence_tol {
            Ok(KernelSlice::Grid(slice))
        } else if self.grid.contour_fallback {
            Ok(KernelSlice::Contour(self.contour_slice(kernel, tau)))
        } else {
            Err(Error::NotConverged {
                tau,
                change,
                tolerance: self.grid.convergence_tol,
            })
        }
    }

    fn contour_value(&self, slice: &ContourSlice, tau: f64, k: f64) -> Result<f64> {
        let (unit, change) = slice.value(k);
        if change > self.grid.convergence_tol {
            return Err(Error::NotConverged {
                tau,
                change,
                tolerance: self.grid.convergence_tol,
            });
        }
        Ok(unit)
    }

    /// Slices of every kernel the model needs at `tau`.
    pub fn table(&self, tau: f64) -> Result<MoneynessTable> {
        check_inputs(1.0, tau, 1.0, self.maturity())?;
        let sigma = self.transform.model().sigma();
        let live = tau > 0.0 && self.grid.interpolation == Interpolation::Cubic;
        let build = |on: bool, kernel| on.then(|| self.kernel_slice(kernel, tau)).transpose();
        Ok(MoneynessTable {
            tau,
            sigma,
            call: build(live, Kernel::Call)?,
            exercise: build(live && sigma > 0.0, Kernel::Exercise)?,
            jump: build(live && self.transform.model().has_jumps(), Kernel::Jump)?,
        })
    }

    /// `H`, `I`, `K` for one claim at spot `s` from a precomputed table.
    pub fn values_from_table(
        &self,
        table: &MoneynessTable,
        claim: &ClaimSpec,
        s: f64,
    ) -> Result<StrikeValues> {
        let tau = table.tau;
        if claim.kind == ClaimKind::Underlying {
            return Ok(self.underlying_values(s));
        }
        let strike = claim.strike;
        check_inputs(s, tau, strike, self.maturity())?;
        if tau == 0.0 || self.grid.interpolation == Interpolation::Exact {
            return Ok(StrikeValues {
                strike,
                h: self.call_value(s, tau, strike)?,
                i: self.compute_i(s, tau, strike)?,
                k: self.compute_k(s, tau, strike)?,
            });
        }
        let k = (strike / s).ln();
        let window = self.grid.window();
        let lookup = |slice: &Option<KernelSlice>| -> Result<f64> {
            match slice {
                None => Ok(0.0),
                Some(KernelSlice::Grid(sl)) => sl.at(k).map(|v| s * v).ok_or(Error::StrikeOutOfWindow {
                    strike,
                    spot: s,
                    lo: s * (-window).exp(),
                    hi: s * window.exp(),
                }),
                Some(KernelSlice::Contour(c)) => Ok(s * self.contour_value(c, tau, k)?),
            }
        };
        Ok(StrikeValues {
            strike,
            h: lookup(&table.call)?,
            i: table.sigma * lookup(&table.exercise)?,
            k: lookup(&table.jump)?,
        })
    }

    /// Analytic values for `H = S_T`: `H_t = s`, `I = σ s`, `K = s Γ`.
    pub fn underlying_values(&self, s: f64) -> StrikeValues {
        StrikeValues {
            strike: 0.0,
            h: s,
            i: self.transform.model().sigma() * s,
            k: s * self.transform.gamma(),
        }
    }

    /// `H`, `I`, `K` at every strike (ascending) from one FFT per kernel.
    pub fn batch_over_strikes(&self, s: f64, tau: f64, strikes: &[f64]) -> Result<Vec<StrikeValues>> {
        if strikes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::param("strikes", "must be strictly ascending"));
        }
        let table = self.table(tau)?;
        strikes
            .iter()
            .map(|&k| {
                let claim = ClaimSpec::call(k, self.maturity())?;
                self.values_from_table(&table, &claim, s)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_model::LevyModel;

    fn engine(model: LevyModel) -> FourierEngine {
        FourierEngine::new(MmmTransform::new(model).unwrap(), FourierGrid::default()).unwrap()
    }

    fn calibrated() -> FourierEngine {
        engine(LevyModel::variance_gamma(6.7910, 30.1807, 33.1507, 2000.0, 1.0).unwrap())
    }

    fn norm_cdf(x: f64) -> f64 {
        use statrs::distribution::{ContinuousCDF, Normal};
        Normal::new(0.0, 1.0).unwrap().cdf(x)
    }

    #[test]
    fn terminal_payoff_is_exact() {
        assert_eq!(calibrated().call_value(2100.0, 0.0, 2000.0).unwrap(), 100.0);
        assert_eq!(calibrated().call_value(1900.0, 0.0, 2000.0).unwrap(), 0.0);
    }

    #[test]
    fn tiny_strike_call_tends_to_spot() {
        let e = calibrated();
        let v = e.call_value(2000.0, 0.5, 2e-3).unwrap();
        assert!((v - (2000.0 - 2e-3)).abs() < 1e-6, "{v}");
    }

    #[test]
    fn zero_sigma_gives_zero_i() {
        let e = calibrated();
        assert_eq!(e.compute_i(2000.0, 0.5, 1900.0).unwrap(), 0.0);
    }

    #[test]
    fn black_scholes_limits() {
        let sigma = 0.2;
        let e = engine(LevyModel::pure_diffusion(sigma, 100.0, 1.0).unwrap().with_mu_log(0.03));
        for &(s, tau, k) in &[(100.0f64, 1.0f64, 100.0f64), (90.0, 0.25, 110.0), (120.0, 0.5, 95.0)] {
            let d1 = ((s / k).ln() + 0.5 * sigma * sigma * tau) / (sigma * tau.sqrt());
            let d2 = d1 - sigma * tau.sqrt();
            let call = s * norm_cdf(d1) - k * norm_cdf(d2);
            assert!((e.call_value(s, tau, k).unwrap() - call).abs() < 1e-9 * s);
            let i = e.compute_i(s, tau, k).unwrap();
            assert!((i - sigma * s * norm_cdf(d1)).abs() < 1e-9 * s);
            assert_eq!(e.compute_k(s, tau, k).unwrap(), 0.0);
        }
        let i = e.compute_i(100.0, 0.5, 1e-4).unwrap();
        assert!((i - sigma * 100.0).abs() < 1e-8);
    }

    #[test]
    fn tiny_strike_jump_term_tends_to_spot_gamma() {
        let e = calibrated();
        let s = 2000.0;
        let k = e.compute_k(s, 0.5, 1e-3).unwrap();
        let target = s * e.transform().gamma();
        assert!((k - target).abs() < 1e-7 * target, "{k} {target}");
    }

    #[test]
    fn put_call_parity() {
        let e = calibrated();
        for &(s, tau, k) in &[(2000.0, 1.0, 2000.0), (1800.0, 0.3, 2100.0), (2300.0, 0.6, 1700.0)] {
            let lhs = e.call_value(s, tau, k).unwrap() - e.put_value(s, tau, k).unwrap();
            assert!((lhs - (s - k)).abs() < 1e-6 * s, "{lhs} vs {}", s - k);
        }
    }

    #[test]
    fn short_maturity_flags_non_convergence_without_fallback() {
        let model = LevyModel::variance_gamma(6.7910, 30.1807, 33.1507, 2000.0, 1.0).unwrap();
        let grid = FourierGrid { contour_fallback: false, ..Default::default() };
        let e = FourierEngine::new(MmmTransform::new(model).unwrap(), grid).unwrap();
        let err = e.call_value(2000.0, 1.0 / 250.0, 2000.0).unwrap_err();
        assert!(matches!(err, Error::NotConverged { .. }), "{err}");
        assert!(matches!(e.table(1.0 / 250.0), Err(Error::NotConverged { .. })));

        let table = calibrated().table(1.0 / 250.0).unwrap();
        assert!(table.uses_contour());
        assert!(!calibrated().table(0.5).unwrap().uses_contour());
    }

    #[test]
    fn contour_matches_converged_grid() {
        let e = calibrated();
        for kernel in [Kernel::Call, Kernel::Jump, Kernel::Put] {
            let c = e.contour_slice(kernel, 0.6);
            for k in [-0.5, -0.1, 0.0, 0.02, 0.3] {
                let (direct, change) = e.direct_unit(kernel, 0.6, k);
                assert!(change < 1e-12);
                let (v, _) = c.value(k);
                assert!((v - direct).abs() < 1e-11, "{kernel:?} {k}: {v} {direct}");
            }
        }
    }

    #[test]
    fn contour_reproduces_black_scholes_at_tiny_maturity() {
        let sigma = 0.2;
        let e = engine(LevyModel::pure_diffusion(sigma, 100.0, 1.0).unwrap());
        let tau = 1e-5;
        for k in [95.0f64, 99.9, 100.0, 100.3] {
            let d1 = ((100.0 / k).ln() + 0.5 * sigma * sigma * tau) / (sigma * tau.sqrt());
            let d2 = d1 - sigma * tau.sqrt();
            let call = 100.0 * norm_cdf(d1) - k * norm_cdf(d2);
            let v = e.call_value(100.0, tau, k).unwrap();
            assert!((v - call).abs() < 1e-10 * 100.0, "{k}: {v} {call}");
            let i = e.compute_i(100.0, tau, k).unwrap();
            assert!((i - sigma * 100.0 * norm_cdf(d1)).abs() < 1e-10 * 100.0);
        }
    }

    #[test]
    fn monotone_in_strike() {
        let e = calibrated();
        let strikes: Vec<f64> = (0..21).map(|i| 1500.0 + 50.0 * i as f64).collect();
        let v = e.batch_over_strikes(2000.0, 0.5, &strikes).unwrap();
        assert!(v.windows(2).all(|p| p[1].h < p[0].h));
        let jd = engine(LevyModel::jump_diffusion(0.15, 1.0, -0.05, 0.1, 100.0, 1.0).unwrap());
        let strikes: Vec<f64> = (0..21).map(|i| 75.0 + 2.5 * i as f64).collect();
        let v = jd.batch_over_strikes(100.0, 0.5, &strikes).unwrap();
        assert!(v.windows(2).all(|p| p[1].i < p[0].i && p[1].h < p[0].h));
    }

    #[test]
    fn grid_aligned_singleton_batch_equals_single_strike() {
        let e = calibrated();
        let s = 2000.0;
        let sl = e.slice(Kernel::Call, 0.5);
        let m = sl.values().len() / 2 + 7;
        let strike = s * sl.node(m).exp();
        let batch = e.batch_over_strikes(s, 0.5, &[strike]).unwrap();
        let single = e.call_value(s, 0.5, strike).unwrap();
        assert!((batch[0].h - single).abs() < 1e-10 * single, "{} {}", batch[0].h, single);
        let single_k = e.compute_k(s, 0.5, strike).unwrap();
        assert!((batch[0].k - single_k).abs() < 1e-10 * single_k.abs());
    }

    #[test]
    fn interleaved_batches_agree_with_combined() {
        let e = calibrated();
        let all: Vec<f64> = (0..21).map(|i| 1500.0 + 50.0 * i as f64).collect();
        let odd: Vec<f64> = all.iter().copied().skip(1).step_by(2).collect();
        let even: Vec<f64> = all.iter().copied().step_by(2).collect();
        let full = e.batch_over_strikes(2000.0, 0.75, &all).unwrap();
        let a = e.batch_over_strikes(2000.0, 0.75, &odd).unwrap();
        let b = e.batch_over_strikes(2000.0, 0.75, &even).unwrap();
        for v in a.iter().chain(b.iter()) {
            let f = full.iter().find(|f| f.strike == v.strike).unwrap();
            assert_eq!(f, v);
        }
    }

    #[test]
    fn out_of_window_strike_is_rejected() {
        let e = calibrated();
        let err = e.batch_over_strikes(2000.0, 0.5, &[1e-20]).unwrap_err();
        assert!(matches!(err, Error::StrikeOutOfWindow { .. }));
        assert!(e.batch_over_strikes(2000.0, 0.5, &[2000.0, 1900.0]).is_err());
    }

    #[test]
    fn grid_checks() {
        let tr = MmmTransform::new(LevyModel::variance_gamma(6.7910, 30.1807, 33.1507, 2000.0, 1.0).unwrap())
            .unwrap();
        for grid in [
            FourierGrid { alpha: 1.0, ..Default::default() },
            FourierGrid { n: 1000, ..Default::default() },
            FourierGrid { eta: 0.0, ..Default::default() },
            FourierGrid { alpha: 31.5, ..Default::default() },
        ] {
            assert!(matches!(FourierEngine::new(tr, grid), Err(Error::Grid(_))));
        }
    }

    #[test]
    fn terminal_jump_sensitivity_of_linear_limit() {
        let e = calibrated();
        let k = e.compute_k(2000.0, 0.0, 1e-6).unwrap();
        let target = 2000.0 * e.transform().gamma();
        assert!((k - target).abs() < 1e-8 * target);
    }
}
