//! Exponential Lévy models for the underlier.
//!
//! `log(S_t / S_0) = μ t + σ W_t + ∫ z Ñ([0, t], dz)` with a jump measure from
//! one of two families (variance gamma, Gaussian compound Poisson) or none.
//! Everything downstream is phrased through the jump transform
//! `g(a) = ∫ (e^{a z} - 1) ν(dz)`, whose closed form is known for both
//! families:
//!
//! * cumulant exponent `ψ(w) = b w + σ² w² / 2 + g(w)` with `b = μ - ∫ z ν(dz)`,
//! * stock drift `μ^S = μ + σ²/2 + ∫ (e^z - 1 - z) ν(dz)`,
//! * squared-jump rate `Γ = ∫ (e^z - 1)² ν(dz) = g(2) - 2 g(1)`.
//!
//! The convention throughout is `E[(S_T / S_0)^w] = exp(T ψ(w))`.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, expm1, Estimate, Tolerance};

/// Lévy measure of the log-price jumps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum JumpMeasure {
    /// No jumps.
    None,
    /// `ν(dz) = C (1{z<0} e^{-G|z|} + 1{z>0} e^{-M z}) dz / |z|`.
    VarianceGamma { c: f64, g: f64, m: f64 },
    /// Compound Poisson with `N(mean, sd²)` jump sizes (Merton).
    Normal { rate: f64, mean: f64, sd: f64 },
}

/// How the log-drift `μ` is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogDrift {
    /// `μ = ∫ z ν(dz)`: the log-price is the raw jump sum plus Brownian part,
    /// e.g. `L_t = m G_t + δ B_{G_t}` for variance gamma.
    Natural,
    /// `μ` chosen so that `μ^S = 0` exactly (S is a P-martingale).
    Martingale,
    /// Explicit log-drift per year.
    Rate(f64),
}

/// An exponential Lévy model with spot and horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyModel {
    sigma: f64,
    jumps: JumpMeasure,
    drift: LogDrift,
    s0: f64,
    maturity: f64,
}

/// `μ^S`, `Γ` and `σ² + Γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyMoments {
    pub mu_s: f64,
    pub gamma: f64,
    pub denom: f64,
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and > 0, got {v}")))
    }
}

fn check_nonneg(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and >= 0, got {v}")))
    }
}

/// Complex `ln(1 + z)`, accurate for small `|z|`.
fn ln_1p(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let modulus_m1 = x * (2.0 + x) + y * y;
    Complex64::new(0.5 * modulus_m1.ln_1p(), y.atan2(1.0 + x))
}

impl LevyModel {
    fn new(sigma: f64, jumps: JumpMeasure, s0: f64, maturity: f64) -> Result<Self> {
        check_nonneg("sigma", sigma)?;
        check_positive("S0", s0)?;
        check_positive("T", maturity)?;
        match jumps {
            JumpMeasure::None => {}
            JumpMeasure::VarianceGamma { c, g, m } => {
                check_positive("C", c)?;
                check_positive("G", g)?;
                check_positive("M", m)?;
            }
            JumpMeasure::Normal { rate, mean, sd } => {
                check_nonneg("jump_rate", rate)?;
                if !mean.is_finite() {
                    return Err(Error::param("jump_mean", "must be finite"));
                }
                check_positive("jump_sd", sd)?;
            }
        }
        Ok(Self {
            sigma,
            jumps,
            drift: LogDrift::Natural,
            s0,
            maturity,
        })
    }

    /// Pure-jump variance gamma model with its natural drift.
    pub fn variance_gamma(c: f64, g: f64, m: f64, s0: f64, maturity: f64) -> Result<Self> {
        Self::new(0.0, JumpMeasure::VarianceGamma { c, g, m }, s0, maturity)
    }

    /// Merton jump diffusion with its natural drift.
    pub fn jump_diffusion(
        sigma: f64,
        jump_rate: f64,
        jump_mean: f64,
        jump_sd: f64,
        s0: f64,
        maturity: f64,
    ) -> Result<Self> {
        Self::new(
            sigma,
            JumpMeasure::Normal {
                rate: jump_rate,
                mean: jump_mean,
                sd: jump_sd,
            },
            s0,
            maturity,
        )
    }

    /// Geometric Brownian motion; the log-drift defaults to zero.
    pub fn pure_diffusion(sigma: f64, s0: f64, maturity: f64) -> Result<Self> {
        check_positive("sigma", sigma)?;
        Ok(Self::new(sigma, JumpMeasure::None, s0, maturity)?.with_drift(LogDrift::Rate(0.0)))
    }

    pub fn with_drift(mut self, drift: LogDrift) -> Self {
        self.drift = drift;
        self
    }

    pub fn with_mu_log(self, mu_log: f64) -> Self {
        self.with_drift(LogDrift::Rate(mu_log))
    }

    pub fn with_sigma(mut self, sigma: f64) -> Result<Self> {
        check_nonneg("sigma", sigma)?;
        if matches!(self.jumps, JumpMeasure::None) {
            check_positive("sigma", sigma)?;
        }
        self.sigma = sigma;
        Ok(self)
    }

    pub fn with_spot(mut self, s0: f64) -> Result<Self> {
        check_positive("S0", s0)?;
        self.s0 = s0;
        Ok(self)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn jumps(&self) -> JumpMeasure {
        self.jumps
    }

    pub fn drift(&self) -> LogDrift {
        self.drift
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    pub fn has_jumps(&self) -> bool {
        match self.jumps {
            JumpMeasure::None => false,
            JumpMeasure::Normal { rate, .. } => rate > 0.0,
            JumpMeasure::VarianceGamma { .. } => true,
        }
    }

    /// Open interval of `Re(a)` on which `g(a)` (and `ψ`) is finite.
    pub fn strip(&self) -> (f64, f64) {
        match self.jumps {
            JumpMeasure::VarianceGamma { g, m, .. } => (-g, m),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub(crate) fn check_strip(&self, re: f64, (lo, hi): (f64, f64)) -> Result<()> {
        if re > lo && re < hi {
            Ok(())
        } else {
            Err(Error::StripViolation { re, lo, hi })
        }
    }

    /// `g(a) = ∫ (e^{a z} - 1) ν(dz)` in closed form; no strip check.
    pub fn jump_transform(&self, a: Complex64) -> Complex64 {
        match self.jumps {
            JumpMeasure::None => Complex64::new(0.0, 0.0),
            // C ln(M G / ((M - a)(G + a)))
            JumpMeasure::VarianceGamma { c, g, m } => -(ln_1p(-a / m) + ln_1p(a / g)) * c,
            JumpMeasure::Normal { rate, mean, sd } => {
                expm1(a * mean + a * a * (0.5 * sd * sd)) * rate
            }
        }
    }

    /// `∫ z ν(dz)`.
    pub fn jump_mean(&self) -> f64 {
        match self.jumps {
            JumpMeasure::None => 0.0,
            JumpMeasure::VarianceGamma { c, g, m } => c * (1.0 / m - 1.0 / g),
            JumpMeasure::Normal { rate, mean, .. } => rate * mean,
        }
    }

    fn g_real(&self, a: f64) -> f64 {
        self.jump_transform(Complex64::new(a, 0.0)).re
    }

    /// `σ²/2 + ∫ (e^z - 1) ν(dz)`: what `μ^S` adds to the uncompensated drift.
    fn drift_offset(&self) -> f64 {
        0.5 * self.sigma * self.sigma + self.g_real(1.0)
    }

    /// Drift `b` of `log(S/S_0)` written against the raw jump sum.
    pub fn raw_drift(&self) -> f64 {
        match self.drift {
            LogDrift::Natural => 0.0,
            LogDrift::Martingale => -self.drift_offset(),
            LogDrift::Rate(mu) => mu - self.jump_mean(),
        }
    }

    /// The log-drift `μ` of the compensated representation.
    pub fn mu_log(&self) -> f64 {
        match self.drift {
            LogDrift::Natural => self.jump_mean(),
            LogDrift::Martingale => self.jump_mean() - self.drift_offset(),
            LogDrift::Rate(mu) => mu,
        }
    }

    /// `μ^S`, `Γ` and `σ² + Γ`.
    pub fn levy_moments(&self) -> Result<LevyMoments> {
        if let JumpMeasure::VarianceGamma { m, .. } = self.jumps {
            if m <= 1.0 {
                return Err(Error::MomentDivergence {
                    quantity: "mu_S",
                    reason: format!("needs M > 1, got M = {m}"),
                });
            }
            if m <= 2.0 {
                return Err(Error::MomentDivergence {
                    quantity: "Gamma",
                    reason: format!("needs M > 2, got M = {m}"),
                });
            }
        }
        let mu_s = match self.drift {
            LogDrift::Natural => self.drift_offset(),
            LogDrift::Martingale => 0.0,
            LogDrift::Rate(mu) => mu + (self.drift_offset() - self.jump_mean()),
        };
        let gamma = match self.jumps {
            JumpMeasure::None => 0.0,
            JumpMeasure::VarianceGamma { c, g, m } => {
                // g(2) - 2 g(1) = C ln((M-1)^2 (G+1)^2 / (M (M-2) G (G+2)))
                c * ((1.0 / (m * (m - 2.0))).ln_1p() + (1.0 / (g * (g + 2.0))).ln_1p())
            }
            JumpMeasure::Normal { rate, mean, sd } => {
                let v = sd * sd;
                // E[(e^Z - 1)^2] for Z ~ N(mean, v)
                let e2 = (2.0 * mean + 2.0 * v).exp_m1();
                let e1 = (mean + 0.5 * v).exp_m1();
                rate * (e2 - 2.0 * e1)
            }
        };
        let denom = self.sigma * self.sigma + gamma;
        Ok(LevyMoments { mu_s, gamma, denom })
    }

    /// `ψ(w)` without the strip check.
    pub(crate) fn char_exponent_unchecked(&self, w: Complex64) -> Complex64 {
        w * self.raw_drift() + w * w * (0.5 * self.sigma * self.sigma) + self.jump_transform(w)
    }

    /// Cumulant exponent under P: `E[(S_T/S_0)^w] = exp(T ψ(w))`.
    pub fn char_exponent(&self, w: Complex64) -> Result<Complex64> {
        self.check_strip(w.re, self.strip())?;
        Ok(self.char_exponent_unchecked(w))
    }

    /// Lévy density `ν(dz)/dz`.
    pub fn jump_density(&self, z: f64) -> f64 {
        match self.jumps {
            JumpMeasure::None => 0.0,
            JumpMeasure::VarianceGamma { c, g, m } => {
                if z > 0.0 {
                    c * (-m * z).exp() / z
                } else if z < 0.0 {
                    c * (g * z).exp() / -z
                } else {
                    0.0
                }
            }
            JumpMeasure::Normal { rate, mean, sd } => {
                let u = (z - mean) / sd;
                rate * (-0.5 * u * u).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
            }
        }
    }

    /// Integration range `[lo, hi]` for `∫ h(z) ν(dz)` when `|h(z)|` grows no
    /// faster than `e^{grow_neg z}` on `z < 0` and `e^{grow_pos z}` on `z > 0`.
    ///
    /// Cuts where the tail of `|h| ν` falls below `e^{-40}` times its scale.
    fn jump_range(&self, grow_neg: f64, grow_pos: f64) -> (f64, f64) {
        match self.jumps {
            JumpMeasure::None => (0.0, 0.0),
            JumpMeasure::VarianceGamma { g, m, .. } => {
                let neg = (g + grow_neg.min(0.0)).max(1e-3);
                let pos = (m - grow_pos.max(0.0)).max(1e-3);
                (-40.0 / neg, 40.0 / pos)
            }
            JumpMeasure::Normal { mean, sd, .. } => {
                let v = sd * sd;
                let lo = mean + grow_neg.min(0.0) * v - 12.0 * sd;
                let hi = mean + grow_pos.max(0.0) * v + 12.0 * sd;
                (lo.min(-1e-12), hi.max(1e-12))
            }
        }
    }

    /// Adaptive quadrature of `∫ h(z) ν(dz)`; the independent route used to
    /// audit the closed forms.
    ///
    /// `h` must vanish at `z = 0` fast enough to cancel the `1/|z|`
    /// singularity of the variance gamma density.
    pub fn integrate_jumps<F: Fn(f64) -> Complex64>(
        &self,
        h: F,
        grow_neg: f64,
        grow_pos: f64,
    ) -> Estimate {
        let tol = Tolerance {
            abs: 1e-16,
            rel: 1e-13,
            max_intervals: 20_000,
        };
        let (lo, hi) = self.jump_range(grow_neg, grow_pos);
        let integrand = |z: f64| {
            let d = self.jump_density(z);
            if d == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                h(z) * d
            }
        };
        let neg = quadrature::integrate(&integrand, lo, 0.0, tol);
        let pos = quadrature::integrate(&integrand, 0.0, hi, tol);
        Estimate {
            value: neg.value + pos.value,
            error: neg.error + pos.error,
            intervals: neg.intervals + pos.intervals,
        }
    }

    /// Fixed `(z, weight × ν density)` rule over the jump sizes.
    ///
    /// Geometric panels toward `z = 0` for variance gamma, uniform panels for
    /// Gaussian jumps; `grow_pos` as in [`LevyModel::integrate_jumps`].
    pub fn jump_rule(&self, grow_pos: f64) -> Vec<(f64, f64)> {
        let (lo, hi) = self.jump_range(0.0, grow_pos);
        let breaks: Vec<f64> = match self.jumps {
            JumpMeasure::None => return Vec::new(),
            JumpMeasure::VarianceGamma { .. } => {
                let mut b: Vec<f64> = (0..=24).map(|k| lo * 0.5f64.powi(k)).collect();
                b.push(0.0);
                b.extend((0..=24).rev().map(|k| hi * 0.5f64.powi(k)));
                b
            }
            JumpMeasure::Normal { .. } => {
                let n = 64;
                let mut b: Vec<f64> = (0..=n)
                    .map(|k| lo + (hi - lo) * k as f64 / n as f64)
                    .collect();
                b.push(0.0);
                b.sort_by(f64::total_cmp);
                b.dedup();
                b
            }
        };
        // Kinks of per-sample integrands fall anywhere; finer panels keep
        // the fixed rule's error on them small.
        let fine: Vec<f64> = breaks
            .windows(2)
            .flat_map(|w| (0..4).map(move |j| w[0] + (w[1] - w[0]) * j as f64 / 4.0))
            .chain(breaks.last().copied())
            .collect();
        quadrature::composite_rule(&fine)
            .into_iter()
            .map(|(z, w)| (z, w * self.jump_density(z)))
            .filter(|&(_, w)| w > 0.0)
            .collect()
    }

    /// Checks the standing assumptions on the model.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();

        if let JumpMeasure::VarianceGamma { m, .. } = self.jumps {
            // (e^z - 1)^4 ν(dz) carries e^{(4 - M) z} / z on z > 0.
            if m <= 4.0 {
                violations.push(Violation::FourthMoment { m });
            }
        }

        let moments = match self.levy_moments() {
            Ok(m) => m,
            Err(e) => {
                violations.push(Violation::MomentsUndefined {
                    reason: e.to_string(),
                });
                return ValidationReport::new(None, violations);
            }
        };

        if !(moments.denom > 0.0) {
            violations.push(Violation::DegenerateVariance {
                denom: moments.denom,
            });
            return ValidationReport::new(None, violations);
        }

        let c0 = moments.mu_s / moments.denom;
        let sup = self.jump_ratio_sup(c0);
        if let Some(s) = sup {
            if !(s < 1.0) {
                violations.push(Violation::JumpRatioBound { sup: s, c0 });
            }
        }
        let margin = sup.map_or(f64::INFINITY, |s| 1.0 - s);
        let epsilon = 0.5 * moments.denom.min(margin);
        let epsilon = (epsilon > 0.0).then_some(epsilon);
        ValidationReport::new(epsilon, violations)
    }

    /// `sup_z c0 (e^z - 1)` over the support of ν, `None` without jumps.
    fn jump_ratio_sup(&self, c0: f64) -> Option<f64> {
        if !self.has_jumps() {
            return None;
        }
        // Both shipped families have unbounded support on each side, so
        // e^z - 1 ranges over (-1, ∞).
        if c0 > 0.0 {
            Some(f64::INFINITY)
        } else {
            Some(-c0)
        }
    }
}

/// A failed standing assumption together with the offending quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "assumption", rename_all = "snake_case")]
pub enum Violation {
    /// `σ² + Γ` is not bounded away from zero.
    DegenerateVariance { denom: f64 },
    /// `λ S γ = c0 (e^z - 1)` is not bounded below one on the jump support.
    JumpRatioBound { sup: f64, c0: f64 },
    /// `∫ (e^z - 1)^4 ν(dz)` diverges (variance gamma needs `M > 4`).
    FourthMoment { m: f64 },
    /// `μ^S` or `Γ` is infinite.
    MomentsUndefined { reason: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DegenerateVariance { denom } => {
                write!(f, "sigma^2 + Gamma = {denom} is not positive")
            }
            Violation::JumpRatioBound { sup, c0 } => write!(
                f,
                "sup of c0 (e^z - 1) is {sup} >= 1 (c0 = mu_S / (sigma^2 + Gamma) = {c0})"
            ),
            Violation::FourthMoment { m } => {
                write!(f, "fourth jump moment diverges: M = {m} <= 4")
            }
            Violation::MomentsUndefined { reason } => write!(f, "moments undefined: {reason}"),
        }
    }
}

/// Outcome of [`LevyModel::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub epsilon: Option<f64>,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn new(epsilon: Option<f64>, violations: Vec<Violation>) -> Self {
        Self {
            ok: violations.is_empty() && epsilon.is_some_and(|e| e > 0.0),
            epsilon,
            violations,
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok {
            write!(f, "ok (epsilon = {})", self.epsilon.unwrap_or(0.0))
        } else {
            let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
            write!(f, "failed: {}", parts.join("; "))
        }
    }
}

/// Model family names used in spec files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    VarianceGamma,
    JumpDiffusion,
    PureDiffusion,
}

/// `mu_log` in a spec file: a number, `"natural"` or `"martingale"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DriftSpec {
    Value(f64),
    Keyword(DriftKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftKeyword {
    Natural,
    Martingale,
}

/// Serialized model specification (TOML or JSON).
///
/// Keys: `variant`, `C`, `G`, `M`, `sigma`, `mu_log`, `jump_rate`,
/// `jump_mean`, `jump_sd`, `S0`, `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub variant: Variant,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_log: Option<DriftSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jump_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jump_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jump_sd: Option<f64>,
    #[serde(rename = "S0")]
    pub s0: f64,
    #[serde(rename = "T")]
    pub maturity: f64,
}

fn required(v: Option<f64>, key: &str, variant: Variant) -> Result<f64> {
    v.ok_or_else(|| Error::Spec(format!("key `{key}` is required for variant {variant:?}")))
}

fn forbidden(v: Option<f64>, key: &str, variant: Variant) -> Result<()> {
    match v {
        Some(_) => Err(Error::Spec(format!(
            "key `{key}` is not used by variant {variant:?}"
        ))),
        None => Ok(()),
    }
}

impl ModelSpec {
    pub fn build(&self) -> Result<LevyModel> {
        let v = self.variant;
        let keyed = |e: Error| match e {
            Error::InvalidParameter { name, reason } => {
                Error::Spec(format!("key `{name}`: {reason}"))
            }
            other => other,
        };
        let model = match v {
            Variant::VarianceGamma => {
                forbidden(self.jump_rate, "jump_rate", v)?;
                forbidden(self.jump_mean, "jump_mean", v)?;
                forbidden(self.jump_sd, "jump_sd", v)?;
                LevyModel::variance_gamma(
                    required(self.c, "C", v)?,
                    required(self.g, "G", v)?,
                    required(self.m, "M", v)?,
                    self.s0,
                    self.maturity,
                )
                .and_then(|m| m.with_sigma(self.sigma.unwrap_or(0.0)))
            }
            Variant::JumpDiffusion => {
                forbidden(self.c, "C", v)?;
                forbidden(self.g, "G", v)?;
                forbidden(self.m, "M", v)?;
                LevyModel::jump_diffusion(
                    required(self.sigma, "sigma", v)?,
                    required(self.jump_rate, "jump_rate", v)?,
                    required(self.jump_mean, "jump_mean", v)?,
                    required(self.jump_sd, "jump_sd", v)?,
                    self.s0,
                    self.maturity,
                )
            }
            Variant::PureDiffusion => {
                for (val, key) in [
                    (self.c, "C"),
                    (self.g, "G"),
                    (self.m, "M"),
                    (self.jump_rate, "jump_rate"),
                    (self.jump_mean, "jump_mean"),
                    (self.jump_sd, "jump_sd"),
                ] {
                    forbidden(val, key, v)?;
                }
                LevyModel::pure_diffusion(required(self.sigma, "sigma", v)?, self.s0, self.maturity)
            }
        }
        .map_err(keyed)?;
        let drift = match self.mu_log {
            None if v == Variant::PureDiffusion => LogDrift::Rate(0.0),
            None | Some(DriftSpec::Keyword(DriftKeyword::Natural)) => LogDrift::Natural,
            Some(DriftSpec::Keyword(DriftKeyword::Martingale)) => LogDrift::Martingale,
            Some(DriftSpec::Value(mu)) if mu.is_finite() => LogDrift::Rate(mu),
            Some(DriftSpec::Value(mu)) => {
                return Err(Error::Spec(format!("key `mu_log`: must be finite, got {mu}")))
            }
        };
        Ok(model.with_drift(drift))
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Spec(e.to_string()))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Spec(e.to_string()))
    }

    /// Reads a `.toml` or `.json` model file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Spec(format!("{}: {e}", path.display())))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json_str(&text),
            Some("toml") => Self::from_toml_str(&text),
            _ => Err(Error::Spec(format!(
                "{}: expected a .toml or .json extension",
                path.display()
            ))),
        }
    }
}

impl From<&LevyModel> for ModelSpec {
    fn from(model: &LevyModel) -> Self {
        let mu_log = Some(match model.drift {
            LogDrift::Natural => DriftSpec::Keyword(DriftKeyword::Natural),
            LogDrift::Martingale => DriftSpec::Keyword(DriftKeyword::Martingale),
            LogDrift::Rate(mu) => DriftSpec::Value(mu),
        });
        let base = ModelSpec {
            variant: Variant::PureDiffusion,
            c: None,
            g: None,
            m: None,
            sigma: Some(model.sigma),
            mu_log,
            jump_rate: None,
            jump_mean: None,
            jump_sd: None,
            s0: model.s0,
            maturity: model.maturity,
        };
        match model.jumps {
            JumpMeasure::None => base,
            JumpMeasure::VarianceGamma { c, g, m } => ModelSpec {
                variant: Variant::VarianceGamma,
                c: Some(c),
                g: Some(g),
                m: Some(m),
                ..base
            },
            JumpMeasure::Normal { rate, mean, sd } => ModelSpec {
                variant: Variant::JumpDiffusion,
                jump_rate: Some(rate),
                jump_mean: Some(mean),
                jump_sd: Some(sd),
                ..base
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn calibrated_vg() -> LevyModel {
        LevyModel::variance_gamma(6.7910, 30.1807, 33.1507, 2000.0, 1.0).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn calibrated_parameters_validate() {
        let report = calibrated_vg().validate();
        assert!(report.ok, "{report}");
        assert!(report.epsilon.unwrap() > 0.0);
    }

    #[test]
    fn fourth_moment_threshold() {
        let model = LevyModel::variance_gamma(1.0, 5.0, 3.0, 100.0, 1.0).unwrap();
        let report = model.validate();
        assert!(!report.ok);
        assert!(report
            .violations
            .contains(&Violation::FourthMoment { m: 3.0 }));
    }

    #[test]
    fn positive_stock_drift_breaks_jump_bound() {
        // M < G + 1 makes ∫ (e^z - 1) ν(dz) positive under the natural drift.
        let model = LevyModel::variance_gamma(5.0, 30.0, 10.0, 100.0, 1.0).unwrap();
        let oracle = model
            .integrate_jumps(|z| c(z.exp_m1(), 0.0), 0.0, 1.0)
            .value
            .re;
        assert!(oracle > 0.0);
        let report = model.validate();
        assert!(!report.ok);
        assert!(matches!(
            report.violations[0],
            Violation::JumpRatioBound { sup, .. } if sup.is_infinite()
        ));
    }

    #[test]
    fn jump_bound_needs_c0_above_minus_one() {
        // Calibrated G, M with a steep negative drift: c0 < -1.
        let model = calibrated_vg().with_mu_log(-0.5);
        let report = model.validate();
        assert!(matches!(
            report.violations.as_slice(),
            [Violation::JumpRatioBound { sup, .. }] if *sup > 1.0
        ));
    }

    #[test]
    fn pure_diffusion_moments() {
        let model = LevyModel::pure_diffusion(0.2, 100.0, 1.0)
            .unwrap()
            .with_mu_log(0.05);
        let m = model.levy_moments().unwrap();
        assert_eq!(m.gamma, 0.0);
        assert!((m.mu_s - (0.05 + 0.02)).abs() < 1e-16);
        assert!(model.validate().ok);
    }

    #[test]
    fn calibrated_stock_drift_is_about_minus_0_013() {
        let m = calibrated_vg().levy_moments().unwrap();
        assert!((m.mu_s + 0.013).abs() < 5e-4, "{}", m.mu_s);
        let oracle_mu = calibrated_vg()
            .integrate_jumps(|z| c(z.exp_m1(), 0.0), 0.0, 1.0)
            .value
            .re;
        let oracle_gamma = calibrated_vg()
            .integrate_jumps(|z| c(z.exp_m1().powi(2), 0.0), 0.0, 2.0)
            .value
            .re;
        assert!(rel(m.mu_s, oracle_mu) < 1e-10);
        assert!(rel(m.gamma, oracle_gamma) < 1e-10);
    }

    #[test]
    fn moments_vanish_as_jump_measure_collapses() {
        let mut last = f64::INFINITY;
        for scale in [1e1, 1e2, 1e3, 1e4] {
            let m = LevyModel::variance_gamma(2.0, 30.0 * scale, 33.0 * scale, 1.0, 1.0)
                .unwrap()
                .levy_moments()
                .unwrap();
            assert!(m.gamma < last);
            last = m.gamma;
            assert!(m.mu_s.abs() < 1.0 / scale);
        }
        assert!(last < 1e-8);
    }

    #[test]
    fn moment_divergence_errors() {
        let m = LevyModel::variance_gamma(1.0, 5.0, 1.5, 1.0, 1.0).unwrap();
        assert!(matches!(
            m.levy_moments(),
            Err(Error::MomentDivergence {
                quantity: "Gamma",
                ..
            })
        ));
        let m = LevyModel::variance_gamma(1.0, 5.0, 0.5, 1.0, 1.0).unwrap();
        assert!(matches!(
            m.levy_moments(),
            Err(Error::MomentDivergence {
                quantity: "mu_S",
                ..
            })
        ));
        assert!(!m.validate().ok);
    }

    #[test]
    fn exponent_normalization_and_diffusion_form() {
        assert_eq!(calibrated_vg().char_exponent(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        let model = LevyModel::pure_diffusion(0.3, 1.0, 1.0)
            .unwrap()
            .with_mu_log(0.1);
        for w in [c(1.0, 0.0), c(-2.0, 3.0), c(7.5, -40.0)] {
            let expect = w * 0.1 + w * w * 0.045;
            assert!((model.char_exponent(w).unwrap() - expect).norm() < 1e-13 * expect.norm());
        }
    }

    #[test]
    fn exponent_strip_violation_reports_interval() {
        let err = calibrated_vg().char_exponent(c(40.0, 0.0)).unwrap_err();
        match err {
            Error::StripViolation { lo, hi, .. } => {
                assert_eq!(lo, -30.1807);
                assert_eq!(hi, 33.1507);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exponent_at_one_matches_quadrature() {
        let model = calibrated_vg();
        let closed = model.char_exponent(c(1.0, 0.0)).unwrap();
        let b = model.mu_log();
        let jump = model
            .integrate_jumps(
                |z| quadrature::expm1_minus_linear(c(z, 0.0)),
                0.0,
                1.0,
            )
            .value;
        let oracle = jump + b;
        assert!((closed - oracle).norm() < 1e-10 * oracle.norm());
    }

    #[test]
    fn martingale_drift_zeroes_stock_drift_exactly() {
        for model in [
            calibrated_vg().with_drift(LogDrift::Martingale),
            LevyModel::jump_diffusion(0.2, 1.0, -0.1, 0.15, 100.0, 1.0)
                .unwrap()
                .with_drift(LogDrift::Martingale),
            LevyModel::pure_diffusion(0.25, 1.0, 1.0)
                .unwrap()
                .with_mu_log(-0.5 * 0.25 * 0.25),
        ] {
            assert_eq!(model.levy_moments().unwrap().mu_s, 0.0);
        }
    }

    #[test]
    fn spec_file_round_trip_and_errors() {
        let toml = r#"
            variant = "variance_gamma"
            C = 6.7910
            G = 30.1807
            M = 33.1507
            sigma = 0.0
            S0 = 2000.0
            T = 1.0
        "#;
        let spec = ModelSpec::from_toml_str(toml).unwrap();
        let model = spec.build().unwrap();
        assert_eq!(model, calibrated_vg());
        let back = ModelSpec::from(&model).build().unwrap();
        assert_eq!(back, model);

        let err = ModelSpec::from_toml_str(&toml.replace("C = 6.7910", "Cx = 6.7910")).unwrap_err();
        assert!(err.to_string().contains("Cx"), "{err}");
        let err = ModelSpec::from_toml_str(&toml.replace("C = 6.7910", ""))
            .unwrap()
            .build()
            .unwrap_err();
        assert!(err.to_string().contains("`C`"), "{err}");
        let err = ModelSpec::from_toml_str(&toml.replace("G = 30.1807", "G = -1.0"))
            .unwrap()
            .build()
            .unwrap_err();
        assert!(err.to_string().contains("`G`"), "{err}");

        let json = r#"{"variant":"jump_diffusion","sigma":0.2,"jump_rate":1.0,
            "jump_mean":-0.1,"jump_sd":0.15,"mu_log":"martingale","S0":100,"T":0.5}"#;
        let model = ModelSpec::from_json_str(json).unwrap().build().unwrap();
        assert_eq!(model.drift(), LogDrift::Martingale);
    }
}
