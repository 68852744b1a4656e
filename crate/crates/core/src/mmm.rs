//! The change of measure to the variance-optimal martingale measure P*.
//!
//! For exponential Lévy models the mean-variance trade-off is deterministic,
//! so P* coincides with the minimal martingale measure. Its density process
//! is `Z = E(-∫ λ dM)` with `λ_t S_{t-} = c0 = μ^S / (σ² + Γ)`, and under P*
//! the jump measure becomes
//!
//! ```text
//! ν*(dz) = (1 - c0 (e^z - 1)) ν(dz) = (1 + c0) ν(dz) - c0 e^z ν(dz),
//! ```
//!
//! a nonnegative combination of the original measure and its exponential tilt
//! whenever the model validates. Its jump transform is therefore
//! `g*(a) = (1 + c0) g(a) - c0 (g(a + 1) - g(1))`, and the cumulant exponent
//! under P* is `ψ*(w) = σ² (w² - w) / 2 + g*(w) - w g*(1)`, which makes
//! `ψ*(1) = 0` hold exactly.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::levy_model::{LevyModel, LevyMoments};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmmTransform {
    model: LevyModel,
    moments: LevyMoments,
    c0: f64,
    /// `g(1)`, cached for the exponent and `Γ̂`.
    g1: f64,
}

/// Audit record of the measure change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformSummary {
    pub mu_s: f64,
    pub gamma: f64,
    pub denom: f64,
    pub c0: f64,
    pub epsilon: f64,
}

impl MmmTransform {
    /// Builds the transform; fails unless the model passes validation.
    pub fn new(model: LevyModel) -> Result<Self> {
        let report = model.validate();
        if !report.ok {
            return Err(Error::Validation(Box::new(report)));
        }
        let moments = model.levy_moments()?;
        let c0 = moments.mu_s / moments.denom;
        let g1 = model.jump_transform(Complex64::new(1.0, 0.0)).re;
        Ok(Self {
            model,
            moments,
            c0,
            g1,
        })
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn moments(&self) -> LevyMoments {
        self.moments
    }

    pub fn mu_s(&self) -> f64 {
        self.moments.mu_s
    }

    pub fn gamma(&self) -> f64 {
        self.moments.gamma
    }

    /// `σ² + Γ`.
    pub fn denom(&self) -> f64 {
        self.moments.denom
    }

    /// `λ_t S_{t-} = μ^S / (σ² + Γ)`.
    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn summary(&self) -> TransformSummary {
        TransformSummary {
            mu_s: self.moments.mu_s,
            gamma: self.moments.gamma,
            denom: self.moments.denom,
            c0: self.c0,
            epsilon: self.model.validate().epsilon.unwrap_or(0.0),
        }
    }

    /// `dν*/dν (z) = 1 - c0 (e^z - 1)`.
    pub fn density_factor(&self, z: f64) -> f64 {
        1.0 - self.c0 * z.exp_m1()
    }

    /// Weights of the two components of ν*: `(1 + c0)` on ν and `-c0` on
    /// `e^z ν`.
    pub fn component_weights(&self) -> (f64, f64) {
        (1.0 + self.c0, -self.c0)
    }

    /// Strip of `Re(w)` on which `ψ*` is finite.
    pub fn strip(&self) -> (f64, f64) {
        let (lo, hi) = self.model.strip();
        if self.c0 == 0.0 {
            (lo, hi)
        } else {
            (lo, hi - 1.0)
        }
    }

    /// Strip of `Re(w)` on which `Γ̂(w)` is finite.
    pub fn gamma_hat_strip(&self) -> (f64, f64) {
        let (lo, hi) = self.model.strip();
        (lo, hi - 1.0)
    }

    /// `g*(a) = ∫ (e^{a z} - 1) ν*(dz)`.
    pub fn jump_transform_star(&self, a: Complex64) -> Complex64 {
        let g = self.model.jump_transform(a);
        if self.c0 == 0.0 {
            return g;
        }
        let g_shift = self.model.jump_transform(a + 1.0);
        g * (1.0 + self.c0) - (g_shift - self.g1) * self.c0
    }

    pub(crate) fn char_exponent_unchecked(&self, w: Complex64) -> Complex64 {
        let sigma = self.model.sigma();
        let g1_star = self.jump_transform_star(Complex64::new(1.0, 0.0));
        (w * w - w) * (0.5 * sigma * sigma) + self.jump_transform_star(w) - w * g1_star
    }

    /// Cumulant exponent under P*: `E*[(S_T/S_t)^w | F_t] = exp((T-t) ψ*(w))`.
    pub fn char_exponent(&self, w: Complex64) -> Result<Complex64> {
        self.model.check_strip(w.re, self.strip())?;
        Ok(self.char_exponent_unchecked(w))
    }

    pub(crate) fn gamma_hat_unchecked(&self, w: Complex64) -> Complex64 {
        let g = &self.model;
        g.jump_transform(w + 1.0) - g.jump_transform(w) - self.g1
    }

    /// `Γ̂(w) = ∫ (e^{w z} - 1)(e^z - 1) ν(dz) = g(w+1) - g(w) - g(1)`.
    pub fn gamma_hat(&self, w: Complex64) -> Result<Complex64> {
        self.model.check_strip(w.re, self.gamma_hat_strip())?;
        Ok(self.gamma_hat_unchecked(w))
    }
}
