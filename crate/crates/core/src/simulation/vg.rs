//! Variance gamma as a gamma time-changed Brownian motion.
//!
//! `L_t = m G_t + δ B_{G_t}` with `G` a gamma subordinator of unit mean rate
//! and variance rate `κ`. Matching `E[e^{a L_t}] = (1 - κ(m a + δ² a²/2))^{-t/κ}`
//! against `(M G / ((M - a)(G + a)))^{C t}` gives
//!
//! ```text
//! C = 1/κ,   G = sqrt(m²/δ⁴ + 2/(κ δ²)) + m/δ²,   M = sqrt(m²/δ⁴ + 2/(κ δ²)) - m/δ²
//! κ = 1/C,   δ² = 2C/(GM),                        m = C (1/M - 1/G)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time-change parametrization `(κ, m, δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VgTimeChange {
    pub kappa: f64,
    pub m: f64,
    pub delta: f64,
}

impl VgTimeChange {
    pub fn from_cgm(c: f64, g: f64, m: f64) -> Result<Self> {
        for (name, v) in [("C", c), ("G", g), ("M", m)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Simulation(format!(
                    "cannot convert VG parameters: {name} = {v} must be finite and > 0"
                )));
            }
        }
        Ok(Self {
            kappa: 1.0 / c,
            m: c * (1.0 / m - 1.0 / g),
            delta: (2.0 * c / (g * m)).sqrt(),
        })
    }

    /// Back to `(C, G, M)`.
    pub fn to_cgm(&self) -> Result<(f64, f64, f64)> {
        let Self { kappa, m, delta } = *self;
        if !(kappa.is_finite() && kappa > 0.0 && delta.is_finite() && delta > 0.0 && m.is_finite()) {
            return Err(Error::Simulation(format!(
                "cannot convert VG parameters: need kappa > 0, delta > 0, finite m; got {self:?}"
            )));
        }
        let d2 = delta * delta;
        let drift = m / d2;
        let root = (drift * drift + 2.0 / (kappa * d2)).sqrt();
        Ok((1.0 / kappa, root + drift, root - drift))
    }
}
