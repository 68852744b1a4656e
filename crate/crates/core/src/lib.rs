//! Quadratic hedging of claims on exponential Lévy underliers.
//!
//! The crate computes the locally risk-minimizing ratio `ξ̃` and the
//! mean-variance hedge `(c̃, θ̃)` for European calls from discretely observed
//! prices. Conditional expectations under the variance-optimal martingale
//! measure are evaluated by damped Fourier inversion; a Monte Carlo engine
//! provides independent oracles and hedging-error backtests.
//!
//! ```
//! use qhedge::{ClaimSpec, FourierEngine, FourierGrid, LevyModel, MmmTransform, ObservedPath};
//!
//! let model = LevyModel::variance_gamma(6.7910, 30.1807, 33.1507, 2000.0, 1.0)?;
//! assert!(model.validate().ok);
//! let engine = FourierEngine::new(MmmTransform::new(model)?, FourierGrid::default())?;
//!
//! let path = ObservedPath::new(vec![0.0, 0.004, 0.008], vec![2000.0, 2011.0, 1994.0])?;
//! let claim = ClaimSpec::call(2000.0, 1.0)?;
//! let report = qhedge::mvh_strategy(&engine, &path, &claim, path.next_date())?;
//! assert!((report.theta_tilde - report.xi_tilde).abs() < 0.01);
//! # Ok::<(), qhedge::Error>(())
//! ```

pub mod error;
pub mod fourier;
pub mod levy_model;
pub mod mmm;
pub mod quadrature;
pub mod simulation;
pub mod strategies;

pub use error::{Error, Result};

/// Engine version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use fourier::{
    ClaimKind, ClaimSpec, FourierEngine, FourierGrid, Interpolation, Kernel, MoneynessTable,
    StrikeValues,
};
pub use levy_model::{
    JumpMeasure, LevyModel, LevyMoments, LogDrift, ModelSpec, ValidationReport, Variant,
    Violation,
};
pub use mmm::{MmmTransform, TransformSummary};
pub use strategies::{
    advance_state, lrm_ratio, mvh_strategies, mvh_strategy, HedgeReport, HedgeState,
    ObservedPath,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/measure.md")]
    mod measure {}
    #[doc = include_str!("../../../book/src/fourier.md")]
    mod fourier {}
    #[doc = include_str!("../../../book/src/strategies.md")]
    mod strategies {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/accuracy.md")]
    mod accuracy {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
