//! Coupled tomato-crop/greenhouse simulation and economic optimal control.
//!
//! The crate couples a daily crop model (three-state SIMPLE or five-state
//! reduced TOMGRO) with an hourly lumped greenhouse climate model, smooths
//! every nonsmooth primitive in the dynamics so the composition is
//! differentiable end to end, computes exact forward-mode sensitivities via
//! dual numbers, and solves the box-constrained economic-yield control
//! problem over daily actuator settings with a projected-gradient method.
//!
//! All model dynamics are generic over [`scalar::Scalar`], so the same code
//! runs on `f32`/`f64` and on [`diff::Dual`] seed vectors. `f64` is the
//! concrete scalar used by the simulation and I/O layers.

pub mod coupling;
pub mod crop;
pub mod diff;
pub mod error;
pub mod greenhouse;
pub mod ocp;
pub mod scalar;
pub mod scenario;
pub mod smoothing;

pub use crop::simple::{CropInputSimple, CropStateSimple, SimpleParams};
pub use crop::tomgro::{CropInputTomgro, CropStateTomgro, TomgroParams};
pub use crop::CropModel;
pub use error::{ModelError, Result};
pub use greenhouse::{control_bounds, Disturbance, GhControl, GhParams, GhState};
pub use scalar::Scalar;
pub use smoothing::SmoothingParams;

/// Default concrete scalar of the simulation and I/O layers.
pub type Real = f64;

/// Crop state at the default scalar.
pub type CropStateSimpleF = CropStateSimple<Real>;
pub type CropStateTomgroF = CropStateTomgro<Real>;
pub type GhStateF = GhState<Real>;
pub type GhControlF = GhControl<Real>;
