//! Driven, damped optomechanics in the thermodynamic limit of vanishing
//! single-photon coupling and diverging drive.
//!
//! The crate computes the semiclassical stationary branches, their linear
//! stability (drift spectra and Routh–Hurwitz margins), Gaussian steady
//! states with entanglement and squeezing measures, and phase-diagram level
//! analyses: grid sweeps, transitions along slices, boundary continuation,
//! the critical point and critical exponents.
//!
//! Everything is generic over the real scalar ([`Scalar`]: `f32` or `f64`);
//! the aliases at the crate root fix `f64`, which is what the documented
//! tolerances assume. Frequencies and rates are measured in units of the
//! mechanical frequency unless stated otherwise.

// `!(x > y)` is the NaN-rejecting form used throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gaussian;
pub mod model;
pub mod numerics;
pub mod phasediagram;
pub mod scalar;
pub mod semiclassical;
pub mod stability;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use numerics::Tolerances;
pub use semiclassical::BranchId;
pub use stability::{RegionLabel, StabilityClass};

/// `f64` parameter set.
pub type Params = model::SystemParams<f64>;
pub type Branch = semiclassical::Branch<f64>;
pub type Tol = numerics::Tolerances<f64>;
pub type StabilityReport = stability::StabilityReport<f64>;
pub type RegionSignature = stability::RegionSignature<f64>;
pub type GaussianState = gaussian::GaussianState<f64>;
pub type EntanglementReport = gaussian::EntanglementReport<f64>;
pub type SqueezingReport = gaussian::SqueezingReport<f64>;
pub type Hysteresis = semiclassical::Hysteresis<f64>;
pub type GridSpec = phasediagram::GridSpec<f64>;
pub type PhaseMap = phasediagram::PhaseMap<f64>;
pub type Cell = phasediagram::Cell<f64>;
pub type TransitionEvent = phasediagram::TransitionEvent<f64>;
pub type Polyline = phasediagram::Polyline<f64>;
pub type CriticalPoint = phasediagram::CriticalPoint<f64>;
pub type Exponents = phasediagram::Exponents<f64>;
