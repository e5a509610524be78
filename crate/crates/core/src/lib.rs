//! Two-type cooperative SIR epidemics on Galton-Watson trees.
//!
//! * [`model`]: rates, offspring laws, vertex timelines, experiment configs
//!   and the per-replica random streams.
//! * [`edge`]: parent-to-child transmission, sampled and exact.
//! * [`sim`]: the generation-by-generation Monte Carlo engine.
//! * [`branching`]: thinned offspring laws, extinction probabilities and
//!   criticality classification.
//! * [`meanfield`]: the reduced three-equation mean-field model, its final
//!   size by integration and by the closed-form root, and phase scans.
//!
//! The numerical modules are generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.

pub mod branching;
pub mod edge;
pub mod error;
mod linalg;
pub mod meanfield;
pub mod model;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result};
pub use model::{Disease, RootState, SimConfig};
pub use scalar::{Extended, Real};

pub type ExtendedF64 = scalar::Extended<f64>;
pub type RateSetF64 = model::RateSet<f64>;
pub type RateSetF32 = model::RateSet<f32>;
pub type OffspringLawF64 = model::OffspringLaw<f64>;
pub type OffspringLawF32 = model::OffspringLaw<f32>;
pub type ParentViewF64 = edge::ParentView<f64>;
pub type EdgeOutcomeF64 = edge::EdgeOutcome<f64>;
pub type NodeOutcomeF64 = model::NodeOutcome<f64>;
pub type MeanFieldStateF64 = meanfield::MeanFieldState<f64>;
pub type MeanFieldStateF32 = meanfield::MeanFieldState<f32>;
pub type CriticalityReportF64 = branching::CriticalityReport<f64>;
