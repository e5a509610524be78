use thiserror::Error;

use crate::model::Disease;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("rate {name} must be finite and non-negative, got {value}")]
    NegativeRate { name: &'static str, value: f64 },
    #[error("boosted rate for disease {disease} is below its base rate")]
    BoostBelowBase { disease: Disease },
    #[error("recovery rate for disease {disease} must be finite and positive, got {value}")]
    NonPositiveRecovery { disease: Disease, value: f64 },
    #[error("invalid offspring law: {0}")]
    InvalidLaw(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parent has no finite infection time")]
    InvalidParent,
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("offspring mean {mean} is not above one")]
    MeanNotAboveOne { mean: f64 },
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("replica {replica}: frontier of {size} nodes at generation {generation} exceeds cap {cap}")]
    FrontierOverflow {
        replica: u64,
        generation: u32,
        size: usize,
        cap: usize,
    },
    #[error("step size {step:e} fell below the minimum at t = {t}")]
    StepUnderflow { t: f64, step: f64 },
    #[error("no root of the final-size equation for t <= {t_max}")]
    NoRoot { t_max: f64 },
}
