//! Domain types shared by every stochastic and numerical module.

mod config;
mod law;
mod rates;
mod stream;
mod timeline;

pub use config::{RootState, SimConfig, DEFAULT_FRONTIER_CAP};
pub use law::{OffspringLaw, OffspringSampler};
pub use rates::{validate_rates, Disease, RateSet};
pub use stream::{derive_stream, ReplicaRng};
pub use timeline::{DiseaseTimeline, NodeOutcome, Phase, VertexState};
