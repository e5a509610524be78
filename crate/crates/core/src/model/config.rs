use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{OffspringLaw, RateSet};

pub const DEFAULT_FRONTIER_CAP: usize = 10_000_000;

/// Diseases carried by the root at time zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootState {
    BothInfected,
    OnlyA,
    OnlyB,
}

impl RootState {
    pub fn has_a(self) -> bool {
        matches!(self, RootState::BothInfected | RootState::OnlyA)
    }

    pub fn has_b(self) -> bool {
        matches!(self, RootState::BothInfected | RootState::OnlyB)
    }

    pub fn swapped(self) -> Self {
        match self {
            RootState::OnlyA => RootState::OnlyB,
            RootState::OnlyB => RootState::OnlyA,
            RootState::BothInfected => RootState::BothInfected,
        }
    }
}

fn default_cap() -> usize {
    DEFAULT_FRONTIER_CAP
}

/// Everything a Monte Carlo experiment needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub rates: RateSet<f64>,
    pub offspring: OffspringLaw<f64>,
    pub max_generation: u32,
    pub replicas: u32,
    pub master_seed: u64,
    pub root_state: RootState,
    #[serde(default = "default_cap")]
    pub frontier_cap: usize,
}

impl SimConfig {
    pub fn validate(self) -> Result<Self> {
        self.rates.validate()?;
        let offspring = self.offspring.clone().validate()?;
        if self.max_generation < 1 {
            return Err(Error::InvalidConfig("max_generation must be >= 1".into()));
        }
        if self.replicas < 1 {
            return Err(Error::InvalidConfig("replicas must be >= 1".into()));
        }
        if self.frontier_cap < 1 {
            return Err(Error::InvalidConfig("frontier_cap must be >= 1".into()));
        }
        Ok(SimConfig { offspring, ..self })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<SimConfig>(text)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .validate()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config is always serializable")
    }

    /// The same experiment with the roles of A and B exchanged.
    pub fn swapped(&self) -> Self {
        SimConfig {
            rates: self.rates.swapped(),
            root_state: self.root_state.swapped(),
            ..self.clone()
        }
    }
}
