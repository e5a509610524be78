use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Disease;
use crate::scalar::{Extended, Real};

/// Infection and recovery instants of one disease at one vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct DiseaseTimeline<T> {
    pub infected_at: Extended<T>,
    pub recovered_at: Extended<T>,
}

impl<T: Real> DiseaseTimeline<T> {
    pub fn never() -> Self {
        DiseaseTimeline {
            infected_at: Extended::Infinite,
            recovered_at: Extended::Infinite,
        }
    }

    pub fn new(infected_at: Extended<T>, recovered_at: Extended<T>) -> Result<Self> {
        let ok = match infected_at {
            Extended::Infinite => recovered_at.is_infinite(),
            Extended::Finite(t) => t >= T::zero() && Extended::Finite(t).lt(recovered_at),
        };
        if ok {
            Ok(DiseaseTimeline {
                infected_at,
                recovered_at,
            })
        } else {
            Err(Error::InvalidConfig(format!(
                "timeline requires recovered_at > infected_at >= 0 (got {infected_at}, {recovered_at})"
            )))
        }
    }

    #[inline]
    pub fn ever_infected(&self) -> bool {
        self.infected_at.is_finite()
    }

    /// Per-disease compartment at time `t`.
    pub fn phase_at(&self, t: T) -> Phase {
        let t = Extended::Finite(t);
        if t.lt(self.infected_at) {
            Phase::Susceptible
        } else if t.lt(self.recovered_at) {
            Phase::Infected
        } else {
            Phase::Recovered
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Susceptible,
    Infected,
    Recovered,
}

/// The nine joint compartments. Upper case marks an active infection,
/// lower case recovery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexState {
    S,
    A,
    B,
    LowerA,
    LowerB,
    UpperALowerB,
    LowerAUpperB,
    AB,
    LowerALowerB,
}

impl VertexState {
    pub const ALL: [VertexState; 9] = [
        VertexState::S,
        VertexState::A,
        VertexState::B,
        VertexState::LowerA,
        VertexState::LowerB,
        VertexState::UpperALowerB,
        VertexState::LowerAUpperB,
        VertexState::AB,
        VertexState::LowerALowerB,
    ];

    pub fn from_phases(a: Phase, b: Phase) -> Self {
        use Phase::*;
        match (a, b) {
            (Susceptible, Susceptible) => VertexState::S,
            (Infected, Susceptible) => VertexState::A,
            (Susceptible, Infected) => VertexState::B,
            (Recovered, Susceptible) => VertexState::LowerA,
            (Susceptible, Recovered) => VertexState::LowerB,
            (Infected, Recovered) => VertexState::UpperALowerB,
            (Recovered, Infected) => VertexState::LowerAUpperB,
            (Infected, Infected) => VertexState::AB,
            (Recovered, Recovered) => VertexState::LowerALowerB,
        }
    }

    /// Conventional label: S, A, B, a, b, Ab, aB, AB, ab.
    pub fn label(self) -> &'static str {
        match self {
            VertexState::S => "S",
            VertexState::A => "A",
            VertexState::B => "B",
            VertexState::LowerA => "a",
            VertexState::LowerB => "b",
            VertexState::UpperALowerB => "Ab",
            VertexState::LowerAUpperB => "aB",
            VertexState::AB => "AB",
            VertexState::LowerALowerB => "ab",
        }
    }
}

/// A tree vertex's timelines for both diseases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct NodeOutcome<T> {
    pub generation: u32,
    pub timeline_a: DiseaseTimeline<T>,
    pub timeline_b: DiseaseTimeline<T>,
}

impl<T: Real> NodeOutcome<T> {
    pub fn timeline(&self, d: Disease) -> &DiseaseTimeline<T> {
        match d {
            Disease::A => &self.timeline_a,
            Disease::B => &self.timeline_b,
        }
    }

    pub fn state_at(&self, t: T) -> VertexState {
        VertexState::from_phases(self.timeline_a.phase_at(t), self.timeline_b.phase_at(t))
    }
}
