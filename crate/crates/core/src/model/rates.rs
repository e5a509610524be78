use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Extended, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Disease {
    A,
    B,
}

impl Disease {
    pub const BOTH: [Disease; 2] = [Disease::A, Disease::B];

    #[inline]
    pub fn other(self) -> Disease {
        match self {
            Disease::A => Disease::B,
            Disease::B => Disease::A,
        }
    }
}

impl fmt::Display for Disease {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Disease::A => "A",
            Disease::B => "B",
        })
    }
}

/// The six rates of the two-type process.
///
/// Disease A acquires at `alpha1` on a vertex that never had B and at
/// `beta1` on one that had B at some earlier time (active or recovered);
/// symmetric for B. `mu1`, `mu2` are recovery rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct RateSet<T> {
    pub alpha1: T,
    pub beta1: Extended<T>,
    pub mu1: T,
    pub alpha2: T,
    pub beta2: Extended<T>,
    pub mu2: T,
}

impl<T: Real> RateSet<T> {
    /// Builds and validates a rate set.
    pub fn new(alpha1: T, beta1: Extended<T>, mu1: T, alpha2: T, beta2: Extended<T>, mu2: T) -> Result<Self> {
        RateSet {
            alpha1,
            beta1,
            mu1,
            alpha2,
            beta2,
            mu2,
        }
        .validate()
    }

    /// Same rates for both diseases.
    pub fn symmetric(alpha: T, beta: Extended<T>, mu: T) -> Result<Self> {
        Self::new(alpha, beta, mu, alpha, beta, mu)
    }

    pub fn validate(self) -> Result<Self> {
        let lossy = |v: T| v.to_f64().unwrap_or(f64::NAN);
        for (name, v) in [("alpha1", self.alpha1), ("alpha2", self.alpha2)] {
            if !(v.is_finite() && v >= T::zero()) {
                return Err(Error::NegativeRate { name, value: lossy(v) });
            }
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if let Extended::Finite(v) = b {
                if !(v.is_finite() && v >= T::zero()) {
                    return Err(Error::NegativeRate { name, value: lossy(v) });
                }
            }
        }
        for d in Disease::BOTH {
            let mu = self.recovery(d);
            if !(mu.is_finite() && mu > T::zero()) {
                return Err(Error::NonPositiveRecovery {
                    disease: d,
                    value: lossy(mu),
                });
            }
            if let Extended::Finite(b) = self.boosted(d) {
                if b < self.base(d) {
                    return Err(Error::BoostBelowBase { disease: d });
                }
            }
        }
        Ok(self)
    }

    /// Acquisition rate of `d` for a vertex that never had the other disease.
    #[inline]
    pub fn base(&self, d: Disease) -> T {
        match d {
            Disease::A => self.alpha1,
            Disease::B => self.alpha2,
        }
    }

    /// Acquisition rate of `d` for a vertex that already had the other disease.
    #[inline]
    pub fn boosted(&self, d: Disease) -> Extended<T> {
        match d {
            Disease::A => self.beta1,
            Disease::B => self.beta2,
        }
    }

    #[inline]
    pub fn recovery(&self, d: Disease) -> T {
        match d {
            Disease::A => self.mu1,
            Disease::B => self.mu2,
        }
    }

    /// Cooperativity coefficient `beta/alpha`; `None` when the base rate is zero.
    pub fn cooperativity(&self, d: Disease) -> Option<Extended<T>> {
        let a = self.base(d);
        if a == T::zero() {
            return None;
        }
        Some(match self.boosted(d) {
            Extended::Finite(b) => Extended::Finite(b / a),
            Extended::Infinite => Extended::Infinite,
        })
    }

    /// `alpha/mu` for disease `d`.
    #[inline]
    pub fn base_ratio(&self, d: Disease) -> T {
        self.base(d) / self.recovery(d)
    }

    /// Exchanges the roles of A and B.
    pub fn swapped(&self) -> Self {
        RateSet {
            alpha1: self.alpha2,
            beta1: self.beta2,
            mu1: self.mu2,
            alpha2: self.alpha1,
            beta2: self.beta1,
            mu2: self.mu1,
        }
    }

    /// Largest finite rate; the natural time unit for gap grids.
    pub fn max_finite_rate(&self) -> T {
        let mut m = self.alpha1.max(self.alpha2).max(self.mu1).max(self.mu2);
        for b in [self.beta1, self.beta2] {
            if let Extended::Finite(v) = b {
                m = m.max(v);
            }
        }
        m
    }

    pub fn cast<U: Real>(&self) -> RateSet<U> {
        let c = |v: T| U::lit(v.to_f64().unwrap_or(f64::NAN));
        RateSet {
            alpha1: c(self.alpha1),
            beta1: self.beta1.cast(),
            mu1: c(self.mu1),
            alpha2: c(self.alpha2),
            beta2: self.beta2.cast(),
            mu2: c(self.mu2),
        }
    }
}

/// Returns `rates` unchanged if every rate invariant holds.
pub fn validate_rates<T: Real>(rates: RateSet<T>) -> Result<RateSet<T>> {
    rates.validate()
}
