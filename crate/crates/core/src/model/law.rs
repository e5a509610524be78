use std::str::FromStr;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Geometric, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

const EXPLICIT_SUM_TOL: f64 = 1e-12;

/// Offspring distribution of the Galton-Watson tree.
///
/// JSON form is `{"kind": "...", "params": {...}}`, e.g.
/// `{"kind": "binomial", "params": {"n": 2, "p": 0.75}}`. The geometric law
/// lives on `{0, 1, 2, ...}` (failures before the first success) and has
/// mean `(1 - p) / p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub enum OffspringLaw<T> {
    Deterministic { k: u64 },
    Binomial { n: u64, p: T },
    Poisson { lambda: T },
    Geometric { p: T },
    Explicit { probs: Vec<T> },
}

impl<T: Real> OffspringLaw<T> {
    pub fn validate(self) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidLaw(msg));
        let unit = |p: T| p.is_finite() && p >= T::zero() && p <= T::one();
        match &self {
            OffspringLaw::Deterministic { .. } => {}
            OffspringLaw::Binomial { p, .. } if !unit(*p) => return bad(format!("binomial p = {p} outside [0, 1]")),
            OffspringLaw::Poisson { lambda } if !(lambda.is_finite() && *lambda >= T::zero()) => {
                return bad(format!("poisson lambda = {lambda} must be finite and >= 0"))
            }
            OffspringLaw::Geometric { p } if !(unit(*p) && *p > T::zero()) => {
                return bad(format!("geometric p = {p} outside (0, 1]"))
            }
            OffspringLaw::Explicit { probs } => {
                if probs.is_empty() {
                    return bad("explicit law needs at least one probability".into());
                }
                if let Some(p) = probs.iter().find(|p| !unit(**p)) {
                    return bad(format!("explicit probability {p} outside [0, 1]"));
                }
                let sum = probs.iter().fold(T::zero(), |acc, &p| acc + p);
                let tol = T::lit(EXPLICIT_SUM_TOL).max(T::epsilon() * T::from_usize_lossy(4 * probs.len()));
                if (sum - T::one()).abs() > tol {
                    return bad(format!("explicit probabilities sum to {sum}, not 1"));
                }
            }
            _ => {}
        }
        Ok(self)
    }

    /// Exact mean of the law.
    pub fn mean(&self) -> T {
        match self {
            OffspringLaw::Deterministic { k } => T::lit(*k as f64),
            OffspringLaw::Binomial { n, p } => T::lit(*n as f64) * *p,
            OffspringLaw::Poisson { lambda } => *lambda,
            OffspringLaw::Geometric { p } => (T::one() - *p) / *p,
            OffspringLaw::Explicit { probs } => probs
                .iter()
                .enumerate()
                .fold(T::zero(), |acc, (k, &p)| acc + T::from_usize_lossy(k) * p),
        }
    }

    /// Probability generating function `E[s^N]` for `s` in `[0, 1]`.
    pub fn pgf(&self, s: T) -> T {
        match self {
            OffspringLaw::Deterministic { k } => s.powf(T::lit(*k as f64)),
            OffspringLaw::Binomial { n, p } => (T::one() - *p + *p * s).powf(T::lit(*n as f64)),
            OffspringLaw::Poisson { lambda } => (*lambda * (s - T::one())).exp(),
            OffspringLaw::Geometric { p } => *p / (T::one() - (T::one() - *p) * s),
            OffspringLaw::Explicit { probs } => probs.iter().rev().fold(T::zero(), |acc, &p| acc * s + p),
        }
    }

    /// Probability mass function on `0..=K`. Finite laws are exact; Poisson
    /// and geometric laws are cut once the remaining tail is below `tail`.
    pub fn pmf(&self, tail: T) -> Vec<T> {
        let until_tail = |first: T, next: &dyn Fn(usize, T) -> T| {
            let (mut out, mut acc, mut pk) = (vec![], T::zero(), first);
            while T::one() - acc > tail && out.len() < 1_000_000 {
                out.push(pk);
                acc = acc + pk;
                pk = next(out.len() - 1, pk);
            }
            out
        };
        match self {
            OffspringLaw::Deterministic { k } => {
                let mut out = vec![T::zero(); *k as usize + 1];
                out[*k as usize] = T::one();
                out
            }
            OffspringLaw::Binomial { n, p } => {
                let n = *n as usize;
                // recurrence breaks down at p = 1
                if *p == T::one() {
                    return OffspringLaw::Deterministic { k: n as u64 }.pmf(tail);
                }
                let odds = *p / (T::one() - *p);
                let mut out = vec![(T::one() - *p).powi(n as i32)];
                for k in 0..n {
                    let next = out[k] * T::from_usize_lossy(n - k) / T::from_usize_lossy(k + 1) * odds;
                    out.push(next);
                }
                out
            }
            OffspringLaw::Poisson { lambda } => {
                let l = *lambda;
                until_tail((-l).exp(), &|k, pk| pk * l / T::from_usize_lossy(k + 1))
            }
            OffspringLaw::Geometric { p } => until_tail(*p, &|_, pk| pk * (T::one() - *p)),
            OffspringLaw::Explicit { probs } => probs.clone(),
        }
    }

    pub fn cast<U: Real>(&self) -> OffspringLaw<U> {
        let c = |v: T| U::lit(v.to_f64().unwrap_or(f64::NAN));
        match self {
            OffspringLaw::Deterministic { k } => OffspringLaw::Deterministic { k: *k },
            OffspringLaw::Binomial { n, p } => OffspringLaw::Binomial { n: *n, p: c(*p) },
            OffspringLaw::Poisson { lambda } => OffspringLaw::Poisson { lambda: c(*lambda) },
            OffspringLaw::Geometric { p } => OffspringLaw::Geometric { p: c(*p) },
            OffspringLaw::Explicit { probs } => OffspringLaw::Explicit {
                probs: probs.iter().map(|&p| c(p)).collect(),
            },
        }
    }
}

/// Parses the command-line shorthand: `det:2`, `bin:2:0.75`, `poisson:3`,
/// `geom:0.5`, `explicit:0.25,0.5,0.25`.
impl FromStr for OffspringLaw<f64> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidLaw(format!("cannot parse offspring law {s:?}"));
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad());
        let int = |v: &str| v.trim().parse::<u64>().map_err(|_| bad());
        let parts: Vec<&str> = s.split(':').collect();
        let law = match parts.as_slice() {
            [kind, k] if matches!(*kind, "det" | "deterministic") => OffspringLaw::Deterministic { k: int(k)? },
            [kind, n, p] if matches!(*kind, "bin" | "binomial") => OffspringLaw::Binomial { n: int(n)?, p: num(p)? },
            [kind, l] if matches!(*kind, "poisson" | "poi") => OffspringLaw::Poisson { lambda: num(l)? },
            [kind, p] if matches!(*kind, "geom" | "geometric") => OffspringLaw::Geometric { p: num(p)? },
            [kind, ps] if matches!(*kind, "explicit" | "exp") => OffspringLaw::Explicit {
                probs: ps.split(',').map(num).collect::<Result<_>>()?,
            },
            _ => return Err(bad()),
        };
        law.validate()
    }
}

/// Pre-built sampler for an `OffspringLaw<f64>`.
#[derive(Debug, Clone)]
pub enum OffspringSampler {
    Fixed(u64),
    Binomial(Binomial),
    Poisson(Poisson<f64>),
    Geometric(Geometric),
    /// Cumulative probabilities.
    Table(Vec<f64>),
}

impl OffspringSampler {
    pub fn new(law: &OffspringLaw<f64>) -> Result<Self> {
        let law = law.clone().validate()?;
        let err = |e: &dyn std::fmt::Display| Error::InvalidLaw(e.to_string());
        Ok(match law {
            OffspringLaw::Deterministic { k } => OffspringSampler::Fixed(k),
            OffspringLaw::Binomial { n, p } => OffspringSampler::Binomial(Binomial::new(n, p).map_err(|e| err(&e))?),
            OffspringLaw::Poisson { lambda } if lambda == 0.0 => OffspringSampler::Fixed(0),
            OffspringLaw::Poisson { lambda } => OffspringSampler::Poisson(Poisson::new(lambda).map_err(|e| err(&e))?),
            OffspringLaw::Geometric { p } => OffspringSampler::Geometric(Geometric::new(p).map_err(|e| err(&e))?),
            OffspringLaw::Explicit { probs } => {
                let mut acc = 0.0;
                let cum = probs
                    .iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect();
                OffspringSampler::Table(cum)
            }
        })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            OffspringSampler::Fixed(k) => *k,
            OffspringSampler::Binomial(d) => d.sample(rng),
            OffspringSampler::Poisson(d) => d.sample(rng) as u64,
            OffspringSampler::Geometric(d) => d.sample(rng),
            OffspringSampler::Table(cum) => {
                let total = *cum.last().expect("non-empty table");
                let u: f64 = rng.random::<f64>() * total;
                cum.partition_point(|&c| c <= u).min(cum.len() - 1) as u64
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::derive_stream;

    fn laws() -> Vec<OffspringLaw<f64>> {
        vec![
            OffspringLaw::Deterministic { k: 2 },
            OffspringLaw::Binomial { n: 2, p: 0.75 },
            OffspringLaw::Poisson { lambda: 3.0 },
            OffspringLaw::Geometric { p: 0.4 },
            OffspringLaw::Explicit {
                probs: vec![0.2, 0.1, 0.3, 0.4],
            },
        ]
    }

    #[test]
    fn means() {
        assert_eq!(OffspringLaw::<f64>::Deterministic { k: 2 }.mean(), 2.0);
        assert_eq!(OffspringLaw::Binomial { n: 2, p: 0.75 }.mean(), 1.5);
        assert_eq!(OffspringLaw::Poisson { lambda: 3.0 }.mean(), 3.0);
        assert!((OffspringLaw::Geometric { p: 0.4f64 }.mean() - 1.5).abs() < 1e-15);
        assert!(
            (OffspringLaw::Explicit {
                probs: vec![0.2f64, 0.1, 0.3, 0.4]
            }
            .mean()
                - 1.9)
                .abs()
                < 1e-15
        );
    }

    #[test]
    fn pgf_at_one_and_against_pmf_sum() {
        for law in laws() {
            assert!((law.pgf(1.0) - 1.0).abs() < 1e-14, "{law:?}");
        }
        // binomial(2, .75) pmf = (1/16, 6/16, 9/16)
        let b = OffspringLaw::Binomial { n: 2, p: 0.75f64 };
        for s in [0.0f64, 0.3, 0.9] {
            let direct = 1.0 / 16.0 + 6.0 / 16.0 * s + 9.0 / 16.0 * s * s;
            assert!((b.pgf(s) - direct).abs() < 1e-15);
        }
        // geometric pmf p(1-p)^k summed to many terms
        let g = OffspringLaw::Geometric { p: 0.4 };
        let s: f64 = 0.7;
        let direct: f64 = (0..400).map(|k| 0.4 * 0.6f64.powi(k) * s.powi(k)).sum();
        assert!((g.pgf(s) - direct).abs() < 1e-14);
    }

    #[test]
    fn pmf_matches_pgf_and_mean() {
        for law in laws() {
            let pmf = law.pmf(1e-16);
            let total: f64 = pmf.iter().sum();
            let mean: f64 = pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
            let at = |s: f64| pmf.iter().rev().fold(0.0, |acc, &p| acc * s + p);
            assert!((total - 1.0).abs() < 1e-13, "{law:?}");
            assert!((mean - law.mean()).abs() < 1e-10, "{law:?}");
            assert!((at(0.6) - law.pgf(0.6)).abs() < 1e-13, "{law:?}");
        }
        assert_eq!(
            OffspringLaw::Binomial { n: 3, p: 1.0f64 }.pmf(0.0),
            vec![0.0, 0.0, 0.0, 1.0]
        );
    }

    #[test]
    fn validation() {
        assert!(OffspringLaw::Explicit { probs: vec![0.5, 0.4] }.validate().is_err());
        assert!(OffspringLaw::Explicit::<f64> { probs: vec![] }.validate().is_err());
        assert!(OffspringLaw::Binomial { n: 2, p: 1.5 }.validate().is_err());
        assert!(OffspringLaw::Geometric { p: 0.0 }.validate().is_err());
        assert!(OffspringLaw::Poisson { lambda: -1.0 }.validate().is_err());
        assert!(OffspringLaw::Explicit {
            probs: vec![0.25, 0.5, 0.25]
        }
        .validate()
        .is_ok());
    }

    #[test]
    fn shorthand_and_json() {
        assert_eq!(
            "det:2".parse::<OffspringLaw<f64>>().unwrap(),
            OffspringLaw::Deterministic { k: 2 }
        );
        assert_eq!(
            "bin:2:0.75".parse::<OffspringLaw<f64>>().unwrap(),
            OffspringLaw::Binomial { n: 2, p: 0.75 }
        );
        assert_eq!(
            "explicit:0.25,0.5,0.25".parse::<OffspringLaw<f64>>().unwrap(),
            OffspringLaw::Explicit {
                probs: vec![0.25, 0.5, 0.25]
            }
        );
        assert!("det".parse::<OffspringLaw<f64>>().is_err());
        assert!("geom:2".parse::<OffspringLaw<f64>>().is_err());
        let law: OffspringLaw<f64> = serde_json::from_str(r#"{"kind":"binomial","params":{"n":2,"p":0.75}}"#).unwrap();
        assert_eq!(law, OffspringLaw::Binomial { n: 2, p: 0.75 });
        let back = serde_json::to_string(&law).unwrap();
        assert_eq!(back, r#"{"kind":"binomial","params":{"n":2,"p":0.75}}"#);
    }

    #[test]
    fn empirical_means_within_four_standard_errors() {
        const N: usize = 1_000_000;
        for (i, law) in laws().into_iter().enumerate() {
            let sampler = OffspringSampler::new(&law).unwrap();
            let mut rng = derive_stream(99, i as u64);
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..N {
                let k = sampler.sample(&mut rng) as f64;
                sum += k;
                sum_sq += k * k;
            }
            let mean = sum / N as f64;
            let var = sum_sq / N as f64 - mean * mean;
            let se = (var / N as f64).sqrt().max(1e-12);
            assert!(
                (mean - law.mean()).abs() <= 4.0 * se,
                "{law:?}: {mean} vs {}",
                law.mean()
            );
        }
    }
}
