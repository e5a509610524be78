//! Branching-process view of the single-type epidemic.
//!
//! An infected vertex with `N ~ p` children infects each one independently
//! with probability `r = alpha / (alpha + mu)`, so the infected vertices form
//! a Galton-Watson process whose offspring law is the Bernoulli(r) thinning
//! of `p`, with PGF `g(s) = f_p(1 - r + r s)` and mean `m r`.
//!
//! In the tree the children of one vertex share its recovery clock, so their
//! infections are positively correlated. The `node_level_*` functions give
//! that law. Its mean, and so the criticality threshold, is unchanged; the
//! survival probability is lower.

use serde::Serialize;

use crate::edge::rates_below_threshold;
use crate::error::{Error, Result};
use crate::model::{OffspringLaw, RateSet};
use crate::scalar::Real;

const FIXED_POINT_TOL: f64 = 1e-12;
const FIXED_POINT_MAX_ITERS: usize = 100_000;
const BISECTION_UPPER_GAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Criticality {
    Subcritical,
    Critical,
    Supercritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalityReport<T> {
    pub ratio: T,
    pub threshold: T,
    pub classification: Criticality,
    pub survival_probability: T,
}

/// Probability that an infected parent passes the disease to a given child
/// before recovering.
#[inline]
pub fn transmission_probability<T: Real>(alpha: T, mu: T) -> T {
    alpha / (alpha + mu)
}

/// Mean number of children an infected vertex infects, `m alpha / (alpha + mu)`.
pub fn thinned_mean<T: Real>(law: &OffspringLaw<T>, alpha: T, mu: T) -> T {
    law.mean() * transmission_probability(alpha, mu)
}

pub fn thinned_pgf<T: Real>(law: &OffspringLaw<T>, alpha: T, mu: T, s: T) -> T {
    let r = transmission_probability(alpha, mu);
    law.pgf(T::one() - r + r * s)
}

/// Full pmf of the thinned law; only available for explicit laws.
pub fn explicit_thinned_pmf<T: Real>(probs: &[T], r: T) -> Vec<T> {
    let mut out = vec![T::zero(); probs.len()];
    for (k, &pk) in probs.iter().enumerate() {
        // binomial(k, r) weights built incrementally
        let mut coeff = T::one();
        for (j, slot) in out.iter_mut().enumerate().take(k + 1) {
            if j > 0 {
                coeff = coeff * T::from_usize_lossy(k + 1 - j) / T::from_usize_lossy(j);
            }
            *slot = *slot + pk * coeff * r.powi(j as i32) * (T::one() - r).powi((k - j) as i32);
        }
    }
    out
}

fn tolerance<T: Real>() -> T {
    T::lit(FIXED_POINT_TOL).max(T::epsilon() * T::lit(4.0))
}

/// Smallest fixed point in `[0, 1]` of the thinned PGF.
///
/// At or below mean one the answer is exactly 1. Otherwise the iteration
/// `s <- g(s)` from 0 climbs monotonically to the smallest fixed point; if it
/// has not settled after the iteration cap (very close to criticality) the
/// root of `g(s) - s` is bracketed on `[0, 1 - 1e-9]` and bisected.
pub fn extinction_probability<T: Real>(law: &OffspringLaw<T>, alpha: T, mu: T) -> Result<T> {
    if alpha == T::zero() {
        return Ok(T::one());
    }
    smallest_fixed_point(thinned_mean(law, alpha, mu), |s| thinned_pgf(law, alpha, mu, s))
}

fn smallest_fixed_point<T: Real>(mean: T, g: impl Fn(T) -> T) -> Result<T> {
    if mean <= T::one() {
        return Ok(T::one());
    }
    let tol = tolerance::<T>();
    let mut s = T::zero();
    for _ in 0..FIXED_POINT_MAX_ITERS {
        let next = g(s);
        if (next - s).abs() < tol {
            return Ok(next);
        }
        s = next;
    }

    let h = |s: T| g(s) - s;
    let (mut lo, mut hi) = (s, T::one() - T::lit(BISECTION_UPPER_GAP));
    if !(h(lo) > T::zero() && h(hi) < T::zero()) {
        return Err(Error::NonConvergence {
            what: "extinction fixed point",
            iterations: FIXED_POINT_MAX_ITERS,
            residual: h(s).abs().to_f64().unwrap_or(f64::NAN),
        });
    }
    while hi - lo > tol {
        let mid = (lo + hi) / T::lit(2.0);
        if h(mid) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / T::lit(2.0))
}

/// Single-type classification: survival has positive probability iff
/// `alpha / mu > 1 / (m - 1)`.
pub fn classify_single<T: Real>(law: &OffspringLaw<T>, alpha: T, mu: T) -> Result<CriticalityReport<T>> {
    let m = law.mean();
    if !(m > T::one()) {
        return Err(Error::MeanNotAboveOne {
            mean: m.to_f64().unwrap_or(f64::NAN),
        });
    }
    let ratio = alpha / mu;
    let threshold = T::one() / (m - T::one());
    let classification = if (ratio - threshold).abs() <= T::lit(1e-12) * threshold {
        Criticality::Critical
    } else if ratio > threshold {
        Criticality::Supercritical
    } else {
        Criticality::Subcritical
    };
    let survival_probability = match classification {
        Criticality::Supercritical => T::one() - extinction_probability(law, alpha, mu)?,
        _ => T::zero(),
    };
    Ok(CriticalityReport {
        ratio,
        threshold,
        classification,
        survival_probability,
    })
}

/// True when `max(alpha1/mu1, alpha2/mu2) <= 1/(m - 1)`, which forces
/// extinction of the two-type process whatever the boosted rates.
pub fn two_type_extinct_sufficient<T: Real>(rates: &RateSet<T>, law: &OffspringLaw<T>) -> Result<bool> {
    rates_below_threshold(rates, law.mean())
}

/// Offspring law of the infected-vertex process when all children share the
/// parent's recovery clock `T ~ Exp(mu)`, as they do in the tree.
///
/// Given `n` children, `P(k infected) = E[C(n,k) (1-e^{-aT})^k e^{-a(n-k)T}]`,
/// a Beta integral equal to `c/(c+j) * prod_{i=1..k} (j+i)/(c+j+i)` with
/// `c = mu/alpha`, `j = n-k`. The mean is the same `m r` as the thinned law;
/// the spread is larger, so survival is lower.
pub fn node_level_offspring_pmf<T: Real>(law: &OffspringLaw<T>, alpha: T, mu: T) -> Vec<T> {
    let parent = law.pmf(T::lit(1e-16));
    if alpha == T::zero() {
        return vec![T::one()];
    }
    let c = mu / alpha;
    let mut out = vec![T::zero(); parent.len()];
    for (n, &pn) in parent.iter().enumerate() {
        if pn == T::zero() {
            continue;
        }
        for (k, slot) in out.iter_mut().enumerate().take(n + 1) {
            let j = T::from_usize_lossy(n - k);
            let mut w = c / (c + j);
            for i in 1..=k {
                let i = T::from_usize_lossy(i);
                w = w * (j + i) / (c + j + i);
            }
            *slot = *slot + pn * w;
        }
    }
    out
}

/// Extinction probability of the shared-clock process (smallest fixed point
/// of the PGF of [`node_level_offspring_pmf`]).
pub fn node_level_extinction_probability<T: Real>(law: &OffspringLaw<T>, alpha: T, mu: T) -> Result<T> {
    if alpha == T::zero() {
        return Ok(T::one());
    }
    let pmf = node_level_offspring_pmf(law, alpha, mu);
    smallest_fixed_point(thinned_mean(law, alpha, mu), |s| {
        pmf.iter().rev().fold(T::zero(), |acc, &p| acc * s + p)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Extended;
    use approx::assert_relative_eq;

    fn det(k: u64) -> OffspringLaw<f64> {
        OffspringLaw::Deterministic { k }
    }

    #[test]
    fn thinned_means() {
        assert_eq!(thinned_mean(&det(2), 3.0, 1.0), 1.5);
        assert_eq!(thinned_mean(&OffspringLaw::Poisson { lambda: 7.0 }, 0.0, 1.0), 0.0);
        assert_eq!(thinned_mean(&OffspringLaw::Poisson { lambda: 2.0 }, 1.3, 1.3), 1.0);
    }

    #[test]
    fn binary_tree_extinction_matches_quadratic_root() {
        // (1/4 + 3s/4)^2 = s  <=>  9s^2 - 10s + 1 = 0, smaller root
        let (a, b, c) = (9.0_f64, -10.0, 1.0);
        let root = (-b - (b * b - 4.0 * a * c).sqrt()) / (2.0 * a);
        let q = extinction_probability(&det(2), 3.0, 1.0).unwrap();
        assert_relative_eq!(q, root, epsilon = 1e-11);
        assert_relative_eq!(q, 1.0 / 9.0, epsilon = 1e-11);
    }

    #[test]
    fn critical_and_trivial_cases() {
        assert_eq!(extinction_probability(&det(2), 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(
            extinction_probability(&OffspringLaw::Poisson { lambda: 5.0 }, 0.0, 1.0).unwrap(),
            1.0
        );
    }

    #[test]
    fn near_critical_fixed_point_is_a_fixed_point() {
        // mean 1 + 1e-4: slow iteration, possibly through the bisection fallback
        let law = OffspringLaw::Poisson { lambda: 2.0002 };
        let q: f64 = extinction_probability(&law, 1.0, 1.0).unwrap();
        assert!(q < 1.0 && q > 0.99);
        assert!((thinned_pgf(&law, 1.0, 1.0, q) - q).abs() < 1e-12);
    }

    #[test]
    fn classification_examples() {
        let crit = classify_single(&det(2), 1.0, 1.0).unwrap();
        assert_eq!(crit.classification, Criticality::Critical);
        assert_eq!(crit.survival_probability, 0.0);

        let sup = classify_single(&det(2), 3.0, 1.0).unwrap();
        assert_eq!(sup.classification, Criticality::Supercritical);
        assert_relative_eq!(sup.survival_probability, 8.0 / 9.0, epsilon = 1e-11);

        let sub = classify_single(&OffspringLaw::Poisson { lambda: 3.0 }, 0.4, 1.0).unwrap();
        assert_eq!(sub.classification, Criticality::Subcritical);
        assert_relative_eq!(sub.threshold, 0.5);

        assert!(matches!(
            classify_single(&det(1), 1.0, 1.0),
            Err(Error::MeanNotAboveOne { .. })
        ));
    }

    #[test]
    fn extinction_hypothesis_check() {
        let ok = RateSet::symmetric(1.0, Extended::Infinite, 1.0).unwrap();
        assert!(two_type_extinct_sufficient(&ok, &det(2)).unwrap());
        let table3 = RateSet::new(5.0, Extended::Finite(8.0), 1.0, 0.75, Extended::Finite(1.4), 1.0).unwrap();
        assert!(!two_type_extinct_sufficient(&table3, &det(2)).unwrap());
        let sub = RateSet::symmetric(0.75, Extended::Finite(0.75), 1.0).unwrap();
        assert!(two_type_extinct_sufficient(&sub, &det(2)).unwrap());
    }

    #[test]
    fn thinned_pgf_matches_explicit_enumeration() {
        let probs = vec![0.1, 0.2, 0.3, 0.4];
        let law = OffspringLaw::Explicit { probs: probs.clone() };
        let (alpha, mu) = (1.7, 0.9);
        let pmf = explicit_thinned_pmf(&probs, transmission_probability(alpha, mu));
        assert_relative_eq!(pmf.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        for s in [0.0f64, 0.25, 0.8, 1.0] {
            let direct: f64 = pmf.iter().enumerate().map(|(j, q)| q * s.powi(j as i32)).sum();
            assert_relative_eq!(thinned_pgf(&law, alpha, mu, s), direct, epsilon = 1e-14);
        }
        let mean: f64 = pmf.iter().enumerate().map(|(j, q)| j as f64 * q).sum();
        assert_relative_eq!(mean, thinned_mean(&law, alpha, mu), epsilon = 1e-14);
    }

    #[test]
    fn shared_clock_binary_tree() {
        // T ~ Exp(1), a = 3: P(0) = E[e^{-6T}] = 1/7, P(2) = E[(1-e^{-3T})^2] = 1 - 1/2 + 1/7
        let pmf = node_level_offspring_pmf(&det(2), 3.0, 1.0);
        assert_relative_eq!(pmf[0], 1.0 / 7.0, epsilon = 1e-15);
        assert_relative_eq!(pmf[2], 9.0 / 14.0, epsilon = 1e-15);
        assert_relative_eq!(pmf[1], 3.0 / 14.0, epsilon = 1e-15);
        // 9q^2 - 11q + 2 = 0, smaller root 2/9
        assert_relative_eq!(
            node_level_extinction_probability(&det(2), 3.0, 1.0).unwrap(),
            2.0 / 9.0,
            epsilon = 1e-10
        );
        assert_eq!(node_level_extinction_probability(&det(2), 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(node_level_offspring_pmf(&det(2), 0.0, 1.0), vec![1.0]);
        // one child: no sibling correlation to speak of
        let one = node_level_offspring_pmf(&det(1), 2.0, 1.0);
        assert_relative_eq!(one[1], 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn grid_properties() {
        let laws = [
            det(2),
            det(3),
            OffspringLaw::Binomial { n: 4, p: 0.5 },
            OffspringLaw::Poisson { lambda: 2.5 },
            OffspringLaw::Geometric { p: 0.3 },
        ];
        let alphas = [0.1, 0.5, 1.0, 2.0];
        for law in &laws {
            let mut prev = f64::INFINITY;
            for &alpha in &alphas {
                let q = extinction_probability(law, alpha, 1.0).unwrap();
                assert!((0.0..=1.0).contains(&q));
                assert!((thinned_pgf(law, alpha, 1.0, q) - q).abs() < 1e-10);
                assert_eq!(q == 1.0, thinned_mean(law, alpha, 1.0) <= 1.0, "{law:?} alpha={alpha}");
                assert!(q <= prev + 1e-12, "non-increasing in alpha");
                prev = q;
            }
            let mut prev = 0.0;
            for mu in [0.2, 0.5, 1.0, 3.0] {
                let q = extinction_probability(law, 1.0, mu).unwrap();
                assert!(q >= prev - 1e-12, "non-decreasing in mu");
                prev = q;
            }
        }
    }

    #[test]
    fn works_in_f32() {
        let q = extinction_probability(&OffspringLaw::<f32>::Deterministic { k: 2 }, 3.0f32, 1.0).unwrap();
        assert!((q - 1.0 / 9.0).abs() < 1e-5);
    }
}
