//! Transmission across a single parent-to-child edge.
//!
//! Two views of the same dynamics live here. [`sample_edge`] draws the
//! child's infection times given the parent's full timeline (infection and
//! recovery instants), which is what the tree engine needs because siblings
//! share the parent's recovery clocks. [`prob_both_exact`] instead conditions
//! only on the parent's two infection times and integrates the recovery
//! clocks out, giving the exact probability that the child ends up with both
//! diseases.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardUniform};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::solve_dense;
use crate::model::{derive_stream, Disease, OffspringLaw, RateSet};
use crate::scalar::{Extended, Real};

/// What a child sees of its parent: infection and recovery instants of both
/// diseases. Disease `D` is active on `[tau_D, rho_D)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParentView<T> {
    pub tau_a: Extended<T>,
    pub tau_b: Extended<T>,
    pub rho_a: Extended<T>,
    pub rho_b: Extended<T>,
}

impl<T: Real> ParentView<T> {
    pub fn new(tau_a: Extended<T>, tau_b: Extended<T>, rho_a: Extended<T>, rho_b: Extended<T>) -> Result<Self> {
        let view = ParentView {
            tau_a,
            tau_b,
            rho_a,
            rho_b,
        };
        for d in Disease::BOTH {
            let (tau, rho) = (view.tau(d), view.rho(d));
            let ok = match tau {
                Extended::Infinite => rho.is_infinite(),
                Extended::Finite(t) => t >= T::zero() && tau.lt(rho),
            };
            if !ok {
                return Err(Error::InvalidConfig(format!(
                    "parent {d} window [{tau}, {rho}) is not valid"
                )));
            }
        }
        Ok(view)
    }

    #[inline]
    pub fn tau(&self, d: Disease) -> Extended<T> {
        match d {
            Disease::A => self.tau_a,
            Disease::B => self.tau_b,
        }
    }

    #[inline]
    pub fn rho(&self, d: Disease) -> Extended<T> {
        match d {
            Disease::A => self.rho_a,
            Disease::B => self.rho_b,
        }
    }

    #[inline]
    fn active_at(&self, d: Disease, t: T) -> bool {
        let t = Extended::Finite(t);
        self.tau(d).le(t) && t.lt(self.rho(d))
    }

    /// Whether `d` can still pass to a child at some instant `>= t`.
    #[inline]
    fn open_at(&self, d: Disease, t: T) -> bool {
        self.tau(d).is_finite() && Extended::Finite(t).lt(self.rho(d))
    }

    fn next_epoch_after(&self, t: T) -> Option<T> {
        [self.tau_a, self.rho_a, self.tau_b, self.rho_b]
            .into_iter()
            .filter_map(Extended::finite)
            .filter(|&e| e > t)
            .fold(None, |acc: Option<T>, e| Some(acc.map_or(e, |a| a.min(e))))
    }
}

/// Infection instants of the child (`Infinite` = never infected).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeOutcome<T> {
    pub child_tau_a: Extended<T>,
    pub child_tau_b: Extended<T>,
}

impl<T: Real> EdgeOutcome<T> {
    #[inline]
    pub fn tau(&self, d: Disease) -> Extended<T> {
        match d {
            Disease::A => self.child_tau_a,
            Disease::B => self.child_tau_b,
        }
    }

    #[inline]
    pub fn infected_with_any(&self) -> bool {
        self.child_tau_a.is_finite() || self.child_tau_b.is_finite()
    }

    #[inline]
    pub fn infected_with_both(&self) -> bool {
        self.child_tau_a.is_finite() && self.child_tau_b.is_finite()
    }
}

#[inline]
fn slot(d: Disease) -> usize {
    match d {
        Disease::A => 0,
        Disease::B => 1,
    }
}

/// Samples the child's infection times from the exact edge law.
///
/// Hazards are piecewise constant between epochs (the parent's infection and
/// recovery instants and the child's own first infection), so each segment
/// draws one exponential with the total hazard; an overshoot of the next
/// epoch restarts the draw there, which is exact by memorylessness. An
/// infinite boosted rate transmits at the first instant the child carries
/// the other disease while the parent is active; simultaneous infinite
/// transmissions resolve A before B.
pub fn sample_edge<T, R>(parent: &ParentView<T>, rates: &RateSet<T>, rng: &mut R) -> Result<EdgeOutcome<T>>
where
    T: Real,
    R: Rng + ?Sized,
    Exp1: Distribution<T>,
    StandardUniform: Distribution<T>,
{
    let mut t = parent.tau_a.min(parent.tau_b).finite().ok_or(Error::InvalidParent)?;
    let mut child = [Extended::<T>::Infinite; 2];

    'events: loop {
        for d in Disease::BOTH {
            let (me, other) = (slot(d), slot(d.other()));
            if child[me].is_infinite()
                && child[other].is_finite()
                && rates.boosted(d).is_infinite()
                && parent.active_at(d, t)
            {
                child[me] = Extended::Finite(t);
                continue 'events;
            }
        }

        let mut hazard = [T::zero(); 2];
        let mut open = false;
        for d in Disease::BOTH {
            let (me, other) = (slot(d), slot(d.other()));
            if child[me].is_finite() {
                continue;
            }
            open |= parent.open_at(d, t);
            if parent.active_at(d, t) {
                hazard[me] = if child[other].is_finite() {
                    match rates.boosted(d) {
                        Extended::Finite(b) => b,
                        Extended::Infinite => unreachable!("infinite boost resolved above"),
                    }
                } else {
                    rates.base(d)
                };
            }
        }
        if !open {
            break;
        }

        let next = parent.next_epoch_after(t);
        let total = hazard[0] + hazard[1];
        if total <= T::zero() {
            match next {
                Some(e) => {
                    t = e;
                    continue;
                }
                None => break,
            }
        }
        let wait = rng.sample::<T, _>(Exp1) / total;
        match next {
            Some(e) if t + wait >= e => t = e,
            _ => {
                t = t + wait;
                let pick_a = hazard[1] == T::zero()
                    || (hazard[0] > T::zero() && rng.sample::<T, _>(StandardUniform) * total < hazard[0]);
                child[if pick_a { 0 } else { 1 }] = Extended::Finite(t);
            }
        }
    }

    Ok(EdgeOutcome {
        child_tau_a: child[0],
        child_tau_b: child[1],
    })
}

/// Probability that the parent neither transmits nor recovers from the
/// first disease (A) during a gap of length `delta`.
pub fn prob_omega1<T: Real>(delta: T, rates: &RateSet<T>) -> T {
    first_stays_silent(delta, rates, Disease::A)
}

/// Probability that the parent transmits the first disease (A) within the gap.
pub fn prob_omega2<T: Real>(delta: T, rates: &RateSet<T>) -> T {
    first_transmits(delta, rates, Disease::A)
}

/// Probability that the parent recovers from A within the gap before transmitting it.
pub fn prob_first_recovers<T: Real>(delta: T, rates: &RateSet<T>) -> T {
    let (a, mu) = (rates.alpha1, rates.mu1);
    mu / (a + mu) * (T::one() - (-(a + mu) * delta).exp())
}

/// Upper bound on the chance that, with both diseases active at the parent
/// and the child untouched, a transmission happens before either recovery.
pub fn omega3_bound<T: Real>(rates: &RateSet<T>) -> T {
    (rates.alpha1 + rates.alpha2) / (rates.alpha1 + rates.mu1 + rates.alpha2 + rates.mu2)
}

fn first_stays_silent<T: Real>(delta: T, rates: &RateSet<T>, first: Disease) -> T {
    (-(rates.base(first) + rates.recovery(first)) * delta).exp()
}

fn first_transmits<T: Real>(delta: T, rates: &RateSet<T>, first: Disease) -> T {
    let (a, mu) = (rates.base(first), rates.recovery(first));
    a / (a + mu) * (T::one() - (-(a + mu) * delta).exp())
}

// Chain state bits: parent active with A / B, child ever had A / B.
const PA: usize = 1;
const PB: usize = 2;
const CA: usize = 4;
const CB: usize = 8;

fn parent_bit(d: Disease) -> usize {
    match d {
        Disease::A => PA,
        Disease::B => PB,
    }
}

fn child_bit(d: Disease) -> usize {
    match d {
        Disease::A => CA,
        Disease::B => CB,
    }
}

#[derive(Clone, Copy, PartialEq, Debug)]
enum ChainClass {
    Success,
    Failure,
    Transient,
}

fn classify(state: usize) -> ChainClass {
    if state & CA != 0 && state & CB != 0 {
        return ChainClass::Success;
    }
    for d in Disease::BOTH {
        if state & child_bit(d) == 0 && state & parent_bit(d) == 0 {
            return ChainClass::Failure;
        }
    }
    ChainClass::Transient
}

/// Outgoing transitions of a transient state: `(target, rate)`.
fn transitions<T: Real>(state: usize, rates: &RateSet<T>) -> Vec<(usize, Extended<T>)> {
    let mut out = Vec::with_capacity(4);
    for d in Disease::BOTH {
        if state & parent_bit(d) == 0 {
            continue;
        }
        out.push((state & !parent_bit(d), Extended::Finite(rates.recovery(d))));
        if state & child_bit(d) == 0 {
            let rate = if state & child_bit(d.other()) != 0 {
                rates.boosted(d)
            } else {
                Extended::Finite(rates.base(d))
            };
            out.push((state | child_bit(d), rate));
        }
    }
    out
}

/// Probability of absorbing in "child had both" from each of the 16 states of
/// the chain on (parent A active, parent B active, child had A, child had B),
/// by first-step analysis. An infinite-rate transition collapses its source
/// onto its target.
fn absorption_values<T: Real>(rates: &RateSet<T>) -> [T; 16] {
    let transient: Vec<usize> = (0..16).filter(|&s| classify(s) == ChainClass::Transient).collect();
    let index = |s: usize| transient.iter().position(|&x| x == s);
    let absorbing_value = |s: usize| {
        if classify(s) == ChainClass::Success {
            T::one()
        } else {
            T::zero()
        }
    };

    let n = transient.len();
    let mut a = vec![vec![T::zero(); n]; n];
    let mut b = vec![T::zero(); n];
    for (row, &s) in transient.iter().enumerate() {
        let moves = transitions(s, rates);
        if let Some(&(target, _)) = moves.iter().find(|(_, r)| r.is_infinite()) {
            a[row][row] = T::one();
            match index(target) {
                Some(col) => a[row][col] = a[row][col] - T::one(),
                None => b[row] = absorbing_value(target),
            }
            continue;
        }
        for (target, rate) in moves {
            let rate = rate.finite().expect("finite by the branch above");
            a[row][row] = a[row][row] + rate;
            match index(target) {
                Some(col) => a[row][col] = a[row][col] - rate,
                None => b[row] = b[row] + rate * absorbing_value(target),
            }
        }
    }
    let x = solve_dense(a, b).expect("absorbing chain system is non-singular");
    let mut values = [T::zero(); 16];
    for (s, v) in values.iter_mut().enumerate() {
        *v = match index(s) {
            Some(i) => x[i],
            None => absorbing_value(s),
        };
    }
    values
}

/// Exact probability that a child ends up infected with both diseases,
/// given that the parent caught `first` at time 0 and the other disease
/// `tau_gap` later, with the parent's recovery clocks integrated out.
///
/// Before the second infection only three clocks run (transmission of the
/// first disease, recovery from it, end of the gap); afterwards the 16-state
/// chain takes over.
pub fn prob_both_exact<T: Real>(tau_gap: T, rates: &RateSet<T>, first: Disease) -> T {
    let gap = tau_gap.abs();
    let values = absorption_values(rates);
    let silent = first_stays_silent(gap, rates, first);
    let transmitted = first_transmits(gap, rates, first);
    // once the child has the first disease, the parent's status for it no longer matters
    let after_first = values[PA | PB | child_bit(first)];
    silent * values[PA | PB] + transmitted * after_first
}

/// Whether `max(alpha1/mu1, alpha2/mu2) <= 1/(m - 1)`.
pub fn rates_below_threshold<T: Real>(rates: &RateSet<T>, m: T) -> Result<bool> {
    if !(m > T::one()) {
        return Err(Error::MeanNotAboveOne {
            mean: m.to_f64().unwrap_or(f64::NAN),
        });
    }
    let ratio = rates.base_ratio(Disease::A).max(rates.base_ratio(Disease::B));
    let threshold = T::one() / (m - T::one());
    // admit the equality case through rounding
    Ok(ratio <= threshold * (T::one() + T::lit(1e-12)))
}

/// Default gaps `{0, 0.1, 0.25, 0.5, 1, 2, 5, 10}` in units of one over the
/// largest finite rate.
pub fn default_gap_grid<T: Real>(rates: &RateSet<T>) -> Vec<T> {
    let unit = T::one() / rates.max_finite_rate();
    [0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|&g| T::lit(g) * unit)
        .collect()
}

/// Worst case of `1/m - P0` over the gaps and both infection orders.
pub fn lemma_bound_margin<T: Real>(rates: &RateSet<T>, m: T, gap_grid: &[T]) -> Result<T> {
    if !rates_below_threshold(rates, m)? {
        return Err(Error::AssumptionViolated(format!(
            "max(alpha1/mu1, alpha2/mu2) exceeds 1/(m-1) for m = {m}"
        )));
    }
    let bound = T::one() / m;
    let mut margin = T::infinity();
    for &gap in gap_grid {
        for first in Disease::BOTH {
            margin = margin.min(bound - prob_both_exact(gap, rates, first));
        }
    }
    Ok(margin)
}

/// One row of the exact-versus-sampled edge comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeCheckRow {
    pub gap: f64,
    pub p0_exact: f64,
    pub p0_mc: f64,
    pub inv_m: f64,
    pub trials: u64,
}

impl EdgeCheckRow {
    /// Distance between the sampled and exact values in binomial standard
    /// errors of the exact probability.
    pub fn z_score(&self) -> f64 {
        let se = (self.p0_exact * (1.0 - self.p0_exact) / self.trials as f64).sqrt();
        let diff = (self.p0_mc - self.p0_exact).abs();
        if se > 0.0 {
            diff / se
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Fraction of `trials` sampled edges whose child gets both diseases. The
/// parent catches `first` at 0 and the other disease at `gap`, with fresh
/// recovery clocks every trial.
pub fn sampled_both_frequency(
    rates: &RateSet<f64>,
    gap: f64,
    first: Disease,
    trials: u64,
    seed: u64,
    stream: u64,
) -> Result<f64> {
    let mut rng = derive_stream(seed, stream);
    let mut hits = 0u64;
    for _ in 0..trials {
        let mut tau = [Extended::Finite(0.0); 2];
        tau[slot(first.other())] = Extended::Finite(gap);
        let rho_a = tau[0].shifted(rng.sample::<f64, _>(Exp1) / rates.mu1);
        let rho_b = tau[1].shifted(rng.sample::<f64, _>(Exp1) / rates.mu2);
        let parent = ParentView {
            tau_a: tau[0],
            tau_b: tau[1],
            rho_a,
            rho_b,
        };
        if sample_edge(&parent, rates, &mut rng)?.infected_with_both() {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64)
}

/// Exact and sampled both-infection probabilities over a gap grid.
pub fn edge_check(
    rates: &RateSet<f64>,
    law: &OffspringLaw<f64>,
    gaps: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<EdgeCheckRow>> {
    let m = law.mean();
    gaps.iter()
        .enumerate()
        .map(|(i, &gap)| {
            let p0_mc = sampled_both_frequency(rates, gap, Disease::A, trials, seed, i as u64)?;
            Ok(EdgeCheckRow {
                gap,
                p0_exact: prob_both_exact(gap, rates, Disease::A),
                p0_mc,
                inv_m: 1.0 / m,
                trials,
            })
        })
        .collect()
}
