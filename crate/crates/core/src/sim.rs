//! Generation-by-generation Monte Carlo on a lazily grown Galton-Watson tree.
//!
//! Only infected vertices are kept. Each one draws its number of children,
//! its recovery clocks, and then one edge process per child; children that
//! catch nothing are dropped, since nothing can reach their subtrees.
//! Counts are "ever infected", not snapshots at a fixed time.

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::branching::two_type_extinct_sufficient;
use crate::edge::{sample_edge, ParentView};
use crate::error::{Error, Result};
use crate::model::{derive_stream, OffspringSampler, RateSet, ReplicaRng, RootState, SimConfig};
use crate::scalar::Extended;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GenerationStats {
    pub generation: u32,
    pub count_ever_a: u64,
    pub count_ever_b: u64,
    pub count_ever_both: u64,
    pub frontier_size: u64,
}

impl GenerationStats {
    fn empty(generation: u32) -> Self {
        GenerationStats {
            generation,
            count_ever_a: 0,
            count_ever_b: 0,
            count_ever_both: 0,
            frontier_size: 0,
        }
    }

    fn of(generation: u32, frontier: &[ParentView<f64>]) -> Self {
        let mut s = Self::empty(generation);
        for v in frontier {
            let (a, b) = (v.tau_a.is_finite(), v.tau_b.is_finite());
            s.count_ever_a += a as u64;
            s.count_ever_b += b as u64;
            s.count_ever_both += (a && b) as u64;
        }
        s.frontier_size = frontier.len() as u64;
        s
    }

    /// Zero, or at least `cap`, for each of A, B and both.
    fn is_settled(&self, cap: u64) -> bool {
        [self.count_ever_a, self.count_ever_b, self.count_ever_both]
            .iter()
            .all(|&c| c == 0 || c >= cap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicaResult {
    pub replica: u64,
    pub per_generation: Vec<GenerationStats>,
    pub survived_a: bool,
    pub survived_b: bool,
    pub survived_both: bool,
    /// Generation at which a saturated run stopped early.
    pub saturated_at: Option<u32>,
}

impl ReplicaResult {
    pub fn survived_any(&self) -> bool {
        self.survived_a || self.survived_b
    }
}

/// Knobs that trade exactness for speed.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    /// Stop a replica as soon as each of the A, B and both counts of the
    /// current generation is either zero or at least this many. Zero counts
    /// are final on a tree; a count this large is taken as survival to the
    /// last generation. Per-generation statistics end at the stopping
    /// generation, so saturated runs are only meant for survival tallies.
    pub saturation: Option<u64>,
}

fn recovery_at(infected_at: Extended<f64>, mu: f64, rng: &mut ReplicaRng) -> Extended<f64> {
    match infected_at {
        Extended::Finite(t) => Extended::Finite(t + rng.sample::<f64, _>(Exp1) / mu),
        Extended::Infinite => Extended::Infinite,
    }
}

fn with_recoveries(
    tau_a: Extended<f64>,
    tau_b: Extended<f64>,
    rates: &RateSet<f64>,
    rng: &mut ReplicaRng,
) -> ParentView<f64> {
    let rho_a = recovery_at(tau_a, rates.mu1, rng);
    let rho_b = recovery_at(tau_b, rates.mu2, rng);
    ParentView {
        tau_a,
        tau_b,
        rho_a,
        rho_b,
    }
}

fn root_view(state: RootState, rates: &RateSet<f64>, rng: &mut ReplicaRng) -> ParentView<f64> {
    let at = |present: bool| {
        if present {
            Extended::Finite(0.0)
        } else {
            Extended::Infinite
        }
    };
    with_recoveries(at(state.has_a()), at(state.has_b()), rates, rng)
}

/// Runs one replica; deterministic in `(config.master_seed, replica_index)`.
pub fn run_replica(config: &SimConfig, replica_index: u64) -> Result<ReplicaResult> {
    run_replica_with(config, replica_index, &RunOptions::default())
}

pub fn run_replica_with(config: &SimConfig, replica_index: u64, options: &RunOptions) -> Result<ReplicaResult> {
    let rates = &config.rates;
    let sampler = OffspringSampler::new(&config.offspring)?;
    let mut rng = derive_stream(config.master_seed, replica_index);

    let mut frontier = vec![root_view(config.root_state, rates, &mut rng)];
    let mut per_generation = Vec::with_capacity(config.max_generation as usize + 1);
    per_generation.push(GenerationStats::of(0, &frontier));
    let mut saturated_at = None;

    for generation in 1..=config.max_generation {
        if let Some(cap) = options.saturation {
            if per_generation.last().is_some_and(|s| s.is_settled(cap)) {
                saturated_at = Some(generation - 1);
                break;
            }
        }
        if frontier.is_empty() {
            per_generation.push(GenerationStats::empty(generation));
            continue;
        }
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for parent in &frontier {
            let children = sampler.sample(&mut rng);
            for _ in 0..children {
                let edge = sample_edge(parent, rates, &mut rng)?;
                if edge.infected_with_any() {
                    next.push(with_recoveries(edge.child_tau_a, edge.child_tau_b, rates, &mut rng));
                }
            }
            if next.len() > config.frontier_cap {
                return Err(Error::FrontierOverflow {
                    replica: replica_index,
                    generation,
                    size: next.len(),
                    cap: config.frontier_cap,
                });
            }
        }
        frontier = next;
        per_generation.push(GenerationStats::of(generation, &frontier));
    }

    let last = per_generation.last().copied().expect("generation 0 is always recorded");
    Ok(ReplicaResult {
        replica: replica_index,
        per_generation,
        survived_a: last.count_ever_a > 0,
        survived_b: last.count_ever_b > 0,
        survived_both: last.count_ever_both > 0,
        saturated_at,
    })
}

/// Runs every replica of `config`, in parallel, returned in index order.
/// The first failing replica (lowest index) decides the error.
pub fn run_replicas(config: &SimConfig, options: &RunOptions) -> Result<Vec<ReplicaResult>> {
    (0..config.replicas as u64)
        .into_par_iter()
        .map(|i| run_replica_with(config, i, options))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenerationSummary {
    pub generation: u32,
    pub mean_ever_a: f64,
    pub mean_ever_b: f64,
    pub mean_ever_both: f64,
    pub mean_frontier: f64,
    pub prop_some_a: f64,
    pub prop_some_b: f64,
    pub prop_some_both: f64,
    pub prop_any: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub per_generation: Vec<GenerationSummary>,
    pub replicas: u32,
    pub config: SimConfig,
}

/// Aggregates full-length replica results; sums are integer so the result
/// does not depend on evaluation order.
pub fn summarize(config: &SimConfig, results: &[ReplicaResult]) -> ExperimentSummary {
    let n = results.len() as f64;
    let per_generation = (0..=config.max_generation)
        .map(|g| {
            let mut sums = [0u64; 4];
            let mut some = [0u64; 4];
            for r in results {
                let s = r.per_generation[g as usize];
                let counts = [s.count_ever_a, s.count_ever_b, s.count_ever_both, s.frontier_size];
                for k in 0..4 {
                    sums[k] += counts[k];
                    some[k] += (counts[k] > 0) as u64;
                }
            }
            GenerationSummary {
                generation: g,
                mean_ever_a: sums[0] as f64 / n,
                mean_ever_b: sums[1] as f64 / n,
                mean_ever_both: sums[2] as f64 / n,
                mean_frontier: sums[3] as f64 / n,
                prop_some_a: some[0] as f64 / n,
                prop_some_b: some[1] as f64 / n,
                prop_some_both: some[2] as f64 / n,
                prop_any: some[3] as f64 / n,
            }
        })
        .collect();
    ExperimentSummary {
        per_generation,
        replicas: results.len() as u32,
        config: config.clone(),
    }
}

pub fn run_experiment(config: &SimConfig) -> Result<ExperimentSummary> {
    let results = run_replicas(config, &RunOptions::default())?;
    Ok(summarize(config, &results))
}

/// Number of replicas with each infection type present at the last generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SurvivalTally {
    pub replicas: u64,
    pub survived_a: u64,
    pub survived_b: u64,
    pub survived_both: u64,
    pub survived_any: u64,
}

impl SurvivalTally {
    pub fn fraction(&self, count: u64) -> f64 {
        count as f64 / self.replicas as f64
    }
}

pub fn survival_tally(config: &SimConfig, options: &RunOptions) -> Result<SurvivalTally> {
    let results = run_replicas(config, options)?;
    let count = |f: fn(&ReplicaResult) -> bool| results.iter().filter(|r| f(r)).count() as u64;
    Ok(SurvivalTally {
        replicas: results.len() as u64,
        survived_a: count(|r| r.survived_a),
        survived_b: count(|r| r.survived_b),
        survived_both: count(|r| r.survived_both),
        survived_any: count(ReplicaResult::survived_any),
    })
}

/// Empirical mean of the number of doubly infected vertices per generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoubleInfectionPoint {
    pub generation: u32,
    pub mean: f64,
    pub std_error: f64,
    /// Standard error of the paired increment from the previous generation.
    pub step_std_error: f64,
}

/// Tracks `E[X_n]`, the mean count of generation-`n` vertices that catch both
/// diseases, under the hypothesis that makes `X_n` a supermartingale.
pub fn supermartingale_check(config: &SimConfig, replicas: u32) -> Result<Vec<DoubleInfectionPoint>> {
    if !two_type_extinct_sufficient(&config.rates, &config.offspring)? {
        return Err(Error::AssumptionViolated(
            "max(alpha1/mu1, alpha2/mu2) exceeds 1/(m-1)".into(),
        ));
    }
    if config.root_state != RootState::BothInfected {
        return Err(Error::AssumptionViolated("root must carry both diseases".into()));
    }
    let config = SimConfig {
        replicas,
        ..config.clone()
    };
    let results = run_replicas(&config, &RunOptions::default())?;
    let n = results.len() as f64;
    let xs = |g: usize| results.iter().map(move |r| r.per_generation[g].count_ever_both as f64);
    let mean_sd = |values: Vec<f64>| {
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        (mean, (var / n).sqrt())
    };
    Ok((0..=config.max_generation as usize)
        .map(|g| {
            let (mean, std_error) = mean_sd(xs(g).collect());
            let step_std_error = if g == 0 {
                0.0
            } else {
                mean_sd(xs(g).zip(xs(g - 1)).map(|(a, b)| a - b).collect()).1
            };
            DoubleInfectionPoint {
                generation: g as u32,
                mean,
                std_error,
                step_std_error,
            }
        })
        .collect())
}

/// Whether every step of the sequence rises by at most `k` paired standard errors.
pub fn non_increasing_within(points: &[DoubleInfectionPoint], k: f64) -> bool {
    points
        .windows(2)
        .all(|w| w[1].mean - w[0].mean <= k * w[1].step_std_error)
}
