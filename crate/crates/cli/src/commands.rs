use std::path::PathBuf;

use anyhow::{Context, Result};
use coopsir::branching::{classify_single, node_level_extinction_probability, thinned_mean, transmission_probability};
use coopsir::edge::{default_gap_grid, edge_check};
use coopsir::meanfield::{final_size_closed, final_size_ode, linspace, scan_alpha, t0_root, ExponentVariant};
use coopsir::model::{OffspringLaw, RateSet, RootState, SimConfig};
use coopsir::sim::{run_replicas, summarize, RunOptions};
use coopsir::Extended;
use serde::Serialize;

use crate::output::{Header, OutputDir, Table};
use crate::svg::{self, Plot, Series};

/// Seed used by `reproduce-figures` unless `--seed` is given.
pub const FIGURE_SEED: u64 = 20_180_418;
pub const FIGURE_BETA2: [f64; 5] = [1.0, 1.2, 1.4, 1.6, 1.8];
pub const FIGURE_REPLICAS: u32 = 200;
pub const FIGURE_GENERATIONS: u32 = 18;

fn num(v: f64) -> String {
    v.to_string()
}

pub fn simulate(config: &SimConfig, out: &OutputDir) -> Result<Vec<PathBuf>> {
    out.claim(&["replicas.csv", "aggregate.csv"])?;
    let results = run_replicas(config, &RunOptions::default())?;
    let summary = summarize(config, &results);
    let header = Header::new("simulate", Some(config.master_seed), config);

    let mut per = Table::new(
        &header,
        &["replica", "generation", "ever_A", "ever_B", "ever_both", "frontier"],
    )?;
    for r in &results {
        for g in &r.per_generation {
            per.row([
                r.replica.to_string(),
                g.generation.to_string(),
                g.count_ever_a.to_string(),
                g.count_ever_b.to_string(),
                g.count_ever_both.to_string(),
                g.frontier_size.to_string(),
            ])?;
        }
    }
    let mut agg = Table::new(
        &header,
        &[
            "generation",
            "mean_ever_B",
            "prop_some_B",
            "mean_ever_both",
            "prop_some_both",
        ],
    )?;
    for g in &summary.per_generation {
        agg.row([
            g.generation.to_string(),
            num(g.mean_ever_b),
            num(g.prop_some_b),
            num(g.mean_ever_both),
            num(g.prop_some_both),
        ])?;
    }
    Ok(vec![
        out.write("replicas.csv", &per.into_bytes()?)?,
        out.write("aggregate.csv", &agg.into_bytes()?)?,
    ])
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeCheckSpec {
    pub rates: RateSet<f64>,
    pub offspring: OffspringLaw<f64>,
    pub gaps: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
}

impl EdgeCheckSpec {
    pub fn from_config(config: &SimConfig, gaps: Option<Vec<f64>>, trials: u64) -> Self {
        EdgeCheckSpec {
            rates: config.rates,
            offspring: config.offspring.clone(),
            gaps: gaps.unwrap_or_else(|| default_gap_grid(&config.rates)),
            trials,
            seed: config.master_seed,
        }
    }
}

pub fn edge(spec: &EdgeCheckSpec, out: &OutputDir) -> Result<Vec<PathBuf>> {
    out.claim(&["edge.csv"])?;
    let rows = edge_check(&spec.rates, &spec.offspring, &spec.gaps, spec.trials, spec.seed)?;
    let mut t = Table::new(
        &Header::new("edge-check", Some(spec.seed), spec),
        &["gap", "P0_exact", "P0_MC", "1/m"],
    )?;
    for r in rows {
        t.row([num(r.gap), num(r.p0_exact), num(r.p0_mc), num(r.inv_m)])?;
    }
    Ok(vec![out.write("edge.csv", &t.into_bytes()?)?])
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchingRecord {
    pub offspring: OffspringLaw<f64>,
    pub alpha: f64,
    pub mu: f64,
    pub offspring_mean: f64,
    pub transmission_probability: f64,
    pub thinned_mean: f64,
    pub threshold: f64,
    pub classification: coopsir::branching::Criticality,
    pub survival_probability: f64,
    pub extinction_probability: f64,
    /// Survival when siblings share the parent's recovery clock, as in the simulator.
    pub node_level_survival_probability: f64,
}

pub fn branching(law: &OffspringLaw<f64>, alpha: f64, mu: f64) -> Result<BranchingRecord> {
    let law = law.clone().validate()?;
    let report = classify_single(&law, alpha, mu)?;
    Ok(BranchingRecord {
        offspring_mean: law.mean(),
        transmission_probability: transmission_probability(alpha, mu),
        thinned_mean: thinned_mean(&law, alpha, mu),
        threshold: report.threshold,
        classification: report.classification,
        survival_probability: report.survival_probability,
        extinction_probability: 1.0 - report.survival_probability,
        node_level_survival_probability: 1.0 - node_level_extinction_probability(&law, alpha, mu)?,
        offspring: law,
        alpha,
        mu,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanFieldSpec {
    pub alpha: Vec<f64>,
    pub c: Vec<f64>,
    pub eps: Vec<f64>,
    pub variant: ExponentVariant,
}

pub fn meanfield(spec: &MeanFieldSpec, out: &OutputDir) -> Result<Vec<PathBuf>> {
    use rayon::prelude::*;
    out.claim(&["meanfield.csv"])?;
    let mut points = vec![];
    for &a in &spec.alpha {
        for &c in &spec.c {
            for &e in &spec.eps {
                points.push((a, c, e));
            }
        }
    }
    let rows = points
        .par_iter()
        .map(|&(a, c, e)| {
            let ode = final_size_ode(a, c, e)?;
            let closed = final_size_closed(a, c, e, spec.variant)?;
            let t0 = t0_root(a, c, e, spec.variant)?;
            Ok([num(a), num(c), num(e), num(ode), num(closed), num(t0)])
        })
        .collect::<Vec<coopsir::Result<_>>>();
    let mut t = Table::new(
        &Header::new("meanfield", None, spec),
        &["alpha", "C", "eps", "R_ode", "R_closed", "T0"],
    )?;
    for r in rows {
        t.row(r?)?;
    }
    Ok(vec![out.write("meanfield.csv", &t.into_bytes()?)?])
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanSpec {
    pub c: f64,
    pub eps: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanRecord {
    pub c: f64,
    pub eps: f64,
    pub jump_detected: bool,
    pub alpha0_estimate: Option<f64>,
    pub jump_size: Option<f64>,
}

pub fn scan(spec: &ScanSpec, out: &OutputDir) -> Result<ScanRecord> {
    out.claim(&["scan.csv"])?;
    let grid = linspace(spec.alpha_min, spec.alpha_max, spec.points);
    let res = scan_alpha(spec.c, spec.eps, &grid)?;
    let mut t = Table::new(&Header::new("scan", None, spec), &["alpha", "R", "jump_flag"])?;
    for (i, (a, r)) in res.alpha_grid.iter().zip(&res.final_sizes).enumerate() {
        let flag = (res.jump_index == Some(i)) as u8;
        t.row([num(*a), num(*r), flag.to_string()])?;
    }
    out.write("scan.csv", &t.into_bytes()?)?;
    Ok(ScanRecord {
        c: spec.c,
        eps: spec.eps,
        jump_detected: res.jump_detected,
        alpha0_estimate: res.alpha0_estimate,
        jump_size: res.jump_size,
    })
}

pub fn table3_config(beta2: f64, seed: u64, replicas: u32, max_generation: u32) -> Result<SimConfig> {
    let rates = RateSet::new(5.0, Extended::Finite(8.0), 1.0, 0.75, Extended::Finite(beta2), 1.0)?;
    Ok(SimConfig {
        rates,
        offspring: OffspringLaw::Deterministic { k: 2 },
        max_generation,
        replicas,
        master_seed: seed,
        root_state: RootState::BothInfected,
        frontier_cap: coopsir::model::DEFAULT_FRONTIER_CAP,
    }
    .validate()?)
}

#[derive(Debug, Clone, Serialize)]
struct FigureSpec {
    base: SimConfig,
    beta2: Vec<f64>,
}

/// Every beta2 value shares the master seed, so the curves use common random numbers.
pub fn reproduce_figures(
    seed: u64,
    replicas: u32,
    max_generation: u32,
    out: &OutputDir,
    svg: bool,
) -> Result<Vec<PathBuf>> {
    let mut names = vec!["figure1.csv", "figure2.csv"];
    if svg {
        names.extend(["figure1.svg", "figure2.svg"]);
    }
    out.claim(&names)?;
    let mut summaries = vec![];
    for &b2 in &FIGURE_BETA2 {
        let config = table3_config(b2, seed, replicas, max_generation)?;
        let results = run_replicas(&config, &RunOptions::default()).with_context(|| format!("beta2 = {b2}"))?;
        summaries.push(summarize(&config, &results));
    }
    let spec = FigureSpec {
        base: table3_config(FIGURE_BETA2[0], seed, replicas, max_generation)?,
        beta2: FIGURE_BETA2.to_vec(),
    };
    let header = Header::new("reproduce-figures", Some(seed), &spec);
    let labels: Vec<String> = FIGURE_BETA2.iter().map(|b| format!("beta2={b:.1}")).collect();
    let columns: Vec<&str> = std::iter::once("generation")
        .chain(labels.iter().map(String::as_str))
        .collect();

    let mut written = vec![];
    let figures: [(&str, &str, fn(&coopsir::sim::GenerationSummary) -> f64, bool); 2] = [
        ("figure1", "Mean number of B infections", |g| g.mean_ever_b, true),
        (
            "figure2",
            "Proportion of runs with some B infection",
            |g| g.prop_some_b,
            false,
        ),
    ];
    for (stem, title, value, log_y) in figures {
        let mut t = Table::new(&header, &columns)?;
        for g in 0..=max_generation as usize {
            let mut row = vec![g.to_string()];
            row.extend(summaries.iter().map(|s| num(value(&s.per_generation[g]))));
            t.row(row)?;
        }
        written.push(out.write(&format!("{stem}.csv"), &t.into_bytes()?)?);
        if svg {
            let series: Vec<Series> = labels
                .iter()
                .zip(&summaries)
                .map(|(l, s)| Series {
                    label: l.clone(),
                    points: s
                        .per_generation
                        .iter()
                        .map(|g| (g.generation as f64, value(g)))
                        .collect(),
                })
                .collect();
            let plot = Plot {
                title,
                x_label: "generation",
                y_label: title,
                log_y,
            };
            written.push(out.write(&format!("{stem}.svg"), svg::render(&plot, &series).as_bytes())?);
        }
    }
    Ok(written)
}
