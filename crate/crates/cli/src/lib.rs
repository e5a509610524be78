//! Command-line harness: config loading with dotted overrides, the six
//! subcommands, and deterministic CSV/SVG output.

pub mod commands;
pub mod output;
pub mod overrides;
pub mod svg;

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use coopsir::meanfield::ExponentVariant;
use coopsir::model::OffspringLaw;
use coopsir::Extended;

use crate::commands::*;
use crate::output::OutputDir;

pub const OUTPUT_ENV: &str = "COOPSIR_OUTPUT";

#[derive(Parser, Debug)]
#[command(name = "coopsir", version, about = "Cooperative two-type SIR on Galton-Watson trees")]
pub struct Cli {
    /// Output directory (created if missing).
    #[arg(long, global = true, env = OUTPUT_ENV, default_value = "results")]
    pub output: PathBuf,
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    pub force: bool,
    /// Worker threads for replicas and grids (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Monte Carlo replicas of the two-type process.
    Simulate(ConfigArgs),
    /// Exact versus sampled double-infection probability over parent gaps.
    EdgeCheck {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Comma-separated gaps (default: a grid scaled by the fastest rate).
        #[arg(long, value_delimiter = ',')]
        gaps: Option<Vec<f64>>,
    },
    /// Single-type criticality and survival probability.
    Branching {
        /// Offspring law, e.g. det:2, bin:3:0.5, poisson:2, geom:0.4, explicit:0.2,0.3,0.5
        #[arg(long)]
        offspring: OffspringLaw<f64>,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        mu: f64,
    },
    /// Mean-field final size by integration and by the closed form.
    Meanfield {
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.5, 3.0])]
        alpha: Vec<f64>,
        #[arg(long = "c", value_delimiter = ',', default_values_t = [1.0, 3.0, 5.0])]
        c: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [1e-2, 1e-4])]
        eps: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Variant::Cooperative)]
        variant: Variant,
    },
    /// Final size across an alpha grid with jump detection.
    Scan {
        #[arg(long = "c", default_value_t = 4.0)]
        c: f64,
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
        #[arg(long, default_value_t = 0.9)]
        alpha_min: f64,
        #[arg(long, default_value_t = 1.1)]
        alpha_max: f64,
        #[arg(long, default_value_t = 81)]
        points: usize,
    },
    /// The beta2 sweep behind the two published figures.
    ReproduceFigures {
        #[arg(long, default_value_t = FIGURE_SEED)]
        seed: u64,
        #[arg(long, default_value_t = FIGURE_REPLICAS)]
        replicas: u32,
        #[arg(long, default_value_t = FIGURE_GENERATIONS)]
        max_generation: u32,
        /// Also draw figure1.svg and figure2.svg.
        #[arg(long)]
        svg: bool,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum Variant {
    Cooperative,
    Literal,
}

impl From<Variant> for ExponentVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Cooperative => ExponentVariant::Cooperative,
            Variant::Literal => ExponentVariant::Literal,
        }
    }
}

#[derive(Args, Debug)]
pub struct ConfigArgs {
    /// JSON experiment config.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicas: Option<u32>,
    #[arg(long)]
    pub max_generation: Option<u32>,
    #[arg(long)]
    pub offspring: Option<String>,
    /// Dotted override, e.g. --set rates.beta2=1.4 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub beta1: Option<Extended<f64>>,
    #[arg(long)]
    pub mu1: Option<f64>,
    #[arg(long)]
    pub alpha2: Option<f64>,
    #[arg(long)]
    pub beta2: Option<Extended<f64>>,
    #[arg(long)]
    pub mu2: Option<f64>,
}

impl ConfigArgs {
    /// Overrides in application order: `--set` first, then the dedicated flags.
    pub fn overrides(&self) -> Result<Vec<(String, String)>> {
        let mut out = self
            .set
            .iter()
            .map(|s| overrides::parse_assignment(s))
            .collect::<Result<Vec<_>>>()?;
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v));
            }
        };
        let json = |v: Extended<f64>| serde_json::to_string(&v).expect("extended serializes");
        push("master_seed", self.seed.map(|v| v.to_string()));
        push("replicas", self.replicas.map(|v| v.to_string()));
        push("max_generation", self.max_generation.map(|v| v.to_string()));
        push("rates.alpha1", self.alpha1.map(|v| v.to_string()));
        push("rates.beta1", self.beta1.map(json));
        push("rates.mu1", self.mu1.map(|v| v.to_string()));
        push("rates.alpha2", self.alpha2.map(|v| v.to_string()));
        push("rates.beta2", self.beta2.map(json));
        push("rates.mu2", self.mu2.map(|v| v.to_string()));
        if let Some(law) = &self.offspring {
            let law: OffspringLaw<f64> = law.parse()?;
            out.push(("offspring".into(), serde_json::to_string(&law)?));
        }
        Ok(out)
    }

    pub fn load(&self) -> Result<coopsir::SimConfig> {
        overrides::load_config(&self.config, &self.overrides()?)
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let out = OutputDir::new(&cli.output, cli.force);
    let report = |paths: Vec<PathBuf>| {
        for p in paths {
            println!("wrote {}", p.display());
        }
    };
    match cli.command {
        Command::Simulate(args) => report(simulate(&args.load()?, &out)?),
        Command::EdgeCheck { config, trials, gaps } => {
            let spec = EdgeCheckSpec::from_config(&config.load()?, gaps, trials);
            report(edge(&spec, &out)?)
        }
        Command::Branching { offspring, alpha, mu } => {
            println!("{}", serde_json::to_string_pretty(&branching(&offspring, alpha, mu)?)?)
        }
        Command::Meanfield { alpha, c, eps, variant } => report(meanfield(
            &MeanFieldSpec {
                alpha,
                c,
                eps,
                variant: variant.into(),
            },
            &out,
        )?),
        Command::Scan {
            c,
            eps,
            alpha_min,
            alpha_max,
            points,
        } => {
            let record = scan(
                &ScanSpec {
                    c,
                    eps,
                    alpha_min,
                    alpha_max,
                    points,
                },
                &out,
            )?;
            println!("wrote {}", out.path("scan.csv").display());
            println!("{}", serde_json::to_string_pretty(&record)?)
        }
        Command::ReproduceFigures {
            seed,
            replicas,
            max_generation,
            svg,
        } => report(reproduce_figures(seed, replicas, max_generation, &out, svg)?),
    }
    Ok(())
}

/// Parses `argv` (program name first) and runs the command. Returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("cannot build thread pool")
            .and_then(|pool| pool.install(|| dispatch(cli))),
        None => dispatch(cli),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
