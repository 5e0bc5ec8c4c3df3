//! Argument parsing and command dispatch.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use crate::config::{ExperimentConfig, Overrides};
use crate::error::CliResult;
use crate::figures;
use crate::output::{persist, Artifact};
use crate::query::{self, AsymptoticRegime, GammaTermArg, QueryArgs, QueryKind};
use crate::verify::{self, SchurRegimeArg, Suite, VerifyArgs};

#[derive(Debug, Parser)]
#[command(
    name = "gprlab",
    version,
    about = "Goodput-to-power ratio experiments for multi-antenna links"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

/// Settings shared by every command. Unset values come from `--config`,
/// then from the command's defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Transmit antennas.
    #[arg(long, global = true)]
    pub nt: Option<usize>,
    /// Receive antennas.
    #[arg(long, global = true)]
    pub nr: Option<usize>,
    /// SNR scale 1/sigma^2 in dB.
    #[arg(long = "rho-db", global = true, allow_negative_numbers = true)]
    pub rho_db: Option<f64>,
    /// Target rate in bits per channel use.
    #[arg(long, global = true)]
    pub rate: Option<f64>,
    /// Power budget in Watts.
    #[arg(long, global = true)]
    pub pmax: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo channel draws.
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Points of the power (or budget) grid.
    #[arg(long = "grid-points", global = true)]
    pub grid_points: Option<usize>,
    /// Simplex grid resolution for exhaustive allocation searches.
    #[arg(long, global = true)]
    pub resolution: Option<u32>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// key=value file with the same settings.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

impl GlobalArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            n_t: self.nt,
            n_r: self.nr,
            rho_db: self.rho_db,
            rate: self.rate,
            p_max: self.pmax,
            seed: self.seed,
            trials: self.trials,
            grid_points: self.grid_points,
            resolution: self.resolution,
            out: self.out.clone(),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the data behind a reference figure as CSV.
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=6))]
        id: u8,
    },
    /// Print one key=value record.
    Query {
        #[arg(value_enum)]
        kind: QueryKind,
        /// Total transmit power for gpr/outage/asymptotic goodput.
        #[arg(long = "p")]
        power: Option<f64>,
        /// Order for nu and thresholds.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum)]
        regime: Option<AsymptoticRegime>,
        /// Antenna ratio n_t/n_r of the regime (c) approximation.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long = "gamma-term", value_enum, default_value_t)]
        gamma_term: GammaTermArg,
    },
    /// Run a structural check; exits 1 when it fails.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        /// Random instances for appendixA.
        #[arg(long)]
        samples: Option<u64>,
        /// Restrict schur to one SNR extreme.
        #[arg(long, value_enum)]
        regime: Option<SchurRegimeArg>,
    },
}

/// What a command printed and whether it passed.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub passed: bool,
}

fn resolve(defaults: ExperimentConfig, global: &GlobalArgs) -> CliResult<ExperimentConfig> {
    let file = global
        .config
        .as_deref()
        .map(Overrides::from_file)
        .transpose()?;
    ExperimentConfig::resolve(defaults, file.as_ref(), &global.overrides())
}

pub fn run(cli: &Cli) -> CliResult<Outcome> {
    let start = Instant::now();
    match &cli.command {
        Command::Figure { id } => {
            let cfg = resolve(figures::defaults(*id)?, &cli.global)?;
            let out = figures::run(*id, &cfg)?;
            let manifest = persist(
                &cfg,
                &format!("fig{id}"),
                &out.artifacts,
                start.elapsed(),
                out.summary.clone(),
            )?;
            let mut lines = out.lines();
            for a in &out.artifacts {
                lines.push(format!("csv={}", cfg.out.join(&a.name).display()));
            }
            lines.push(format!("manifest={}", manifest.display()));
            Ok(Outcome {
                lines,
                passed: true,
            })
        }
        Command::Query {
            kind,
            power,
            n,
            regime,
            beta,
            gamma_term,
        } => {
            let mut defaults = ExperimentConfig::base(format!("query {kind:?}").to_lowercase());
            defaults.trials = 100_000;
            let cfg = resolve(defaults, &cli.global)?;
            let args = QueryArgs {
                power: *power,
                n: *n,
                regime: *regime,
                beta: *beta,
                gamma_term: *gamma_term,
            };
            let record = query::run(*kind, &args, &cfg)?;
            Ok(Outcome {
                lines: query::format_record(&record),
                passed: true,
            })
        }
        Command::Verify {
            suite,
            samples,
            regime,
        } => {
            let args = VerifyArgs {
                samples: *samples,
                regime: *regime,
            };
            let cfg = resolve(verify::defaults(*suite, &args), &cli.global)?;
            let v = verify::run(*suite, &args, &cfg)?;
            let stem = format!("verify_{}", suite.name());
            let mut record = serde_json::to_string_pretty(&v.record).expect("record serializes");
            record.push('\n');
            let artifacts = [
                Artifact::text(format!("{stem}.txt"), v.report.clone()),
                Artifact::text(format!("{stem}.json"), record),
            ];
            let mut summary = Map::new();
            summary.insert("passed".into(), Value::Bool(v.passed));
            let manifest = persist(&cfg, &stem, &artifacts, start.elapsed(), summary)?;
            let mut lines: Vec<String> = v.report.lines().map(str::to_owned).collect();
            lines.push(format!(
                "report={}",
                cfg.out.join(&artifacts[0].name).display()
            ));
            lines.push(format!("manifest={}", manifest.display()));
            Ok(Outcome {
                lines,
                passed: v.passed,
            })
        }
    }
}
