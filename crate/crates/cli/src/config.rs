//! Command-line flags, the optional TOML config file and the resolved
//! run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use tfic::analysis::{DEFAULT_DT, DEFAULT_HORIZON_PER_SITE};
use tfic::{Measure, Model};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "tfic", version, about = "Correlation start-up dynamics of spin chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Time series of all end-to-end correlations for one chain.
    Evolve(RunArgs),
    /// Start-up times over a range of chain lengths, with switch detection.
    Scan(RunArgs),
    /// Envelope peaks and their power-law scaling with chain length.
    Peaks(RunArgs),
    /// Spectra and eigenstate overlaps of the full and RWA Hamiltonians.
    ValidateRwa(RunArgs),
    /// Start-up scan of the uniform Heisenberg chain.
    Heisenberg(RunArgs),
    /// Recompute the fits stored in a JSON summary.
    Refit(RefitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML file with defaults for any of the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// ising-rwa, ising-full or heisenberg.
    #[arg(long)]
    pub model: Option<Model>,
    /// Chain length(s): `20`, `2:1000`, `20:500:10` or `10,20,40`.
    #[arg(short = 'N', long = "n")]
    pub n: Option<String>,
    #[arg(long)]
    pub coupling: Option<f64>,
    #[arg(long)]
    pub field: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Fixed end of the time window.
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    /// End of the time window as a multiple of N (used when --t-max is absent).
    #[arg(long = "t-max-per-site")]
    pub t_max_per_site: Option<f64>,
    /// Comma-separated: mi, qd, cc, eof, cfzz, cfxx.
    #[arg(long, alias = "measure", value_delimiter = ',')]
    pub measures: Option<Vec<Measure>>,
    /// Start-up criteria, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub delta: Option<Vec<f64>>,
    /// Number of envelope peaks to extract per chain.
    #[arg(long)]
    pub peaks: Option<usize>,
    /// Field sweep `from:to:count` in units of J.
    #[arg(long)]
    pub ratios: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (default: available cores).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct RefitArgs {
    /// JSON summary written by `scan`, `heisenberg` or `peaks`.
    pub summary: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Values read from `--config`. Keys mirror the long flag names.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    model: Option<String>,
    n: Option<toml::Value>,
    coupling: Option<f64>,
    field: Option<f64>,
    dt: Option<f64>,
    t_max: Option<f64>,
    t_max_per_site: Option<f64>,
    measures: Option<Vec<String>>,
    delta: Option<Vec<f64>>,
    peaks: Option<usize>,
    ratios: Option<String>,
    output: Option<PathBuf>,
    format: Option<Format>,
    workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Evolve,
    Scan,
    Peaks,
    ValidateRwa,
    Heisenberg,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Evolve => "evolve",
            CommandKind::Scan => "scan",
            CommandKind::Peaks => "peaks",
            CommandKind::ValidateRwa => "validate-rwa",
            CommandKind::Heisenberg => "heisenberg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioSweep {
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

impl RatioSweep {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.from];
        }
        let step = (self.to - self.from) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.to } else { self.from + step * i as f64 })
            .collect()
    }
}

/// Fully resolved settings of one run; echoed into every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub model: Model,
    pub n_sites: Vec<usize>,
    pub coupling: f64,
    pub field: f64,
    pub dt: f64,
    /// Fixed window end; when absent the window is `t_max_per_site · N`.
    pub t_max: Option<f64>,
    pub t_max_per_site: f64,
    pub measures: Vec<Measure>,
    pub deltas: Vec<f64>,
    pub peaks: usize,
    pub ratios: Option<RatioSweep>,
    pub output: PathBuf,
    pub format: Format,
    pub workers: usize,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Parses `20`, `2:1000`, `20:500:10` or `10,20,40`.
pub fn parse_sites(spec: &str) -> Result<Vec<usize>, CliError> {
    let bad = |what: &str| config_err(format!("--n `{spec}`: {what}"));
    let int = |s: &str| s.trim().parse::<usize>().map_err(|_| bad("expected an integer"));
    let spec = spec.trim();
    if spec.contains(',') {
        return spec.split(',').map(int).collect();
    }
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [one] => Ok(vec![int(one)?]),
        [a, b] | [a, b, _] => {
            let (a, b) = (int(a)?, int(b)?);
            let step = if parts.len() == 3 { int(parts[2])? } else { 1 };
            if step == 0 || b < a {
                return Err(bad("range must be increasing with a positive step"));
            }
            Ok((a..=b).step_by(step).collect())
        }
        _ => Err(bad("expected N, a:b or a:b:step")),
    }
}

pub fn parse_ratios(spec: &str) -> Result<RatioSweep, CliError> {
    let bad = || config_err(format!("--ratios `{spec}`: expected from:to:count"));
    let parts: Vec<&str> = spec.trim().split(':').collect();
    let [from, to, count] = parts.as_slice() else {
        return Err(bad());
    };
    let sweep = RatioSweep {
        from: from.trim().parse().map_err(|_| bad())?,
        to: to.trim().parse().map_err(|_| bad())?,
        count: count.trim().parse().map_err(|_| bad())?,
    };
    if sweep.count == 0 || !(sweep.from >= 0.0) || !(sweep.to >= sweep.from) {
        return Err(bad());
    }
    Ok(sweep)
}

fn read_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| config_err(format!("--config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| config_err(format!("--config {}: {e}", path.display())))
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

impl RunConfig {
    /// Combines flags, the config file and per-command defaults, in that
    /// order of precedence.
    pub fn resolve(command: CommandKind, args: &RunArgs) -> Result<RunConfig, CliError> {
        let file = match &args.config {
            Some(path) => read_file_config(path)?,
            None => FileConfig::default(),
        };

        let file_model = file
            .model
            .as_deref()
            .map(|m| m.parse::<Model>().map_err(|e| config_err(format!("config `model`: {e}"))))
            .transpose()?;
        let default_model = if command == CommandKind::Heisenberg { Model::HeisenbergUniform } else { Model::IsingRwa };
        let model = args.model.or(file_model).unwrap_or(default_model);
        if command == CommandKind::Heisenberg && model != Model::HeisenbergUniform {
            return Err(config_err(format!("--model {model} is not valid for `heisenberg`")));
        }
        if command == CommandKind::ValidateRwa && model != Model::IsingRwa {
            return Err(config_err("`validate-rwa` always compares ising-full with ising-rwa; drop --model"));
        }

        let file_n = match &file.n {
            None => None,
            Some(toml::Value::Integer(i)) if *i >= 0 => Some(i.to_string()),
            Some(toml::Value::String(s)) => Some(s.clone()),
            Some(other) => return Err(config_err(format!("config `n`: expected integer or string, got {other}"))),
        };
        let default_n = match command {
            CommandKind::Evolve => "20",
            CommandKind::Scan => "2:1000",
            CommandKind::Peaks => "20:500:10",
            CommandKind::ValidateRwa => "3",
            CommandKind::Heisenberg => "2:200",
        };
        let n_sites = parse_sites(args.n.as_deref().or(file_n.as_deref()).unwrap_or(default_n))?;
        if n_sites.is_empty() {
            return Err(config_err("--n selects no chain lengths"));
        }
        if matches!(command, CommandKind::Evolve | CommandKind::ValidateRwa) && n_sites.len() != 1 {
            return Err(config_err(format!("--n: `{}` takes a single chain length", command.name())));
        }

        let file_measures = file
            .measures
            .map(|ms| {
                ms.iter()
                    .map(|m| m.parse::<Measure>().map_err(|e| config_err(format!("config `measures`: {e}"))))
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()?;
        let default_measures = match command {
            CommandKind::Heisenberg => vec![Measure::CfZz],
            CommandKind::Evolve => Measure::ALL.to_vec(),
            _ => vec![Measure::Mi],
        };
        let mut measures = args.measures.clone().or(file_measures).unwrap_or(default_measures);
        measures.dedup();

        let default_deltas = if command == CommandKind::Heisenberg { vec![1e-4] } else { vec![1e-4, 1e-5, 1e-6] };
        let deltas = args.delta.clone().or(file.delta).unwrap_or(default_deltas);

        let default_per_site = if command == CommandKind::Peaks { 1.5 } else { DEFAULT_HORIZON_PER_SITE };
        let ratios = match args.ratios.as_deref().or(file.ratios.as_deref()) {
            Some(s) => Some(parse_ratios(s)?),
            None if command == CommandKind::ValidateRwa => Some(parse_ratios("0.1:20:200")?),
            None => None,
        };

        let config = RunConfig {
            command,
            model,
            n_sites,
            coupling: args.coupling.or(file.coupling).unwrap_or(1.0),
            field: args.field.or(file.field).unwrap_or(10.0),
            dt: args.dt.or(file.dt).unwrap_or(DEFAULT_DT),
            t_max: args.t_max.or(file.t_max),
            t_max_per_site: args.t_max_per_site.or(file.t_max_per_site).unwrap_or(default_per_site),
            measures,
            deltas,
            peaks: args.peaks.or(file.peaks).unwrap_or(2),
            ratios,
            output: args.output.clone().or(file.output).unwrap_or_else(|| PathBuf::from(".")),
            format: args.format.or(file.format).unwrap_or(Format::Csv),
            workers: args.workers.or(file.workers).unwrap_or_else(default_workers),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(config_err(format!("--{name} must be positive, got {v}")))
            }
        };
        positive("coupling", self.coupling)?;
        positive("dt", self.dt)?;
        positive("t-max-per-site", self.t_max_per_site)?;
        if let Some(t) = self.t_max {
            positive("t-max", t)?;
            if t <= self.dt {
                return Err(config_err(format!("--t-max {t} must exceed --dt {}", self.dt)));
            }
        }
        if !(self.field.is_finite() && self.field >= 0.0) {
            return Err(config_err(format!("--field must be non-negative, got {}", self.field)));
        }
        if self.workers == 0 {
            return Err(config_err("--workers must be at least 1"));
        }
        if self.peaks == 0 {
            return Err(config_err("--peaks must be at least 1"));
        }
        if self.measures.is_empty() {
            return Err(config_err("--measures is empty"));
        }
        if matches!(self.command, CommandKind::Scan | CommandKind::Heisenberg) {
            if self.deltas.is_empty() {
                return Err(config_err("--delta needs at least one criterion"));
            }
            for &d in &self.deltas {
                positive("delta", d)?;
            }
        }
        if self.command != CommandKind::ValidateRwa && self.model != Model::IsingFull {
            if let Some(&n) = self.n_sites.iter().find(|&&n| n < 2) {
                return Err(config_err(format!("--n: chain length {n} is below 2")));
            }
        }
        if self.model == Model::IsingFull && self.command != CommandKind::Evolve {
            return Err(config_err(format!("--model ising-full is only available for `evolve`, not `{}`", self.command.name())));
        }
        Ok(())
    }

    /// Window end for a chain of `n` sites.
    pub fn t_max_for(&self, n: usize) -> f64 {
        self.t_max.unwrap_or(self.t_max_per_site * n as f64)
    }
}
