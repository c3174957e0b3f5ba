//! Command-line model. A `--config` file is a flat JSON object whose keys
//! are flag names; its entries are spliced into the argument list ahead of
//! the user's own flags, so flags on the command line win.

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hadq_core::analysis::experiments::{
    BurkeParams, CoalescenceParams, ConvergenceParams, DualPointsParams, InvarianceParams, MulticlassBurkeParams,
    RegenerationParams, ShockParams,
};
use hadq_core::analysis::ShockReading;

#[derive(Debug, Parser)]
#[command(name = "hadq", version, about = "Multiclass Hammersley-Aldous-Diaconis process simulator", args_override_self = true)]
pub struct RunSpec {
    /// Seed for every random draw. Falls back to HADQ_SEED, then 0.
    #[arg(long, global = true, env = "HADQ_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for replicas. Results do not depend on this.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: u16,

    /// Flat JSON object of flag values, overridden by explicit flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample configurations (or a space-time point field) as CSV or JSON.
    Sample(SampleArgs),
    /// Apply a queueing operator to `line,position` CSV read from stdin.
    Ops(OpsArgs),
    /// Run the graphical construction; writes trajectory.csv and duals.csv.
    Evolve(EvolveArgs),
    /// Departure gaps of an M/M/1 queue after warm-up.
    Burke(BurkeArgs),
    /// Invariance of the two-class measure under the dynamics.
    Invariance(InvarianceArgs),
    /// Convergence from independent uniform classes.
    Convergence(ConvergenceArgs),
    /// The first classes of the n-class measure match the (n-1)-class one.
    MulticlassBurke(MulticlassBurkeArgs),
    /// Dual points of a stationary line form a rate-1 Poisson field.
    DualPoints(DualPointsArgs),
    /// Independence on both sides of a second class particle and of a
    /// regeneration string.
    Regeneration(RegenerationArgs),
    /// Colored coupling of two copies until all discrepancies vanish.
    Coalescence(CoalescenceArgs),
    /// Microscopic shock seen from a single discrepancy.
    Shock(ShockArgs),
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct GeometryArgs {
    /// Cycle of this circumference.
    #[arg(long, value_name = "N")]
    pub cycle: Option<f64>,
    /// Interval [0, L).
    #[arg(long, value_name = "L")]
    pub interval: Option<f64>,
}

impl GeometryArgs {
    pub fn geometry(&self) -> hadq_core::Result<hadq_core::model::Geometry> {
        use hadq_core::model::Geometry;
        match (self.cycle, self.interval) {
            (Some(n), None) => Geometry::cycle(n),
            (None, Some(l)) => Geometry::interval(l),
            _ => unreachable!("clap enforces exactly one geometry"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    /// Fixed particle count per line.
    #[arg(long, value_delimiter = ',', conflicts_with = "rates")]
    pub counts: Vec<usize>,
    /// Poisson intensity per line.
    #[arg(long, value_delimiter = ',')]
    pub rates: Vec<f64>,
    /// Sample a rate-1 space-time point field up to this time instead.
    #[arg(long, value_name = "T", conflicts_with_all = ["counts", "rates"])]
    pub points: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Operation {
    /// Lines A, S -> line 1 = D(A, S), line 2 = U(A, S).
    Split,
    /// Lines α^1..α^n -> D^(n)(α^1, …, α^n).
    Tandem,
    /// Lines α -> Cα.
    Couple,
    /// Nested lines η -> classes Rη.
    Collapse,
    /// Classes ξ -> nested lines R⁻¹ξ.
    Expand,
    /// Lines α -> classes Mα.
    Multiclass,
    /// Arrival classes then services -> FIFO links arrival,departure,class.
    Links,
    /// Arrival classes then services -> queue trajectory.
    Queue,
}

#[derive(Debug, Args)]
pub struct OpsArgs {
    #[arg(value_enum)]
    pub operation: Operation,
    #[command(flatten)]
    pub geometry: GeometryArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Process {
    /// Independent lines with the multi-line cascade.
    MultiLine,
    /// Nested lines Cα, each taking its own HAD move.
    Coupled,
    /// Classes Mα.
    Multiclass,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    /// Number of lines; must match the length of --counts when given.
    #[arg(long)]
    pub lines: Option<usize>,
    /// Uniform particle count per line of the initial stack α.
    #[arg(long, value_delimiter = ',', required = true)]
    pub counts: Vec<usize>,
    /// Horizon T.
    #[arg(long, value_name = "T")]
    pub time: f64,
    /// Snapshot times; defaults to 0 and T.
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Process::MultiLine)]
    pub process: Process,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Report file; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write the raw samples as CSV.
    #[arg(long, value_name = "FILE")]
    pub samples_csv: Option<PathBuf>,
    /// Record wall-clock time in the report (breaks byte-identity).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct BurkeArgs {
    /// Arrival rate.
    #[arg(long, default_value_t = BurkeParams::default().lambda)]
    pub lambda: f64,
    /// Service rate; must exceed lambda.
    #[arg(long, default_value_t = BurkeParams::default().rho)]
    pub rho: f64,
    /// Interval length.
    #[arg(long, default_value_t = BurkeParams::default().window)]
    pub window: f64,
    /// Departures before this point are discarded.
    #[arg(long, default_value_t = BurkeParams::default().warmup)]
    pub warmup: f64,
    #[arg(long, default_value_t = BurkeParams::default().replicas)]
    pub replicas: usize,
    #[arg(long, default_value_t = BurkeParams::default().significance)]
    pub significance: f64,
    #[arg(long, default_value_t = BurkeParams::default().required_pass_rate)]
    pub required_pass_rate: f64,
    #[command(flatten)]
    pub report: ReportArgs,
}

impl BurkeArgs {
    pub fn params(&self) -> BurkeParams {
        BurkeParams {
            lambda: self.lambda,
            rho: self.rho,
            window: self.window,
            warmup: self.warmup,
            replicas: self.replicas,
            significance: self.significance,
            required_pass_rate: self.required_pass_rate,
        }
    }
}

#[derive(Debug, Args)]
pub struct InvarianceArgs {
    /// Cycle length.
    #[arg(long, default_value_t = InvarianceParams::default().length)]
    pub length: f64,
    /// Line counts, strictly increasing.
    #[arg(long, value_delimiter = ',', default_values_t = InvarianceParams::default().counts)]
    pub counts: Vec<usize>,
    #[arg(long, default_value_t = InvarianceParams::default().horizon)]
    pub horizon: f64,
    /// Draws per sample within a meta-replica.
    #[arg(long, default_value_t = InvarianceParams::default().samples)]
    pub samples: usize,
    #[arg(long, default_value_t = InvarianceParams::default().meta_replicas)]
    pub meta_replicas: usize,
    #[arg(long, default_value_t = InvarianceParams::default().significance)]
    pub significance: f64,
    #[arg(long, default_value_t = InvarianceParams::default().required_pass_rate)]
    pub required_pass_rate: f64,
    #[command(flatten)]
    pub report: ReportArgs,
}

impl InvarianceArgs {
    pub fn params(&self) -> InvarianceParams {
        InvarianceParams {
            length: self.length,
            counts: self.counts.clone(),
            horizon: self.horizon,
            samples: self.samples,
            meta_replicas: self.meta_replicas,
            significance: self.significance,
            required_pass_rate: self.required_pass_rate,
        }
    }
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[arg(long, default_value_t = ConvergenceParams::default().length)]
    pub length: f64,
    #[arg(long, value_delimiter = ',', default_values_t = ConvergenceParams::default().counts)]
    pub counts: Vec<usize>,
    #[arg(long, default_value_t = ConvergenceParams::default().horizon)]
    pub horizon: f64,
    #[arg(long, default_value_t = ConvergenceParams::default().samples)]
    pub samples: usize,
    #[arg(long, default_value_t = ConvergenceParams::default().meta_replicas)]
    pub meta_replicas: usize,
    #[arg(long, default_value_t = ConvergenceParams::default().significance)]
    pub significance: f64,
    #[arg(long, default_value_t = ConvergenceParams::default().required_reject_rate)]
    pub required_reject_rate: f64,
    #[arg(long, default_value_t = ConvergenceParams::default().required_pass_rate)]
    pub required_pass_rate: f64,
    #[command(flatten)]
    pub report: ReportArgs,
}

impl ConvergenceArgs {
    pub fn params(&self) -> ConvergenceParams {
        ConvergenceParams {
            length: self.length,
            counts: self.counts.clone(),
            horizon: self.horizon,
            samples: self.samples,
            meta_replicas: self.meta_replicas,
            significance: self.significance,
            required_reject_rate: self.required_reject_rate,
            required_pass_rate: self.required_pass_rate,
        }
    }
}

#[derive(Debug, Args)]
pub struct MulticlassBurkeArgs {
    #[arg(long, default_value_t = MulticlassBurkeParams::default().length)]
    pub length: f64,
    /// Line counts of the larger system; the smaller drops the last one.
    #[arg(long, value_delimiter = ',', default_values_t = MulticlassBurkeParams::default().counts)]
    pub counts: Vec<usize>,
    #[arg(long, default_value_t = MulticlassBurkeParams::default().samples)]
    pub samples: usize,
    #[arg(long, default_value_t = MulticlassBurkeParams::default().meta_replicas)]
    pub meta_replicas: usize,
    #[arg(long, default_value_t = MulticlassBurkeParams::default().significance)]
    pub significance: f64,
    #[arg(long, default_value_t = MulticlassBurkeParams::default().required_pass_rate)]
    pub required_pass_rate: f64,
    #[command(flatten)]
    pub report: ReportArgs,
}

impl MulticlassBurkeArgs {
    pub fn params(&self) -> MulticlassBurkeParams {
        MulticlassBurkeParams {
            length: self.length,
            counts: self.counts.clone(),
            samples: self.samples,
            meta_replicas: self.meta_replicas,
            significance: self.significance,
            required_pass_rate: self.required_pass_rate,
        }
    }
}

#[derive(Debug, Args)]
pub struct DualPointsArgs {
    #[arg(long, default_value_t = DualPointsParams::default().count)]
    pub count: usize,
    #[arg(long, default_value_t = DualPointsParams::default().length)]
    pub length: f64,
    #[arg(long, default_value_t = DualPointsParams::default().horizon)]
    pub horizon: f64,
    /// Boxes per axis.
    #[arg(long, default_value_t = DualPointsParams::default().grid)]
    pub grid: usize,
    #[arg(long, default_value_t = DualPointsParams::default().replicas)]
    pub replicas: usize,
    #[arg(long, default_value_t = DualPointsParams::default().significance)]
    pub significance: f64,
    #[arg(long, default_value_t = DualPointsParams::default().required_pass_rate)]
    pub required_pass_rate: f64,
    #[arg(long, default_value_t = DualPointsParams::default().max_sigma)]
    pub max_sigma: f64,
    #[command(flatten)]
    pub report: ReportArgs,
}

impl DualPointsArgs {
    pub fn params(&self) -> DualPointsParams {
        DualPointsParams {
            count: self.count,
            length: self.length,
            horizon: self.horizon,
            grid: self.grid,
            replicas: self.replicas,
            significance: self.significance,
            required_pass_rate: self.required_pass_rate,
            max_sigma: self.max_sigma,
        }
    }
}

#[derive(Debug, Args)]
pub struct RegenerationArgs {
    #[arg(long, default_value_t = RegenerationParams::default().length)]
    pub length: f64,
    /// Line densities of the two-class system.
    #[arg(long, value_delimiter = ',', default_values_t = RegenerationParams::default().rates)]
    pub rates: Vec<f64>,
    /// Gaps tested on each side.
    #[arg(long, default_value_t = RegenerationParams::default().gaps)]
    pub gaps: usize,
    /// Side window width for counts.
    #[arg(long, default_value_t = RegenerationParams::default().side)]
    pub side: f64,
    #[arg(long, default_value_t = RegenerationParams::default().replicas)]
    pub replicas: usize,
    /// Class string, read left to right.
    #[arg(long, value_delimiter = ',', default_values_t = RegenerationParams::default().string)]
    pub string: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = RegenerationParams::default().string_rates)]
    pub string_rates: Vec<f64>,
    #[arg(long, default_value_t = RegenerationParams::default().string_length)]
    pub string_length: f64,
    #[arg(long, default_value_t = RegenerationParams::default().string_samples)]
    pub string_samples: usize,
    #[arg(long, default_value_t = RegenerationParams::default().string_attempts)]
    pub string_attempts: usize,
    #[arg(long, default_value_t = RegenerationParams::default().significance)]
    pub significance: f64,
    #[arg(long, default_value_t = RegenerationParams::default().required_pass_rate)]
    pub required_pass_rate: f64,
    #[arg(long, default_value_t = RegenerationParams::default().max_sigma)]
    pub max_sigma: f64,
    #[command(flatten)]
    pub report: ReportArgs,
}

impl RegenerationArgs {
    pub fn params(&self) -> RegenerationParams {
        RegenerationParams {
            length: self.length,
            rates: self.rates.clone(),
            gaps: self.gaps,
            side: self.side,
            replicas: self.replicas,
            string: self.string.clone(),
            string_rates: self.string_rates.clone(),
            string_length: self.string_length,
            string_samples: self.string_samples,
            string_attempts: self.string_attempts,
            significance: self.significance,
            required_pass_rate: self.required_pass_rate,
            max_sigma: self.max_sigma,
        }
    }
}

#[derive(Debug, Args)]
pub struct CoalescenceArgs {
    /// Particles per copy.
    #[arg(long, default_value_t = CoalescenceParams::default().count)]
    pub count: usize,
    #[arg(long, default_value_t = CoalescenceParams::default().length)]
    pub length: f64,
    #[arg(long, default_value_t = CoalescenceParams::default().horizon)]
    pub horizon: f64,
    #[arg(long, default_value_t = CoalescenceParams::default().runs)]
    pub runs: usize,
    #[command(flatten)]
    pub report: ReportArgs,
}

impl CoalescenceArgs {
    pub fn params(&self) -> CoalescenceParams {
        CoalescenceParams { count: self.count, length: self.length, horizon: self.horizon, runs: self.runs }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Reading {
    /// All particles left of the origin, first class to the right.
    AllLeftFirstRight,
    /// First class left of the origin plus all second class particles.
    FirstLeftSecondAll,
}

impl From<Reading> for ShockReading {
    fn from(r: Reading) -> Self {
        match r {
            Reading::AllLeftFirstRight => ShockReading::AllLeftFirstRight,
            Reading::FirstLeftSecondAll => ShockReading::FirstLeftSecondAll,
        }
    }
}

#[derive(Debug, Args)]
pub struct ShockArgs {
    /// Density left of the discrepancy.
    #[arg(long, default_value_t = ShockParams::default().lambda)]
    pub lambda: f64,
    /// Density right of the discrepancy; must be below lambda.
    #[arg(long, default_value_t = ShockParams::default().rho)]
    pub rho: f64,
    #[arg(long, default_value_t = ShockParams::default().left)]
    pub left: f64,
    #[arg(long, default_value_t = ShockParams::default().right)]
    pub right: f64,
    #[arg(long, default_value_t = ShockParams::default().warmup)]
    pub warmup: f64,
    #[arg(long, default_value_t = ShockParams::default().palm_halfwidth)]
    pub palm_halfwidth: f64,
    #[arg(long, default_value_t = ShockParams::default().horizon)]
    pub horizon: f64,
    /// Density window width on each side.
    #[arg(long, default_value_t = ShockParams::default().width)]
    pub width: f64,
    #[arg(long, default_value_t = ShockParams::default().replicas)]
    pub replicas: usize,
    #[arg(long, default_value_t = ShockParams::default().tolerance)]
    pub tolerance: f64,
    #[arg(long, value_enum, default_value_t = Reading::AllLeftFirstRight)]
    pub reading: Reading,
    #[command(flatten)]
    pub report: ReportArgs,
}

impl ShockArgs {
    pub fn params(&self) -> ShockParams {
        ShockParams {
            lambda: self.lambda,
            rho: self.rho,
            left: self.left,
            right: self.right,
            warmup: self.warmup,
            palm_halfwidth: self.palm_halfwidth,
            horizon: self.horizon,
            width: self.width,
            replicas: self.replicas,
            tolerance: self.tolerance,
            reading: self.reading.into(),
        }
    }
}

const GLOBAL_KEYS: [&str; 2] = ["seed", "jobs"];

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(rest));
        }
    }
    None
}

fn value_tokens(key: &str, value: &serde_json::Value) -> anyhow::Result<Vec<String>> {
    use serde_json::Value;
    let flag = format!("--{}", key.replace('_', "-"));
    let scalar = |v: &Value| -> anyhow::Result<String> {
        match v {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            other => bail!("config key `{key}` has unsupported value {other}"),
        }
    };
    Ok(match value {
        Value::Bool(true) => vec![flag],
        Value::Bool(false) | Value::Null => vec![],
        Value::Array(items) => {
            let parts = items.iter().map(scalar).collect::<anyhow::Result<Vec<_>>>()?;
            vec![flag, parts.join(",")]
        }
        other => vec![flag, scalar(other)?],
    })
}

/// Expands a `--config` file into argument tokens: global keys right after
/// the program name, the rest right after the subcommand.
pub fn inject_config(args: Vec<OsString>) -> anyhow::Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config file {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing config file {}", path.display()))?;
    let serde_json::Value::Object(map) = value else {
        bail!("config file {} must hold a JSON object", path.display());
    };
    let (mut global, mut local) = (Vec::new(), Vec::new());
    for (key, value) in &map {
        let tokens = value_tokens(key, value)?;
        if GLOBAL_KEYS.contains(&key.as_str()) {
            global.extend(tokens);
        } else {
            local.extend(tokens);
        }
    }
    let names: Vec<String> = <RunSpec as clap::CommandFactory>::command()
        .get_subcommands()
        .map(|c| c.get_name().to_string())
        .collect();
    let sub = args.iter().position(|a| names.iter().any(|n| a.to_string_lossy() == n.as_str()));
    let mut out: Vec<OsString> = Vec::with_capacity(args.len() + global.len() + local.len());
    out.push(args.first().cloned().unwrap_or_else(|| "hadq".into()));
    out.extend(global.into_iter().map(OsString::from));
    match sub {
        Some(i) => {
            out.extend(args[1..=i].iter().cloned());
            out.extend(local.into_iter().map(OsString::from));
            out.extend(args[i + 1..].iter().cloned());
        }
        None => out.extend(args[1..].iter().cloned()),
    }
    Ok(out)
}

/// Parses the command line, applying a `--config` file if one is named.
pub fn parse_run_spec(args: Vec<OsString>) -> anyhow::Result<Result<RunSpec, clap::Error>> {
    let args = inject_config(args)?;
    Ok(RunSpec::try_parse_from(args))
}
