//! Named experiments. Each takes a parameter struct (every field has a
//! default) and a seed, and returns an [`ExperimentReport`].

mod burke;
mod coalescence;
mod dual_points;
mod regeneration;
mod shock;
mod stationarity;

use rand::Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

pub use burke::{burke, BurkeParams};
pub use coalescence::{coalescence, CoalescenceParams};
pub use dual_points::{dual_points, DualPointsParams};
pub use regeneration::{regeneration, RegenerationParams};
pub use shock::{shock, ShockParams};
pub use stationarity::{convergence, invariance, multiclass_burke, ConvergenceParams, InvarianceParams, MulticlassBurkeParams};

use super::report::{ExperimentReport, SampleTable, TestRecord, Verdict};
use super::stats::TestOutcome;
use crate::error::{Error, Result};
use crate::model::{Configuration, Geometry, RngStream};
use crate::queueing::{map_multiclass, MultiLineConfig, MulticlassConfig};

pub const EXPERIMENTS: [&str; 8] =
    ["burke", "invariance", "convergence", "multiclass-burke", "dual-points", "regeneration", "coalescence", "shock"];

/// Runs the experiment called `name` with parameters given as a JSON
/// object (missing fields take their defaults).
pub fn run_experiment(name: &str, params: &serde_json::Value, seed: u64) -> Result<ExperimentReport> {
    match name {
        "burke" => burke(&parse(params)?, seed),
        "invariance" => invariance(&parse(params)?, seed),
        "convergence" => convergence(&parse(params)?, seed),
        "multiclass-burke" => multiclass_burke(&parse(params)?, seed),
        "dual-points" => dual_points(&parse(params)?, seed),
        "regeneration" => regeneration(&parse(params)?, seed),
        "coalescence" => coalescence(&parse(params)?, seed),
        "shock" => shock(&parse(params)?, seed),
        other => Err(Error::UnknownExperiment(other.to_string())),
    }
}

fn parse<P: DeserializeOwned>(params: &serde_json::Value) -> Result<P> {
    let value = if params.is_null() { serde_json::json!({}) } else { params.clone() };
    serde_json::from_value(value).map_err(|e| Error::InvalidParameters(e.to_string()))
}

fn report<P: Serialize>(experiment: &str, params: &P, seed: u64) -> Result<ExperimentReport> {
    Ok(ExperimentReport {
        experiment: experiment.to_string(),
        params: serde_json::to_value(params)?,
        seed,
        tests: Vec::new(),
        verdicts: Vec::new(),
        runtime_s: None,
        samples: SampleTable::default(),
    })
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameters(msg.into())
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive, got {value}")))
    }
}

fn check_count(name: &str, value: usize) -> Result<()> {
    if value >= 1 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be at least 1")))
    }
}

fn check_level(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("significance must lie in (0, 1), got {alpha}")))
    }
}

fn check_increasing_counts(counts: &[usize]) -> Result<()> {
    if counts.is_empty() || counts[0] == 0 || counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid(format!("line counts must be positive and strictly increasing, got {counts:?}")));
    }
    Ok(())
}

/// Runs `f` on replica indices `0..n` in parallel, collecting in order.
fn replicate<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..n as u64).into_par_iter().map(f).collect()
}

fn fraction(flags: impl Iterator<Item = bool>) -> f64 {
    let (mut hits, mut total) = (0usize, 0usize);
    for f in flags {
        hits += usize::from(f);
        total += 1;
    }
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

/// Draws `α` with independent uniform lines of the given counts and
/// returns `Mα`.
fn sample_invariant<R: Rng + ?Sized>(g: Geometry, counts: &[usize], rng: &mut R) -> Result<MulticlassConfig> {
    let lines = counts.iter().map(|&c| Configuration::sample_count(g, c, rng)).collect();
    map_multiclass(&MultiLineConfig::new(lines)?)
}

fn merged_upto(xi: &MulticlassConfig, upto: usize) -> Vec<(f64, usize)> {
    xi.labelled().into_iter().filter(|&(_, c)| c <= upto).collect()
}

/// Forward and backward distances from a uniformly chosen class-2 particle
/// to its neighbours among classes `1..=upto`.
fn class_two_gaps<R: Rng + ?Sized>(xi: &MulticlassConfig, upto: usize, rng: &mut R) -> Result<(f64, f64)> {
    let all = merged_upto(xi, upto);
    let seconds: Vec<usize> = all.iter().enumerate().filter(|(_, p)| p.1 == 2).map(|(i, _)| i).collect();
    if seconds.is_empty() {
        return Err(Error::EmptyClass(2));
    }
    let i = seconds[rng.random_range(0..seconds.len())];
    let g = xi.geometry();
    let n = all.len();
    let next = all[(i + 1) % n].0;
    let prev = all[(i + n - 1) % n].0;
    Ok((g.forward_distance(all[i].0, next), g.forward_distance(prev, all[i].0)))
}

fn stream(seed: u64, index: u64) -> RngStream {
    RngStream::new(seed, index)
}
