use serde::{Deserialize, Serialize};

use super::*;
use crate::analysis::stats::gof_exponential_gaps;
use crate::queueing::split_departures_unused;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BurkeParams {
    /// Arrival rate.
    pub lambda: f64,
    /// Service rate.
    pub rho: f64,
    /// Interval length; the queue starts empty at 0.
    pub window: f64,
    /// Departures before this point are discarded.
    pub warmup: f64,
    pub replicas: usize,
    pub significance: f64,
    pub required_pass_rate: f64,
}

impl Default for BurkeParams {
    fn default() -> Self {
        Self { lambda: 0.5, rho: 1.0, window: 1e5, warmup: 2e4, replicas: 100, significance: 0.01, required_pass_rate: 0.95 }
    }
}

impl BurkeParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("lambda", self.lambda)?;
        check_positive("rho", self.rho)?;
        if self.lambda >= self.rho {
            return Err(invalid(format!("stability needs lambda < rho, got {} >= {}", self.lambda, self.rho)));
        }
        check_positive("window", self.window)?;
        if !(self.warmup >= 0.0 && self.warmup < self.window) {
            return Err(invalid("warmup must lie in [0, window)"));
        }
        check_count("replicas", self.replicas)?;
        check_level(self.significance)
    }
}

/// Departures of an M/M/1 queue observed after a warm-up are Poisson with
/// the arrival rate.
pub fn burke(p: &BurkeParams, seed: u64) -> Result<ExperimentReport> {
    p.validate()?;
    let g = Geometry::interval(p.window)?;
    let observed = Geometry::window(p.warmup, p.window)?;
    let outcomes = replicate(p.replicas, |i| {
        let mut rng = stream(seed, i).rng();
        let arrivals = Configuration::sample_poisson(g, p.lambda, &mut rng)?;
        let services = Configuration::sample_poisson(g, p.rho, &mut rng)?;
        let (departures, _) = split_departures_unused(&arrivals, &services)?;
        let kept = departures.positions().iter().copied().filter(|&x| x >= p.warmup).collect();
        gof_exponential_gaps(&Configuration::new(observed, kept)?, p.lambda)
    })?;
    let mut rep = report("burke", p, seed)?;
    rep.samples = SampleTable::new(&["replica", "n", "statistic", "p"]);
    for (i, o) in outcomes.iter().enumerate() {
        rep.tests.push(TestRecord::from_outcome(format!("replica-{i}/departure-gaps-ks"), *o));
        rep.samples.rows.push(vec![i as f64, o.n as f64, o.statistic, o.p]);
    }
    let rate = fraction(outcomes.iter().map(|o| o.p > p.significance));
    rep.verdicts.push(Verdict::at_least("departure-gaps-pass-rate", p.required_pass_rate, rate));
    Ok(rep)
}
