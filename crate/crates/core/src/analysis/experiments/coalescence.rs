use serde::{Deserialize, Serialize};

use super::*;
use crate::coloring::coalescence_run;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoalescenceParams {
    /// Particles in each copy.
    pub count: usize,
    pub length: f64,
    pub horizon: f64,
    pub runs: usize,
}

impl Default for CoalescenceParams {
    fn default() -> Self {
        Self { count: 50, length: 100.0, horizon: 1e4, runs: 200 }
    }
}

impl CoalescenceParams {
    pub fn validate(&self) -> Result<()> {
        check_count("count", self.count)?;
        check_positive("length", self.length)?;
        check_positive("horizon", self.horizon)?;
        check_count("runs", self.runs)
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

/// Two independent copies driven by the same points: the red count never
/// grows and eventually reaches zero.
pub fn coalescence(p: &CoalescenceParams, seed: u64) -> Result<ExperimentReport> {
    p.validate()?;
    let runs = replicate(p.runs, |i| coalescence_run(p.count, p.length, p.horizon, &mut stream(seed, i).rng()))?;
    let mut rep = report("coalescence", p, seed)?;
    rep.samples = SampleTable::new(&["run", "time", "red", "blue", "yellow"]);
    for (i, run) in runs.iter().enumerate() {
        for row in &run.series {
            rep.samples.rows.push(vec![i as f64, row.time, row.red as f64, row.blue as f64, row.yellow as f64]);
        }
    }
    let times: Vec<f64> = runs.iter().filter_map(|r| r.absorbed_at).collect();
    let initial_red: Vec<f64> = runs.iter().map(|r| r.series[0].red as f64).collect();
    rep.tests.push(TestRecord::scalar("median-absorption-time", times.len(), median(times.clone())));
    rep.tests.push(TestRecord::scalar("max-absorption-time", times.len(), times.iter().copied().fold(f64::NAN, f64::max)));
    rep.tests.push(TestRecord::scalar("mean-initial-red", runs.len(), initial_red.iter().sum::<f64>() / runs.len() as f64));
    rep.verdicts.push(Verdict::at_least("red-non-increasing-fraction", 1.0, fraction(runs.iter().map(|r| r.red_non_increasing()))));
    rep.verdicts.push(Verdict::at_least("absorbed-fraction", 1.0, fraction(runs.iter().map(|r| r.absorbed_at.is_some()))));
    Ok(rep)
}
