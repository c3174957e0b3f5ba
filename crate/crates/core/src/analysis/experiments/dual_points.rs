use serde::{Deserialize, Serialize};

use super::*;
use crate::analysis::stats::{chi_square_poisson, correlation_test};
use crate::dynamics::evolve;
use crate::model::PointField;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DualPointsParams {
    pub count: usize,
    pub length: f64,
    pub horizon: f64,
    /// Boxes per axis of the space-time grid.
    pub grid: usize,
    pub replicas: usize,
    pub significance: f64,
    pub required_pass_rate: f64,
    /// Bound on `|r| √(n - 1)` for the independence check.
    pub max_sigma: f64,
}

impl Default for DualPointsParams {
    fn default() -> Self {
        Self {
            count: 50,
            length: 100.0,
            horizon: 50.0,
            grid: 10,
            replicas: 100,
            significance: 0.01,
            required_pass_rate: 0.95,
            max_sigma: 3.0,
        }
    }
}

impl DualPointsParams {
    pub fn validate(&self) -> Result<()> {
        check_count("count", self.count)?;
        check_positive("length", self.length)?;
        check_positive("horizon", self.horizon)?;
        check_count("grid", self.grid)?;
        if self.replicas < 3 {
            return Err(invalid("replicas must be at least 3"));
        }
        check_level(self.significance)
    }
}

struct Replica {
    boxes: Vec<usize>,
    early_duals: f64,
    final_particles: f64,
}

/// The dual points of a stationary single line are a rate-1 Poisson field,
/// and the final state is independent of them.
pub fn dual_points(p: &DualPointsParams, seed: u64) -> Result<ExperimentReport> {
    p.validate()?;
    let g = Geometry::cycle(p.length)?;
    let (dx, dt) = (p.length / p.grid as f64, p.horizon / p.grid as f64);
    let replicas = replicate(p.replicas, |i| {
        let mut rng = stream(seed, i).rng();
        let eta = Configuration::sample_count(g, p.count, &mut rng);
        let omega = PointField::sample(g, p.horizon, &mut rng)?;
        let tr = evolve(&eta, &omega, &[p.horizon])?;
        let mut boxes = vec![0usize; p.grid * p.grid];
        for q in tr.duals[0].points() {
            let bx = ((q.x / dx) as usize).min(p.grid - 1);
            let bt = ((q.t / dt) as usize).min(p.grid - 1);
            boxes[bt * p.grid + bx] += 1;
        }
        let half = p.length / 2.0;
        Ok(Replica {
            boxes,
            early_duals: tr.duals[0].count_in_box(0.0, half, 0.0, p.horizon / 2.0) as f64,
            final_particles: tr.final_state.count_in(0.0, half) as f64,
        })
    })?;
    let mut rep = report("dual-points", p, seed)?;
    rep.samples = SampleTable::new(&["replica", "early_duals", "final_particles"]);
    let mut passes = Vec::with_capacity(replicas.len());
    for (i, r) in replicas.iter().enumerate() {
        let o = chi_square_poisson(&r.boxes, dx * dt)?;
        passes.push(o.p > p.significance);
        rep.tests.push(TestRecord::from_outcome(format!("replica-{i}/box-counts-chi-square"), o));
        rep.samples.rows.push(vec![i as f64, r.early_duals, r.final_particles]);
    }
    let xs: Vec<f64> = replicas.iter().map(|r| r.early_duals).collect();
    let ys: Vec<f64> = replicas.iter().map(|r| r.final_particles).collect();
    let corr = correlation_test(&xs, &ys)?;
    rep.tests.push(TestRecord::from_outcome("duals-vs-final-state-correlation", corr));
    rep.verdicts.push(Verdict::at_least("box-counts-pass-rate", p.required_pass_rate, fraction(passes.into_iter())));
    rep.verdicts.push(Verdict::at_most("duals-vs-final-state-sigma", p.max_sigma, corr.statistic));
    Ok(rep)
}
