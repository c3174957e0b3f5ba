use serde::{Deserialize, Serialize};

use super::*;
use crate::analysis::palm::{palm_window, shock_construct, ShockReading};
use crate::dynamics::run;
use crate::model::PointField;
use crate::queueing::CoupledConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShockParams {
    /// Density left of the discrepancy.
    pub lambda: f64,
    /// Density right of the discrepancy.
    pub rho: f64,
    /// Extent of the simulation window left and right of the origin.
    pub left: f64,
    pub right: f64,
    /// Length sampled before the window so the queue forgets its empty
    /// start.
    pub warmup: f64,
    /// The recentred particle is chosen within this distance of the window
    /// position that becomes the origin.
    pub palm_halfwidth: f64,
    pub horizon: f64,
    /// Width of the density windows on each side of the discrepancy.
    pub width: f64,
    pub replicas: usize,
    pub tolerance: f64,
    pub reading: ShockReading,
}

impl Default for ShockParams {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            rho: 0.5,
            left: 150.0,
            right: 100.0,
            warmup: 1000.0,
            palm_halfwidth: 25.0,
            horizon: 20.0,
            width: 30.0,
            replicas: 200,
            tolerance: 0.1,
            reading: ShockReading::AllLeftFirstRight,
        }
    }
}

impl ShockParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("lambda", self.lambda)?;
        check_positive("rho", self.rho)?;
        if self.lambda <= self.rho {
            return Err(invalid(format!("a shock needs lambda > rho, got {} <= {}", self.lambda, self.rho)));
        }
        for (name, v) in [("left", self.left), ("right", self.right), ("palm_halfwidth", self.palm_halfwidth), ("width", self.width)] {
            check_positive(name, v)?;
        }
        if !(self.warmup >= 0.0) {
            return Err(invalid("warmup must be nonnegative"));
        }
        if !(self.horizon >= 0.0) {
            return Err(Error::NegativeHorizon(self.horizon));
        }
        check_count("replicas", self.replicas)?;
        check_positive("tolerance", self.tolerance)
    }
}

const MAX_PALM_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy)]
struct ShockRun {
    position: f64,
    left_density: f64,
    right_density: f64,
}

fn track(eta: Configuration, with_origin: Configuration, omega: &PointField, width: f64) -> Result<ShockRun> {
    let mut pair = CoupledConfig::new(vec![eta, with_origin])?;
    run(&mut pair, omega)?;
    let extra = pair.lines()[1].difference(&pair.lines()[0]);
    let [x] = extra.positions() else {
        return Err(invalid(format!("expected one discrepancy, found {}", extra.len())));
    };
    let x = *x;
    let eta = &pair.lines()[0];
    let left = eta.count_in(x - width, x) as f64;
    let right = eta.positions().iter().filter(|&&p| p > x && p <= x + width).count() as f64;
    Ok(ShockRun { position: x, left_density: left / width, right_density: right / width })
}

fn other(reading: ShockReading) -> ShockReading {
    match reading {
        ShockReading::AllLeftFirstRight => ShockReading::FirstLeftSecondAll,
        ShockReading::FirstLeftSecondAll => ShockReading::AllLeftFirstRight,
    }
}

/// A single discrepancy between densities `lambda` (left) and `rho`
/// (right) travels as a microscopic shock.
pub fn shock(p: &ShockParams, seed: u64) -> Result<ExperimentReport> {
    p.validate()?;
    let total = p.warmup + p.left + 2.0 * p.palm_halfwidth + p.right;
    let sample_geometry = Geometry::interval(total)?;
    let centre = p.warmup + p.left + p.palm_halfwidth;
    let window = Geometry::window(-p.left, p.right)?;
    let runs = replicate(p.replicas, |i| {
        let mut rng = stream(seed, i).rng();
        // A long busy period can leave the selection window without class 2
        // particles; such draws are discarded.
        let mut attempt = 0;
        let xi = loop {
            let first = Configuration::sample_poisson(sample_geometry, p.rho, &mut rng)?;
            let merged = Configuration::sample_poisson(sample_geometry, p.lambda, &mut rng)?;
            let xi = map_multiclass(&MultiLineConfig::new(vec![first, merged])?)?;
            match palm_window(&xi, 2, (centre - p.palm_halfwidth, centre + p.palm_halfwidth), (p.left, p.right), &mut rng) {
                Err(Error::EmptyClass(_)) if attempt + 1 < MAX_PALM_ATTEMPTS => attempt += 1,
                other => break other?,
            }
        };
        let omega = PointField::sample(window, p.horizon, &mut rng)?;
        let mut out = [None, None];
        for (slot, reading) in [p.reading, other(p.reading)].into_iter().enumerate() {
            let (eta, with_origin) = shock_construct(&xi, reading)?;
            out[slot] = Some(track(eta, with_origin, &omega, p.width)?);
        }
        Ok(out.map(|r| r.expect("both readings run")))
    })?;

    let mut rep = report("shock", p, seed)?;
    rep.samples = SampleTable::new(&["replica", "reading", "position", "left_density", "right_density"]);
    let n = runs.len();
    let mut summaries = Vec::new();
    for (slot, reading) in [p.reading, other(p.reading)].into_iter().enumerate() {
        let tag = match reading {
            ShockReading::AllLeftFirstRight => "all-left-first-right",
            ShockReading::FirstLeftSecondAll => "first-left-second-all",
        };
        let mean = |f: fn(&ShockRun) -> f64| runs.iter().map(|r| f(&r[slot])).sum::<f64>() / n as f64;
        let (left, right, x) = (mean(|r| r.left_density), mean(|r| r.right_density), mean(|r| r.position));
        rep.tests.push(TestRecord::scalar(format!("{tag}/mean-left-density"), n, left));
        rep.tests.push(TestRecord::scalar(format!("{tag}/mean-right-density"), n, right));
        rep.tests.push(TestRecord::scalar(format!("{tag}/mean-discrepancy-position"), n, x));
        if p.horizon > 0.0 {
            rep.tests.push(TestRecord::scalar(format!("{tag}/mean-velocity"), n, x / p.horizon));
        }
        for (i, r) in runs.iter().enumerate() {
            let r = r[slot];
            rep.samples.rows.push(vec![i as f64, slot as f64, r.position, r.left_density, r.right_density]);
        }
        summaries.push((left, right));
    }
    let (left, right) = summaries[0];
    rep.tests.push(TestRecord::scalar("predicted-velocity", n, -1.0 / (p.lambda * p.rho)));
    rep.verdicts.push(Verdict::at_most("left-density-relative-error", p.tolerance, (left / p.lambda - 1.0).abs()));
    rep.verdicts.push(Verdict::at_most("right-density-relative-error", p.tolerance, (right / p.rho - 1.0).abs()));
    Ok(rep)
}
