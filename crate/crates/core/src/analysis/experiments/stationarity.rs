use rand::Rng;
use serde::{Deserialize, Serialize};

use super::*;
use crate::analysis::stats::two_sample_test;
use crate::dynamics::run;
use crate::model::PointField;
use crate::queueing::{collapse_classes, expand_classes};

/// Shared setup: a two-class system on a cycle, sampled `samples` times per
/// meta-replica.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InvarianceParams {
    pub length: f64,
    /// Line counts `ℓ^1 < ℓ^2`.
    pub counts: Vec<usize>,
    pub horizon: f64,
    pub samples: usize,
    pub meta_replicas: usize,
    pub significance: f64,
    pub required_pass_rate: f64,
}

impl Default for InvarianceParams {
    fn default() -> Self {
        Self {
            length: 100.0,
            counts: vec![30, 60],
            horizon: 20.0,
            samples: 2000,
            meta_replicas: 100,
            significance: 0.01,
            required_pass_rate: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceParams {
    pub length: f64,
    pub counts: Vec<usize>,
    pub horizon: f64,
    pub samples: usize,
    pub meta_replicas: usize,
    pub significance: f64,
    /// Required fraction of meta-replicas rejecting at time 0.
    pub required_reject_rate: f64,
    /// Required fraction of meta-replicas passing at the horizon.
    pub required_pass_rate: f64,
}

impl Default for ConvergenceParams {
    fn default() -> Self {
        Self {
            length: 100.0,
            counts: vec![30, 60],
            horizon: 50.0,
            samples: 2000,
            meta_replicas: 100,
            significance: 0.01,
            required_reject_rate: 0.95,
            required_pass_rate: 0.90,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MulticlassBurkeParams {
    pub length: f64,
    /// Line counts of the larger system; the smaller one drops the last.
    pub counts: Vec<usize>,
    pub samples: usize,
    pub meta_replicas: usize,
    pub significance: f64,
    pub required_pass_rate: f64,
}

impl Default for MulticlassBurkeParams {
    fn default() -> Self {
        Self { length: 100.0, counts: vec![20, 40, 60], samples: 2000, meta_replicas: 100, significance: 0.01, required_pass_rate: 0.95 }
    }
}

fn validate_common(length: f64, counts: &[usize], samples: usize, metas: usize, significance: f64) -> Result<()> {
    check_positive("length", length)?;
    check_increasing_counts(counts)?;
    if counts.len() < 2 {
        return Err(invalid("need at least two lines"));
    }
    if samples < crate::analysis::stats::MIN_SAMPLES {
        return Err(invalid(format!("samples must be at least {}", crate::analysis::stats::MIN_SAMPLES)));
    }
    check_count("meta_replicas", metas)?;
    check_level(significance)
}

/// Independent uniform classes with the class sizes of `Mα`.
fn sample_uniform_classes<R: Rng + ?Sized>(g: Geometry, counts: &[usize], rng: &mut R) -> Result<MulticlassConfig> {
    let mut prev = 0;
    let mut classes = Vec::with_capacity(counts.len());
    for &c in counts {
        classes.push(Configuration::sample_count(g, c - prev, rng));
        prev = c;
    }
    MulticlassConfig::new(classes)
}

fn evolve_classes<R: Rng + ?Sized>(xi: &MulticlassConfig, horizon: f64, rng: &mut R) -> Result<MulticlassConfig> {
    let mut eta = expand_classes(xi)?;
    let omega = PointField::sample(*xi.geometry(), horizon, rng)?;
    run(&mut eta, &omega)?;
    collapse_classes(&eta)
}

/// Ensures a class-2 particle exists so the statistic is defined.
fn checked_counts(counts: &[usize]) -> Result<()> {
    if counts[1] <= counts[0] {
        return Err(invalid("class 2 must be nonempty"));
    }
    Ok(())
}

/// The law `Mν` is preserved by the multiclass dynamics.
pub fn invariance(p: &InvarianceParams, seed: u64) -> Result<ExperimentReport> {
    validate_common(p.length, &p.counts, p.samples, p.meta_replicas, p.significance)?;
    checked_counts(&p.counts)?;
    check_positive("horizon", p.horizon)?;
    let g = Geometry::cycle(p.length)?;
    let outcomes = replicate(p.meta_replicas, |j| {
        let base = stream(seed, j);
        let mut fresh = Vec::with_capacity(p.samples);
        let mut evolved = Vec::with_capacity(p.samples);
        for i in 0..p.samples as u64 {
            let mut rng = base.child(2 * i).rng();
            fresh.push(class_two_gaps(&sample_invariant(g, &p.counts, &mut rng)?, 2, &mut rng)?.0);
            let mut rng = base.child(2 * i + 1).rng();
            let xi = evolve_classes(&sample_invariant(g, &p.counts, &mut rng)?, p.horizon, &mut rng)?;
            evolved.push(class_two_gaps(&xi, 2, &mut rng)?.0);
        }
        two_sample_test(&fresh, &evolved)
    })?;
    let mut rep = report("invariance", p, seed)?;
    rep.samples = SampleTable::new(&["meta_replica", "statistic", "p"]);
    for (j, o) in outcomes.iter().enumerate() {
        rep.tests.push(TestRecord::from_outcome(format!("meta-{j}/fresh-vs-evolved-ks"), *o));
        rep.samples.rows.push(vec![j as f64, o.statistic, o.p]);
    }
    let rate = fraction(outcomes.iter().map(|o| o.p > p.significance));
    rep.verdicts.push(Verdict::at_least("fresh-vs-evolved-pass-rate", p.required_pass_rate, rate));
    Ok(rep)
}

struct ConvergenceMeta {
    start: TestOutcome,
    end: TestOutcome,
    start_backward: TestOutcome,
}

/// Independent uniform classes evolve towards `Mν`.
///
/// The verdicts use the forward gap from a class-2 particle. The backward
/// gap is reported alongside as a diagnostic.
pub fn convergence(p: &ConvergenceParams, seed: u64) -> Result<ExperimentReport> {
    validate_common(p.length, &p.counts, p.samples, p.meta_replicas, p.significance)?;
    checked_counts(&p.counts)?;
    check_positive("horizon", p.horizon)?;
    let g = Geometry::cycle(p.length)?;
    let metas = replicate(p.meta_replicas, |j| {
        let base = stream(seed, j);
        let (mut fresh, mut fresh_back) = (Vec::new(), Vec::new());
        let (mut start, mut start_back, mut end) = (Vec::new(), Vec::new(), Vec::new());
        for i in 0..p.samples as u64 {
            let mut rng = base.child(2 * i).rng();
            let (fwd, back) = class_two_gaps(&sample_invariant(g, &p.counts, &mut rng)?, 2, &mut rng)?;
            fresh.push(fwd);
            fresh_back.push(back);
            let mut rng = base.child(2 * i + 1).rng();
            let xi = sample_uniform_classes(g, &p.counts, &mut rng)?;
            let (fwd, back) = class_two_gaps(&xi, 2, &mut rng)?;
            start.push(fwd);
            start_back.push(back);
            end.push(class_two_gaps(&evolve_classes(&xi, p.horizon, &mut rng)?, 2, &mut rng)?.0);
        }
        Ok(ConvergenceMeta {
            start: two_sample_test(&fresh, &start)?,
            end: two_sample_test(&fresh, &end)?,
            start_backward: two_sample_test(&fresh_back, &start_back)?,
        })
    })?;
    let mut rep = report("convergence", p, seed)?;
    rep.samples = SampleTable::new(&["meta_replica", "p_start", "p_end", "p_start_backward"]);
    for (j, m) in metas.iter().enumerate() {
        rep.tests.push(TestRecord::from_outcome(format!("meta-{j}/start-ks"), m.start));
        rep.tests.push(TestRecord::from_outcome(format!("meta-{j}/horizon-ks"), m.end));
        rep.tests.push(TestRecord::from_outcome(format!("meta-{j}/start-backward-gap-ks"), m.start_backward));
        rep.samples.rows.push(vec![j as f64, m.start.p, m.end.p, m.start_backward.p]);
    }
    let backward = fraction(metas.iter().map(|m| m.start_backward.p < p.significance));
    rep.tests.push(TestRecord::scalar("start-backward-gap-reject-rate", metas.len(), backward));
    let reject = fraction(metas.iter().map(|m| m.start.p < p.significance));
    let pass = fraction(metas.iter().map(|m| m.end.p > p.significance));
    rep.verdicts.push(Verdict::at_least("start-reject-rate", p.required_reject_rate, reject));
    rep.verdicts.push(Verdict::at_least("horizon-pass-rate", p.required_pass_rate, pass));
    Ok(rep)
}

/// The first `n - 1` classes of the `n`-class invariant law do not depend
/// on the last line.
pub fn multiclass_burke(p: &MulticlassBurkeParams, seed: u64) -> Result<ExperimentReport> {
    validate_common(p.length, &p.counts, p.samples, p.meta_replicas, p.significance)?;
    if p.counts.len() < 3 {
        return Err(invalid("need at least three lines"));
    }
    let g = Geometry::cycle(p.length)?;
    let short = &p.counts[..p.counts.len() - 1];
    let outcomes = replicate(p.meta_replicas, |j| {
        let base = stream(seed, j);
        let mut long_gaps = Vec::with_capacity(p.samples);
        let mut short_gaps = Vec::with_capacity(p.samples);
        for i in 0..p.samples as u64 {
            let mut rng = base.child(2 * i).rng();
            long_gaps.push(class_two_gaps(&sample_invariant(g, &p.counts, &mut rng)?, 2, &mut rng)?.0);
            let mut rng = base.child(2 * i + 1).rng();
            short_gaps.push(class_two_gaps(&sample_invariant(g, short, &mut rng)?, 2, &mut rng)?.0);
        }
        two_sample_test(&long_gaps, &short_gaps)
    })?;
    let mut rep = report("multiclass-burke", p, seed)?;
    rep.samples = SampleTable::new(&["meta_replica", "statistic", "p"]);
    for (j, o) in outcomes.iter().enumerate() {
        rep.tests.push(TestRecord::from_outcome(format!("meta-{j}/n-vs-n-minus-one-ks"), *o));
        rep.samples.rows.push(vec![j as f64, o.statistic, o.p]);
    }
    let rate = fraction(outcomes.iter().map(|o| o.p > p.significance));
    rep.verdicts.push(Verdict::at_least("first-classes-pass-rate", p.required_pass_rate, rate));
    Ok(rep)
}
