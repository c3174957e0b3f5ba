use rand::Rng;
use serde::{Deserialize, Serialize};

use super::*;
use crate::analysis::palm::palm_recenter;
use crate::analysis::stats::{correlation_test, exponential_cdf, ks_one_sample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegenerationParams {
    pub length: f64,
    /// Line densities `ρ^1 < ρ^2` of the two-class system.
    pub rates: Vec<f64>,
    /// Gaps taken on each side of the recentred particle.
    pub gaps: usize,
    /// Width of the side windows used for counts.
    pub side: f64,
    pub replicas: usize,
    /// Class string `c_0, c_1, …, c_ℓ`, read left to right.
    pub string: Vec<usize>,
    pub string_rates: Vec<f64>,
    pub string_length: f64,
    pub string_samples: usize,
    /// Configurations tried per string sample before giving up.
    pub string_attempts: usize,
    pub significance: f64,
    pub required_pass_rate: f64,
    pub max_sigma: f64,
}

impl Default for RegenerationParams {
    fn default() -> Self {
        Self {
            length: 2000.0,
            rates: vec![0.3, 0.6],
            gaps: 50,
            side: 100.0,
            replicas: 100,
            string: vec![4, 1, 2, 3, 1, 2],
            string_rates: vec![0.2, 0.4, 0.6, 0.8],
            string_length: 2000.0,
            string_samples: 100,
            string_attempts: 1000,
            significance: 0.01,
            required_pass_rate: 0.95,
            max_sigma: 3.0,
        }
    }
}

fn counts_for(length: f64, rates: &[f64]) -> Result<Vec<usize>> {
    for &r in rates {
        check_positive("rate", r)?;
    }
    let counts: Vec<usize> = rates.iter().map(|r| (r * length).round() as usize).collect();
    check_increasing_counts(&counts)?;
    Ok(counts)
}

impl RegenerationParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("length", self.length)?;
        check_positive("side", self.side)?;
        if self.rates.len() != 2 {
            return Err(invalid("rates must hold exactly two densities"));
        }
        counts_for(self.length, &self.rates)?;
        if self.gaps < crate::analysis::stats::MIN_SAMPLES {
            return Err(invalid(format!("gaps must be at least {}", crate::analysis::stats::MIN_SAMPLES)));
        }
        if self.replicas < 3 || self.string_samples < 3 {
            return Err(invalid("replicas and string_samples must be at least 3"));
        }
        let n = self.string_rates.len();
        counts_for(self.string_length, &self.string_rates)?;
        if self.string.len() < 2 || self.string.iter().any(|&c| c == 0 || c > n) {
            return Err(invalid(format!("string classes must lie in 1..={n}")));
        }
        check_count("string_attempts", self.string_attempts)?;
        check_level(self.significance)
    }
}

/// First `k` gaps walking left from 0 through `ps` (sorted, on a cycle of
/// length `n`), starting with the gap from 0 itself.
fn gaps_leftward(ps: &[f64], n: f64, k: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k);
    let mut from = n;
    for &p in ps.iter().rev().take(k) {
        out.push(from - p);
        from = p;
    }
    out
}

/// First `k` gaps walking right from 0 through `ps`, skipping 0 itself.
fn gaps_rightward(ps: &[f64], k: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k);
    let mut from = 0.0;
    for &p in ps.iter().filter(|&&p| p > 0.0).take(k) {
        out.push(p - from);
        from = p;
    }
    out
}

struct PalmReplica {
    left: TestOutcome,
    right: TestOutcome,
    left_count: f64,
    right_count: f64,
}

struct StringSample {
    left_first: f64,
    right_first: f64,
    left_all: f64,
    right_all: f64,
}

/// Indices `s` such that the classes at `s, s+1, …` (cyclically) spell
/// `string`.
fn string_matches(labelled: &[(f64, usize)], string: &[usize]) -> Vec<usize> {
    let n = labelled.len();
    if n < string.len() {
        return Vec::new();
    }
    (0..n).filter(|&s| string.iter().enumerate().all(|(j, &c)| labelled[(s + j) % n].1 == c)).collect()
}

/// Particles (optionally of one class) at distance in `(0, width)` from
/// `anchor`, to its left or to its right.
fn count_near(g: &Geometry, labelled: &[(f64, usize)], anchor: f64, width: f64, leftward: bool, class: Option<usize>) -> f64 {
    labelled
        .iter()
        .filter(|(_, c)| class.is_none_or(|k| *c == k))
        .filter(|(p, _)| {
            let d = if leftward { g.forward_distance(*p, anchor) } else { g.forward_distance(anchor, *p) };
            d > 0.0 && d < width
        })
        .count() as f64
}

fn string_sample(p: &RegenerationParams, seed: u64, i: u64) -> Result<StringSample> {
    let g = Geometry::cycle(p.string_length)?;
    let counts = counts_for(p.string_length, &p.string_rates)?;
    let base = stream(seed, i).child(1);
    for attempt in 0..p.string_attempts as u64 {
        let mut rng = base.child(attempt).rng();
        let xi = sample_invariant(g, &counts, &mut rng)?;
        let labelled = xi.labelled();
        let matches = string_matches(&labelled, &p.string);
        if matches.is_empty() {
            continue;
        }
        let s = matches[rng.random_range(0..matches.len())];
        let x0 = labelled[s].0;
        let xl = labelled[(s + p.string.len() - 1) % labelled.len()].0;
        let near = |anchor, leftward, class| count_near(&g, &labelled, anchor, p.side, leftward, class);
        return Ok(StringSample {
            left_first: near(x0, true, Some(1)),
            right_first: near(xl, false, Some(1)),
            left_all: near(x0, true, None),
            right_all: near(xl, false, None),
        });
    }
    Err(invalid(format!("string {:?} not found in {} configurations", p.string, p.string_attempts)))
}

/// Seen from a class-2 particle, first class particles to the left and all
/// particles to the right are independent Poisson processes; the same
/// independence holds across a regeneration string.
pub fn regeneration(p: &RegenerationParams, seed: u64) -> Result<ExperimentReport> {
    p.validate()?;
    let g = Geometry::cycle(p.length)?;
    let counts = counts_for(p.length, &p.rates)?;
    let replicas = replicate(p.replicas, |i| {
        let mut rng = stream(seed, i).child(0).rng();
        let xi = palm_recenter(&sample_invariant(g, &counts, &mut rng)?, 2, &mut rng)?;
        let first = xi.classes()[0].positions();
        let merged = xi.classes()[0].union(&xi.classes()[1])?;
        let left = ks_one_sample(&gaps_leftward(first, p.length, p.gaps), exponential_cdf(p.rates[0]))?;
        let right = ks_one_sample(&gaps_rightward(merged.positions(), p.gaps), exponential_cdf(p.rates[1]))?;
        Ok(PalmReplica {
            left,
            right,
            left_count: xi.classes()[0].count_in(p.length - p.side, p.length) as f64,
            right_count: merged.positions().iter().filter(|&&x| x > 0.0 && x < p.side).count() as f64,
        })
    })?;
    let strings = replicate(p.string_samples, |i| string_sample(p, seed, i))?;

    let mut rep = report("regeneration", p, seed)?;
    rep.samples = SampleTable::new(&["replica", "p_left", "p_right", "left_count", "right_count"]);
    for (i, r) in replicas.iter().enumerate() {
        rep.tests.push(TestRecord::from_outcome(format!("replica-{i}/left-first-class-gaps-ks"), r.left));
        rep.tests.push(TestRecord::from_outcome(format!("replica-{i}/right-merged-gaps-ks"), r.right));
        rep.samples.rows.push(vec![i as f64, r.left.p, r.right.p, r.left_count, r.right_count]);
    }
    let lc: Vec<f64> = replicas.iter().map(|r| r.left_count).collect();
    let rc: Vec<f64> = replicas.iter().map(|r| r.right_count).collect();
    let corr = correlation_test(&lc, &rc)?;
    rep.tests.push(TestRecord::from_outcome("left-right-count-correlation", corr));

    let col = |f: fn(&StringSample) -> f64| strings.iter().map(f).collect::<Vec<f64>>();
    let string_first = correlation_test(&col(|s| s.left_first), &col(|s| s.right_first))?;
    let string_all = correlation_test(&col(|s| s.left_all), &col(|s| s.right_all))?;
    rep.tests.push(TestRecord::from_outcome("string-first-class-count-correlation", string_first));
    rep.tests.push(TestRecord::from_outcome("string-all-count-correlation", string_all));

    let left_rate = fraction(replicas.iter().map(|r| r.left.p > p.significance));
    let right_rate = fraction(replicas.iter().map(|r| r.right.p > p.significance));
    rep.verdicts.push(Verdict::at_least("left-first-class-gaps-pass-rate", p.required_pass_rate, left_rate));
    rep.verdicts.push(Verdict::at_least("right-merged-gaps-pass-rate", p.required_pass_rate, right_rate));
    rep.verdicts.push(Verdict::at_most("left-right-count-sigma", p.max_sigma, corr.statistic));
    rep.verdicts.push(Verdict::at_most("string-count-sigma", p.max_sigma, string_first.statistic));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn side_gaps() {
        assert_eq!(gaps_leftward(&[1.0, 5.0, 8.0], 10.0, 2), vec![2.0, 3.0]);
        assert_eq!(gaps_rightward(&[0.0, 1.0, 5.0, 8.0], 5), vec![1.0, 4.0, 3.0]);
    }

    #[test]
    fn string_search_wraps() {
        let l = vec![(0.5, 2), (1.0, 4), (2.0, 1), (3.0, 1)];
        assert_eq!(string_matches(&l, &[1, 2]), vec![3]);
        assert_eq!(string_matches(&l, &[4, 1, 1]), vec![1]);
    }
}
