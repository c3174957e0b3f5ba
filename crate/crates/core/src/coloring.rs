//! Labelled two-copy coupling used to watch discrepancies coalesce.
//!
//! Yellow particles sit in both copies, blue ones only in `η`, red ones only
//! in `η̃`. Labels are fixed at time zero by position order and then carried
//! by the jump rules.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{uniform_in, Configuration, Geometry, PointField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Yellow,
    Blue,
    Red,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Labelled {
    pub position: f64,
    pub label: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Eta,
    Tilde,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColoredPair {
    geometry: Geometry,
    eta: Vec<Labelled>,
    tilde: Vec<Labelled>,
    eta_yellow_since: Vec<Option<f64>>,
    tilde_yellow_since: Vec<Option<f64>>,
}

fn labelled(config: &Configuration) -> Vec<Labelled> {
    config.positions().iter().enumerate().map(|(label, &position)| Labelled { position, label }).collect()
}

fn contains(side: &[Labelled], x: f64) -> Option<usize> {
    side.binary_search_by(|p| p.position.total_cmp(&x)).ok()
}

/// Index of the nearest particle left of `x`, wrapping on a cycle.
fn nearest_left(side: &[Labelled], x: f64, cycle: bool) -> Result<Option<usize>> {
    if side.is_empty() {
        return Err(Error::EmptyConfiguration);
    }
    let idx = side.partition_point(|p| p.position < x);
    if idx < side.len() && side[idx].position == x {
        return Err(Error::PositionCollision(x));
    }
    Ok(match idx {
        0 if cycle => Some(side.len() - 1),
        0 => None,
        _ => Some(idx - 1),
    })
}

/// Orders positions by closeness from the left of `x`: smaller is closer.
fn closeness(p: f64, x: f64) -> (u8, f64) {
    (u8::from(p >= x), -p)
}

fn is_closer(p: f64, q: f64, x: f64) -> bool {
    let (a, b) = (closeness(p, x), closeness(q, x));
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Moves the particle at `idx` to `x`, keeping the vector sorted.
fn relocate(side: &mut Vec<Labelled>, idx: usize, x: f64) {
    let label = side[idx].label;
    let fits_left = idx == 0 || side[idx - 1].position < x;
    let fits_right = idx + 1 == side.len() || x < side[idx + 1].position;
    if fits_left && fits_right {
        side[idx].position = x;
    } else {
        side.remove(idx);
        let at = side.partition_point(|p| p.position < x);
        side.insert(at, Labelled { position: x, label });
    }
}

impl ColoredPair {
    /// Labels both copies by position order. Requires equal, nonzero counts.
    pub fn new(eta: &Configuration, tilde: &Configuration) -> Result<Self> {
        if eta.geometry() != tilde.geometry() {
            return Err(Error::GeometryMismatch);
        }
        if eta.len() != tilde.len() {
            return Err(Error::InvalidParameters(format!(
                "copies must have equal counts, got {} and {}",
                eta.len(),
                tilde.len()
            )));
        }
        if eta.is_empty() {
            return Err(Error::EmptyConfiguration);
        }
        let mut pair = Self {
            geometry: *eta.geometry(),
            eta: labelled(eta),
            tilde: labelled(tilde),
            eta_yellow_since: vec![None; eta.len()],
            tilde_yellow_since: vec![None; tilde.len()],
        };
        pair.mark_yellow(0.0);
        Ok(pair)
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn eta(&self) -> &[Labelled] {
        &self.eta
    }

    pub fn tilde(&self) -> &[Labelled] {
        &self.tilde
    }

    pub fn eta_config(&self) -> Configuration {
        Configuration::from_sorted_unchecked(self.geometry, self.eta.iter().map(|p| p.position).collect())
    }

    pub fn tilde_config(&self) -> Configuration {
        Configuration::from_sorted_unchecked(self.geometry, self.tilde.iter().map(|p| p.position).collect())
    }

    pub fn eta_color(&self, idx: usize) -> Color {
        if contains(&self.tilde, self.eta[idx].position).is_some() {
            Color::Yellow
        } else {
            Color::Blue
        }
    }

    pub fn tilde_color(&self, idx: usize) -> Color {
        if contains(&self.eta, self.tilde[idx].position).is_some() {
            Color::Yellow
        } else {
            Color::Red
        }
    }

    /// `(red, blue, yellow)` counts.
    pub fn counts(&self) -> (usize, usize, usize) {
        let yellow = self.eta.iter().filter(|p| contains(&self.tilde, p.position).is_some()).count();
        (self.tilde.len() - yellow, self.eta.len() - yellow, yellow)
    }

    /// First time each `η` label was yellow.
    pub fn eta_yellow_since(&self) -> &[Option<f64>] {
        &self.eta_yellow_since
    }

    /// First time each `η̃` label was yellow.
    pub fn tilde_yellow_since(&self) -> &[Option<f64>] {
        &self.tilde_yellow_since
    }

    fn mark_yellow(&mut self, t: f64) {
        for p in &self.eta {
            if self.eta_yellow_since[p.label].is_none() && contains(&self.tilde, p.position).is_some() {
                self.eta_yellow_since[p.label] = Some(t);
            }
        }
        for p in &self.tilde {
            if self.tilde_yellow_since[p.label].is_none() && contains(&self.eta, p.position).is_some() {
                self.tilde_yellow_since[p.label] = Some(t);
            }
        }
    }

    fn sides(&mut self, lead: Side) -> (&mut Vec<Labelled>, &mut Vec<Labelled>) {
        match lead {
            Side::Eta => (&mut self.eta, &mut self.tilde),
            Side::Tilde => (&mut self.tilde, &mut self.eta),
        }
    }

    /// Applies a point at `x` at time `t`.
    pub fn step(&mut self, x: f64, t: f64) -> Result<()> {
        self.geometry.check(x)?;
        let cycle = self.geometry.is_cycle();
        let u = nearest_left(&self.eta, x, cycle)?;
        let v = nearest_left(&self.tilde, x, cycle)?;
        match (u, v) {
            (None, None) => {}
            (Some(iu), None) => relocate(&mut self.eta, iu, x),
            (None, Some(iv)) => relocate(&mut self.tilde, iv, x),
            (Some(iu), Some(iv)) => {
                let (pu, pv) = (self.eta[iu].position, self.tilde[iv].position);
                if pu == pv {
                    // Rule 1: a yellow particle is nearest in both copies.
                    relocate(&mut self.eta, iu, x);
                    relocate(&mut self.tilde, iv, x);
                } else if is_closer(pu, pv, x) {
                    self.relay(Side::Eta, iu, iv, x);
                } else {
                    self.relay(Side::Tilde, iv, iu, x);
                }
            }
        }
        self.mark_yellow(t);
        Ok(())
    }

    /// Rules 2 and 3 with `lead` the copy whose nearest particle is closer
    /// to `x` (and therefore not yellow), and their mirrors.
    fn relay(&mut self, lead: Side, iu: usize, iv: usize, x: f64) {
        let (lead_side, other) = self.sides(lead);
        let pv = other[iv].position;
        // Chain x_1 > x_2 > ... > x_k of lead particles strictly between
        // the other copy's nearest particle and x, all of the lead color.
        let n = lead_side.len();
        let mut chain = vec![iu];
        let mut j = iu;
        loop {
            j = if j == 0 { n - 1 } else { j - 1 };
            if j == iu || !is_closer(lead_side[j].position, pv, x) {
                break;
            }
            chain.push(j);
        }
        debug_assert!(chain.iter().all(|&c| contains(other, lead_side[c].position).is_none()));
        let labels: Vec<usize> = chain.iter().map(|&c| lead_side[c].label).collect();
        let k = chain.len();
        for i in 1..k {
            lead_side[chain[i]].label = labels[i - 1];
        }
        match contains(lead_side, pv) {
            None => {
                // Rule 2: the other copy's nearest particle is uncovered;
                // it and the last label of the chain meet at x.
                lead_side[chain[0]].label = labels[k - 1];
            }
            Some(jv) => {
                // Rule 3: the yellow pair at the other copy's nearest
                // particle jumps to x, the last chain label fills its slot.
                lead_side[chain[0]].label = lead_side[jv].label;
                lead_side[jv].label = labels[k - 1];
            }
        }
        relocate(lead_side, chain[0], x);
        relocate(other, iv, x);
    }
}

/// One step of the colored coupling.
pub fn colored_step(state: &ColoredPair, x: f64, t: f64) -> Result<ColoredPair> {
    let mut next = state.clone();
    next.step(x, t)?;
    Ok(next)
}

/// One row of a coalescence series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ColorCounts {
    pub time: f64,
    pub red: usize,
    pub blue: usize,
    pub yellow: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoalescenceRun {
    /// Counts at time 0 and after every step that changed them.
    pub series: Vec<ColorCounts>,
    /// Time the red count reached zero, if it did by the horizon.
    pub absorbed_at: Option<f64>,
    pub eta_yellow_since: Vec<Option<f64>>,
    pub tilde_yellow_since: Vec<Option<f64>>,
}

impl CoalescenceRun {
    pub fn red_non_increasing(&self) -> bool {
        self.series.windows(2).all(|w| w[1].red <= w[0].red)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time", "red", "blue", "yellow"])?;
        for row in &self.series {
            w.serialize((row.time, row.red, row.blue, row.yellow))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn drive<F>(mut pair: ColoredPair, mut next_point: F) -> Result<CoalescenceRun>
where
    F: FnMut(&ColoredPair) -> Option<(f64, f64)>,
{
    let counts_at = |pair: &ColoredPair, time: f64| {
        let (red, blue, yellow) = pair.counts();
        ColorCounts { time, red, blue, yellow }
    };
    let mut series = vec![counts_at(&pair, 0.0)];
    let mut absorbed_at = (series[0].red == 0).then_some(0.0);
    while absorbed_at.is_none() {
        let Some((x, t)) = next_point(&pair) else { break };
        pair.step(x, t)?;
        let row = counts_at(&pair, t);
        let last = series.last().expect("nonempty");
        if (row.red, row.blue, row.yellow) != (last.red, last.blue, last.yellow) {
            series.push(row);
        }
        if row.red == 0 {
            absorbed_at = Some(t);
        }
    }
    Ok(CoalescenceRun {
        series,
        absorbed_at,
        eta_yellow_since: pair.eta_yellow_since,
        tilde_yellow_since: pair.tilde_yellow_since,
    })
}

/// Runs a colored pair through `omega` until the red count hits zero.
pub fn coalescence_from(pair: ColoredPair, omega: &PointField) -> Result<CoalescenceRun> {
    let mut points = omega.points().iter();
    drive(pair, |_| points.next().map(|p| (p.x, p.t)))
}

/// Two independent uniform `count`-particle configurations on a cycle of
/// length `length`, coupled through shared points up to `horizon`. Points
/// are drawn one at a time so absorbed runs stop early.
pub fn coalescence_run<R: Rng + ?Sized>(count: usize, length: f64, horizon: f64, rng: &mut R) -> Result<CoalescenceRun> {
    if count == 0 {
        return Err(Error::InvalidParameters("count must be at least 1".into()));
    }
    if !(horizon >= 0.0) {
        return Err(Error::NegativeHorizon(horizon));
    }
    let g = Geometry::cycle(length)?;
    let eta = Configuration::sample_count(g, count, rng);
    let tilde = Configuration::sample_count(g, count, rng);
    let pair = ColoredPair::new(&eta, &tilde)?;
    let wait = Exp::new(length).expect("positive length");
    let mut t = 0.0;
    drive(pair, |pair| loop {
        t += wait.sample(rng);
        if t > horizon {
            return None;
        }
        let x = uniform_in(&g, rng);
        if contains(&pair.eta, x).is_none() && contains(&pair.tilde, x).is_none() {
            return Some((x, t));
        }
    })
}
