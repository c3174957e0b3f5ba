use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Configuration, Geometry};
use crate::queueing::MulticlassConfig;

/// Rotates a cycle configuration so that a uniformly chosen particle of
/// class `class` (1-based) sits at 0.
pub fn palm_recenter<R: Rng + ?Sized>(xi: &MulticlassConfig, class: usize, rng: &mut R) -> Result<MulticlassConfig> {
    let g = *xi.geometry();
    if !g.is_cycle() {
        return Err(Error::InvalidGeometry("Palm recentering by rotation needs a cycle".into()));
    }
    let chosen = pick(xi, class, f64::NEG_INFINITY, f64::INFINITY, rng)?;
    let n = g.length();
    let below_n = f64::from_bits(n.to_bits() - 1);
    let rotate = |p: f64| {
        if p >= chosen {
            p - chosen
        } else {
            (p - chosen + n).min(below_n)
        }
    };
    let classes = xi
        .classes()
        .iter()
        .map(|c| Configuration::from_unsorted(g, c.positions().iter().map(|&p| rotate(p)).collect()))
        .collect::<Result<Vec<_>>>()?;
    MulticlassConfig::new(classes)
}

/// Picks a uniformly random class-`class` particle in `[lo, hi)`.
fn pick<R: Rng + ?Sized>(xi: &MulticlassConfig, class: usize, lo: f64, hi: f64, rng: &mut R) -> Result<f64> {
    let c = class
        .checked_sub(1)
        .and_then(|k| xi.classes().get(k))
        .ok_or_else(|| Error::InvalidParameters(format!("no class {class}")))?;
    let ps = c.positions();
    let (a, b) = (ps.partition_point(|&p| p < lo), ps.partition_point(|&p| p < hi));
    if a == b {
        return Err(Error::EmptyClass(class));
    }
    Ok(ps[rng.random_range(a..b)])
}

/// Picks a uniformly random class-`class` particle in `[lo, hi)`, moves it
/// to 0 and keeps the particles within `[-left, right)` of it.
pub fn palm_window<R: Rng + ?Sized>(
    xi: &MulticlassConfig,
    class: usize,
    (lo, hi): (f64, f64),
    (left, right): (f64, f64),
    rng: &mut R,
) -> Result<MulticlassConfig> {
    let chosen = pick(xi, class, lo, hi, rng)?;
    let g = Geometry::window(-left, right)?;
    let classes = xi
        .classes()
        .iter()
        .map(|c| {
            let ps = c.positions().iter().map(|&p| p - chosen).filter(|&p| g.contains(p)).collect();
            Configuration::from_unsorted(g, ps)
        })
        .collect::<Result<Vec<_>>>()?;
    MulticlassConfig::new(classes)
}

/// How a two-class configuration with a second class particle at the
/// origin is turned into the pair of shock configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShockReading {
    /// All particles left of the origin, first class particles right of it.
    #[default]
    AllLeftFirstRight,
    /// First class particles left of the origin together with every second
    /// class particle except the one at the origin.
    FirstLeftSecondAll,
}

/// Returns `(η, η ∪ {0})`.
pub fn shock_construct(xi: &MulticlassConfig, reading: ShockReading) -> Result<(Configuration, Configuration)> {
    let [first, second] = xi.classes() else {
        return Err(Error::InvalidParameters("shock construction needs exactly two classes".into()));
    };
    if !second.contains(0.0) {
        return Err(Error::NoOriginParticle);
    }
    let g = *xi.geometry();
    let left = |c: &Configuration| Configuration::from_sorted_unchecked(g, c.positions().iter().copied().filter(|&p| p < 0.0).collect());
    let mut eta = match reading {
        ShockReading::AllLeftFirstRight => left(second).union(first)?,
        ShockReading::FirstLeftSecondAll => left(first).union(second)?,
    };
    eta.remove(0.0);
    let mut with_origin = eta.clone();
    with_origin.insert(0.0)?;
    Ok((eta, with_origin))
}
