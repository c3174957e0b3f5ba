use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::geometry::Geometry;
use crate::error::{Error, Result};

/// A finite set of particle positions on a [`Geometry`], kept strictly
/// increasing.
///
/// Positions are never produced by arithmetic inside the dynamics: a jump
/// copies the destination verbatim from a point field, so two pipelines that
/// should agree can be compared with `==`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    geometry: Geometry,
    positions: Vec<f64>,
}

impl Configuration {
    pub fn empty(geometry: Geometry) -> Self {
        Self { geometry, positions: Vec::new() }
    }

    /// Builds a configuration from strictly increasing positions.
    pub fn new(geometry: Geometry, positions: Vec<f64>) -> Result<Self> {
        for (i, &p) in positions.iter().enumerate() {
            geometry.check(p)?;
            if i > 0 && positions[i - 1] >= p {
                return Err(if positions[i - 1] == p {
                    Error::PositionCollision(p)
                } else {
                    Error::NotSorted(i)
                });
            }
        }
        Ok(Self { geometry, positions })
    }

    /// Sorts `positions` first; duplicates are rejected as collisions.
    pub fn from_unsorted(geometry: Geometry, mut positions: Vec<f64>) -> Result<Self> {
        if positions.iter().any(|p| p.is_nan()) {
            return Err(Error::Parse("NaN position".into()));
        }
        positions.sort_by(f64::total_cmp);
        Self::new(geometry, positions)
    }

    pub(crate) fn from_sorted_unchecked(geometry: Geometry, positions: Vec<f64>) -> Self {
        let c = Self { geometry, positions };
        c.debug_check();
        c
    }

    #[inline]
    fn debug_check(&self) {
        debug_assert!(
            self.positions.windows(2).all(|w| w[0] < w[1]),
            "configuration lost strict monotonicity"
        );
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn into_positions(self) -> Vec<f64> {
        self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.positions.binary_search_by(|p| p.total_cmp(&x)).is_ok()
    }

    /// Number of particles in `[a, b)`.
    pub fn count_in(&self, a: f64, b: f64) -> usize {
        let lo = self.positions.partition_point(|&p| p < a);
        let hi = self.positions.partition_point(|&p| p < b);
        hi.saturating_sub(lo)
    }

    /// Index of the nearest particle strictly left of `x`, wrapping to the
    /// rightmost particle on a cycle.
    pub fn nearest_left_index(&self, x: f64) -> Result<usize> {
        if self.positions.is_empty() {
            return Err(Error::EmptyConfiguration);
        }
        let idx = self.positions.partition_point(|&p| p < x);
        if idx < self.positions.len() && self.positions[idx] == x {
            return Err(Error::PositionCollision(x));
        }
        if idx > 0 {
            Ok(idx - 1)
        } else if self.geometry.is_cycle() {
            Ok(self.positions.len() - 1)
        } else {
            Err(Error::NoLeftParticle(x))
        }
    }

    pub fn nearest_left(&self, x: f64) -> Result<f64> {
        self.nearest_left_index(x).map(|i| self.positions[i])
    }

    /// Mirror of [`nearest_left_index`](Self::nearest_left_index): the
    /// nearest particle strictly right of `x`, wrapping to the leftmost.
    pub fn nearest_right_index(&self, x: f64) -> Result<usize> {
        if self.positions.is_empty() {
            return Err(Error::EmptyConfiguration);
        }
        let idx = self.positions.partition_point(|&p| p <= x);
        if idx > 0 && self.positions[idx - 1] == x {
            return Err(Error::PositionCollision(x));
        }
        if idx < self.positions.len() {
            Ok(idx)
        } else if self.geometry.is_cycle() {
            Ok(0)
        } else {
            Err(Error::NoRightParticle(x))
        }
    }

    pub fn nearest_right(&self, x: f64) -> Result<f64> {
        self.nearest_right_index(x).map(|i| self.positions[i])
    }

    /// Moves the particle at index `idx` to `x`, keeping the order.
    fn relocate(&mut self, idx: usize, x: f64) {
        let n = self.positions.len();
        let fits_left = idx == 0 || self.positions[idx - 1] < x;
        let fits_right = idx + 1 == n || x < self.positions[idx + 1];
        if fits_left && fits_right {
            self.positions[idx] = x;
        } else {
            // Wrapped around the cycle.
            self.positions.remove(idx);
            let at = self.positions.partition_point(|&p| p < x);
            self.positions.insert(at, x);
        }
        self.debug_check();
    }

    /// One HAD move: the nearest particle left of `x` (wrapping on a cycle)
    /// jumps to `x`. Returns the position it left. On an interval a point
    /// with nothing to its left leaves the configuration unchanged and
    /// returns `None`.
    pub fn jump_from_left(&mut self, x: f64) -> Result<Option<f64>> {
        self.geometry.check(x)?;
        match self.nearest_left_index(x) {
            Ok(i) => {
                let old = self.positions[i];
                self.relocate(i, x);
                Ok(Some(old))
            }
            Err(Error::NoLeftParticle(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Left-drift move: the nearest particle right of `y` jumps to `y`.
    pub fn jump_from_right(&mut self, y: f64) -> Result<Option<f64>> {
        self.geometry.check(y)?;
        match self.nearest_right_index(y) {
            Ok(i) => {
                let old = self.positions[i];
                self.relocate(i, y);
                Ok(Some(old))
            }
            Err(Error::NoRightParticle(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    pub fn insert(&mut self, x: f64) -> Result<()> {
        self.geometry.check(x)?;
        match self.positions.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(_) => Err(Error::PositionCollision(x)),
            Err(at) => {
                self.positions.insert(at, x);
                Ok(())
            }
        }
    }

    /// Removes `x`, returning whether it was present.
    pub fn remove(&mut self, x: f64) -> bool {
        match self.positions.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(at) => {
                self.positions.remove(at);
                true
            }
            Err(_) => false,
        }
    }

    pub fn is_subset(&self, other: &Configuration) -> bool {
        let mut j = 0;
        for &p in &self.positions {
            while j < other.positions.len() && other.positions[j] < p {
                j += 1;
            }
            if j == other.positions.len() || other.positions[j] != p {
                return false;
            }
        }
        true
    }

    pub fn is_disjoint(&self, other: &Configuration) -> bool {
        let (a, b) = (&self.positions, &other.positions);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            if a[i] == b[j] {
                return false;
            } else if a[i] < b[j] {
                i += 1;
            } else {
                j += 1;
            }
        }
        true
    }

    /// Positions in `self` but not in `other`.
    pub fn difference(&self, other: &Configuration) -> Configuration {
        let mut out = Vec::with_capacity(self.len());
        let mut j = 0;
        for &p in &self.positions {
            while j < other.positions.len() && other.positions[j] < p {
                j += 1;
            }
            if j == other.positions.len() || other.positions[j] != p {
                out.push(p);
            }
        }
        Self::from_sorted_unchecked(self.geometry, out)
    }

    /// Union of two disjoint configurations.
    pub fn union(&self, other: &Configuration) -> Result<Configuration> {
        if self.geometry != other.geometry {
            return Err(Error::GeometryMismatch);
        }
        let (a, b) = (&self.positions, &other.positions);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i] < b[j]) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j] < a[i] {
                out.push(b[j]);
                j += 1;
            } else {
                return Err(Error::PositionCollision(a[i]));
            }
        }
        Ok(Self::from_sorted_unchecked(self.geometry, out))
    }

    /// `count` independent uniform positions, sorted.
    pub fn sample_count<R: Rng + ?Sized>(geometry: Geometry, count: usize, rng: &mut R) -> Self {
        let mut positions = Vec::with_capacity(count);
        loop {
            positions.clear();
            positions.extend((0..count).map(|_| uniform_in(&geometry, rng)));
            positions.sort_by(f64::total_cmp);
            if positions.windows(2).all(|w| w[0] < w[1]) {
                return Self::from_sorted_unchecked(geometry, positions);
            }
        }
    }

    /// Homogeneous Poisson process of intensity `rate` on the geometry.
    pub fn sample_poisson<R: Rng + ?Sized>(geometry: Geometry, rate: f64, rng: &mut R) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::NonPositiveRate(rate));
        }
        let count = sample_poisson_count(rate * geometry.length(), rng);
        Ok(Self::sample_count(geometry, count, rng))
    }
}

pub(crate) fn uniform_in<R: Rng + ?Sized>(geometry: &Geometry, rng: &mut R) -> f64 {
    loop {
        let x = geometry.start() + rng.random::<f64>() * geometry.length();
        if geometry.contains(x) {
            return x;
        }
    }
}

pub(crate) fn sample_poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("positive finite mean");
    d.sample(rng) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RngStream;

    fn cycle10(ps: &[f64]) -> Configuration {
        Configuration::new(Geometry::cycle(10.0).unwrap(), ps.to_vec()).unwrap()
    }

    #[test]
    fn nearest_left_direct() {
        assert_eq!(cycle10(&[1.0, 3.0, 5.0]).nearest_left(4.0).unwrap(), 3.0);
    }

    #[test]
    fn nearest_left_wraps_on_cycle() {
        assert_eq!(cycle10(&[1.0, 3.0, 5.0]).nearest_left(0.5).unwrap(), 5.0);
    }

    #[test]
    fn nearest_left_errors() {
        assert!(matches!(cycle10(&[]).nearest_left(4.0), Err(Error::EmptyConfiguration)));
        assert!(matches!(
            cycle10(&[1.0, 3.0]).nearest_left(3.0),
            Err(Error::PositionCollision(_))
        ));
        let line = Configuration::new(Geometry::interval(10.0).unwrap(), vec![1.0, 3.0]).unwrap();
        assert!(matches!(line.nearest_left(0.5), Err(Error::NoLeftParticle(_))));
        assert_eq!(line.nearest_left(2.0).unwrap(), 1.0);
    }

    #[test]
    fn nearest_right_wraps() {
        let c = cycle10(&[1.0, 3.0, 5.0]);
        assert_eq!(c.nearest_right(4.0).unwrap(), 5.0);
        assert_eq!(c.nearest_right(7.0).unwrap(), 1.0);
    }

    #[test]
    fn rejects_unsorted_and_out_of_domain() {
        let g = Geometry::cycle(10.0).unwrap();
        assert!(matches!(Configuration::new(g, vec![2.0, 1.0]), Err(Error::NotSorted(1))));
        assert!(matches!(Configuration::new(g, vec![1.0, 1.0]), Err(Error::PositionCollision(_))));
        assert!(Configuration::new(g, vec![10.0]).is_err());
        assert!(Configuration::from_unsorted(g, vec![3.0, 1.0]).is_ok());
    }

    #[test]
    fn jump_keeps_order_and_wraps() {
        let mut c = cycle10(&[1.0, 3.0, 5.0]);
        assert_eq!(c.jump_from_left(4.0).unwrap(), Some(3.0));
        assert_eq!(c.positions(), &[1.0, 4.0, 5.0]);
        assert_eq!(c.jump_from_left(0.5).unwrap(), Some(5.0));
        assert_eq!(c.positions(), &[0.5, 1.0, 4.0]);
        assert_eq!(c.jump_from_right(9.0).unwrap(), Some(0.5));
        assert_eq!(c.positions(), &[1.0, 4.0, 9.0]);
    }

    #[test]
    fn interval_jump_without_left_particle_is_noop() {
        let mut c = Configuration::new(Geometry::interval(10.0).unwrap(), vec![2.0]).unwrap();
        assert_eq!(c.jump_from_left(1.0).unwrap(), None);
        assert_eq!(c.positions(), &[2.0]);
    }

    #[test]
    fn zero_count_is_empty() {
        let mut rng = RngStream::new(1, 0).rng();
        assert!(Configuration::sample_count(Geometry::cycle(10.0).unwrap(), 0, &mut rng).is_empty());
    }

    #[test]
    fn fixed_count_sample() {
        let mut rng = RngStream::new(2, 0).rng();
        let c = Configuration::sample_count(Geometry::cycle(10.0).unwrap(), 5, &mut rng);
        assert_eq!(c.len(), 5);
        assert!(c.positions().windows(2).all(|w| w[0] < w[1]));
        assert!(c.positions().iter().all(|&p| (0.0..10.0).contains(&p)));
    }

    #[test]
    fn poisson_rejects_bad_rate() {
        let mut rng = RngStream::new(3, 0).rng();
        let g = Geometry::cycle(10.0).unwrap();
        assert!(matches!(Configuration::sample_poisson(g, 0.0, &mut rng), Err(Error::NonPositiveRate(_))));
        assert!(Configuration::sample_poisson(g, -1.0, &mut rng).is_err());
    }

    #[test]
    fn poisson_mean_count() {
        // Count ~ Poisson(20); the mean of 10^4 draws has sd sqrt(20/10^4).
        let g = Geometry::cycle(10.0).unwrap();
        let mut rng = RngStream::new(4, 0).rng();
        let draws = 10_000;
        let total: usize = (0..draws)
            .map(|_| Configuration::sample_poisson(g, 2.0, &mut rng).unwrap().len())
            .sum();
        let mean = total as f64 / draws as f64;
        let sd = (20.0f64 / draws as f64).sqrt();
        assert!((mean - 20.0).abs() < 3.0 * sd, "mean {mean}");
    }

    #[test]
    fn set_operations() {
        let a = cycle10(&[1.0, 2.0, 3.0]);
        let b = cycle10(&[2.0]);
        assert!(b.is_subset(&a));
        assert!(!a.is_subset(&b));
        assert_eq!(a.difference(&b).positions(), &[1.0, 3.0]);
        assert!(a.difference(&b).is_disjoint(&b));
        assert_eq!(a.difference(&b).union(&b).unwrap(), a);
        assert!(a.union(&b).is_err());
        assert_eq!(a.count_in(1.5, 3.0), 1);
    }
}
