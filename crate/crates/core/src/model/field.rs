use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use super::config::uniform_in;
use super::geometry::Geometry;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub t: f64,
}

/// Space-time Poisson points ("bells"), sorted by time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointField {
    geometry: Geometry,
    points: Vec<Point>,
}

impl PointField {
    pub fn empty(geometry: Geometry) -> Self {
        Self { geometry, points: Vec::new() }
    }

    pub fn new(geometry: Geometry, points: Vec<Point>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            geometry.check(p.x)?;
            if !p.t.is_finite() {
                return Err(Error::Parse(format!("non-finite time at index {i}")));
            }
            if i > 0 && points[i - 1].t >= p.t {
                return Err(Error::TimesNotSorted(i));
            }
        }
        Ok(Self { geometry, points })
    }

    pub(crate) fn from_sorted_unchecked(geometry: Geometry, points: Vec<Point>) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0].t < w[1].t));
        Self { geometry, points }
    }

    /// Rate-1 Poisson points on `geometry x (0, horizon]`.
    ///
    /// Drawn as a time-ordered sequence with Exp(length) waiting times and
    /// uniform positions, so no sort is needed.
    pub fn sample<R: Rng + ?Sized>(geometry: Geometry, horizon: f64, rng: &mut R) -> Result<Self> {
        if !(horizon >= 0.0) || !horizon.is_finite() {
            return Err(Error::NegativeHorizon(horizon));
        }
        let wait = Exp::new(geometry.length()).expect("positive length");
        let mut points = Vec::with_capacity((geometry.length() * horizon * 1.1) as usize + 8);
        let mut t = 0.0;
        loop {
            let next = t + wait.sample(rng);
            if next > horizon {
                break;
            }
            if next <= t {
                continue;
            }
            t = next;
            points.push(Point { x: uniform_in(&geometry, rng), t });
        }
        Ok(Self { geometry, points })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points with `t <= until`.
    pub fn until(&self, until: f64) -> PointField {
        let k = self.points.partition_point(|p| p.t <= until);
        Self::from_sorted_unchecked(self.geometry, self.points[..k].to_vec())
    }

    /// Points with `t > s`, shifted back by `s` (the time translation
    /// `τ_s`). Positions are copied unchanged.
    pub fn shifted_after(&self, s: f64) -> PointField {
        let k = self.points.partition_point(|p| p.t <= s);
        let points = self.points[k..].iter().map(|p| Point { x: p.x, t: p.t - s }).collect();
        Self { geometry: self.geometry, points }
    }

    /// Number of points in `[x0, x1) x [t0, t1)`.
    pub fn count_in_box(&self, x0: f64, x1: f64, t0: f64, t1: f64) -> usize {
        let lo = self.points.partition_point(|p| p.t < t0);
        let hi = self.points.partition_point(|p| p.t < t1);
        self.points[lo..hi].iter().filter(|p| p.x >= x0 && p.x < x1).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RngStream;

    #[test]
    fn zero_horizon_is_empty() {
        let mut rng = RngStream::new(1, 0).rng();
        let f = PointField::sample(Geometry::cycle(10.0).unwrap(), 0.0, &mut rng).unwrap();
        assert!(f.is_empty());
    }

    #[test]
    fn negative_horizon_rejected() {
        let mut rng = RngStream::new(1, 0).rng();
        assert!(matches!(
            PointField::sample(Geometry::cycle(10.0).unwrap(), -1.0, &mut rng),
            Err(Error::NegativeHorizon(_))
        ));
    }

    #[test]
    fn sampled_times_strictly_increase() {
        let mut rng = RngStream::new(5, 0).rng();
        let f = PointField::sample(Geometry::cycle(10.0).unwrap(), 20.0, &mut rng).unwrap();
        assert!(f.points().windows(2).all(|w| w[0].t < w[1].t));
        assert!(PointField::new(*f.geometry(), f.points().to_vec()).is_ok());
    }

    #[test]
    fn mean_count_matches_area() {
        // Count ~ Poisson(50).
        let g = Geometry::cycle(10.0).unwrap();
        let mut rng = RngStream::new(6, 0).rng();
        let draws = 10_000;
        let total: usize = (0..draws).map(|_| PointField::sample(g, 5.0, &mut rng).unwrap().len()).sum();
        let mean = total as f64 / draws as f64;
        assert!((mean - 50.0).abs() < 3.0 * (50.0f64 / draws as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn split_and_shift() {
        let g = Geometry::cycle(10.0).unwrap();
        let f = PointField::new(g, vec![Point { x: 1.0, t: 0.5 }, Point { x: 2.0, t: 1.5 }]).unwrap();
        assert_eq!(f.until(1.0).len(), 1);
        let s = f.shifted_after(1.0);
        assert_eq!(s.points(), &[Point { x: 2.0, t: 0.5 }]);
        assert!(PointField::new(g, vec![Point { x: 1.0, t: 1.0 }, Point { x: 2.0, t: 1.0 }]).is_err());
    }
}
