use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    Cycle,
    Interval,
}

/// The spatial domain particles live on.
///
/// A cycle of circumference `N` stores positions canonically in `[0, N)`;
/// an interval is the half-open window `[start, start + length)`. Cycles
/// always start at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    kind: GeometryKind,
    start: f64,
    length: f64,
}

impl Geometry {
    pub fn cycle(length: f64) -> Result<Self> {
        Self::checked(GeometryKind::Cycle, 0.0, length)
    }

    pub fn interval(length: f64) -> Result<Self> {
        Self::checked(GeometryKind::Interval, 0.0, length)
    }

    /// Interval `[start, end)`.
    pub fn window(start: f64, end: f64) -> Result<Self> {
        Self::checked(GeometryKind::Interval, start, end - start)
    }

    fn checked(kind: GeometryKind, start: f64, length: f64) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() || !start.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        Ok(Self { kind, start, length })
    }

    pub fn kind(&self) -> GeometryKind {
        self.kind
    }

    pub fn is_cycle(&self) -> bool {
        self.kind == GeometryKind::Cycle
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.start + self.length
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.start && x < self.end()
    }

    pub fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { position: x, start: self.start, end: self.end() })
        }
    }

    /// Distance travelled going right from `from` to `to`; on a cycle this
    /// wraps, on an interval it is the plain (possibly negative) difference.
    pub fn forward_distance(&self, from: f64, to: f64) -> f64 {
        let d = to - from;
        if self.is_cycle() && d < 0.0 {
            d + self.length
        } else {
            d
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive_length() {
        assert!(Geometry::cycle(0.0).is_err());
        assert!(Geometry::interval(-1.0).is_err());
        assert!(Geometry::cycle(f64::NAN).is_err());
        assert!(Geometry::window(3.0, 3.0).is_err());
    }

    #[test]
    fn window_domain() {
        let g = Geometry::window(-5.0, 5.0).unwrap();
        assert!(g.contains(-5.0));
        assert!(!g.contains(5.0));
        assert_eq!(g.length(), 10.0);
    }

    #[test]
    fn forward_distance_wraps_on_cycle() {
        let g = Geometry::cycle(10.0).unwrap();
        assert_eq!(g.forward_distance(8.0, 1.0), 3.0);
        assert_eq!(g.forward_distance(1.0, 8.0), 7.0);
    }
}
