//! Geometries, particle configurations, space-time point fields and the
//! seeded random streams every simulation draws from.

mod config;
mod field;
mod geometry;
pub mod io;
mod rng;

pub use config::Configuration;
pub(crate) use config::uniform_in;
#[cfg(test)]
pub(crate) use config::sample_poisson_count;
pub use field::{Point, PointField};
pub use geometry::{Geometry, GeometryKind};
pub use rng::RngStream;
