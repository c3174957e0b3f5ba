//! Queueing construction of multiclass configurations.
//!
//! A configuration of arrivals `A` and one of service instants `S` define a
//! single-server queue. Services that find customers waiting are
//! departures `D(A, S)`; the rest are unused services `U(A, S)`. Chaining
//! queues in tandem, and giving customers priority classes, turns a stack of
//! independent lines into nested (coupled) and disjoint (multiclass)
//! configurations.

mod engine;
mod maps;
mod stacks;

pub use engine::{
    fifo_links, queue_trajectory, split_departures_unused, tandem_departures, EventKind, FifoMatching, Link,
    QueueTrajectory,
};
pub use maps::{build_coupled, class_departures, collapse_classes, expand_classes, map_multiclass};
pub use stacks::{CoupledConfig, MultiLineConfig, MulticlassConfig};
