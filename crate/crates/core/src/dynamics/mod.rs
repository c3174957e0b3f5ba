//! Harris graphical construction for the single-line, coupled, multiclass
//! and multi-line processes.

mod evolve;
mod step;

pub use evolve::{evolve, run, Trajectory};
pub use step::{coupled_step, had_step, multiclass_step, multiline_reverse_step, multiline_step, HarrisState};
