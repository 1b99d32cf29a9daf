//! "Squeaky wheel" optimization: a greedy constructor builds a solution in
//! priority order, an analyzer assigns blame to the elements that came out
//! badly, and a prioritizer moves blamed elements toward the front of the
//! sequence for the next construction. The engine in [`engine`] is
//! domain-agnostic; [`sched`] and [`coloring`] are two complete problem
//! domains plugged into it.

pub mod coloring;
pub mod engine;
pub mod sched;

pub use engine::{
    blame_sort, run, sticky_sort, BlameVector, Domain, ElementId, EngineConfig, EngineError,
    Prioritizer, PrioritySequence, Restart, RunResult, SwoRng, TrajectoryRecord,
};
