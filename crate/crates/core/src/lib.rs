//! Temporal map labeling.
//!
//! Label selection over a time span is expressed with intervals: each label
//! has presence intervals (it is inside the viewport), pairs of labels have
//! conflict intervals (their boxes overlap), and a solution assigns activity
//! intervals (the label is displayed). This crate provides
//!
//! * [`instance`]: the interval model, JSON I/O and the weighted-duration objective,
//! * [`validation`]: validity, endpoint justification, activity models AM1-AM3,
//!   the k-activity bound and saturation,
//! * [`graph`]: conflict graphs over activity candidates,
//! * [`solvers`]: an exact segment sweep with branch-and-bound fallback,
//!   greedy, phased local search and the interval-graph heuristic, for
//!   unrestricted and k-restricted problems,
//! * [`scenario`]: navigation scenarios (smoothed routes, rotating and zooming
//!   viewport) turned into instances,
//! * [`bench`]: the command layer and benchmark harness behind the `tlabel` binary.
//!
//! The `examples/` directory has one runnable program per capability.

pub mod bench;
pub mod error;
pub mod graph;
pub mod instance;
pub mod scenario;
pub mod solvers;
pub mod validation;

pub use error::{Error, Result};
pub use graph::{build_graph, build_graph_with, candidate_conflict, Candidate, ConflictGraph, GraphOptions};
pub use instance::{load_instance, ActivitySet, Conflict, Instance, Label, LabelId, TimeInterval};
pub use solvers::{solve, Algorithm, Problem, SolveRequest, SolveResult, Status};
pub use validation::{check_model, check_valid, is_justified, saturate, AmMode, Rule, ValidationReport};
