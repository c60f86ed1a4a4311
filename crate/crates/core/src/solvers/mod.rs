//! Solvers for the unrestricted problem (maximize total weighted activity)
//! and the k-restricted problem (at most `k` labels active at any time).

mod coverage;
mod exact;
mod greedy;
mod intgraph;
mod mwis;
mod pls;
mod sweep;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_graph_with, ConflictGraph, GraphOptions, DEFAULT_SIZE_CAP};
use crate::instance::{ActivitySet, Instance};
use crate::validation::AmMode;

pub use exact::{exact_search, solve_exact, ExactOutcome};
pub use greedy::{greedy_selection, solve_greedy};
pub use intgraph::{mwis_intervals, solve_intgraph};
pub use pls::{pls_search, solve_pls};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Problem {
    /// No bound on simultaneously active labels.
    Gmt,
    /// At most `k` simultaneously active labels.
    Krmt(usize),
}

impl Problem {
    pub fn k(self) -> Option<usize> {
        match self {
            Problem::Gmt => None,
            Problem::Krmt(k) => Some(k),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Problem::Gmt => "GMT",
            Problem::Krmt(_) => "KRMT",
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Problem::Gmt => write!(f, "GMT"),
            Problem::Krmt(k) => write!(f, "KRMT(k={k})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Exact,
    Greedy,
    Pls,
    #[serde(rename = "intgraph")]
    IntGraph,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Exact, Algorithm::Greedy, Algorithm::Pls, Algorithm::IntGraph];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Exact => "exact",
            Algorithm::Greedy => "greedy",
            Algorithm::Pls => "pls",
            Algorithm::IntGraph => "intgraph",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Algorithm::Exact),
            "greedy" => Ok(Algorithm::Greedy),
            "pls" => Ok(Algorithm::Pls),
            "intgraph" => Ok(Algorithm::IntGraph),
            _ => Err(Error::Request(format!("unknown algorithm '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Optimal,
    Feasible,
    /// Time limit hit; the activity set is the best incumbent.
    Timeout,
    Unsupported,
    SizeAbort,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Optimal => "OPTIMAL",
            Status::Feasible => "FEASIBLE",
            Status::Timeout => "TIMEOUT",
            Status::Unsupported => "UNSUPPORTED",
            Status::SizeAbort => "SIZE_ABORT",
        };
        f.write_str(s)
    }
}

/// Order of selection phases inside one PLS cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseSchedule {
    /// greedy, penalty, greedy
    Paper,
    /// random, penalty, greedy
    Pullan,
}

impl FromStr for PhaseSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(PhaseSchedule::Paper),
            "pullan" => Ok(PhaseSchedule::Pullan),
            _ => Err(Error::Request(format!("unknown phase schedule '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlsParams {
    pub random_iterations: u32,
    pub penalty_iterations: u32,
    pub greedy_iterations: u32,
    pub schedule: PhaseSchedule,
    pub penalty_delay: u32,
    pub budget: Duration,
    /// Hard cap on iterations; with a generous `budget` this makes runs
    /// reproducible independently of machine speed.
    pub max_iterations: Option<u64>,
}

impl Default for PlsParams {
    fn default() -> Self {
        Self {
            random_iterations: 50,
            penalty_iterations: 100,
            greedy_iterations: 50,
            schedule: PhaseSchedule::Paper,
            penalty_delay: 2,
            budget: Duration::from_millis(100),
            max_iterations: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveRequest {
    pub problem: Problem,
    pub mode: AmMode,
    pub algorithm: Algorithm,
    pub time_limit: Duration,
    pub seed: u64,
    pub pls: PlsParams,
    /// Shortest admissible activity interval.
    pub min_duration: f64,
    /// IntGraph under AM1 keeps time-overlapping neighbors that never
    /// conflict with the chosen intervals.
    pub intgraph_relaxed: bool,
    pub size_cap: usize,
}

impl SolveRequest {
    pub fn new(problem: Problem, mode: AmMode, algorithm: Algorithm) -> Self {
        Self {
            problem,
            mode,
            algorithm,
            time_limit: Duration::from_secs(600),
            seed: 0,
            pls: PlsParams::default(),
            min_duration: 0.0,
            intgraph_relaxed: false,
            size_cap: DEFAULT_SIZE_CAP,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = limit;
        self
    }

    pub fn with_min_duration(mut self, d: f64) -> Self {
        self.min_duration = d;
        self
    }

    pub fn with_intgraph_relaxed(mut self, relaxed: bool) -> Self {
        self.intgraph_relaxed = relaxed;
        self
    }

    pub fn with_pls(mut self, pls: PlsParams) -> Self {
        self.pls = pls;
        self
    }

    pub(crate) fn graph_options(&self) -> GraphOptions {
        GraphOptions { size_cap: self.size_cap, min_duration: self.min_duration }
    }

    fn validate(&self) -> Result<()> {
        if self.problem == Problem::Krmt(0) {
            return Err(Error::Request("k must be at least 1".into()));
        }
        if self.time_limit.is_zero() {
            return Err(Error::Request("time limit must be positive".into()));
        }
        if self.min_duration.is_nan() || self.min_duration < 0.0 {
            return Err(Error::Request("minimum duration must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub phi: ActivitySet,
    pub objective: f64,
    pub status: Status,
    /// Exact solver only.
    pub upper_bound: Option<f64>,
    pub runtime: Duration,
}

impl SolveResult {
    pub(crate) fn finish(instance: &Instance, phi: ActivitySet, status: Status, upper_bound: Option<f64>, started: Instant) -> Self {
        let objective = instance.objective(&phi).expect("solver output references instance labels");
        Self { phi, objective, status, upper_bound, runtime: started.elapsed() }
    }

    pub(crate) fn empty(status: Status, started: Instant) -> Self {
        Self { phi: ActivitySet::new(), objective: 0.0, status, upper_bound: None, runtime: started.elapsed() }
    }

    pub fn sidecar(&self, req: &SolveRequest) -> SolveSidecar {
        SolveSidecar {
            objective: self.objective,
            status: self.status,
            upper_bound: self.upper_bound,
            runtime_s: self.runtime.as_secs_f64(),
            algorithm: req.algorithm,
            mode: req.mode,
            problem: req.problem.name().to_string(),
            k: req.problem.k(),
            seed: req.seed,
        }
    }
}

/// Metadata written next to a solution file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveSidecar {
    pub objective: f64,
    pub status: Status,
    pub upper_bound: Option<f64>,
    pub runtime_s: f64,
    pub algorithm: Algorithm,
    pub mode: AmMode,
    pub problem: String,
    pub k: Option<usize>,
    pub seed: u64,
}

pub(crate) fn graph_or_abort(instance: &Instance, mode: AmMode, req: &SolveRequest) -> std::result::Result<ConflictGraph, Status> {
    match build_graph_with(instance, mode, &req.graph_options()) {
        Ok(g) => Ok(g),
        Err(Error::SizeGuard { .. }) => Err(Status::SizeAbort),
        Err(e) => panic!("graph construction failed on a validated instance: {e}"),
    }
}

/// Runs the requested algorithm.
pub fn solve(instance: &Instance, req: &SolveRequest) -> Result<SolveResult> {
    req.validate()?;
    Ok(match req.algorithm {
        Algorithm::Exact => solve_exact(instance, req),
        Algorithm::Greedy => solve_greedy(instance, req),
        Algorithm::Pls => solve_pls(instance, req),
        Algorithm::IntGraph => solve_intgraph(instance, req),
    })
}
