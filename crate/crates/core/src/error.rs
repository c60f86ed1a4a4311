use thiserror::Error;

use crate::instance::LabelId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("unknown label id {0}")]
    UnknownLabel(LabelId),

    #[error("interval [{start}, {end}] is not an activity of label {label}")]
    NotAnActivity { label: LabelId, start: f64, end: f64 },

    #[error("selection is not an independent set: candidates {0} and {1} are adjacent")]
    NotIndependent(usize, usize),

    #[error("conflict graph exceeds size guard ({vertices} vertices, {edges} edges, cap {cap})")]
    SizeGuard { vertices: usize, edges: usize, cap: usize },

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("time {0} is outside the trajectory span")]
    TimeOutOfRange(f64),

    #[error("invalid request: {0}")]
    Request(String),
}

pub type Result<T> = std::result::Result<T, Error>;
