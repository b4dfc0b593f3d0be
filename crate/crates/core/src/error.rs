use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("topology generation failed: {0}")]
    Generation(String),
    #[error("no link {0}->{1}")]
    MissingLink(NodeId, NodeId),
    #[error("node {0} out of range")]
    UnknownNode(NodeId),
    #[error("plan was computed against a different schedule state")]
    StalePlan,
    #[error("throughput undefined for zero total time")]
    ZeroTime,
    #[error("infeasible path: {0}")]
    InfeasiblePath(String),
    #[error("no path from {0} to {1}")]
    NoPath(NodeId, NodeId),
    #[error("source and destination are both {0}")]
    SameNode(NodeId),
    #[error("oracle budget exceeded: {0}")]
    BudgetExceeded(String),
}
