//! Maximum multipath routing throughput in multirate wireless mesh networks.
//!
//! The crate models a mesh as a symmetric, capacity-weighted connectivity
//! graph and searches for source to destination paths one at a time. Each
//! candidate path is scheduled into a collision-free TDMA frame whose slots
//! are spatially reused and split as needed; a path is kept only when it
//! raises the end-to-end throughput (bits delivered per frame divided by
//! frame length). A medium-time-metric single-path baseline and a set of
//! brute-force oracles are included for comparison and verification.

pub mod error;
pub mod graph;
pub mod mtm;
pub mod optimizer;
pub mod oracle;
pub mod rational;
pub mod schedule;

pub use error::{Error, Result};
pub use graph::{ConnectivityGraph, Link, NodeId, RoutingView, TopologySpec};
pub use mtm::{mtm_path, BaselineScheduling, MtmResult};
pub use optimizer::{solve_multipath, Candidate, PathFlow, Solution, Violation};
pub use rational::Rational;
pub use schedule::{AllocationPlan, Schedule, TimeSlot};
