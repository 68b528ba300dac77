//! Multiobjective SQP solver, Pareto front generation and benchmark metrics.

pub mod bench;
pub mod catalog;
pub mod error;
pub mod front;
pub mod metrics;
pub mod problem;
pub mod qp;
pub mod solver;

pub use error::{Error, Result};
