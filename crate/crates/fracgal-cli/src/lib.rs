//! Convergence-study harness for the fracgal solvers: resolved run
//! configurations, experiment drivers, report writers, and report comparison.

pub mod compare;
pub mod config;
pub mod experiments;
pub mod output;
