//! Repeated stochastic matching: policies, exact optimal benchmarks,
//! coupling checks and the factor-revealing LPs behind the approximation
//! guarantees.

pub mod cli;
pub mod coupling;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod lp;
pub mod model;
pub mod policies;
pub mod rng;

pub use error::{Error, Result};
pub use model::{Instance, SampleGraph, Trace};
pub use policies::PolicyId;
