//! Multi-criterion preference games and KL-regularized Blackwell-winner
//! solvers: game construction, intransitivity audits, exact mirror descent,
//! sample-based regression training and evaluation.

pub mod audit;
pub mod config;
pub mod error;
pub mod eval;
pub mod exec;
pub mod game;
pub mod judge;
pub mod numeric;
pub mod policy;
pub mod solver;
pub mod train;

pub use error::{Error, Result};
