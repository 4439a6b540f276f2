//! Quantum correlated equilibria: classical games, quantum correlations,
//! deviation incentives, constructions, and correlation complexity.

pub mod constructions;
pub mod corrcomp;
pub mod deviation;
pub mod error;
pub mod game_core;
pub mod io;
pub mod matkit;
pub mod quantum_state;
pub mod reproduce;

pub use error::{Error, Result};
pub use game_core::{Game, JointDistribution};
pub use matkit::Matrix;
