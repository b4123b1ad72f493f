//! Contract design for migrating AV twins between RSUs under information
//! asymmetry, with a prospect-theory AV and a diffusion-policy solver.
//!
//! - [`econ`]: RSU and AV utilities, prospect-theory value and weighting.
//! - [`feasibility`]: IR/IC checkers, reward completion and the
//!   difference-constraint oracle.
//! - [`solver`]: exhaustive lattice search with local refinement.
//! - [`nn`]: dense networks with manual backpropagation, Adam and checkpoints.
//! - [`gdm`]: diffusion actor, twin critics, environment and training loop.
//! - [`harness`]: configs, seeds and the solve/train/verify/sweep commands.

pub mod econ;
pub mod error;
pub mod feasibility;
pub mod gdm;
pub mod harness;
pub mod nn;
pub mod sampling;
pub mod scenario;
pub mod solver;

pub use error::{Error, Result};
