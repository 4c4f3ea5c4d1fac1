//! Structure-preserving simulation of mass-dissipating reaction-diffusion
//! systems with homogeneous Neumann boundary conditions, together with
//! executable checks of the structural hypotheses on the reactions and
//! monitors for the a priori estimates they imply.

pub mod cli;
pub mod error;
pub mod grid;
pub mod integrate;
pub mod monitor;
pub mod systems;

pub use error::{Error, Result};
