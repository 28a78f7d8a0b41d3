//! One-dimensional compressible viscoelastic flow lab: a Lagrangian solver
//! for the relaxed stress system, its Navier-Stokes relaxation limit, the
//! symmetrizer algebra, energy diagnostics, and experiment harnesses
//! (parameter sweeps, grid convergence, stability probes).

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod model;
pub mod ns;
pub mod output;
pub mod relaxed;
pub mod tridiag;

pub use error::{Error, Result};
pub use grid::{GridSpec, NsField, StateField};
pub use model::{CellState, PhysParams};
pub use ns::ViscosityLaw;
pub use relaxed::{RunOutput, StepControl, StretchStage, Variant};
