//! Boundary-integral solver for the two-dimensional three-phase Muskat problem.
//!
//! Two graph interfaces `y = c_inf + f(x)` and `y = h(x)` separate three
//! fluids in a porous medium. The vortex-sheet densities on the interfaces
//! solve a second-kind integral equation whose solution drives the normal
//! velocity of both interfaces.
//!
//! The x-axis is truncated to a window `[-L, L)` and every whole-line
//! kernel is summed over the periodic images of that window.

pub mod error;
pub mod evolution;
pub mod exec;
pub mod field;
pub mod grid;
pub mod identities;
pub mod kernels;
pub mod linalg;
pub mod linear;
pub mod params;
pub mod solver;
pub mod state;

pub use error::{Error, Result};
pub use evolution::{simulate, Simulation, SimulationRecord, StepperConfig, StepperState, TerminationEvent};
pub use exec::Exec;
pub use grid::{Grid, Profile, SpectralCoeffs, Window};
pub use params::FluidParams;
pub use solver::{compute_phi, solve_omega, SolverConfig};
pub use state::{InterfaceState, VorticityDensity};
