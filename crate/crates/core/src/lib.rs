//! Relational three-body kinematics.
//!
//! Classical side: the Euclidean constraints `P`, `R` on `T*R^{3n}`, gauge
//! fixing for a frame `[A, B, C]`, the Dirac-observable chart, reduced
//! dynamics and the closed-form change of frame. Quantum side: the
//! translational sector on sparse momentum states and the angular sector on
//! radial grids, down to the reduced wave function in `(rho_B, rho_C, u)`.

pub mod classical_dynamics;
pub mod classical_frames;
pub mod error;
pub mod gauge_fixing;
pub mod observables;
pub mod phase_space;
pub mod quantum_angular;
pub mod quantum_momentum;

pub use error::{Error, Result};
