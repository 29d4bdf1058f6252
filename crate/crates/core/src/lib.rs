//! Steady states of a weakly driven, chirally coupled dissimilar atomic array.
//!
//! The array is a chain of two-level emitters coupled through a one-dimensional
//! waveguide with unequal left/right decay rates. Two uniform spacings meet at
//! an interface atom. In the single-excitation (weak-drive) sector the
//! amplitudes obey a linear equation driven by a non-Hermitian coupling
//! matrix; this crate builds that matrix, solves for the steady state, and
//! classifies the resulting population profile into excitation phases.
//!
//! The crate is `no_std` and only needs an allocator. File formats, the
//! command-line driver and parallel sweeps live in `chiral-array-cli`.

#![no_std]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analytic;
pub mod error;
pub mod gallery;
pub mod lattice;
pub mod linalg;
pub mod phases;
pub mod scan;
pub mod solver;

pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use lattice::{ArrayGeometry, ChiralCoupling, CouplingMatrix, DriveField};
pub use phases::{PhaseLabel, PhaseReport, SegmentMetrics, Thresholds};
pub use solver::{SteadyStateSolution, Trajectory};

/// Tolerance used to decide that a lattice phase sits exactly at π.
pub const PI_TOLERANCE: f64 = 1e-6;
