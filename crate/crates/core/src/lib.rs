//! Numerical laboratory for one qubit among `N` non-interacting qubits that
//! share a zero-temperature Lorentzian reservoir.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: reservoir parameters, regime classification and the closed-form
//!   survival amplitude `C(t)`.
//! - [`kernel`]: an RK4 solver for the memory-kernel equation of motion, used
//!   as an independent check on the closed form.
//! - [`bath`]: brute-force evolution of the full Hamiltonian with a discretized
//!   reservoir in the single-excitation sector.
//! - [`density`] and [`qfi`]: 2×2 density matrices, their spectra, the
//!   symmetric logarithmic derivative and the quantum Fisher information of a
//!   phase probe.
//! - [`gp`]: the kinematic geometric phase of the watched qubit over one
//!   quasicycle, both by a discrete Pancharatnam product and by quadrature.
//! - [`experiments`]: declarative sweeps that write deterministic CSV.
//!
//! All rates and times are expressed in units of the spectral width `λ`,
//! which is fixed to 1.

#![forbid(unsafe_code)]
// NaN-rejecting `!(x >= 0.0)` checks and index loops over 2×2 matrices are deliberate
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bath;
pub mod density;
pub mod error;
pub mod experiments;
pub mod gp;
pub mod kernel;
pub mod model;
pub mod par;
pub mod qfi;
pub mod quadrature;

pub use error::{Error, Result};
pub use model::{AmplitudeSource, AmplitudeTrace, EnsembleSpec, ReservoirSpec, TimeGrid};
pub use par::Exec;

pub use num_complex::Complex64;
