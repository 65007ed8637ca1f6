//! Mean-field model of a transversely pumped Bose-Einstein condensate coupled
//! to a single lossy cavity mode.
//!
//! The crate computes self-consistent steady states (uniform or
//! self-organized), the non-Hermitian collective-excitation spectrum around
//! them, closed-form threshold and spectrum results, the defect phase
//! boundary, and the quantum depletion of the conservative system.
//!
//! Units: every frequency and energy is measured in recoil units
//! (`omega_R = 1`); positions are the phase `theta = k x` on one optical
//! wavelength with periodic boundary conditions, and wavefunctions are
//! normalized with the measure `d theta / 2 pi`. Only the atom-number scaled
//! combinations `N U0`, `N g_c / lambda` and `sqrt(N) eta` enter the API.
//!
//! The crate is `no_std` and only needs an allocator. Float math goes through
//! `num_traits::Float`; those imports are marked `allow(unused_imports)`
//! because std's inherent methods take precedence whenever std is linked.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analytics;
pub mod depletion;
mod error;
pub mod grid;
pub mod linalg;
pub mod linear_response;
pub mod observables;
mod params;
pub mod steady_state;
mod wavefunction;

pub use error::{Error, StallReason};
pub use grid::SpatialGrid;
pub use params::ModelParams;
pub use wavefunction::{CavityAmplitude, Wavefunction};

pub use num_complex::Complex64;

pub type Result<T, E = Error> = core::result::Result<T, E>;
