//! One- and two-atom physics of an N-site ring lattice rotating at a fixed
//! or slowly varying speed, in the phase-twisted tight-binding model.
//!
//! All dynamical quantities are frequencies with ℏ = 1. Energies are quoted
//! in the rotating frame (after the momentum translation that puts the
//! Hamiltonian into standard form); lattice momenta `q` are the labels that a
//! lab-frame measurement reads out as momentum ℏq/a.
//!
//! Module map:
//!
//! * [`lattice`] geometry, momentum grids, rotation bookkeeping
//! * [`band`] plane-wave Bloch solver with twisted boundary conditions,
//!   Wannier functions, and the tunneling element
//! * [`one`] single atom: dispersion, ground states, ramps, wave packets
//! * [`two`] two identical bosons: sector eigenproblem and large-N forms
//! * [`hetero`] two distinguishable atoms
//! * [`ed`] position-basis exact diagonalization used as an oracle
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod band;
pub mod ed;
pub mod hetero;
pub mod lattice;
pub mod linalg;
pub mod math;
pub mod one;
pub mod quad;
pub mod ramp;
pub mod roots;
pub mod two;

pub use num_complex::Complex64;

/// Reduced Planck constant. Every module works in units where it is one.
pub const HBAR: f64 = 1.0;
