//! Exciton-vibration coupling model for ultracold atoms in a one-dimensional
//! optical lattice (Mott phase, one atom per site).
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! * [`units`]: parameter types, the eV/Å unit system and validation;
//! * [`couplings`]: closed-form transfer, transfer-vibration and on-site couplings,
//!   the polaron shift and regime classification;
//! * [`band`]: momentum grid, exciton dispersion, momentum-space vertices and
//!   golden-rule rates;
//! * [`fock`], [`hamiltonian`], [`spectrum`], [`dynamics`]: the exact-diagonalization
//!   oracle on a truncated Fock space;
//! * [`polaron`]: the displaced-oscillator canonical transformation;
//! * [`relaxation`]: rate-equation kinetics of exciton populations.
//!
//! Energies are stored as eV (frequencies as ħω), lengths in Å and time in ħ/eV.
#![no_std]

extern crate alloc;

pub mod band;
pub mod couplings;
pub mod dynamics;
mod error;
pub mod fock;
pub mod hamiltonian;
pub mod linalg;
pub mod polaron;
pub mod relaxation;
pub mod spectrum;
pub mod units;

pub use error::{Error, ErrorKind, Result, Violation};
pub use num_complex::Complex64;
