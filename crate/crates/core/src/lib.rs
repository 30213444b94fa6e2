//! Numerical core for a single electron trapped above solid neon whose motion
//! and spin couple to the Kittel magnon of a nearby micromagnet.
//!
//! The crate is `no_std` (with `alloc`). It provides:
//!
//! * [`operators`]: truncated Fock / Pauli algebra on a fixed
//!   `phonon ⊗ magnon ⊗ spin` tensor layout,
//! * [`device`]: geometry → coupling constants, plus a dipole-field
//!   finite-difference oracle,
//! * [`hamiltonians`]: the free, linear, nonlinear, resonant tripartite and
//!   parametrically driven Hamiltonians,
//! * [`lindblad`]: matrix-free master-equation integration, steady states and
//!   the adiabatically eliminated phonon-addition model,
//! * [`tomography`]: Wigner maps, negativity and phonon-added coherent states.
//!
//! All rates are angular frequencies (rad/s) unless a function says
//! otherwise; conversion to Hz happens at file boundaries only.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

#[cfg(all(test, not(feature = "std")))]
extern crate std;

pub mod device;
pub mod error;
pub mod hamiltonians;
pub mod lindblad;
pub mod linalg;
pub mod operators;
pub mod sparse;
pub mod special;
pub mod tomography;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Complex zero.
pub const ZERO: C64 = C64::new(0.0, 0.0);
/// Complex one.
pub const ONE: C64 = C64::new(1.0, 0.0);
/// Imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);
