//! Central-spin decoherence in nuclear spin baths near clock transitions.
//!
//! The crate computes coherence functions `L(t)` of a central spin (NV electron
//! spin near zero field, singlet-triplet qubit in a GaAs double dot, or a driven
//! spin in the rotating frame) coupled to a bath of nuclear spins. The working
//! method is a cluster-correlation expansion formulated in the per-nucleus
//! hyperfine eigenbasis, where the hyperfine-mediated long-range interactions
//! appear as diagonal fluctuations of the central-spin splitting instead of
//! explicit pair couplings. An exact full-product-space solver is included as
//! an oracle for small baths.
//!
//! Internally all Hamiltonians are angular frequencies in rad/ms; every public
//! interface speaks ordinary frequencies (kHz) and times in ms, with the 2π
//! conversion applied exactly once at the module boundary.
//!
//! The crate is `no_std` (with `alloc`); IO, file formats and the CLI live in
//! the companion `cce-lab` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cce;
pub mod constants;
pub mod ensemble;
pub mod error;
pub mod exact;
pub mod exec;
pub mod geometry;
pub mod hamiltonians;
pub mod model;
pub mod scenario;
pub mod spinops;

pub use error::CoreError;

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, CoreError>;

/// kHz (cycles per ms) to angular frequency in rad/ms.
pub const TWO_PI: f64 = core::f64::consts::TAU;
