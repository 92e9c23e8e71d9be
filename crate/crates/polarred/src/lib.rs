//! Hamiltonian reduction of free geodesic motion on a compact Lie group
//! under a polar symmetry action.
//!
//! A polar action admits a section: a flat torus that meets every orbit
//! orthogonally. Reducing the free particle on the group by the action
//! produces a spin Calogero-Sutherland system on the section, with the
//! spin degree of freedom living on a coadjoint orbit. This crate builds
//! the reduction numerically on both sides:
//!
//! * classically, as trajectories of the radial coordinates coupled to a
//!   Lie-Poisson spin, cross-checked against the exact unreduced geodesic;
//! * quantum mechanically, as a radial Schrodinger operator whose spectrum
//!   is cross-checked against character ladders and one-dimensional oracles.
//!
//! Shipped action families: conjugation of SU(n) on itself, twisted
//! conjugation by entrywise complex conjugation, and two-sided SO(n) x SO(n)
//! actions. The [`catalog`] module constructs validated instances; the CLI
//! (`polarred`) exposes derivation, simulation, spectra and a verification
//! suite over the same library calls.

pub mod action;
pub mod catalog;
pub mod classical;
pub mod config;
pub mod error;
pub mod io;
pub mod lie;
pub mod numerics;
pub mod quantum;
pub mod verify;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Regularity threshold: points closer than this to a singular orbit
/// stratum (in the relevant singular-value or alcove-margin sense) are
/// rejected rather than perturbed.
pub const EPS_REG: f64 = 1e-8;

/// Number of worker threads requested through `POLARRED_THREADS`, if set.
pub fn requested_threads() -> Option<usize> {
    std::env::var("POLARRED_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
}
