//! Lattice simulation of the renormalised stochastic Yang–Mills heat flow on
//! the 2- and 3-torus.
//!
//! Gauge fields are discretised as `𝔤`-valued 1-forms on a uniform periodic
//! grid with `𝔤 ⊂ 𝔲(N)` realised by anti-Hermitian matrices. The crate provides
//! the Lie-algebra layer, lattice calculus, noise and renormalisation
//! constants, time integrators, gauge-theoretic observables and the
//! statistics used to compare ensembles.

pub mod dynamics;
pub mod error;
pub mod gauge;
pub mod lattice;
pub mod lie;
pub mod noise;
pub mod observables;
pub mod stats;

pub use error::{Error, Result};
