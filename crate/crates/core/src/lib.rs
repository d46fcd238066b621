//! Exact Spencer-complex and spectral-sequence engine for principal-bundle
//! constraint systems, plus a floating-point lattice laboratory for
//! compatible pairs `(D, λ)` on discretized trivial bundles.
//!
//! The crate is `no_std` and needs only `alloc`. Everything on the
//! cohomology path ([`liealg`], [`spencer`], [`derham`], [`specseq`],
//! [`torsion`]) uses exact [`Rational`] arithmetic; [`lattice`] uses `f64`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod complex;
pub mod derham;
pub mod error;
pub mod lattice;
pub mod liealg;
pub mod linalg;
pub mod rational;
pub mod spencer;
pub mod specseq;
pub mod sym;
pub mod torsion;

pub use error::{Error, Result};
pub use liealg::{AlgebraVector, CoVector, LieAlgebra};
pub use linalg::{LinearMap, SparseVec};
pub use rational::Rational;
