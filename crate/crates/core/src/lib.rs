//! Random walks on the affine group of a homogeneous tree with a fixed end.
//!
//! Two realizations are provided: the affine group of `Q_p` acting on the
//! Bruhat-Tits tree, and the lamplighter group `Z_q wr Z` acting on the
//! Diestel-Leader half-tree. Both implement [`tree::AffineTree`], and every
//! walk and estimator in this crate is generic over that trait.
#![no_std]

extern crate alloc;

pub mod affine;
pub mod error;
pub mod lamplighter;
pub mod law;
pub mod padic;
pub mod padic_tree;
pub mod renewal;
pub mod rng;
pub mod runner;
pub mod stats;
pub mod tree;
pub mod walk;

pub use error::{Error, Result};
pub use num_rational::Ratio;

/// Exact weights and drifts.
pub type Rational = Ratio<i128>;
