//! Experiments and verification suites for random walks on the affine group
//! of a homogeneous tree, built on `treewalk-core`.

pub mod cli;
pub mod config;
pub mod literal;
pub mod parallel;
pub mod realization;
pub mod report;
pub mod suites;
