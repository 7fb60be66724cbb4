//! Library for studying where full-batch first-order methods converge on
//! linear regression, with an emphasis on over-parameterized problems
//! (more columns than rows) where the minimizer is not unique.
//!
//! The pieces fit together like this:
//!
//! * [`linalg`] is a small dense-matrix kernel (the only math backend used
//!   anywhere in the workspace),
//! * [`models`] defines datasets and the least-squares / ridge objective,
//! * [`optimizers`] runs plain and preconditioned gradient descent
//!   iteratively,
//! * [`closed_form`] evaluates the same trajectories non-iteratively from
//!   matrix products, which is how the iterative engine is cross-checked,
//! * [`solutions`] computes reference points (least-squares, minimum-norm,
//!   ridge, and a fixed-point direction for the squared-denominator
//!   preconditioner),
//! * [`counterexamples`] builds the structured sparse classification
//!   datasets on which adaptive methods generalize differently from
//!   gradient descent,
//! * [`experiments`] is the Monte-Carlo harness that aggregates trials into
//!   report tables.

pub mod closed_form;
pub mod counterexamples;
mod error;
pub mod experiments;
pub mod linalg;
pub mod models;
pub mod optimizers;
pub mod rng;
pub mod solutions;

pub use error::{Error, Result};
