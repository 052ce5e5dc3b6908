//! Exact verification of shallow and Two-Level-Lattice ReLU networks against
//! convex polytopic input/output constraints.
//!
//! The pipeline: read the network's switching hyperplanes straight off its
//! parameters, enumerate every full-dimensional region of that hyperplane
//! arrangement by walking a rank-ordered adjacency poset, recover the single
//! affine function the network computes on each region, and decide each output
//! constraint there with one linear program. A verdict is either SAT or UNSAT
//! with a concrete counterexample input.

pub mod arrangement;
pub mod error;
pub mod formats;
pub mod geometry;
pub mod network;
pub mod oracle;
pub mod verifier;

pub use error::{Error, Result};
pub use geometry::{Context, Tolerances};
