//! Decentralized online eigendecomposition over graphs.
//!
//! Every node of a network keeps one row of the eigenvector matrix of a
//! streaming Hermitian matrix together with a local copy of the spectrum.
//! Each rank-one change `ρ x xᴴ` is absorbed by projecting `x` onto the
//! current eigenbasis through a network-wide consensus sum, after which
//! every node solves the same secular equation locally and rotates its own
//! row.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod apps;
pub mod consensus;
pub mod exec;
pub mod graph;
pub mod linalg;
pub mod netsim;
pub mod scalar;
pub mod tracker;

pub use error::{Error, Result};
pub use exec::ExecMode;
pub use scalar::Scalar;
