//! Dense linear algebra: the rank-one eigen-update and its supporting
//! routines.

pub mod deflation;
pub mod general;
pub mod jacobi;
pub mod mat;
pub mod secular;
pub mod update;

pub use deflation::{deflate, DeflationRecord, Reflector};
pub use general::{condition_1, least_squares, singular_values, small_general_eig, solve};
pub use jacobi::{dense_eig_oracle, DenseEig};
pub use mat::Mat;
pub use secular::{secular_root, DiagonalSpectrum, RankOneUpdate, SecularSolveResult};
pub use update::{rank_one_eigenupdate, RankOneSolution};
