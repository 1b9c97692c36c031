//! Numerical laboratory for the sparse random combinatorial matrix model
//! `M_{n,d}`: `n x n` (or `m x n`) 0/1 matrices whose rows are independent
//! uniformly random `d`-subsets of the columns.
//!
//! The crate is organised by subsystem:
//!
//! * [`model`] samples the ensembles and provides the deterministic transforms
//!   (normalization, shifts, expectation, complement).
//! * [`spectral`] wraps the dense eigen/singular-value backend and implements
//!   the linear-algebra identities used throughout (interlacing, negative
//!   second moment, row distances).
//! * [`circular`] holds the reference measures and the spectral distances.
//! * [`vectors`] implements the vector-class machinery (rearrangements,
//!   almost-constant and steep classes, triple norm, rate functions).
//! * [`graph`] holds the combinatorial diagnostics (column sums, restricted
//!   norm, expansion, discrepancy, negative-association tools).
//! * [`distance`] holds the distance statistics and the invertibility-via-
//!   distance relation.
//! * [`oracle`] enumerates `M_{n,d}` exhaustively for exact ground truth.
//! * [`threshold`] runs Monte Carlo experiments around the `log n` threshold.

pub mod circular;
pub mod combin;
pub mod distance;
pub mod error;
pub mod graph;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod threshold;
pub mod vectors;

pub use error::{Error, Result};
pub use model::{DenseComplexMatrix, ModelParams, RowSupportMatrix, SupportLists};
pub use num_complex::Complex64;
pub use rng::{derive_seed, stream, RcmRng};
