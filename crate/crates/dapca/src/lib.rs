//! Weighted-pairs PCA and linear domain adaptation.
//!
//! This crate implements a family of linear dimensionality-reduction methods
//! built on one objective: maximize the weighted sum of squared pairwise
//! distances between data-point projections,
//! `H_W = 1/2 Σ_ij W_ij ‖P(z_i − z_j)‖²`, over orthonormal projections `P`.
//! Positive weights push projections apart, negative weights pull them
//! together. Different weight schemes recover:
//!
//! - **PCA** — all weights equal (classical principal components),
//! - **SPCA** — supervised PCA: same-class attraction, cross-class repulsion,
//! - **SSPCA** — semi-supervised PCA: SPCA on a labeled source plus a uniform
//!   repulsion block on an unlabeled target,
//! - **STCA** — supervised transfer component analysis: SSPCA plus a rank-1
//!   penalty attracting the projected domain means,
//! - **DAPCA** — domain-adaptation PCA: iterative kNN matching between target
//!   and source points, with attractive cross-domain weights rebuilt each
//!   iteration.
//!
//! The quadratic-form matrix `Q^W` is assembled from per-class sums without
//! ever materializing the `N×N` weight matrix; a dense oracle
//! ([`gram::gram_oracle`]) is provided for verification.
//!
//! See the `examples/` directory for runnable walkthroughs of each
//! capability, and the `dapca` binary for a batch CLI.

pub mod dataset;
pub mod eigen;
pub mod error;
pub mod fit;
pub mod gram;
pub mod validate;
pub mod weights;

pub use dataset::{Dataset, ToyConfig};
pub use eigen::{ProjectionModel, Spectrum};
pub use error::{Error, Result};
pub use fit::{FitConfig, KnnAssignment, KnnSpace, Method};
pub use gram::GramMatrix;
pub use validate::ValidationReport;
pub use weights::{DeltaSpec, EffectiveBlockConstants};
