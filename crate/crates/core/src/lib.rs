//! Approximate principal direction (APD) trees.
//!
//! A spatial partition tree recursively halves a point set. At every node
//! the points are either split by a sphere around the node mean (when the
//! node has outliers) or by a hyperplane through the median projection onto
//! a direction chosen by a [`SplitRule`]:
//!
//! - `Rp`: a uniformly random unit vector,
//! - `Apd { iterations }`: a random unit vector refined by a few power
//!   iterations against the node covariance (never materialized),
//! - `Pca`: the power method run to convergence.
//!
//! The crate is `no_std` (with `alloc`). The default `std` feature only
//! affects `Error` trait impls; `parallel` builds tree levels and synthetic
//! data with rayon while keeping results bit-identical to the serial path.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod error;
pub mod eval;
pub mod geometry;
pub mod linalg;
pub mod rng;
pub mod split;
pub mod synthetic;
pub mod tree;

pub use error::Error;
pub use eval::{
    covariance_spectrum, diameter_reduction_profile, local_cov_dim, split_ratios, vq_error,
    DepthReduction, LocalDim, SpectrumSummary, SplitRatio,
};
pub use geometry::{
    avg_diameter_sq, avg_diameter_sq_pair, directional_variance, heuristic_diameter_sq,
    subset_mean, Dataset, DiameterStats, PointSubset,
};
pub use rng::RngStream;
pub use split::{apd_direction, pca_direction, random_unit_vector, Direction, SplitRule};
pub use synthetic::{gen_synthetic, SyntheticSpec};
pub use tree::{
    build_tree, build_tree_with_observer, has_outliers, split_node, NodeKind, PartitionTree, Split,
    SplitOutcome, TreeConfig, TreeNode,
};

pub type Result<T> = core::result::Result<T, Error>;
