//! Signed meta-path preference inference on a user-movie-feature graph, and
//! feature-bundle design on top of the inferred scores.
//!
//! The crate is `no_std` (it needs `alloc`). Enable the `parallel` feature to
//! spread dense preference inference over a rayon pool; results are
//! identical for any worker count.
//!
//! Pipeline overview:
//!
//! 1. [`graph`]: ingest ratings and movie-feature memberships, filter to a
//!    dense core, split the ratings into positive and negative weighted graphs.
//! 2. [`walks`]: turn the split into row-stochastic operators and compute
//!    signed walk scores along the three fixed path shapes, either as a full
//!    user-by-feature matrix or aggregated over a target set with sparse
//!    vector chains.
//! 3. [`design`]: pick a per-type feature bundle that maximizes expected
//!    conversions under cardinality or budget constraints.
//! 4. [`eval`]: per-user AUC under k-fold cross validation and design scoring
//!    against popularity/rating baselines.
//! 5. [`itemsets`]: apriori mining and pairwise independence checks over movie
//!    feature sets.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod design;
pub mod error;
pub mod eval;
pub mod graph;
pub mod ids;
pub mod itemsets;
pub mod sparse;
pub mod stats;
pub mod synth;
pub mod walks;

pub use error::{Error, Result};
pub use ids::IdMap;
