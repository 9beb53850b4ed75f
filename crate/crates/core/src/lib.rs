//! Information-theoretic subspace search and subspace anomaly-detection ensembles.
//!
//! The crate is organised bottom-up:
//!
//! - [`table`] and [`partition`]: discrete tables and the row partitions their
//!   attributes induce.
//! - [`measures`]: entropies, Rokhlin distance, interaction information, the
//!   multi-attribute measure and its normalized form, Total Correlation and
//!   Symmetric Uncertainty.
//! - [`aag`]: the agglomerative attribute grouping search producing a set of
//!   correlated subspaces.
//! - [`preprocess`]: CSV ingestion, imputation and equal-frequency binning.
//! - [`ensemble`]: per-subspace minimum-volume cell detectors combined by a
//!   weighted vote.
//! - [`eval`]: benchmark split generators, F1 and the subspace stability index.

pub mod aag;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod measures;
pub mod partition;
pub mod pipeline;
pub mod preprocess;
pub mod table;

pub use aag::{jaccard, run_aag, should_unify, AagOptions, Subspace, SubspaceSet};
pub use ensemble::{EnsembleConfig, EnsembleModel, Label, SubspaceDetector};
pub use error::{Error, Result};
pub use measures::Measures;
pub use partition::{induce_partition, Bits, Partition};
pub use preprocess::{PreprocessModel, RawTable};
pub use table::{AttributeSet, DiscreteTable};
