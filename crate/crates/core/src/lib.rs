//! Kernel dissimilarity metric for mixed continuous and categorical data,
//! with cross-validated bandwidth selection, baseline mixed-type metrics,
//! distance-based clustering, evaluation and simulation generators.

pub mod bandwidth;
pub mod baselines;
pub mod clustering;
pub mod datagen;
pub mod error;
pub mod evaluation;
pub mod harness;
pub mod io;
pub mod kernels;
pub mod similarity;
pub mod types;

pub use bandwidth::{mscv_objective, select_bandwidths, CvResult, OptimizerOptions};
pub use baselines::{baseline_matrix, BaselineKind};
pub use clustering::{cut, hac, kmeans_dist, ClusterLabels, Dendrogram, Linkage};
pub use datagen::{gen_sim, Generated, SimSpec};
pub use error::{Error, Result};
pub use evaluation::{
    ari, clustering_accuracy, contingency, evaluate, ClusteringReport, ContingencyTable,
};
pub use kernels::{ContinuousKernel, KernelSelection};
pub use similarity::{build_matrix, kdsum_distance, psi, SimilarityConfig};
pub use types::*;
