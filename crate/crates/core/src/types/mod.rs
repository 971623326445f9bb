//! Shared data model: typed datasets, bandwidth vectors and distance matrices.

mod bandwidth;
mod dataset;
mod matrix;

pub use bandwidth::{
    validate_bandwidths, BandwidthVector, BoundsConfig, Interval, DEFAULT_CONTINUOUS_EPSILON,
};
pub use dataset::{Column, Row, TypedDataset, VariableKind, VariableSchema};
pub use matrix::DissimilarityMatrix;
