//! Trajectory outlier detection for multivariate vital-sign time series.
//!
//! The pipeline: raw per-minute streams are screened for implausible
//! readings, z-normalized per patient, median-filtered, and segmented into
//! fixed-length epochs; all epoch pairs are compared with the multivariate
//! DTW distance; epochs are ranked by mean pairwise distance and clustered
//! with average-linkage agglomeration, cutting the dendrogram at the largest
//! jump in merge distance; the distance matrix is embedded in 2-D with
//! classical MDS for visualization. A synthetic HR/RR corpus generator with
//! seeded perturbations exercises the whole pipeline end to end.

pub mod cli;
pub mod cluster;
pub mod dtw;
pub mod error;
pub mod io;
pub mod mds;
pub mod plot;
pub mod preprocess;
pub mod signal;
pub mod synth;

pub use error::{Error, Result};
