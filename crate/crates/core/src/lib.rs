//! Random geometric graphs with line-of-sight links inside exactly
//! self-similar fractal domains.
//!
//! The pipeline is: build a [`FractalDomain`], scatter a Poisson
//! [`NodeSet`] in it, link nodes within range that can see each other, and
//! estimate how often the resulting network is connected.

pub mod connectivity;
pub mod domain;
pub mod error;
pub mod experiments;
pub mod formats;
pub mod geometry;
pub mod sampling;
pub mod similarity;
mod union_find;
pub mod visibility;

pub use connectivity::{analyze, build_network, connectivity_report, expected_isolated, ConnectivityReport, Network};
pub use domain::{fold_to_top, Family, FractalDomain, FractalSpec, Membership, DEFAULT_MAX_DEPTH};
pub use error::{Error, Result};
pub use experiments::{
    fit_stretched_exponential, gateway_estimate, run_sweep, scaling_check, wilson_interval, FitResult,
    ScalingPair, SweepConfig, SweepRow,
};
pub use geometry::{Point2, Segment2};
pub use sampling::{sample_poisson_nodes, NodeSet};
pub use similarity::SimilarityMap;
pub use visibility::{line_of_sight, segment_hits_edge_curve, VisibilityVerdict};
