//! Segmentation error analysis for labeled point clouds.
//!
//! Boundary pseudo-labels from a grid radius scan, fine-grained error
//! metrics next to the usual IoU/accuracy numbers, synthetic scenes with
//! controlled label corruption, file formats, and a small forward-only
//! attention/loss toolkit.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod boundary;
pub mod bsa;
pub mod components;
mod error;
pub mod io;
pub mod metrics;
mod parallel;
pub mod rng;
pub mod spatial;
pub mod synth;
mod types;

pub use boundary::{compute_boundary_mask, compute_boundary_mask_brute, compute_boundary_mask_with};
pub use components::{extract_components, Component, Components};
pub use error::{Error, ErrorKind, Result};
pub use metrics::{
    aggregate, evaluate_scene, evaluate_scene_with, evaluate_sweep, Counters, Metrics, MetricsReport,
    SWEEP_RADII,
};
pub use parallel::Workers;
pub use spatial::{brute_force_neighbors, build_grid, radius_neighbors, SpatialGrid};
pub use synth::{corrupt_labels, generate_scene, CorruptionMode, Generator, SceneSpec};
pub use types::*;
