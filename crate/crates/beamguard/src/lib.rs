//! Multi-camera collision monitoring for beamline-style workcells.
//!
//! Per-view binary equipment masks flow through geometry-prior checks, a
//! temporal-consistency gate, identity tracking with majority-vote
//! smoothing, and sparse contour-distance measurement; per-view distances
//! fuse into a collision warning only when every camera with visibility
//! agrees. A synthetic scene simulator with an analytic distance oracle
//! closes the loop for end-to-end verification, and redundancy arithmetic
//! (replica fusion, consecutive-frame confirmation) quantifies long-term
//! reliability.
//!
//! ## Pipeline
//!
//! 1. [`sim`] — boxes on trajectories, orthographic views, seeded noise,
//!    exact ground-truth distances.
//! 2. [`pipeline`] — geometry regularization and the temporal gate.
//! 3. [`tracking`] — greedy-IoU identity association, sliding majority
//!    vote.
//! 4. [`distance`] — exact and sparse minimum contour distance.
//! 5. [`monitor`] — all-view warning fusion, confirmation, replica voting,
//!    threshold calibration, reliability arithmetic.
//! 6. [`metrics`] — IoU/mIoU, distance-error MAE/STD, per-view-subset
//!    accuracy.
//!
//! ## Runnable examples
//!
//! One example per capability, under `examples/`:
//!
//! ```text
//! cargo run --release --example simulate_scene      # render a mask stream + ground truth
//! cargo run --release --example run_monitor         # end-to-end collision monitoring
//! cargo run --release --example temporal_gate       # dropout bridging and the lost status
//! cargo run --release --example sparse_stride       # sampling error vs stride bound
//! cargo run --release --example smoothing_ablation  # tracking smoothing on vs off
//! cargo run --release --example view_fusion         # single views vs all-view fusion
//! cargo run --release --example calibrate_threshold # MAE + 2*STD threshold rule
//! cargo run --release --example reliability         # replica/confirmation error cascade
//! cargo run --release --example throughput          # full-resolution pipeline FPS
//! ```
//!
//! The `beamguard` binary wraps the same entry points as subcommands
//! (`simulate`, `monitor`, `calibrate`, `metrics`, `reliability`, `bench`);
//! see the README for the artifact layout and exit-code contract.

pub mod bench;
pub mod cli;
pub mod config;
pub mod contour;
pub mod distance;
pub mod error;
pub mod metrics;
pub mod model;
pub mod monitor;
pub mod pipeline;
pub mod runner;
pub mod sim;
pub mod storage;
pub mod tracking;

pub use error::{Error, Result};
