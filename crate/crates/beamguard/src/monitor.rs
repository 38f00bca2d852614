//! Collision-warning fusion and reliability arithmetic.
//!
//! A raw warning for a category pair fires only when every camera that can
//! see the pair measures a distance at or below the threshold; occluded or
//! lost views drop out of the quantifier instead of vetoing or forcing the
//! decision. Raw warnings harden into confirmed warnings after `k`
//! consecutive frames, and independent replicas vote fail-safe. Both
//! mechanisms multiply the per-frame error probability down, which is what
//! the reliability helpers quantify.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{CameraId, CategoryPair};

/// Seconds per Julian year, used for mean-time-between-errors readouts.
pub const SECONDS_PER_YEAR: f64 = 31_557_600.0;

/// How views that cannot see a pair enter the all-view rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbsentViewPolicy {
    /// Absent views are excluded from the quantifier (default): the rule
    /// runs over the views with visibility.
    Exclude,
    /// Absent views count as far apart, so any absent view vetoes the
    /// warning.
    TreatAsFar,
}

/// Fusion and confirmation tuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorConfig {
    /// Collision threshold in pixels, applied per view.
    pub delta_px: f64,
    /// Consecutive raw warnings required to confirm.
    pub consecutive_k: u32,
    /// Independent monitoring replicas assumed by the reliability model.
    pub replicas_r: u32,
    pub absent_view_policy: AbsentViewPolicy,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig {
            delta_px: 10.0,
            consecutive_k: 1,
            replicas_r: 1,
            absent_view_policy: AbsentViewPolicy::Exclude,
        }
    }
}

/// Per-view distance readings for one pair at one frame; `None` marks a
/// view where the pair is not visible (absent, empty, or lost).
pub type ViewDistances = BTreeMap<CameraId, Option<f64>>;

/// Raw all-view decision for one pair at one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDecision {
    pub raw: bool,
    /// Views that actually entered the quantifier.
    pub views_used: Vec<CameraId>,
    /// True when no view could see the pair, so the decision carries no
    /// evidence either way.
    pub unknown: bool,
}

/// Evaluate the all-view rule for one pair at one frame: raw is true iff
/// the distance is at or below `delta_px` in every view that can see the
/// pair. With no visible views the decision is `raw = false, unknown`.
pub fn evaluate_frame(distances: &ViewDistances, cfg: &MonitorConfig) -> RawDecision {
    let mut views_used = Vec::new();
    let mut all_below = true;
    let mut any_absent = false;
    for (&camera, d) in distances {
        match d {
            Some(d) => {
                views_used.push(camera);
                if *d > cfg.delta_px {
                    all_below = false;
                }
            }
            None => any_absent = true,
        }
    }
    if views_used.is_empty() {
        return RawDecision {
            raw: false,
            views_used,
            unknown: true,
        };
    }
    let raw = match cfg.absent_view_policy {
        AbsentViewPolicy::Exclude => all_below,
        AbsentViewPolicy::TreatAsFar => all_below && !any_absent,
    };
    RawDecision {
        raw,
        views_used,
        unknown: false,
    }
}

/// Sliding confirmation state for one pair.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConfirmState {
    consecutive_raw: u32,
}

impl ConfirmState {
    pub fn new() -> Self {
        ConfirmState::default()
    }

    /// Record this frame's raw flag; returns true when the last `k` raw
    /// flags (including this one) were all true. Histories shorter than `k`
    /// never confirm.
    pub fn update(&mut self, raw: bool, k: u32) -> bool {
        if raw {
            self.consecutive_raw = self.consecutive_raw.saturating_add(1);
        } else {
            self.consecutive_raw = 0;
        }
        self.consecutive_raw >= k
    }
}

/// Confirmation over a recorded history: true iff the last `k` raw flags
/// are all true. A history shorter than `k` is insufficient evidence.
pub fn confirm(history: &[bool], k: u32) -> bool {
    let k = k as usize;
    if k == 0 || history.len() < k {
        return k == 0;
    }
    history[history.len() - k..].iter().all(|&r| r)
}

/// Fuse the decisions of independent replicas: unanimous agreement returns
/// the agreed value, disagreement fails safe toward a warning.
pub fn fuse_replicas(decisions: &[bool]) -> bool {
    assert!(!decisions.is_empty(), "at least one replica required");
    let first = decisions[0];
    if decisions.iter().all(|&d| d == first) {
        first
    } else {
        true
    }
}

/// Calibrated threshold from the worst distance-error cell: one-sided
/// Gaussian-style bound MAE + 2·STD, rounded up to the next whole pixel.
/// The second return marks the degenerate all-zero case.
///
/// ```
/// use beamguard::monitor::calibrate_threshold;
///
/// // worst observed cell 3.9 / 2.8 px -> ceil(9.5) -> 10 px threshold
/// assert_eq!(calibrate_threshold(3.9, 2.8), (10, false));
/// ```
pub fn calibrate_threshold(mae_max: f64, std_max: f64) -> (u32, bool) {
    let delta = (mae_max + 2.0 * std_max).ceil();
    (delta as u32, delta <= 0.0)
}

/// Reliability model for the redundancy cascade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityModel {
    /// Per-frame, per-system error probability.
    pub per_frame_error_p: f64,
    pub replicas_r: u32,
    pub consecutive_k: u32,
    pub fps: f64,
}

/// Combined per-frame error probability under the independence assumption:
/// `r` fused replicas and `k` consecutive confirmations each multiply an
/// independent factor of `p`.
pub fn combined_error(model: &ReliabilityModel) -> f64 {
    model
        .per_frame_error_p
        .powi((model.replicas_r * model.consecutive_k) as i32)
}

/// Mean time between detection errors. `None` means the combined error
/// probability is zero, i.e. the mean time is unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanTimeBetweenErrors {
    pub seconds: f64,
    pub years: f64,
}

pub fn mean_time_between_errors(model: &ReliabilityModel) -> Option<MeanTimeBetweenErrors> {
    let p = combined_error(model);
    if p <= 0.0 || model.fps <= 0.0 {
        return None;
    }
    let seconds = 1.0 / (p * model.fps);
    Some(MeanTimeBetweenErrors {
        seconds,
        years: seconds / SECONDS_PER_YEAR,
    })
}

/// One fused decision for a pair at a frame, as appended to the event log.
#[derive(Debug, Clone, PartialEq)]
pub struct WarningEvent {
    pub frame_index: u64,
    pub pair: CategoryPair,
    pub raw: bool,
    pub confirmed: bool,
    pub views_used: Vec<CameraId>,
    pub min_distances_px: ViewDistances,
    pub unknown: bool,
    /// True when any view contributing to this pair ran on substituted or
    /// lost masks this frame.
    pub degraded: bool,
}
