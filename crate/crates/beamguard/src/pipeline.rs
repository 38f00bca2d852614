//! Mask validation: geometry-prior checks and the temporal-consistency gate.
//!
//! Raw per-frame masks can glitch — vanish for a frame, or jump somewhere
//! that contradicts the rig's known layout. This stage rejects such masks
//! and substitutes the last accepted one, bounded by a streak cap so a stale
//! mask can never be frozen forever.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CategoryId, FrameBundle, Mask};

/// Required relative placement of one category against another, compared on
/// foreground centroids. `Above` means a strictly smaller centroid row
/// (rows grow downward).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialRelation {
    Above,
    Below,
    LeftOf,
    RightOf,
    Any,
}

/// One prior-knowledge constraint: in this camera, `a` must hold `required`
/// relative to `b`, with centroid separation beyond `margin_px` to count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorEntry {
    pub a: CategoryId,
    pub b: CategoryId,
    pub required: SpatialRelation,
    pub margin_px: f64,
}

/// Per-camera table of required spatial relations between category pairs.
#[derive(Debug, Clone, Default)]
pub struct ScenePrior {
    entries: BTreeMap<usize, Vec<PriorEntry>>,
}

impl ScenePrior {
    pub fn new() -> Self {
        ScenePrior::default()
    }

    /// Register a constraint for camera `camera_index`. At most one entry
    /// per ordered pair per camera.
    pub fn add(&mut self, camera_index: usize, entry: PriorEntry) -> Result<()> {
        let list = self.entries.entry(camera_index).or_default();
        if list.iter().any(|e| e.a == entry.a && e.b == entry.b) {
            return Err(Error::InvalidParameter {
                name: "prior",
                reason: format!(
                    "duplicate prior for pair ({}, {}) in camera {}",
                    entry.a.0, entry.b.0, camera_index
                ),
            });
        }
        list.push(entry);
        Ok(())
    }

    pub fn for_camera(&self, camera_index: usize) -> &[PriorEntry] {
        self.entries
            .get(&camera_index)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

/// Observed relation of mask `a` relative to mask `b`. `None` means neither
/// axis separates the centroids by more than the margin.
pub fn relation(a: &Mask, b: &Mask, margin_px: f64) -> Result<Option<SpatialRelation>> {
    let (ar, ac) = a.centroid()?;
    let (br, bc) = b.centroid()?;
    if ar < br - margin_px {
        return Ok(Some(SpatialRelation::Above));
    }
    if ar > br + margin_px {
        return Ok(Some(SpatialRelation::Below));
    }
    if ac < bc - margin_px {
        return Ok(Some(SpatialRelation::LeftOf));
    }
    if ac > bc + margin_px {
        return Ok(Some(SpatialRelation::RightOf));
    }
    Ok(None)
}

/// Outcome of evaluating a bundle against its camera's prior table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GeometryReport {
    /// Ordered pairs whose observed relation contradicts the requirement.
    pub violations: Vec<(CategoryId, CategoryId)>,
    /// Entries that could not be checked because a category was absent or
    /// empty this frame.
    pub unchecked: Vec<(CategoryId, CategoryId)>,
}

impl GeometryReport {
    pub fn involves(&self, category: CategoryId) -> bool {
        self.violations
            .iter()
            .any(|&(a, b)| a == category || b == category)
    }
}

/// Evaluate every prior entry for the bundle's camera. An `any` requirement
/// never violates; an indeterminate observation violates any directional
/// requirement.
pub fn check_geometry(bundle: &FrameBundle, prior: &ScenePrior) -> GeometryReport {
    let mut report = GeometryReport::default();
    for entry in prior.for_camera(bundle.camera.0) {
        let (ma, mb) = (bundle.mask(entry.a), bundle.mask(entry.b));
        let (ma, mb) = match (ma, mb) {
            (Some(a), Some(b)) if !a.is_empty() && !b.is_empty() => (a, b),
            _ => {
                report.unchecked.push((entry.a, entry.b));
                continue;
            }
        };
        if entry.required == SpatialRelation::Any {
            continue;
        }
        let observed = relation(ma, mb, entry.margin_px)
            .expect("masks checked non-empty and same-camera resolution");
        if observed != Some(entry.required) {
            report.violations.push((entry.a, entry.b));
        }
    }
    report
}

/// Temporal gate tuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateConfig {
    /// Accept a mask as fresh only when IoU against the last accepted mask
    /// reaches this value ("largely changed" rejected below it).
    pub change_iou_threshold: f64,
    /// Maximum consecutive substitutions before the gate declares the
    /// category lost and fails open to the raw input.
    pub max_streak: u32,
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig {
            change_iou_threshold: 0.5,
            max_streak: 5,
        }
    }
}

/// Gate verdict for one (camera, category, frame).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateStatus {
    /// Current mask accepted and recorded as the new reference.
    Fresh,
    /// Current mask rejected; the last accepted mask was substituted.
    Substituted,
    /// Substitution budget exhausted; raw input passed through unmodified.
    Lost,
}

/// Per-(camera, category) gate memory.
#[derive(Debug, Clone, Default)]
pub struct GateState {
    last_valid: Option<Mask>,
    substitution_streak: u32,
}

impl GateState {
    pub fn new() -> Self {
        GateState::default()
    }

    pub fn substitution_streak(&self) -> u32 {
        self.substitution_streak
    }

    /// Advance the gate by one frame.
    ///
    /// Accepts `current` as fresh when it is present, non-empty, geometry
    /// consistent, and similar enough to the last accepted mask. Otherwise
    /// substitutes the last accepted mask until the streak cap is reached,
    /// after which the raw input (possibly absent) passes through with a
    /// `Lost` status. A non-empty, geometry-consistent input on a lost frame
    /// is adopted as the new reference so the gate re-acquires on its own.
    pub fn step(
        &mut self,
        current: Option<&Mask>,
        cfg: &GateConfig,
        geometry_ok: bool,
    ) -> (Option<Mask>, GateStatus) {
        let acceptable = match current {
            Some(m) if !m.is_empty() && geometry_ok => match &self.last_valid {
                None => true,
                Some(prev) => {
                    m.iou(prev).expect("gate masks share camera resolution")
                        >= cfg.change_iou_threshold
                }
            },
            _ => false,
        };
        if acceptable {
            let m = current.unwrap().clone();
            self.last_valid = Some(m.clone());
            self.substitution_streak = 0;
            return (Some(m), GateStatus::Fresh);
        }
        if self.last_valid.is_some() && self.substitution_streak < cfg.max_streak {
            self.substitution_streak += 1;
            return (self.last_valid.clone(), GateStatus::Substituted);
        }
        // Fail open: emit whatever arrived, flagged lost. Re-acquire from a
        // usable input so a genuinely changed scene recovers next frame.
        match current {
            Some(m) if !m.is_empty() && geometry_ok => {
                self.last_valid = Some(m.clone());
                self.substitution_streak = 0;
                (Some(m.clone()), GateStatus::Lost)
            }
            _ => {
                self.substitution_streak = self.substitution_streak.saturating_add(1);
                (current.cloned(), GateStatus::Lost)
            }
        }
    }
}
