//! End-to-end monitoring engine: gate → track → measure per camera, then a
//! per-frame fusion barrier that turns per-view distances into warnings.
//!
//! Cameras are independent up to the barrier, so the engine processes them
//! in parallel on the ambient rayon pool; outputs are gathered in camera
//! order and fused sequentially, which keeps every artifact identical
//! across thread counts.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::config::ResolvedScenario;
use crate::contour::{extract_contour, Contour};
use crate::distance::{contour_pair_distance, StridePolicy};
use crate::error::{Error, Result};
use crate::model::{CameraId, CategoryId, CategoryPair, FrameBundle};
use crate::monitor::{
    evaluate_frame, ConfirmState, MonitorConfig, ViewDistances, WarningEvent,
};
use crate::pipeline::{check_geometry, GateConfig, GateState, GateStatus, ScenePrior};
use crate::sim::{CameraSpec, Scenario};
use crate::storage::{Manifest, RunDir};
use crate::tracking::{bundle_from_tracks, Tracker, TrackerConfig};

/// Source of per-frame mask bundles, one per camera in camera order — the
/// seam where a real segmenter can replace the simulator or a recorded
/// stream.
pub trait MaskSource {
    /// Bundles for the next frame, or `None` once the stream ends. A live
    /// source need not know its length up front.
    fn next_frame(&mut self) -> Option<Result<Vec<FrameBundle>>>;
}

/// Mask source backed by the scene simulator's observed (noisy) stream.
pub struct SimMaskSource {
    scenario: Scenario,
    frame: u64,
}

impl SimMaskSource {
    pub fn new(scenario: Scenario) -> Self {
        SimMaskSource { scenario, frame: 0 }
    }
}

impl MaskSource for SimMaskSource {
    fn next_frame(&mut self) -> Option<Result<Vec<FrameBundle>>> {
        if self.frame >= self.scenario.frame_count {
            return None;
        }
        let frame = self.scenario.render_frame(self.frame);
        self.frame += 1;
        Some(Ok(frame.observed))
    }
}

/// Mask source backed by a recorded run directory.
pub struct StreamMaskSource {
    run: RunDir,
    manifest: Manifest,
    frame: u64,
}

impl StreamMaskSource {
    pub fn new(run: RunDir, manifest: Manifest) -> Self {
        StreamMaskSource {
            run,
            manifest,
            frame: 0,
        }
    }
}

impl MaskSource for StreamMaskSource {
    fn next_frame(&mut self) -> Option<Result<Vec<FrameBundle>>> {
        if self.frame >= self.manifest.frame_count {
            return None;
        }
        let bundles = self.run.read_frame(&self.manifest, self.frame);
        self.frame += 1;
        Some(bundles)
    }
}

/// Per-camera half of the pipeline: geometry check, temporal gate,
/// tracking, contour extraction, pair distances.
struct CameraWorker {
    spec: CameraSpec,
    prior: ScenePrior,
    gate_cfg: GateConfig,
    gates: BTreeMap<CategoryId, GateState>,
    tracker: Tracker,
    stride: StridePolicy,
}

/// What one camera contributes to the fusion barrier for one frame.
#[derive(Debug, Clone)]
pub struct CameraFrameOutput {
    pub camera: CameraId,
    /// Post-gate, post-smoothing masks per category.
    pub processed: FrameBundle,
    /// Gate verdict per category this view could see.
    pub statuses: BTreeMap<CategoryId, GateStatus>,
    /// Measured distance per pair; `None` when the pair is not measurable
    /// in this view (absent, empty, or lost).
    pub distances: BTreeMap<CategoryPair, Option<f64>>,
}

/// Wall-clock seconds spent in each pipeline stage, summed over cameras
/// and frames (per-view work overlaps under parallel execution, so stages
/// can sum to more than elapsed wall time).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTotals {
    pub gate_s: f64,
    pub track_s: f64,
    pub measure_s: f64,
    pub fuse_s: f64,
}

impl CameraWorker {
    fn process(
        &mut self,
        raw: &FrameBundle,
        pairs: &[CategoryPair],
    ) -> (CameraFrameOutput, StageTotals) {
        let mut timings = StageTotals::default();
        let t0 = std::time::Instant::now();
        let geometry = check_geometry(raw, &self.prior);

        let mut gated = FrameBundle::new(raw.camera, raw.frame_index, 1.0);
        gated.timestamp_s = raw.timestamp_s;
        let mut statuses = BTreeMap::new();
        for &cat in &self.spec.visible {
            let current = raw.mask(cat);
            let geometry_ok = !geometry.involves(cat);
            let state = self.gates.entry(cat).or_default();
            let (mask, status) = state.step(current, &self.gate_cfg, geometry_ok);
            statuses.insert(cat, status);
            if let Some(mask) = mask {
                if !mask.is_empty() {
                    gated.masks.insert(cat, mask);
                }
            }
        }

        timings.gate_s = t0.elapsed().as_secs_f64();

        let t1 = std::time::Instant::now();
        let tracked = self.tracker.step(&gated);
        let processed = bundle_from_tracks(&gated, &tracked);
        timings.track_s = t1.elapsed().as_secs_f64();
        let t2 = std::time::Instant::now();

        // Lost categories are excluded from measurement: the pass-through
        // mask keeps the tracker alive but carries no safety evidence.
        let mut contours: BTreeMap<CategoryId, Contour> = BTreeMap::new();
        for (&cat, mask) in &processed.masks {
            if statuses.get(&cat) == Some(&GateStatus::Lost) {
                continue;
            }
            if let Ok(contour) = extract_contour(mask) {
                contours.insert(cat, contour);
            }
        }

        let mut distances = BTreeMap::new();
        for &pair in pairs {
            let measurable = contours.contains_key(&pair.0) && contours.contains_key(&pair.1);
            if !measurable {
                distances.insert(pair, None);
                continue;
            }
            let (ma, mb) = (&processed.masks[&pair.0], &processed.masks[&pair.1]);
            let d = if ma.overlaps(mb).expect("camera masks share resolution") {
                0.0
            } else {
                contour_pair_distance(
                    raw.camera,
                    pair,
                    raw.frame_index,
                    &contours[&pair.0],
                    &contours[&pair.1],
                    self.stride,
                )
                .expect("contours checked non-empty")
                .distance_px
            };
            distances.insert(pair, Some(d));
        }
        timings.measure_s = t2.elapsed().as_secs_f64();

        (
            CameraFrameOutput {
                camera: raw.camera,
                processed,
                statuses,
                distances,
            },
            timings,
        )
    }
}

/// Fused output for one frame.
#[derive(Debug, Clone)]
pub struct FrameDecisions {
    pub frame_index: u64,
    pub per_camera: Vec<CameraFrameOutput>,
    pub events: Vec<WarningEvent>,
    pub any_confirmed: bool,
}

/// The full monitoring engine over N cameras.
pub struct MonitorEngine {
    workers: Vec<CameraWorker>,
    monitor_cfg: MonitorConfig,
    pairs: Vec<CategoryPair>,
    confirm: BTreeMap<CategoryPair, ConfirmState>,
    next_frame: u64,
    stage_totals: StageTotals,
}

impl MonitorEngine {
    pub fn new(resolved: &ResolvedScenario) -> Self {
        Self::with_cameras(resolved, None)
    }

    /// Engine restricted to a camera subset (`None` = all cameras).
    pub fn with_cameras(resolved: &ResolvedScenario, cameras: Option<&[CameraId]>) -> Self {
        let workers = resolved
            .scenario
            .cameras
            .iter()
            .filter(|spec| cameras.is_none_or(|ids| ids.contains(&spec.camera.id)))
            .map(|spec| CameraWorker {
                spec: spec.clone(),
                prior: resolved.prior.clone(),
                gate_cfg: resolved.gate,
                gates: BTreeMap::new(),
                tracker: Tracker::new(TrackerConfig {
                    match_threshold: resolved.tracker.match_threshold,
                    max_missed: resolved.tracker.max_missed,
                    window: resolved.tracker.window,
                }),
                stride: resolved.stride,
            })
            .collect();
        MonitorEngine {
            workers,
            monitor_cfg: resolved.monitor,
            pairs: resolved.scenario.pairs(),
            confirm: BTreeMap::new(),
            next_frame: 0,
            stage_totals: StageTotals::default(),
        }
    }

    pub fn camera_ids(&self) -> Vec<CameraId> {
        self.workers.iter().map(|w| w.spec.camera.id).collect()
    }

    pub fn stage_totals(&self) -> StageTotals {
        self.stage_totals
    }

    /// Process one frame's bundles (one per engine camera, camera order).
    /// Cameras run in parallel; fusion happens after all have finished.
    pub fn process_frame(&mut self, bundles: &[FrameBundle]) -> Result<FrameDecisions> {
        let by_camera: BTreeMap<CameraId, &FrameBundle> =
            bundles.iter().map(|b| (b.camera, b)).collect();
        let frame_index = self.next_frame;
        for w in &self.workers {
            let Some(b) = by_camera.get(&w.spec.camera.id) else {
                return Err(Error::Alignment(format!(
                    "no bundle for camera {} at frame {frame_index}",
                    w.spec.camera.name
                )));
            };
            if b.frame_index != frame_index {
                return Err(Error::Alignment(format!(
                    "expected frame {frame_index}, camera {} carries {}",
                    w.spec.camera.name, b.frame_index
                )));
            }
        }

        let pairs = &self.pairs;
        let outputs: Vec<(CameraFrameOutput, StageTotals)> = self
            .workers
            .par_iter_mut()
            .map(|w| w.process(by_camera[&w.spec.camera.id], pairs))
            .collect();
        let mut per_camera = Vec::with_capacity(outputs.len());
        for (out, t) in outputs {
            self.stage_totals.gate_s += t.gate_s;
            self.stage_totals.track_s += t.track_s;
            self.stage_totals.measure_s += t.measure_s;
            per_camera.push(out);
        }

        // Fusion barrier: every view of this frame is in hand.
        let fuse_start = std::time::Instant::now();
        let mut events = Vec::with_capacity(self.pairs.len());
        let mut any_confirmed = false;
        for &pair in &self.pairs {
            let distances: ViewDistances = per_camera
                .iter()
                .map(|out| (out.camera, out.distances.get(&pair).copied().flatten()))
                .collect();
            let decision = evaluate_frame(&distances, &self.monitor_cfg);
            let confirmed = self
                .confirm
                .entry(pair)
                .or_default()
                .update(decision.raw, self.monitor_cfg.consecutive_k);
            any_confirmed |= confirmed;
            let degraded = per_camera.iter().any(|out| {
                [pair.0, pair.1].iter().any(|cat| {
                    matches!(
                        out.statuses.get(cat),
                        Some(GateStatus::Substituted) | Some(GateStatus::Lost)
                    )
                })
            });
            events.push(WarningEvent {
                frame_index,
                pair,
                raw: decision.raw,
                confirmed,
                views_used: decision.views_used,
                min_distances_px: distances,
                unknown: decision.unknown,
                degraded,
            });
        }

        self.stage_totals.fuse_s += fuse_start.elapsed().as_secs_f64();
        self.next_frame += 1;
        Ok(FrameDecisions {
            frame_index,
            per_camera,
            events,
            any_confirmed,
        })
    }
}

/// Aggregate counters for a finished run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MonitorSummary {
    pub frames: u64,
    pub raw_warnings: u64,
    pub confirmed_warnings: u64,
}

impl MonitorSummary {
    pub fn any_confirmed(&self) -> bool {
        self.confirmed_warnings > 0
    }
}

/// Simulate a resolved scenario and monitor it in one pass, handing each
/// frame's fused decisions and analytic ground truth to `on_frame`.
pub fn run_scenario(
    resolved: &ResolvedScenario,
    mut on_frame: impl FnMut(&FrameDecisions, &crate::sim::SimFrame) -> Result<()>,
) -> Result<MonitorSummary> {
    let mut engine = MonitorEngine::new(resolved);
    let mut summary = MonitorSummary::default();
    for frame in resolved.scenario.simulate() {
        let decisions = engine.process_frame(&frame.observed)?;
        summary.frames += 1;
        summary.raw_warnings += decisions.events.iter().filter(|e| e.raw).count() as u64;
        summary.confirmed_warnings +=
            decisions.events.iter().filter(|e| e.confirmed).count() as u64;
        on_frame(&decisions, &frame)?;
    }
    Ok(summary)
}

/// Drive a source through the engine, invoking `on_frame` after fusion.
pub fn drive<S: MaskSource>(
    engine: &mut MonitorEngine,
    source: &mut S,
    mut on_frame: impl FnMut(&FrameDecisions) -> Result<()>,
) -> Result<MonitorSummary> {
    let mut summary = MonitorSummary::default();
    while let Some(bundles) = source.next_frame() {
        let decisions = engine.process_frame(&bundles?)?;
        summary.frames += 1;
        summary.raw_warnings += decisions.events.iter().filter(|e| e.raw).count() as u64;
        summary.confirmed_warnings +=
            decisions.events.iter().filter(|e| e.confirmed).count() as u64;
        on_frame(&decisions)?;
    }
    Ok(summary)
}
