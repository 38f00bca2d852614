//! Evaluation metrics against simulator ground truth: per-category mask
//! IoU and per-camera mIoU, per-pair distance-error MAE/STD, and
//! collision-decision accuracy per view subset.
//!
//! All three reports are streaming accumulators fed one frame at a time,
//! then finished into plain data plus an aligned text table. Undefined
//! cells (a pair never visible in a view, a category never present) render
//! as "-" rather than zeros.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Camera, CameraId, Category, CategoryId, CategoryPair, FrameBundle};
use crate::monitor::{evaluate_frame, AbsentViewPolicy, MonitorConfig, ViewDistances};

/// Mean IoU per (camera, category) and per-camera mIoU.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IoUReport {
    pub cameras: Vec<CameraIoU>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraIoU {
    pub camera_name: String,
    /// Categories with at least one ground-truth appearance in this view,
    /// keyed by name.
    pub per_category: BTreeMap<String, f64>,
    pub miou: Option<f64>,
}

/// Streaming builder for [`IoUReport`].
pub struct IoUAccumulator {
    cameras: Vec<Camera>,
    categories: Vec<Category>,
    sums: BTreeMap<(CameraId, CategoryId), (f64, u64)>,
    next_frame: u64,
}

impl IoUAccumulator {
    pub fn new(cameras: Vec<Camera>, categories: Vec<Category>) -> Self {
        IoUAccumulator {
            cameras,
            categories,
            sums: BTreeMap::new(),
            next_frame: 0,
        }
    }

    /// Add one frame of aligned predicted and ground-truth bundles (one
    /// bundle per camera, in camera order).
    pub fn add_frame(&mut self, pred: &[FrameBundle], gt: &[FrameBundle]) -> Result<()> {
        if pred.len() != gt.len() || pred.len() != self.cameras.len() {
            return Err(Error::Alignment(format!(
                "expected {} camera bundles, got pred={} gt={}",
                self.cameras.len(),
                pred.len(),
                gt.len()
            )));
        }
        for (p, g) in pred.iter().zip(gt) {
            if p.camera != g.camera {
                return Err(Error::Alignment(format!(
                    "camera mismatch: pred {:?} vs gt {:?}",
                    p.camera, g.camera
                )));
            }
            if p.frame_index != g.frame_index || p.frame_index != self.next_frame {
                return Err(Error::Alignment(format!(
                    "frame mismatch at expected {}: pred {} gt {}",
                    self.next_frame, p.frame_index, g.frame_index
                )));
            }
            for (cat, gt_mask) in &g.masks {
                if gt_mask.is_empty() {
                    continue; // category absent in ground truth: skipped
                }
                let iou = match p.masks.get(cat) {
                    Some(pred_mask) => pred_mask.iou(gt_mask)?,
                    None => 0.0,
                };
                let slot = self.sums.entry((p.camera, *cat)).or_insert((0.0, 0));
                slot.0 += iou;
                slot.1 += 1;
            }
        }
        self.next_frame += 1;
        Ok(())
    }

    pub fn finish(self) -> IoUReport {
        let mut cameras = Vec::new();
        for cam in &self.cameras {
            let mut per_category = BTreeMap::new();
            for cat in &self.categories {
                if let Some((sum, n)) = self.sums.get(&(cam.id, cat.id)) {
                    per_category.insert(cat.name.clone(), sum / *n as f64);
                }
            }
            let miou = if per_category.is_empty() {
                None
            } else {
                Some(per_category.values().sum::<f64>() / per_category.len() as f64)
            };
            cameras.push(CameraIoU {
                camera_name: cam.name.clone(),
                per_category,
                miou,
            });
        }
        IoUReport { cameras }
    }
}

/// MAE and population STD of the absolute distance error over the frames
/// where both the measured and the exact distance are defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorCell {
    pub mae: f64,
    pub std: f64,
    pub frames: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraDistanceError {
    pub camera_name: String,
    /// Keyed by hyphenated pair names ("holder-detector"); `None` mirrors
    /// an undefined table cell.
    pub cells: BTreeMap<String, Option<ErrorCell>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceErrorReport {
    pub cameras: Vec<CameraDistanceError>,
}

impl DistanceErrorReport {
    /// The worst cell by MAE and its paired STD (ties resolve to the larger
    /// STD, conservatively). `None` for an all-undefined report.
    pub fn max_mae_cell(&self) -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        for cam in &self.cameras {
            for cell in cam.cells.values().flatten() {
                best = match best {
                    None => Some((cell.mae, cell.std)),
                    Some((m, s)) => {
                        if cell.mae > m || (cell.mae == m && cell.std > s) {
                            Some((cell.mae, cell.std))
                        } else {
                            Some((m, s))
                        }
                    }
                };
            }
        }
        best
    }
}

/// Streaming builder for [`DistanceErrorReport`].
pub struct DistanceErrorAccumulator {
    cameras: Vec<Camera>,
    categories: Vec<Category>,
    pairs: Vec<CategoryPair>,
    // (camera, pair) -> (sum e, sum e^2, n)
    sums: BTreeMap<(CameraId, CategoryPair), (f64, f64, u64)>,
}

impl DistanceErrorAccumulator {
    pub fn new(cameras: Vec<Camera>, categories: Vec<Category>) -> Self {
        let pairs = CategoryPair::all(categories.len() as u16);
        DistanceErrorAccumulator {
            cameras,
            categories,
            pairs,
            sums: BTreeMap::new(),
        }
    }

    /// Record one (camera, pair, frame) sample where both sides are defined.
    pub fn add_sample(
        &mut self,
        camera: CameraId,
        pair: CategoryPair,
        measured_px: f64,
        exact_px: f64,
    ) {
        let e = (measured_px - exact_px).abs();
        let slot = self.sums.entry((camera, pair)).or_insert((0.0, 0.0, 0));
        slot.0 += e;
        slot.1 += e * e;
        slot.2 += 1;
    }

    pub fn finish(self) -> DistanceErrorReport {
        let mut cameras = Vec::new();
        for cam in &self.cameras {
            let mut cells = BTreeMap::new();
            for &pair in &self.pairs {
                let cell = self.sums.get(&(cam.id, pair)).map(|&(s, s2, n)| {
                    let mae = s / n as f64;
                    let var = (s2 / n as f64 - mae * mae).max(0.0);
                    ErrorCell {
                        mae,
                        std: var.sqrt(),
                        frames: n,
                    }
                });
                cells.insert(pair_key(pair, &self.categories), cell);
            }
            cameras.push(CameraDistanceError {
                camera_name: cam.name.clone(),
                cells,
            });
        }
        DistanceErrorReport { cameras }
    }
}

/// Collision-decision accuracy for one view subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetAccuracy {
    pub cameras: Vec<CameraId>,
    pub label: String,
    /// `None` when no (frame, pair) unit was decidable in this subset.
    pub accuracy: Option<f64>,
    pub matched: u64,
    pub total: u64,
    /// Units skipped because the subset could not see the pair or the
    /// ground-truth label was undefined.
    pub skipped: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub subsets: Vec<SubsetAccuracy>,
}

/// Streaming builder for [`AccuracyReport`]: recomputes the all-view rule
/// per requested view subset from the recorded per-view distances.
pub struct AccuracyAccumulator {
    subsets: Vec<(Vec<CameraId>, String)>,
    delta_px: f64,
    policy: AbsentViewPolicy,
    // per subset: (matched, total, skipped)
    counts: Vec<(u64, u64, u64)>,
}

impl AccuracyAccumulator {
    pub fn new(
        subsets: Vec<(Vec<CameraId>, String)>,
        delta_px: f64,
        policy: AbsentViewPolicy,
    ) -> Self {
        let counts = vec![(0, 0, 0); subsets.len()];
        AccuracyAccumulator {
            subsets,
            delta_px,
            policy,
            counts,
        }
    }

    /// Record one (frame, pair) unit given its per-view measured distances
    /// and the ground-truth warning label.
    pub fn add_unit(&mut self, distances: &ViewDistances, gt_warning: Option<bool>) {
        let cfg = MonitorConfig {
            delta_px: self.delta_px,
            consecutive_k: 1,
            replicas_r: 1,
            absent_view_policy: self.policy,
        };
        for (si, (cams, _)) in self.subsets.iter().enumerate() {
            let restricted: ViewDistances = cams
                .iter()
                .map(|c| (*c, distances.get(c).copied().flatten()))
                .collect();
            let decision = evaluate_frame(&restricted, &cfg);
            let counts = &mut self.counts[si];
            let Some(gt) = gt_warning else {
                counts.2 += 1;
                continue;
            };
            if decision.unknown {
                counts.2 += 1;
                continue;
            }
            counts.1 += 1;
            if decision.raw == gt {
                counts.0 += 1;
            }
        }
    }

    pub fn finish(self) -> AccuracyReport {
        let subsets = self
            .subsets
            .into_iter()
            .zip(self.counts)
            .map(|((cameras, label), (matched, total, skipped))| SubsetAccuracy {
                cameras,
                label,
                accuracy: (total > 0).then(|| matched as f64 / total as f64),
                matched,
                total,
                skipped,
            })
            .collect();
        AccuracyReport { subsets }
    }
}

/// All non-empty camera subsets ordered by size then camera index, so the
/// full fusion comes last. Labels join first letters: "f+s+t".
pub fn all_view_subsets(cameras: &[Camera]) -> Vec<(Vec<CameraId>, String)> {
    let n = cameras.len();
    let mut subsets: Vec<Vec<usize>> = (1u32..(1 << n))
        .map(|bits| (0..n).filter(|i| bits >> i & 1 == 1).collect())
        .collect();
    subsets.sort_by_key(|s| (s.len(), s.clone()));
    subsets
        .into_iter()
        .map(|idxs| {
            let ids: Vec<CameraId> = idxs.iter().map(|&i| cameras[i].id).collect();
            let label = idxs
                .iter()
                .map(|&i| subset_letter(&cameras[i].name))
                .collect::<Vec<_>>()
                .join("+");
            (ids, label)
        })
        .collect()
}

fn subset_letter(name: &str) -> String {
    name.chars().next().map(|c| c.to_string()).unwrap_or_default()
}

/// Parse a "+"-joined subset spec against the camera table. Each element
/// may be a full camera name or an unambiguous prefix (e.g. "f" for
/// "front").
pub fn parse_view_subset(spec: &str, cameras: &[Camera]) -> Result<(Vec<CameraId>, String)> {
    let mut ids = Vec::new();
    let mut letters = Vec::new();
    for part in spec.split('+') {
        let part = part.trim();
        let matches: Vec<&Camera> = cameras
            .iter()
            .filter(|c| c.name == part || c.name.starts_with(part))
            .collect();
        match matches.len() {
            1 => {
                let cam = matches[0];
                if ids.contains(&cam.id) {
                    return Err(Error::InvalidParameter {
                        name: "views",
                        reason: format!("camera '{}' listed twice in '{spec}'", cam.name),
                    });
                }
                ids.push(cam.id);
                letters.push(subset_letter(&cam.name));
            }
            0 => {
                return Err(Error::InvalidParameter {
                    name: "views",
                    reason: format!("unknown view name '{part}'"),
                })
            }
            _ => {
                return Err(Error::InvalidParameter {
                    name: "views",
                    reason: format!("ambiguous view name '{part}'"),
                })
            }
        }
    }
    if ids.is_empty() {
        return Err(Error::InvalidParameter {
            name: "views",
            reason: "empty subset".into(),
        });
    }
    Ok((ids, letters.join("+")))
}

/// Stable machine key for a pair: hyphenated names in canonical id order.
pub fn pair_key(pair: CategoryPair, categories: &[Category]) -> String {
    let name = |id: CategoryId| {
        categories
            .iter()
            .find(|c| c.id == id)
            .map(|c| c.name.as_str())
            .unwrap_or("?")
    };
    format!("{}-{}", name(pair.0), name(pair.1))
}

/// Short display code for a pair, first letters uppercased: "H2D".
pub fn pair_code(pair: CategoryPair, categories: &[Category]) -> String {
    let letter = |id: CategoryId| {
        categories
            .iter()
            .find(|c| c.id == id)
            .and_then(|c| c.name.chars().next())
            .map(|c| c.to_ascii_uppercase().to_string())
            .unwrap_or_else(|| "?".into())
    };
    format!("{}2{}", letter(pair.0), letter(pair.1))
}

fn render_table(header: Vec<String>, rows: Vec<Vec<String>>) -> String {
    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for row in &rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let emit = |out: &mut String, row: &[String]| {
        let line = row
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{:<w$}", c, w = widths[i]))
            .collect::<Vec<_>>()
            .join("  ");
        out.push_str(line.trim_end());
        out.push('\n');
    };
    emit(&mut out, &header);
    for row in &rows {
        emit(&mut out, row);
    }
    out
}

impl IoUReport {
    /// Aligned text table: one row per view, categories as columns plus a
    /// trailing mIoU column, percentages with one decimal.
    pub fn to_table(&self, categories: &[Category]) -> String {
        let mut header = vec!["".to_string()];
        header.extend(categories.iter().map(|c| title_case(&c.name)));
        header.push("mIoU".into());
        let rows = self
            .cameras
            .iter()
            .map(|cam| {
                let mut row = vec![format!("View-{}", cam.camera_name)];
                for c in categories {
                    row.push(match cam.per_category.get(&c.name) {
                        Some(v) => format!("{:.1}", v * 100.0),
                        None => "-".into(),
                    });
                }
                row.push(match cam.miou {
                    Some(v) => format!("{:.1}", v * 100.0),
                    None => "-".into(),
                });
                row
            })
            .collect();
        render_table(header, rows)
    }
}

impl DistanceErrorReport {
    /// Aligned text table: one row per view, one "MAE / STD" column per
    /// pair code, "-" for undefined cells. Columns follow canonical pair
    /// order (H2D, H2S, ... for the usual category table).
    pub fn to_table(&self, categories: &[Category]) -> String {
        let pairs = CategoryPair::all(categories.len() as u16);
        let mut header = vec!["".to_string()];
        header.extend(pairs.iter().map(|&p| pair_code(p, categories)));
        let rows = self
            .cameras
            .iter()
            .map(|cam| {
                let mut row = vec![format!("View-{}", cam.camera_name)];
                for &p in &pairs {
                    let key = pair_key(p, categories);
                    row.push(match cam.cells.get(&key).copied().flatten() {
                        Some(cell) => format!("{:.1} / {:.1}", cell.mae, cell.std),
                        None => "-".into(),
                    });
                }
                row
            })
            .collect();
        render_table(header, rows)
    }
}

impl AccuracyReport {
    pub fn to_table(&self) -> String {
        let header = vec![
            "View Combination".to_string(),
            "Accuracy (%)".to_string(),
            "Decided".to_string(),
            "Skipped".to_string(),
        ];
        let rows = self
            .subsets
            .iter()
            .map(|s| {
                vec![
                    s.label.clone(),
                    match s.accuracy {
                        Some(a) => format!("{:.1}", a * 100.0),
                        None => "-".into(),
                    },
                    s.total.to_string(),
                    s.skipped.to_string(),
                ]
            })
            .collect();
        render_table(header, rows)
    }
}

fn title_case(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_ascii_uppercase().to_string() + chars.as_str(),
        None => String::new(),
    }
}
