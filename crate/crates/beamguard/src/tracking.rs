//! Identity tracking and temporal mask smoothing.
//!
//! A deterministic tracking-by-detection stage: detections are matched to
//! live tracks by greedy IoU within each category, and each track's mask is
//! smoothed by a per-pixel majority vote over a short sliding window. Scenes
//! here are slow-moving single-instance rigs, so greedy matching with
//! value-based tie-breaks is exact in practice and keeps results independent
//! of detection order.

use std::collections::{BTreeMap, VecDeque};

use crate::model::{CategoryId, FrameBundle, Mask};

/// Tracker tuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerConfig {
    /// Minimum IoU for a detection to match an existing track.
    pub match_threshold: f64,
    /// Consecutive unmatched frames before a track is retired.
    pub max_missed: u32,
    /// Sliding smoothing window length (odd; 1 disables smoothing).
    pub window: usize,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            match_threshold: 0.3,
            max_missed: 10,
            window: 3,
        }
    }
}

/// A persistent identity for one equipment instance in one camera.
#[derive(Debug, Clone)]
pub struct Track {
    pub track_id: u64,
    pub category: CategoryId,
    pub current_mask: Mask,
    pub age: u64,
    pub missed: u32,
    window: VecDeque<Mask>,
}

impl Track {
    /// Per-pixel majority vote over the window; ties vote foreground.
    pub fn smoothed_mask(&self) -> Mask {
        let refs: Vec<&Mask> = self.window.iter().collect();
        Mask::majority(&refs)
    }
}

/// Greedy assignment over scored candidate pairs.
///
/// Candidates are (track slot, detection slot, score); pairs are taken in
/// descending score order, ties broken by smaller track slot then smaller
/// detection slot, each slot used at most once. Returns (track, detection)
/// index pairs.
fn greedy_assign(mut candidates: Vec<(usize, usize, f64)>) -> Vec<(usize, usize)> {
    candidates.sort_by(|x, y| {
        y.2.partial_cmp(&x.2)
            .expect("IoU scores are finite")
            .then(x.0.cmp(&y.0))
            .then(x.1.cmp(&y.1))
    });
    let mut track_used = BTreeMap::new();
    let mut det_used = BTreeMap::new();
    let mut out = Vec::new();
    for (t, d, _) in candidates {
        if track_used.contains_key(&t) || det_used.contains_key(&d) {
            continue;
        }
        track_used.insert(t, ());
        det_used.insert(d, ());
        out.push((t, d));
    }
    out
}

/// Per-camera tracker state.
#[derive(Debug, Clone)]
pub struct Tracker {
    cfg: TrackerConfig,
    tracks: Vec<Track>,
    next_id: u64,
}

/// One smoothed, identity-stable mask emitted by [`Tracker::step`].
#[derive(Debug, Clone)]
pub struct TrackedMask {
    pub track_id: u64,
    pub category: CategoryId,
    pub mask: Mask,
}

impl Tracker {
    pub fn new(cfg: TrackerConfig) -> Self {
        assert!(cfg.window >= 1 && cfg.window % 2 == 1, "window must be odd");
        Tracker {
            cfg,
            tracks: Vec::new(),
            next_id: 0,
        }
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    /// Match detections to tracks within each category.
    ///
    /// Detections are (category, mask) pairs for one camera and one frame.
    /// Unmatched detections open new tracks (ids issued in value order, so
    /// the result is invariant to detection-list permutation); unmatched
    /// tracks age and retire after `max_missed` consecutive misses.
    pub fn associate(&mut self, detections: &[(CategoryId, Mask)]) {
        // Sort detection slots by value so ids and tie-breaks never depend
        // on input order: (category, centroid row, centroid col, count).
        let mut det_order: Vec<usize> = (0..detections.len()).collect();
        let det_key = |i: usize| {
            let (cat, mask) = &detections[i];
            let (r, c) = mask.centroid().expect("tracker detections are non-empty");
            (*cat, OrderedF64(r), OrderedF64(c), mask.count())
        };
        det_order.sort_by_key(|&i| det_key(i));

        let mut candidates = Vec::new();
        for (slot, &di) in det_order.iter().enumerate() {
            let (cat, mask) = &detections[di];
            for (ti, track) in self.tracks.iter().enumerate() {
                if track.category != *cat {
                    continue;
                }
                let score = track
                    .current_mask
                    .iou(mask)
                    .expect("tracker masks share camera resolution");
                if score >= self.cfg.match_threshold {
                    candidates.push((ti, slot, score));
                }
            }
        }
        let matches = greedy_assign(candidates);

        let mut det_matched = vec![false; det_order.len()];
        let mut track_matched = vec![false; self.tracks.len()];
        for (ti, slot) in matches {
            track_matched[ti] = true;
            det_matched[slot] = true;
            let (_, mask) = &detections[det_order[slot]];
            let track = &mut self.tracks[ti];
            track.current_mask = mask.clone();
            track.age += 1;
            track.missed = 0;
            track.window.push_back(mask.clone());
            while track.window.len() > self.cfg.window {
                track.window.pop_front();
            }
        }
        for (ti, matched) in track_matched.iter().enumerate() {
            if !matched {
                self.tracks[ti].missed += 1;
                self.tracks[ti].age += 1;
            }
        }
        let max_missed = self.cfg.max_missed;
        self.tracks.retain(|t| t.missed <= max_missed);
        for (slot, &di) in det_order.iter().enumerate() {
            if det_matched[slot] {
                continue;
            }
            let (cat, mask) = &detections[di];
            let mut window = VecDeque::new();
            window.push_back(mask.clone());
            self.tracks.push(Track {
                track_id: self.next_id,
                category: *cat,
                current_mask: mask.clone(),
                age: 0,
                missed: 0,
                window,
            });
            self.next_id += 1;
        }
        self.tracks.sort_by_key(|t| t.track_id);
    }

    /// Advance one frame: associate the gated bundle's masks, then emit the
    /// smoothed mask of every track that matched this frame.
    pub fn step(&mut self, gated: &FrameBundle) -> Vec<TrackedMask> {
        let detections: Vec<(CategoryId, Mask)> = gated
            .masks
            .iter()
            .filter(|(_, m)| !m.is_empty())
            .map(|(c, m)| (*c, m.clone()))
            .collect();
        self.associate(&detections);
        // matched and newly opened tracks both have missed == 0
        self.tracks
            .iter()
            .filter(|t| t.missed == 0)
            .map(|t| TrackedMask {
                track_id: t.track_id,
                category: t.category,
                mask: t.smoothed_mask(),
            })
            .collect()
    }
}

/// Collapse tracker output to one mask per category (the track with the
/// largest foreground wins; single-instance scenes have exactly one).
pub fn bundle_from_tracks(
    camera_bundle: &FrameBundle,
    tracked: &[TrackedMask],
) -> FrameBundle {
    let mut out = FrameBundle::new(camera_bundle.camera, camera_bundle.frame_index, 1.0);
    out.timestamp_s = camera_bundle.timestamp_s;
    let mut best: BTreeMap<CategoryId, (u64, u64)> = BTreeMap::new(); // cat -> (count, idx)
    for (i, t) in tracked.iter().enumerate() {
        let count = t.mask.count();
        let slot = best.entry(t.category).or_insert((count, i as u64));
        if count > slot.0 {
            *slot = (count, i as u64);
        }
    }
    for (cat, (_, idx)) in best {
        out.masks.insert(cat, tracked[idx as usize].mask.clone());
    }
    out
}

/// f64 wrapper ordered by total order; tracker scores and centroids are
/// always finite.
#[derive(PartialEq, PartialOrd)]
struct OrderedF64(f64);

impl Eq for OrderedF64 {}

#[allow(clippy::derive_ord_xor_partial_ord)]
impl Ord for OrderedF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
