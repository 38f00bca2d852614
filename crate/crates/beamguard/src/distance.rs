//! Minimum inter-contour distance, exact and sparse-sampled.
//!
//! The exact variant brute-forces every contour point pair and doubles as
//! the oracle for the sparse variant, which evaluates every `s`-th chain
//! point. Because consecutive chain points are 8-adjacent (one step moves at
//! most √2 px), skipping points overestimates the minimum by at most `s`·√2.

use serde::{Deserialize, Serialize};

use crate::contour::{extract_contour, Contour};
use crate::error::{Error, Result};
use crate::model::{CameraId, CategoryPair, Mask, PixelPoint};

/// How contour points are thinned before the pairwise scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StridePolicy {
    /// Stride grows with perimeter so each contour contributes at most
    /// `max_samples` points.
    Auto { max_samples: usize },
    /// Fixed stride for every contour.
    Fixed { stride: usize },
}

impl Default for StridePolicy {
    fn default() -> Self {
        StridePolicy::Auto { max_samples: 256 }
    }
}

impl StridePolicy {
    pub fn stride_for(&self, perimeter: usize) -> usize {
        match *self {
            StridePolicy::Auto { max_samples } => {
                perimeter.div_ceil(max_samples.max(1)).max(1)
            }
            StridePolicy::Fixed { stride } => stride.max(1),
        }
    }
}

/// How a recorded distance was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMethod {
    Exact,
    Sparse { stride: usize },
}

/// One measured pair distance in one view at one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceRecord {
    pub camera: CameraId,
    pub pair: CategoryPair,
    pub frame_index: u64,
    pub distance_px: f64,
    pub method: DistanceMethod,
}

fn min_distance_over(a: &[PixelPoint], b: &[PixelPoint]) -> f64 {
    let mut best = u64::MAX;
    for q in b {
        for p in a {
            let dr = p.row as i64 - q.row as i64;
            let dc = p.col as i64 - q.col as i64;
            let d2 = (dr * dr + dc * dc) as u64;
            if d2 < best {
                best = d2;
            }
        }
    }
    (best as f64).sqrt()
}

/// Minimum Euclidean distance over all contour point pairs.
pub fn min_contour_distance_exact(c1: &Contour, c2: &Contour) -> Result<f64> {
    if c1.is_empty() || c2.is_empty() {
        return Err(Error::EmptyContour);
    }
    Ok(min_distance_over(&c1.points, &c2.points))
}

/// Minimum Euclidean distance over every `stride`-th contour point of each
/// chain (point 0 always sampled). `stride` = 1 is the exact distance.
pub fn min_contour_distance_sparse(c1: &Contour, c2: &Contour, stride: usize) -> Result<f64> {
    if stride < 1 {
        return Err(Error::InvalidParameter {
            name: "stride",
            reason: "must be >= 1".into(),
        });
    }
    if c1.is_empty() || c2.is_empty() {
        return Err(Error::EmptyContour);
    }
    Ok(min_distance_over(&c1.sampled(stride), &c2.sampled(stride)))
}

/// Pair distance between two category masks of one view.
///
/// Returns `Ok(None)` when either mask is empty — the pair is not visible
/// here, which the monitor treats as an absent view rather than an error.
/// Overlapping foregrounds short-circuit to an exact zero, matching the
/// contact convention; otherwise contours are extracted and sampled under
/// `policy`.
pub fn pair_distance(
    camera: CameraId,
    pair: CategoryPair,
    frame_index: u64,
    a: &Mask,
    b: &Mask,
    policy: StridePolicy,
) -> Result<Option<DistanceRecord>> {
    if a.is_empty() || b.is_empty() {
        return Ok(None);
    }
    if a.overlaps(b)? {
        return Ok(Some(DistanceRecord {
            camera,
            pair,
            frame_index,
            distance_px: 0.0,
            method: DistanceMethod::Exact,
        }));
    }
    let ca = extract_contour(a)?;
    let cb = extract_contour(b)?;
    Ok(Some(contour_pair_distance(
        camera,
        pair,
        frame_index,
        &ca,
        &cb,
        policy,
    )?))
}

/// Same as [`pair_distance`] for callers that already extracted (and cached)
/// the contours and know the masks do not overlap.
pub fn contour_pair_distance(
    camera: CameraId,
    pair: CategoryPair,
    frame_index: u64,
    ca: &Contour,
    cb: &Contour,
    policy: StridePolicy,
) -> Result<DistanceRecord> {
    if ca.is_empty() || cb.is_empty() {
        return Err(Error::EmptyContour);
    }
    let sa = policy.stride_for(ca.len());
    let sb = policy.stride_for(cb.len());
    let distance_px = min_distance_over(&ca.sampled(sa), &cb.sampled(sb));
    let stride = sa.max(sb);
    let method = if stride == 1 {
        DistanceMethod::Exact
    } else {
        DistanceMethod::Sparse { stride }
    };
    Ok(DistanceRecord {
        camera,
        pair,
        frame_index,
        distance_px,
        method,
    })
}
