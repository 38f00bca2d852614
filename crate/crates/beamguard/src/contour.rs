//! Outer-boundary extraction from binary masks.
//!
//! The contour of a mask is the closed 8-connected chain of boundary pixels
//! of its largest connected foreground component, traced with the
//! Moore-neighbor rule starting from the component's lexicographically
//! smallest pixel. Component sizes come from a run-length union-find pass so
//! the cost stays proportional to runs, not pixels.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{Mask, PixelPoint};

/// Ordered closed chain of boundary pixels; consecutive points (and the
/// last-to-first wrap) are 8-adjacent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contour {
    pub points: Vec<PixelPoint>,
}

impl Contour {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Every `stride`-th point of the chain, always including point 0 and
    /// the last point. Sampling both ends keeps every omitted point within
    /// floor(stride/2) chain steps of a sample, even on the wrap-around
    /// tail, so the sparse-distance error stays within stride·√2.
    pub fn sampled(&self, stride: usize) -> Vec<PixelPoint> {
        let stride = stride.max(1);
        let n = self.points.len();
        let mut out: Vec<PixelPoint> = self.points.iter().step_by(stride).copied().collect();
        if n > 0 && !(n - 1).is_multiple_of(stride) {
            out.push(self.points[n - 1]);
        }
        out
    }
}

// Moore neighborhood in clockwise order (row grows downward):
// N, NE, E, SE, S, SW, W, NW.
const NEIGHBORS: [(i64, i64); 8] = [
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
];

/// Extract the closed outer contour of the mask's largest 8-connected
/// foreground component. Ties between equal-sized components break toward
/// the one whose first pixel is lexicographically smallest, so the result
/// is deterministic.
pub fn extract_contour(mask: &Mask) -> Result<Contour> {
    let start = largest_component_start(mask).ok_or(Error::EmptyMask)?;
    Ok(trace_from(mask, start))
}

/// Lexicographically smallest pixel of the largest component, or `None`
/// for an empty mask.
fn largest_component_start(mask: &Mask) -> Option<PixelPoint> {
    // Runs of the current and previous row, labeled through a union-find.
    struct Run {
        start: u32,
        end: u32,
        label: usize,
    }
    let mut parent: Vec<usize> = Vec::new();
    let mut size: Vec<u64> = Vec::new();
    let mut first_pixel: Vec<PixelPoint> = Vec::new();

    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    let mut prev_runs: Vec<Run> = Vec::new();
    for row in 0..mask.height() {
        let mut cur_runs: Vec<Run> = Vec::new();
        for (start, end) in mask.row_runs(row) {
            let mut label = None;
            // 8-connectivity: a run touches a previous-row run if their
            // column spans come within one pixel of each other.
            for pr in &prev_runs {
                if pr.end + 1 >= start && pr.start <= end + 1 {
                    let root = find(&mut parent, pr.label);
                    match label {
                        None => label = Some(root),
                        Some(existing) => {
                            let existing = find(&mut parent, existing);
                            if existing != root {
                                // merge, keeping the earlier first pixel
                                let (keep, drop) =
                                    if first_pixel[existing] <= first_pixel[root] {
                                        (existing, root)
                                    } else {
                                        (root, existing)
                                    };
                                parent[drop] = keep;
                                size[keep] += size[drop];
                                label = Some(keep);
                            }
                        }
                    }
                }
            }
            let label = match label {
                Some(l) => {
                    let root = find(&mut parent, l);
                    size[root] += (end - start + 1) as u64;
                    root
                }
                None => {
                    let l = parent.len();
                    parent.push(l);
                    size.push((end - start + 1) as u64);
                    first_pixel.push(PixelPoint::new(row, start));
                    l
                }
            };
            cur_runs.push(Run { start, end, label });
        }
        prev_runs = cur_runs;
    }

    let mut best: Option<(u64, PixelPoint)> = None;
    for i in 0..parent.len() {
        if find(&mut parent, i) != i {
            continue;
        }
        let candidate = (size[i], first_pixel[i]);
        best = match best {
            None => Some(candidate),
            Some((bs, bp)) => {
                if candidate.0 > bs || (candidate.0 == bs && candidate.1 < bp) {
                    Some(candidate)
                } else {
                    Some((bs, bp))
                }
            }
        };
    }
    best.map(|(_, p)| p)
}

/// Moore-neighbor boundary trace.
///
/// `start` must be the lexicographically smallest pixel of its component,
/// which guarantees its west and north neighbors are background. The walk
/// is a deterministic function of the (pixel, backtrack) state, so it stops
/// at the first repeated state; Jacob's start-pixel criterion alone loops
/// forever on checkerboard-like pixel patterns.
fn trace_from(mask: &Mask, start: PixelPoint) -> Contour {
    let fg = |r: i64, c: i64| -> bool {
        r >= 0 && c >= 0 && r < mask.height() as i64 && c < mask.width() as i64
            && mask.get(r as u32, c as u32)
    };
    let dir_index = |from: PixelPoint, to: (i64, i64)| -> usize {
        let dr = to.0 - from.row as i64;
        let dc = to.1 - from.col as i64;
        NEIGHBORS.iter().position(|&d| d == (dr, dc)).expect("adjacent")
    };

    let mut points = vec![start];
    // Enter the start pixel as if arriving from its (background) west side.
    let mut cur = start;
    let mut backtrack = (start.row as i64, start.col as i64 - 1);
    let mut seen: HashMap<PixelPoint, u8> = HashMap::new();
    seen.insert(start, 1 << dir_index(start, backtrack));

    loop {
        let from = dir_index(cur, backtrack);
        let mut found = None;
        for step in 1..=8 {
            let d = (from + step) % 8;
            let n = (
                cur.row as i64 + NEIGHBORS[d].0,
                cur.col as i64 + NEIGHBORS[d].1,
            );
            if fg(n.0, n.1) {
                found = Some((n, (from + step - 1) % 8));
                break;
            }
        }
        let Some((next, before)) = found else {
            break; // isolated single pixel
        };
        let new_backtrack = (
            cur.row as i64 + NEIGHBORS[before].0,
            cur.col as i64 + NEIGHBORS[before].1,
        );
        cur = PixelPoint::new(next.0 as u32, next.1 as u32);
        backtrack = new_backtrack;
        let state_bit = 1u8 << dir_index(cur, backtrack);
        let visited = seen.entry(cur).or_insert(0);
        if *visited & state_bit != 0 {
            break;
        }
        *visited |= state_bit;
        points.push(cur);
    }
    Contour { points }
}
