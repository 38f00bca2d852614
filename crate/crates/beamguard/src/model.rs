//! Shared domain types: categories, cameras, binary masks, frame bundles.
//!
//! A [`Mask`] is a bit-packed binary image (one `u64` word per 64 columns,
//! rows padded to whole words) so that the per-frame hot path — IoU gating,
//! overlap tests, majority-vote smoothing — runs as word-parallel bit
//! arithmetic rather than per-pixel loops.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Equipment class identifier. Ids are dense indices into the scenario's
/// category table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CategoryId(pub u16);

/// An equipment class (holder, detector, stage, ion chamber, ...).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Category {
    pub id: CategoryId,
    pub name: String,
}

/// Camera identifier: a dense index into the scenario's camera table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CameraId(pub usize);

/// A monitored camera and its image geometry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Camera {
    pub id: CameraId,
    pub name: String,
    pub width: u32,
    pub height: u32,
}

/// A pixel coordinate. Row 0 is the top of the image; rows grow downward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PixelPoint {
    pub row: u32,
    pub col: u32,
}

impl PixelPoint {
    pub fn new(row: u32, col: u32) -> Self {
        PixelPoint { row, col }
    }

    /// Euclidean distance to another pixel, measured between pixel centers.
    pub fn distance_to(&self, other: &PixelPoint) -> f64 {
        let dr = self.row as f64 - other.row as f64;
        let dc = self.col as f64 - other.col as f64;
        (dr * dr + dc * dc).sqrt()
    }
}

const WORD_BITS: u32 = 64;

/// Per-camera, per-category binary foreground image.
///
/// Foreground may be empty: an all-zero mask represents "category not
/// detected this frame".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: u32,
    height: u32,
    words_per_row: u32,
    words: Vec<u64>,
}

impl Mask {
    pub fn empty(width: u32, height: u32) -> Self {
        assert!(width >= 1 && height >= 1, "mask resolution must be >= 1x1");
        let words_per_row = width.div_ceil(WORD_BITS);
        Mask {
            width,
            height,
            words_per_row,
            words: vec![0; (words_per_row * height) as usize],
        }
    }

    pub fn from_pixels<I: IntoIterator<Item = (u32, u32)>>(
        width: u32,
        height: u32,
        pixels: I,
    ) -> Self {
        let mut m = Mask::empty(width, height);
        for (r, c) in pixels {
            m.set(r, c);
        }
        m
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn resolution(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    #[inline]
    fn word_index(&self, row: u32, col: u32) -> usize {
        (row * self.words_per_row + col / WORD_BITS) as usize
    }

    #[inline]
    pub fn get(&self, row: u32, col: u32) -> bool {
        debug_assert!(row < self.height && col < self.width);
        self.words[self.word_index(row, col)] >> (col % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, row: u32, col: u32) {
        assert!(row < self.height && col < self.width, "pixel out of bounds");
        let idx = self.word_index(row, col);
        self.words[idx] |= 1u64 << (col % WORD_BITS);
    }

    /// Set every pixel in the inclusive rectangle, clipped to the image.
    pub fn fill_rect(&mut self, row_min: u32, row_max: u32, col_min: u32, col_max: u32) {
        let row_max = row_max.min(self.height - 1);
        let col_max = col_max.min(self.width - 1);
        if row_min > row_max || col_min > col_max {
            return;
        }
        let first_word = col_min / WORD_BITS;
        let last_word = col_max / WORD_BITS;
        let first_mask = !0u64 << (col_min % WORD_BITS);
        let last_mask = !0u64 >> (WORD_BITS - 1 - col_max % WORD_BITS);
        for row in row_min..=row_max {
            let base = (row * self.words_per_row) as usize;
            if first_word == last_word {
                self.words[base + first_word as usize] |= first_mask & last_mask;
            } else {
                self.words[base + first_word as usize] |= first_mask;
                for w in first_word + 1..last_word {
                    self.words[base + w as usize] = !0;
                }
                self.words[base + last_word as usize] |= last_mask;
            }
        }
    }

    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn check_same_resolution(&self, other: &Mask) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        Ok(())
    }

    /// Intersection-over-union with another mask of the same resolution.
    ///
    /// Both masks empty is the degenerate "both agree absent" case and
    /// returns 1.0.
    ///
    /// ```
    /// use beamguard::model::Mask;
    ///
    /// let mut a = Mask::empty(64, 64);
    /// a.fill_rect(0, 9, 0, 9); // 10x10 square
    /// let mut b = Mask::empty(64, 64);
    /// b.fill_rect(0, 9, 5, 14); // same square shifted 5 columns
    /// assert!((a.iou(&b).unwrap() - 50.0 / 150.0).abs() < 1e-12);
    /// ```
    pub fn iou(&self, other: &Mask) -> Result<f64> {
        self.check_same_resolution(other)?;
        let mut inter = 0u64;
        let mut union = 0u64;
        for (a, b) in self.words.iter().zip(&other.words) {
            inter += (a & b).count_ones() as u64;
            union += (a | b).count_ones() as u64;
        }
        if union == 0 {
            return Ok(1.0);
        }
        Ok(inter as f64 / union as f64)
    }

    /// True if the two foregrounds share at least one pixel.
    pub fn overlaps(&self, other: &Mask) -> Result<bool> {
        self.check_same_resolution(other)?;
        Ok(self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0))
    }

    /// Arithmetic mean of foreground pixel coordinates as (row, col).
    pub fn centroid(&self) -> Result<(f64, f64)> {
        let mut n = 0u64;
        let mut row_sum = 0u64;
        let mut col_sum2 = 0u64; // doubled to keep run sums integral
        for row in 0..self.height {
            for (start, end) in self.row_runs(row) {
                let len = (end - start + 1) as u64;
                n += len;
                row_sum += row as u64 * len;
                col_sum2 += (start as u64 + end as u64) * len;
            }
        }
        if n == 0 {
            return Err(Error::EmptyMask);
        }
        Ok((
            row_sum as f64 / n as f64,
            col_sum2 as f64 / 2.0 / n as f64,
        ))
    }

    /// Tight bounding box of the foreground as (row_min, row_max, col_min,
    /// col_max), inclusive. `None` when empty.
    pub fn bounding_box(&self) -> Option<(u32, u32, u32, u32)> {
        let mut row_min = u32::MAX;
        let mut row_max = 0;
        let mut col_min = u32::MAX;
        let mut col_max = 0;
        for row in 0..self.height {
            let base = (row * self.words_per_row) as usize;
            let row_words = &self.words[base..base + self.words_per_row as usize];
            if row_words.iter().all(|&w| w == 0) {
                continue;
            }
            row_min = row_min.min(row);
            row_max = row;
            for (wi, &w) in row_words.iter().enumerate() {
                if w == 0 {
                    continue;
                }
                let lo = wi as u32 * WORD_BITS + w.trailing_zeros();
                let hi = wi as u32 * WORD_BITS + (WORD_BITS - 1 - w.leading_zeros());
                col_min = col_min.min(lo);
                col_max = col_max.max(hi);
            }
        }
        if row_min == u32::MAX {
            None
        } else {
            Some((row_min, row_max, col_min, col_max))
        }
    }

    /// Foreground translated by (`dr`, `dc`), pixels shifted past the image
    /// border clipped away.
    pub fn translated(&self, dr: i64, dc: i64) -> Mask {
        let mut out = Mask::empty(self.width, self.height);
        for row in 0..self.height {
            let nr = row as i64 + dr;
            if nr < 0 || nr >= self.height as i64 {
                continue;
            }
            for (start, end) in self.row_runs(row) {
                let ns = start as i64 + dc;
                let ne = end as i64 + dc;
                if ne < 0 || ns >= self.width as i64 {
                    continue;
                }
                out.fill_rect(
                    nr as u32,
                    nr as u32,
                    ns.max(0) as u32,
                    ne.min(self.width as i64 - 1) as u32,
                );
            }
        }
        out
    }

    /// Iterator over foreground pixels in row-major order.
    pub fn foreground(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.height).flat_map(move |row| {
            let base = (row * self.words_per_row) as usize;
            (0..self.words_per_row).flat_map(move |wi| {
                let mut w = self.words[base + wi as usize];
                std::iter::from_fn(move || {
                    if w == 0 {
                        return None;
                    }
                    let bit = w.trailing_zeros();
                    w &= w - 1;
                    Some((row, wi * WORD_BITS + bit))
                })
            })
        })
    }

    /// Maximal runs of consecutive foreground pixels in one row, as
    /// (col_start, col_end) inclusive pairs.
    pub fn row_runs(&self, row: u32) -> Vec<(u32, u32)> {
        let base = (row * self.words_per_row) as usize;
        let mut runs = Vec::new();
        let mut open: Option<u32> = None;
        for wi in 0..self.words_per_row {
            let w = self.words[base + wi as usize];
            let word_base = wi * WORD_BITS;
            if w == 0 {
                if let Some(start) = open.take() {
                    runs.push((start, word_base - 1));
                }
                continue;
            }
            if w == !0 {
                if open.is_none() {
                    open = Some(word_base);
                }
                continue;
            }
            let mut bit = 0u32;
            while bit < WORD_BITS {
                let rest = w >> bit;
                if open.is_none() {
                    if rest == 0 {
                        break;
                    }
                    bit += rest.trailing_zeros();
                    open = Some(word_base + bit);
                } else {
                    let zeros = (!rest).trailing_zeros();
                    if bit + zeros >= WORD_BITS {
                        break; // run continues into the next word
                    }
                    bit += zeros;
                    runs.push((open.take().unwrap(), word_base + bit - 1));
                }
            }
        }
        if let Some(start) = open {
            runs.push((start, self.width - 1));
        }
        runs
    }

    /// Per-pixel majority vote over a window of same-resolution masks.
    /// Ties vote foreground. Panics if the window is empty or resolutions
    /// differ (callers validate).
    pub fn majority(window: &[&Mask]) -> Mask {
        assert!(!window.is_empty(), "majority vote needs at least one mask");
        let first = window[0];
        if window.len() == 1 {
            return first.clone();
        }
        for m in &window[1..] {
            assert_eq!(
                (m.width, m.height),
                (first.width, first.height),
                "majority window masks must share a resolution"
            );
        }
        let mut out = Mask::empty(first.width, first.height);
        let threshold = (window.len() as u32).div_ceil(2);
        if window.len() == 3 {
            // w=3 fast path: majority(a,b,c) = ab | ac | bc
            let (a, b, c) = (&window[0].words, &window[1].words, &window[2].words);
            for i in 0..out.words.len() {
                out.words[i] = (a[i] & b[i]) | (a[i] & c[i]) | (b[i] & c[i]);
            }
            return out;
        }
        // General path: bit-sliced counters, one binary digit per plane.
        let planes_needed = usize::BITS - window.len().leading_zeros();
        let mut planes = vec![0u64; planes_needed as usize];
        for i in 0..out.words.len() {
            planes.fill(0);
            for m in window {
                let mut carry = m.words[i];
                for p in planes.iter_mut() {
                    let t = *p & carry;
                    *p ^= carry;
                    carry = t;
                    if carry == 0 {
                        break;
                    }
                }
            }
            // count >= threshold, compared bitwise per pixel
            let mut gt = 0u64;
            let mut eq = !0u64;
            for (k, &plane) in planes.iter().enumerate().rev() {
                let tb = if threshold >> k & 1 == 1 { !0u64 } else { 0 };
                gt |= eq & plane & !tb;
                eq &= !(plane ^ tb);
            }
            out.words[i] = gt | eq;
        }
        out
    }
}

/// Intersection-over-union of two same-resolution masks. See [`Mask::iou`].
pub fn mask_iou(a: &Mask, b: &Mask) -> Result<f64> {
    a.iou(b)
}

/// Foreground centroid of a mask. See [`Mask::centroid`].
pub fn mask_centroid(m: &Mask) -> Result<(f64, f64)> {
    m.centroid()
}

/// All categories' masks for one camera at one frame index.
///
/// A category absent from `masks` was not visible in this view at all; a
/// present-but-empty mask means the mask source looked and found nothing.
#[derive(Debug, Clone)]
pub struct FrameBundle {
    pub camera: CameraId,
    pub frame_index: u64,
    pub timestamp_s: f64,
    pub masks: BTreeMap<CategoryId, Mask>,
}

impl FrameBundle {
    pub fn new(camera: CameraId, frame_index: u64, fps: f64) -> Self {
        FrameBundle {
            camera,
            frame_index,
            timestamp_s: frame_index as f64 / fps,
            masks: BTreeMap::new(),
        }
    }

    pub fn mask(&self, category: CategoryId) -> Option<&Mask> {
        self.masks.get(&category)
    }
}

/// Canonically ordered category pair (lower id first).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CategoryPair(pub CategoryId, pub CategoryId);

impl CategoryPair {
    pub fn new(a: CategoryId, b: CategoryId) -> Self {
        if a <= b {
            CategoryPair(a, b)
        } else {
            CategoryPair(b, a)
        }
    }

    /// All unordered pairs over ids `0..n`, in canonical order.
    pub fn all(n: u16) -> Vec<CategoryPair> {
        let mut pairs = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                pairs.push(CategoryPair(CategoryId(a), CategoryId(b)));
            }
        }
        pairs
    }
}
