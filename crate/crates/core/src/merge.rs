//! Merging overlapping sliding-window softmax predictions into one class
//! map: running per-pixel per-class sums plus a coverage count, averaged and
//! argmax-ed once every window has been applied.

use serde::{Deserialize, Serialize};

use crate::classify::TofClass;
use crate::error::{Error, Result};
use crate::raster::{Band, BandData, GeoTransform, RasterGrid};

/// How much a per-pixel class vector may deviate from summing to one before
/// it is rejected as unnormalized.
pub const PROB_SUM_TOLERANCE: f64 = 1e-3;

/// One window of softmax output: `window x window` pixels, each holding a
/// probability per class, interleaved `[pixel][class]` row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxPatch {
    /// Window origin within the tile, in pixels.
    pub row: usize,
    pub col: usize,
    pub window: usize,
    /// `window * window * TofClass::COUNT` values, classes fastest.
    pub probs: Vec<f32>,
}

impl SoftmaxPatch {
    pub fn new(row: usize, col: usize, window: usize, probs: Vec<f32>) -> Result<Self> {
        let expect = window * window * TofClass::COUNT;
        if window == 0 {
            return Err(Error::Parameter("window must be positive".into()));
        }
        if probs.len() != expect {
            return Err(Error::Parameter(format!(
                "softmax patch needs {expect} values ({window}x{window} pixels x \
                 {} classes), got {}",
                TofClass::COUNT,
                probs.len()
            )));
        }
        Ok(SoftmaxPatch {
            row,
            col,
            window,
            probs,
        })
    }

    /// Class-probability vector for one pixel in window-local coordinates.
    pub fn pixel(&self, local_row: usize, local_col: usize) -> &[f32] {
        let base = (local_row * self.window + local_col) * TofClass::COUNT;
        &self.probs[base..base + TofClass::COUNT]
    }
}

/// Running per-pixel class sums and window coverage over a full tile.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxAccumulator {
    pub width: usize,
    pub height: usize,
    /// `width * height * TofClass::COUNT` sums, classes fastest. 64-bit so
    /// accumulation order cannot perturb the result at output precision.
    pub class_sums: Vec<f64>,
    pub coverage: Vec<u32>,
    pub transform: GeoTransform,
}

/// Voting rule for class assignment. `Soft` averages probabilities and takes
/// one argmax at the end; `Hard` lets every window cast a full vote for its
/// locally most probable class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoteMode {
    Soft,
    Hard,
}

impl SoftmaxAccumulator {
    pub fn new(width: usize, height: usize, transform: GeoTransform) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Parameter(format!(
                "accumulator extent must be positive, got {width}x{height}"
            )));
        }
        Ok(SoftmaxAccumulator {
            width,
            height,
            class_sums: vec![0.0; width * height * TofClass::COUNT],
            coverage: vec![0u32; width * height],
            transform,
        })
    }

    /// Add one predicted window: per-class sums grow by the patch
    /// probabilities over its footprint and coverage there rises by one
    /// (`Soft`), or by a one-hot vote for the window's per-pixel argmax
    /// (`Hard`). Pure addition, so any accumulation order over the same
    /// patch multiset yields bit-identical sums. Validation happens before
    /// any mutation: a rejected patch leaves the accumulator untouched.
    pub fn accumulate_patch(&mut self, patch: &SoftmaxPatch, mode: VoteMode) -> Result<()> {
        if patch.col + patch.window > self.width || patch.row + patch.window > self.height {
            return Err(Error::Bounds(format!(
                "window {} at ({}, {}) exceeds extent {}x{}",
                patch.window, patch.col, patch.row, self.width, self.height
            )));
        }
        for lr in 0..patch.window {
            for lc in 0..patch.window {
                let vector = patch.pixel(lr, lc);
                let mut sum = 0.0f64;
                for &p in vector {
                    if !(0.0..=1.0).contains(&(p as f64)) {
                        return Err(Error::Validation(format!(
                            "pixel ({}, {}) of patch at ({}, {}): probability {p} \
                             outside [0, 1]",
                            patch.row + lr,
                            patch.col + lc,
                            patch.row,
                            patch.col
                        )));
                    }
                    sum += p as f64;
                }
                if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
                    return Err(Error::Validation(format!(
                        "pixel ({}, {}) of patch at ({}, {}): class vector sums to \
                         {sum}, expected 1 within {PROB_SUM_TOLERANCE}",
                        patch.row + lr,
                        patch.col + lc,
                        patch.row,
                        patch.col
                    )));
                }
            }
        }
        for lr in 0..patch.window {
            for lc in 0..patch.window {
                let vector = patch.pixel(lr, lc);
                let pixel = (patch.row + lr) * self.width + (patch.col + lc);
                let base = pixel * TofClass::COUNT;
                match mode {
                    VoteMode::Soft => {
                        for (k, &p) in vector.iter().enumerate() {
                            self.class_sums[base + k] += p as f64;
                        }
                    }
                    VoteMode::Hard => {
                        self.class_sums[base + argmax(vector)] += 1.0;
                    }
                }
                self.coverage[pixel] += 1;
            }
        }
        Ok(())
    }

    /// Fold another accumulator into this one (for parallel producers that
    /// each own a private accumulator). Addition is associative and
    /// commutative over a fixed partition, so the reduction is bit-stable.
    pub fn merge(&mut self, other: &SoftmaxAccumulator) -> Result<()> {
        if self.width != other.width
            || self.height != other.height
            || self.transform != other.transform
        {
            return Err(Error::Alignment(
                "accumulators cover different extents".into(),
            ));
        }
        for (a, b) in self.class_sums.iter_mut().zip(&other.class_sums) {
            *a += b;
        }
        for (a, b) in self.coverage.iter_mut().zip(&other.coverage) {
            *a += b;
        }
        Ok(())
    }

    /// Average the sums and assign each pixel its highest-mean class (ties
    /// broken toward the lowest class index). Returns the label map and the
    /// 5-band mean-probability raster.
    pub fn finalize(&self) -> Result<(RasterGrid, RasterGrid)> {
        let zero_pixels = self.coverage.iter().filter(|&&c| c == 0).count();
        if zero_pixels > 0 {
            return Err(Error::IncompleteCoverage { zero_pixels });
        }
        let pixels = self.width * self.height;
        let mut labels = vec![0u8; pixels];
        let mut means = vec![vec![0.0f32; pixels]; TofClass::COUNT];
        for pixel in 0..pixels {
            let base = pixel * TofClass::COUNT;
            let cover = self.coverage[pixel] as f64;
            let mut best = 0usize;
            let mut best_mean = f64::NEG_INFINITY;
            for k in 0..TofClass::COUNT {
                let mean = self.class_sums[base + k] / cover;
                means[k][pixel] = mean as f32;
                if mean > best_mean {
                    best_mean = mean;
                    best = k;
                }
            }
            labels[pixel] = best as u8;
        }
        let label_grid =
            RasterGrid::single_u8(self.width, self.height, labels, None, self.transform)?;
        let mean_grid = RasterGrid::new(
            self.width,
            self.height,
            means
                .into_iter()
                .map(|data| Band {
                    data: BandData::F32(data),
                    nodata: None,
                })
                .collect(),
            self.transform,
        )?;
        Ok((label_grid, mean_grid))
    }
}

fn argmax(vector: &[f32]) -> usize {
    let mut best = 0usize;
    let mut best_p = f32::NEG_INFINITY;
    for (k, &p) in vector.iter().enumerate() {
        if p > best_p {
            best_p = p;
            best = k;
        }
    }
    best
}
