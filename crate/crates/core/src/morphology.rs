//! Binary morphology with a rectangular structuring element.
//!
//! Border policy: pixels outside the image are background for dilation and
//! erosion alike, so erosion shrinks foreground touching the image edge.

use crate::error::{Error, Result};
use crate::raster::BinaryMask;

fn check_window(window: (usize, usize)) -> Result<(usize, usize)> {
    let (wx, wy) = window;
    if wx == 0 || wy == 0 || wx % 2 == 0 || wy % 2 == 0 {
        return Err(Error::Parameter(format!(
            "structuring element must have odd positive dimensions, got {wx}x{wy}"
        )));
    }
    Ok((wx / 2, wy / 2))
}

/// Count of true bits in each sliding window of width 2r+1 along a line,
/// clipped at the line ends. `out[i]` covers indices [i-r, i+r] ∩ [0, n).
fn line_window_counts(bits: &[bool], r: usize, out: &mut [u32]) {
    let n = bits.len();
    let mut count = 0u32;
    // prime the window for index 0: [0, r]
    for &b in bits.iter().take((r + 1).min(n)) {
        count += b as u32;
    }
    for i in 0..n {
        out[i] = count;
        if i + r + 1 < n {
            count += bits[i + r + 1] as u32;
        }
        if i >= r {
            count -= bits[i - r] as u32;
        }
    }
}

fn separable_pass(
    mask: &BinaryMask,
    rx: usize,
    ry: usize,
    keep: impl Fn(u32, u32) -> bool,
) -> BinaryMask {
    let (w, h) = (mask.width, mask.height);
    // horizontal window counts per row
    let mut horiz = vec![0u32; w * h];
    let mut row_counts = vec![0u32; w];
    for row in 0..h {
        let line = &mask.bits[row * w..(row + 1) * w];
        line_window_counts(line, rx, &mut row_counts);
        horiz[row * w..(row + 1) * w].copy_from_slice(&row_counts);
    }
    // vertical accumulation of the horizontal counts per column
    let full = ((2 * rx + 1) * (2 * ry + 1)) as u32;
    let mut out = BinaryMask::new_filled(w, h, false, mask.transform);
    let mut col_sum = vec![0u32; w];
    for row in 0..(ry + 1).min(h) {
        for col in 0..w {
            col_sum[col] += horiz[row * w + col];
        }
    }
    for row in 0..h {
        for col in 0..w {
            out.bits[row * w + col] = keep(col_sum[col], full);
        }
        if row + ry + 1 < h {
            for col in 0..w {
                col_sum[col] += horiz[(row + ry + 1) * w + col];
            }
        }
        if row >= ry {
            for col in 0..w {
                col_sum[col] -= horiz[(row - ry) * w + col];
            }
        }
    }
    out
}

/// Dilation: pixel true if any pixel under the window is true.
pub fn dilate(mask: &BinaryMask, window: (usize, usize)) -> Result<BinaryMask> {
    let (rx, ry) = check_window(window)?;
    Ok(separable_pass(mask, rx, ry, |count, _| count > 0))
}

/// Erosion: pixel true only if the whole window is true and inside the image.
pub fn erode(mask: &BinaryMask, window: (usize, usize)) -> Result<BinaryMask> {
    let (rx, ry) = check_window(window)?;
    Ok(separable_pass(mask, rx, ry, |count, full| count == full))
}

/// Closing: dilation followed by erosion with the same element. Fills gaps
/// and holes smaller than the element without shrinking the foreground.
pub fn close(mask: &BinaryMask, window: (usize, usize)) -> Result<BinaryMask> {
    erode(&dilate(mask, window)?, window)
}
