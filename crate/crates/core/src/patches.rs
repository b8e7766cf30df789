//! Patch extraction: cutting aligned image/label windows out of a tile and
//! augmenting training patches with horizontal and vertical flips.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{Band, BandData, RasterGrid};
use crate::split::window_origins;

/// Geometric variant of a patch. Flips mirror the pixel grid only; the
/// georeference of the source window is kept as-is since flipped patches
/// exist purely as training inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlipVariant {
    Original,
    /// Mirror left-right (columns reversed).
    Horizontal,
    /// Mirror top-bottom (rows reversed).
    Vertical,
}

impl FlipVariant {
    pub const AUGMENTED: [FlipVariant; 3] = [
        FlipVariant::Original,
        FlipVariant::Horizontal,
        FlipVariant::Vertical,
    ];
}

/// Where a patch comes from and which variant it is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchSpec {
    /// Window origin in pixels (top-left corner within the tile).
    pub col: usize,
    pub row: usize,
    pub window: usize,
    pub flip: FlipVariant,
}

/// One extracted patch: its `PatchSpec` plus the (possibly flipped) image and label
/// windows.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub spec: PatchSpec,
    pub image: RasterGrid,
    pub labels: RasterGrid,
}

/// All patch specs for a tile of the given size, row-major over the window
/// grid. With `augment` each window yields the original plus both flips
/// (training); without it only originals (validation/test).
pub fn planned_patches(
    width: usize,
    height: usize,
    window: usize,
    stride: usize,
    augment: bool,
) -> Result<Vec<PatchSpec>> {
    let cols = window_origins(width, window, stride)?;
    let rows = window_origins(height, window, stride)?;
    let variants: &[FlipVariant] = if augment {
        &FlipVariant::AUGMENTED
    } else {
        &[FlipVariant::Original]
    };
    let mut specs = Vec::with_capacity(rows.len() * cols.len() * variants.len());
    for &row in &rows {
        for &col in &cols {
            for &flip in variants {
                specs.push(PatchSpec {
                    col,
                    row,
                    window,
                    flip,
                });
            }
        }
    }
    Ok(specs)
}

fn flip_samples<T: Copy>(data: &[T], width: usize, height: usize, flip: FlipVariant) -> Vec<T> {
    match flip {
        FlipVariant::Original => data.to_vec(),
        FlipVariant::Horizontal => {
            let mut out = Vec::with_capacity(data.len());
            for row in 0..height {
                out.extend(data[row * width..(row + 1) * width].iter().rev());
            }
            out
        }
        FlipVariant::Vertical => {
            let mut out = Vec::with_capacity(data.len());
            for row in (0..height).rev() {
                out.extend_from_slice(&data[row * width..(row + 1) * width]);
            }
            out
        }
    }
}

/// Mirror a grid horizontally or vertically; all bands move jointly.
pub fn flip_grid(grid: &RasterGrid, flip: FlipVariant) -> RasterGrid {
    let bands = grid
        .bands
        .iter()
        .map(|b| Band {
            data: match &b.data {
                BandData::U8(v) => {
                    BandData::U8(flip_samples(v, grid.width, grid.height, flip))
                }
                BandData::F32(v) => {
                    BandData::F32(flip_samples(v, grid.width, grid.height, flip))
                }
            },
            nodata: b.nodata,
        })
        .collect();
    RasterGrid {
        width: grid.width,
        height: grid.height,
        bands,
        transform: grid.transform,
    }
}

/// Copy a square window out of a grid. The returned grid keeps its place in
/// the world: the geotransform origin moves to the window's top-left corner.
pub fn extract_window(
    grid: &RasterGrid,
    col: usize,
    row: usize,
    window: usize,
) -> Result<RasterGrid> {
    if window == 0 {
        return Err(Error::Parameter("window must be positive".into()));
    }
    if col + window > grid.width || row + window > grid.height {
        return Err(Error::Bounds(format!(
            "window {window} at ({col}, {row}) exceeds raster {}x{}",
            grid.width, grid.height
        )));
    }
    let ranges: Vec<std::ops::Range<usize>> = (0..window)
        .map(|r| {
            let start = (row + r) * grid.width + col;
            start..start + window
        })
        .collect();
    let bands = grid
        .bands
        .iter()
        .map(|b| Band {
            data: match &b.data {
                BandData::U8(v) => BandData::U8(
                    ranges.iter().flat_map(|r| v[r.clone()].iter().copied()).collect(),
                ),
                BandData::F32(v) => BandData::F32(
                    ranges.iter().flat_map(|r| v[r.clone()].iter().copied()).collect(),
                ),
            },
            nodata: b.nodata,
        })
        .collect();
    let (ox, oy) = grid.transform.pixel_to_map(col as f64, row as f64);
    let mut transform = grid.transform;
    transform.origin_x = ox;
    transform.origin_y = oy;
    RasterGrid::new(window, window, bands, transform)
}

/// Stream every patch of an aligned image/label tile pair through `f`,
/// row-major over the window grid, variants in the order original,
/// horizontal, vertical. Returns the number of patches emitted. Streaming
/// keeps memory flat: a 5000-pixel tile yields 75 augmented patches that
/// would otherwise all sit in memory at once.
pub fn for_each_patch<F>(
    image: &RasterGrid,
    labels: &RasterGrid,
    window: usize,
    stride: usize,
    augment: bool,
    mut f: F,
) -> Result<usize>
where
    F: FnMut(Patch) -> Result<()>,
{
    if !image.same_grid(labels) {
        return Err(Error::Alignment(format!(
            "image is {}x{} but labels are {}x{} (or transforms differ)",
            image.width, image.height, labels.width, labels.height
        )));
    }
    let specs = planned_patches(image.width, image.height, window, stride, augment)?;
    let mut emitted = 0usize;
    let mut window_cache: Option<(usize, usize, RasterGrid, RasterGrid)> = None;
    for spec in specs {
        let cached = matches!(
            &window_cache,
            Some((c, r, _, _)) if *c == spec.col && *r == spec.row
        );
        if !cached {
            let img = extract_window(image, spec.col, spec.row, window)?;
            let lab = extract_window(labels, spec.col, spec.row, window)?;
            window_cache = Some((spec.col, spec.row, img, lab));
        }
        let (_, _, img, lab) = window_cache.as_ref().unwrap();
        let patch = match spec.flip {
            FlipVariant::Original => Patch {
                spec,
                image: img.clone(),
                labels: lab.clone(),
            },
            flip => Patch {
                spec,
                image: flip_grid(img, flip),
                labels: flip_grid(lab, flip),
            },
        };
        f(patch)?;
        emitted += 1;
    }
    Ok(emitted)
}
