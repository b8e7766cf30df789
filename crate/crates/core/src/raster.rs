use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Imagery band order is fixed: Red, Green, Blue, NIR.
pub const BAND_RED: usize = 0;
pub const BAND_GREEN: usize = 1;
pub const BAND_BLUE: usize = 2;
pub const BAND_NIR: usize = 3;

/// Sentinel for pixels outside the NDVI domain.
pub const NDVI_NODATA: f64 = -9999.0;

/// Affine mapping between pixel and map coordinates (meters).
/// Rows increase southward: map_y = origin_y - row * pixel_size_y.
///
/// Round-trip accuracy: pixel → map → pixel recovers the pixel coordinate
/// to better than 1e-9 pixels as long as |map coordinate| < ~1e6 m and the
/// pixel size is >= 0.1 m. Beyond that the error grows with the coordinate
/// magnitude's ULP (about 2e-9 px at full UTM northings — half a nanometer
/// on the ground), an f64 representation floor no formula can undercut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoTransform {
    pub origin_x: f64,
    pub origin_y: f64,
    pub pixel_size_x: f64,
    pub pixel_size_y: f64,
}

impl GeoTransform {
    pub fn new(origin_x: f64, origin_y: f64, pixel_size_x: f64, pixel_size_y: f64) -> Result<Self> {
        if !(pixel_size_x > 0.0 && pixel_size_y > 0.0) {
            return Err(Error::Parameter(format!(
                "pixel sizes must be strictly positive, got {pixel_size_x} x {pixel_size_y}"
            )));
        }
        Ok(GeoTransform {
            origin_x,
            origin_y,
            pixel_size_x,
            pixel_size_y,
        })
    }

    /// Map coordinates of the top-left corner of pixel (col, row).
    /// Fused multiply-add keeps the forward map to a single rounding,
    /// which is what the documented round-trip accuracy relies on.
    pub fn pixel_to_map(&self, col: f64, row: f64) -> (f64, f64) {
        (
            col.mul_add(self.pixel_size_x, self.origin_x),
            (-row).mul_add(self.pixel_size_y, self.origin_y),
        )
    }

    /// Fractional pixel coordinates of a map point. Inverse of `pixel_to_map`.
    pub fn map_to_pixel(&self, x: f64, y: f64) -> (f64, f64) {
        (
            (x - self.origin_x) / self.pixel_size_x,
            (self.origin_y - y) / self.pixel_size_y,
        )
    }

    /// Map coordinates of the center of pixel (col, row).
    pub fn pixel_center(&self, col: usize, row: usize) -> (f64, f64) {
        self.pixel_to_map(col as f64 + 0.5, row as f64 + 0.5)
    }
}

/// Per-band sample storage. Imagery is 8-bit, height/NDVI are 32-bit real.
#[derive(Debug, Clone, PartialEq)]
pub enum BandData {
    U8(Vec<u8>),
    F32(Vec<f32>),
}

impl BandData {
    pub fn len(&self) -> usize {
        match self {
            BandData::U8(v) => v.len(),
            BandData::F32(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, idx: usize) -> f64 {
        match self {
            BandData::U8(v) => v[idx] as f64,
            BandData::F32(v) => v[idx] as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub data: BandData,
    pub nodata: Option<f64>,
}

/// Multi-band pixel grid with an affine geotransform.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterGrid {
    pub width: usize,
    pub height: usize,
    pub bands: Vec<Band>,
    pub transform: GeoTransform,
}

impl RasterGrid {
    pub fn new(width: usize, height: usize, bands: Vec<Band>, transform: GeoTransform) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Parameter(format!(
                "raster dimensions must be non-zero, got {width}x{height}"
            )));
        }
        if bands.is_empty() {
            return Err(Error::Parameter("raster must have at least one band".into()));
        }
        let expect = width * height;
        for (i, band) in bands.iter().enumerate() {
            if band.data.len() != expect {
                return Err(Error::Parameter(format!(
                    "band {i} has {} samples, expected {expect}",
                    band.data.len()
                )));
            }
        }
        Ok(RasterGrid {
            width,
            height,
            bands,
            transform,
        })
    }

    /// Single-band 32-bit grid, the shape used for nDSM and NDVI layers.
    pub fn single_f32(
        width: usize,
        height: usize,
        data: Vec<f32>,
        nodata: Option<f64>,
        transform: GeoTransform,
    ) -> Result<Self> {
        RasterGrid::new(
            width,
            height,
            vec![Band {
                data: BandData::F32(data),
                nodata,
            }],
            transform,
        )
    }

    /// Single-band 8-bit grid, the shape used for label maps.
    pub fn single_u8(
        width: usize,
        height: usize,
        data: Vec<u8>,
        nodata: Option<f64>,
        transform: GeoTransform,
    ) -> Result<Self> {
        RasterGrid::new(
            width,
            height,
            vec![Band {
                data: BandData::U8(data),
                nodata,
            }],
            transform,
        )
    }

    pub fn index(&self, col: usize, row: usize) -> usize {
        debug_assert!(col < self.width && row < self.height);
        row * self.width + col
    }

    /// Sample value as f64; panics on out-of-range band (programmer error).
    pub fn value(&self, band: usize, col: usize, row: usize) -> f64 {
        self.bands[band].data.get(self.index(col, row))
    }

    pub fn is_nodata(&self, band: usize, col: usize, row: usize) -> bool {
        match self.bands[band].nodata {
            Some(nd) => self.value(band, col, row) == nd,
            None => false,
        }
    }

    pub fn band_f32(&self, band: usize) -> Result<&[f32]> {
        match &self.bands[band].data {
            BandData::F32(v) => Ok(v),
            BandData::U8(_) => Err(Error::Data(format!("band {band} is not 32-bit real"))),
        }
    }

    pub fn band_u8(&self, band: usize) -> Result<&[u8]> {
        match &self.bands[band].data {
            BandData::U8(v) => Ok(v),
            BandData::F32(_) => Err(Error::Data(format!("band {band} is not 8-bit"))),
        }
    }

    pub fn same_grid(&self, other: &RasterGrid) -> bool {
        self.width == other.width && self.height == other.height && self.transform == other.transform
    }
}

/// Single-band boolean grid aligned to a source raster.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
    pub transform: GeoTransform,
}

impl BinaryMask {
    pub fn new_filled(width: usize, height: usize, value: bool, transform: GeoTransform) -> Self {
        BinaryMask {
            width,
            height,
            bits: vec![value; width * height],
            transform,
        }
    }

    pub fn index(&self, col: usize, row: usize) -> usize {
        debug_assert!(col < self.width && row < self.height);
        row * self.width + col
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.bits[self.index(col, row)]
    }

    pub fn set(&mut self, col: usize, row: usize, value: bool) {
        let i = self.index(col, row);
        self.bits[i] = value;
    }

    pub fn count_true(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn aligned_to(&self, grid: &RasterGrid) -> bool {
        self.width == grid.width && self.height == grid.height && self.transform == grid.transform
    }

    /// 0/1 single-band 8-bit view of the mask, the on-disk representation.
    pub fn to_grid(&self) -> RasterGrid {
        RasterGrid::single_u8(
            self.width,
            self.height,
            self.bits.iter().map(|&b| b as u8).collect(),
            None,
            self.transform,
        )
        .expect("mask dimensions always match its bit count")
    }

    /// Read a mask back from a single-band 8-bit grid; any nonzero value
    /// counts as set. Multi-band or float grids are rejected so an imagery
    /// file passed by mistake fails loudly instead of becoming a mask.
    pub fn from_grid(grid: &RasterGrid) -> Result<BinaryMask> {
        if grid.bands.len() != 1 {
            return Err(Error::Data(format!(
                "a mask raster must have exactly 1 band, got {}",
                grid.bands.len()
            )));
        }
        let bits = grid.band_u8(0)?.iter().map(|&v| v != 0).collect();
        Ok(BinaryMask {
            width: grid.width,
            height: grid.height,
            bits,
            transform: grid.transform,
        })
    }
}

/// NDVI = (NIR - Red) / (NIR + Red) inside `domain`; outside it the output
/// holds the nodata sentinel. NIR + Red = 0 maps to 0 so dark artifacts
/// stay out of the vegetation cluster.
pub fn compute_ndvi(grid: &RasterGrid, domain: &BinaryMask) -> Result<RasterGrid> {
    if grid.bands.len() < 4 {
        return Err(Error::MissingBand(format!(
            "NDVI needs Red and NIR (4-band imagery), got {} bands",
            grid.bands.len()
        )));
    }
    if !domain.aligned_to(grid) {
        return Err(Error::Alignment(format!(
            "domain mask {}x{} does not match grid {}x{}",
            domain.width, domain.height, grid.width, grid.height
        )));
    }
    let mut out = vec![NDVI_NODATA as f32; grid.width * grid.height];
    for row in 0..grid.height {
        for col in 0..grid.width {
            let i = grid.index(col, row);
            if !domain.bits[i] {
                continue;
            }
            if grid.is_nodata(BAND_RED, col, row) || grid.is_nodata(BAND_NIR, col, row) {
                continue;
            }
            let red = grid.bands[BAND_RED].data.get(i);
            let nir = grid.bands[BAND_NIR].data.get(i);
            let sum = nir + red;
            out[i] = if sum == 0.0 { 0.0 } else { ((nir - red) / sum) as f32 };
        }
    }
    RasterGrid::single_f32(
        grid.width,
        grid.height,
        out,
        Some(NDVI_NODATA),
        grid.transform,
    )
}

/// Nearest-neighbor resampling to a square target pixel size. Output covers
/// the same map extent; every sample is copied from the source (no new
/// values). Sampling point is the center of each output pixel.
pub fn resample_nearest(grid: &RasterGrid, target_pixel_size: f64) -> Result<RasterGrid> {
    if !(target_pixel_size > 0.0) {
        return Err(Error::Parameter(format!(
            "target pixel size must be positive, got {target_pixel_size}"
        )));
    }
    let t = &grid.transform;
    let extent_x = grid.width as f64 * t.pixel_size_x;
    let extent_y = grid.height as f64 * t.pixel_size_y;
    // The 1e-9 slack keeps exact-ratio extents (e.g. 2 px at 0.1 m -> 0.2 m)
    // from gaining a phantom row/column through floating-point round-up.
    let out_w = ((extent_x / target_pixel_size - 1e-9).ceil() as usize).max(1);
    let out_h = ((extent_y / target_pixel_size - 1e-9).ceil() as usize).max(1);

    let src_col_of = |c: usize| -> usize {
        let x = (c as f64 + 0.5) * target_pixel_size / t.pixel_size_x;
        (x.floor() as isize).clamp(0, grid.width as isize - 1) as usize
    };
    let src_row_of = |r: usize| -> usize {
        let y = (r as f64 + 0.5) * target_pixel_size / t.pixel_size_y;
        (y.floor() as isize).clamp(0, grid.height as isize - 1) as usize
    };
    let cols: Vec<usize> = (0..out_w).map(src_col_of).collect();
    let rows: Vec<usize> = (0..out_h).map(src_row_of).collect();

    let bands = grid
        .bands
        .iter()
        .map(|band| {
            let data = match &band.data {
                BandData::U8(v) => {
                    let mut out = Vec::with_capacity(out_w * out_h);
                    for &sr in &rows {
                        let base = sr * grid.width;
                        out.extend(cols.iter().map(|&sc| v[base + sc]));
                    }
                    BandData::U8(out)
                }
                BandData::F32(v) => {
                    let mut out = Vec::with_capacity(out_w * out_h);
                    for &sr in &rows {
                        let base = sr * grid.width;
                        out.extend(cols.iter().map(|&sc| v[base + sc]));
                    }
                    BandData::F32(out)
                }
            };
            Band {
                data,
                nodata: band.nodata,
            }
        })
        .collect();

    RasterGrid::new(
        out_w,
        out_h,
        bands,
        GeoTransform::new(t.origin_x, t.origin_y, target_pixel_size, target_pixel_size)?,
    )
}
