//! Woody-vegetation reference mask: height threshold on the nDSM, NDVI
//! two-means split inside the height mask, then morphological closing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kmeans::{two_means, TwoMeans};
use crate::morphology;
use crate::raster::{compute_ndvi, BinaryMask, RasterGrid};

/// Default minimum object height (meters), shared with the fixture
/// generator's analytic labeling.
pub fn default_height_threshold() -> f64 {
    3.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaskParams {
    /// Minimum object height in meters; comparison is inclusive (>=), so an
    /// exactly-threshold pixel survives.
    pub height_threshold: f64,
    /// Rectangular structuring element for closing, odd in both dimensions.
    pub closing_window: (usize, usize),
    pub kmeans_max_iter: usize,
    pub kmeans_tol: f64,
}

impl Default for MaskParams {
    fn default() -> Self {
        MaskParams {
            height_threshold: default_height_threshold(),
            closing_window: (5, 5),
            kmeans_max_iter: 100,
            kmeans_tol: 1e-6,
        }
    }
}

impl MaskParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.height_threshold > 0.0) {
            return Err(Error::Parameter(format!(
                "height threshold must be positive, got {}",
                self.height_threshold
            )));
        }
        let (wx, wy) = self.closing_window;
        if wx == 0 || wy == 0 || wx % 2 == 0 || wy % 2 == 0 {
            return Err(Error::Parameter(format!(
                "closing window must be odd in both dimensions, got {wx}x{wy}"
            )));
        }
        Ok(())
    }
}

/// Outcome of the NDVI two-means split.
#[derive(Debug, Clone)]
pub struct KMeansResult {
    /// Cluster mean NDVI values, ascending.
    pub centers: [f64; 2],
    /// Index into `centers` of the vegetation (higher-mean) cluster.
    pub vegetation_cluster: usize,
    /// NDVI decision boundary; values >= threshold are vegetation.
    pub threshold: f64,
    /// Cluster index per in-mask pixel with valid NDVI, row-major order.
    pub assignment: Vec<u8>,
    pub iterations: usize,
}

/// Pixel true ⇔ nDSM value >= threshold and not nodata.
pub fn build_height_mask(ndsm: &RasterGrid, params: &MaskParams) -> Result<BinaryMask> {
    params.validate()?;
    if ndsm.bands.len() != 1 {
        return Err(Error::Parameter(format!(
            "nDSM must be single-band, got {} bands",
            ndsm.bands.len()
        )));
    }
    let mut mask = BinaryMask::new_filled(ndsm.width, ndsm.height, false, ndsm.transform);
    let nodata = ndsm.bands[0].nodata;
    for i in 0..ndsm.width * ndsm.height {
        let v = ndsm.bands[0].data.get(i);
        let valid = nodata.is_none_or(|nd| v != nd);
        mask.bits[i] = valid && v >= params.height_threshold;
    }
    Ok(mask)
}

/// Two-means split of the NDVI values of in-mask pixels. Pixels whose NDVI
/// is nodata (e.g. imagery gaps inside the height mask) are skipped.
pub fn split_ndvi_kmeans(
    ndvi: &RasterGrid,
    mask: &BinaryMask,
    params: &MaskParams,
) -> Result<KMeansResult> {
    if !mask.aligned_to(ndvi) {
        return Err(Error::Alignment(
            "NDVI raster and mask have different grids".into(),
        ));
    }
    let values = collect_masked(ndvi, mask);
    let km = two_means(&values, params.kmeans_max_iter, params.kmeans_tol)?;
    let assignment = values.iter().map(|v| km.assign(*v) as u8).collect();
    Ok(KMeansResult {
        centers: km.centers,
        vegetation_cluster: 1,
        threshold: km.threshold,
        assignment,
        iterations: km.iterations,
    })
}

fn collect_masked(ndvi: &RasterGrid, mask: &BinaryMask) -> Vec<f64> {
    let mut values = Vec::new();
    for row in 0..ndvi.height {
        for col in 0..ndvi.width {
            if mask.get(col, row) && !ndvi.is_nodata(0, col, row) {
                values.push(ndvi.value(0, col, row));
            }
        }
    }
    values
}

/// Everything `build_woody_mask` learned along the way, for run reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WoodyMaskReport {
    pub height_pixels: usize,
    pub vegetation_pixels: usize,
    pub closed_pixels: usize,
    /// None when the height mask was empty or the NDVI split was degenerate.
    pub kmeans: Option<TwoMeans>,
}

/// Full reference-mask composition: height mask → NDVI inside it → two-means
/// split → keep the vegetation cluster → morphological closing.
///
/// Degenerate NDVI (fewer than two distinct values inside the height mask)
/// keeps the whole height mask as vegetation: a single natural group cannot
/// be split, and discarding it would empty the reference for valid scenes.
pub fn build_woody_mask(
    ndsm: &RasterGrid,
    dop: &RasterGrid,
    params: &MaskParams,
) -> Result<(BinaryMask, WoodyMaskReport)> {
    params.validate()?;
    if !ndsm.same_grid(dop) {
        return Err(Error::Alignment(
            "nDSM and DOP are not on the same grid".into(),
        ));
    }
    let height_mask = build_height_mask(ndsm, params)?;
    let height_pixels = height_mask.count_true();
    if height_pixels == 0 {
        return Ok((
            height_mask,
            WoodyMaskReport {
                height_pixels: 0,
                vegetation_pixels: 0,
                closed_pixels: 0,
                kmeans: None,
            },
        ));
    }

    let ndvi = compute_ndvi(dop, &height_mask)?;
    let values = collect_masked(&ndvi, &height_mask);
    let km = match two_means(&values, params.kmeans_max_iter, params.kmeans_tol) {
        Ok(km) => Some(km),
        Err(Error::DegenerateInput(_)) | Err(Error::EmptyInput(_)) => None,
        Err(e) => return Err(e),
    };

    let mut vegetation = BinaryMask::new_filled(ndsm.width, ndsm.height, false, ndsm.transform);
    for row in 0..ndsm.height {
        for col in 0..ndsm.width {
            if !height_mask.get(col, row) || ndvi.is_nodata(0, col, row) {
                continue;
            }
            let keep = match &km {
                Some(km) => km.assign(ndvi.value(0, col, row)) == 1,
                None => true,
            };
            if keep {
                vegetation.set(col, row, true);
            }
        }
    }
    let vegetation_pixels = vegetation.count_true();
    let closed = morphology::close(&vegetation, params.closing_window)?;
    let closed_pixels = closed.count_true();
    Ok((
        closed,
        WoodyMaskReport {
            height_pixels,
            vegetation_pixels,
            closed_pixels,
            kmeans: km,
        },
    ))
}
