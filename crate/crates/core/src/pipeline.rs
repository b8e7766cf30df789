//! End-to-end reference workflow: nDSM + imagery → woody mask → polygons →
//! classified features → label raster, plus a machine-readable run report.
//!
//! Each stage is available on its own (see [`crate::mask`],
//! [`crate::vectorize`], [`crate::classify`], [`crate::rasterize`]); this
//! module only sequences them and records what happened. Errors bubbling out
//! are wrapped with the stage name so callers can tell *where* a run failed
//! without parsing messages.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::classify::{class_counts, ClassifyParams, TofClass, TofFeature};
use crate::error::{Error, Result};
use crate::mask::{build_woody_mask, MaskParams, WoodyMaskReport};
use crate::raster::RasterGrid;
use crate::rasterize::rasterize_features;
use crate::vectorize::{drop_small_holes, simplify_dp, vectorize_mask};

/// Parameters for the full reference workflow.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineParams {
    pub mask: MaskParams,
    /// Douglas–Peucker tolerance in meters. The default of 0.4 m is two
    /// pixels at the 0.2 m working resolution.
    pub dp_tolerance_m: f64,
    /// Interior rings smaller than this are filled right after tracing,
    /// before simplification.
    pub min_hole_area_m2: f64,
    pub classify: ClassifyParams,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            mask: MaskParams::default(),
            dp_tolerance_m: 0.4,
            min_hole_area_m2: 1.0,
            classify: ClassifyParams::default(),
        }
    }
}

impl PipelineParams {
    pub fn validate(&self) -> Result<()> {
        self.mask.validate()?;
        if !(self.dp_tolerance_m >= 0.0) {
            return Err(Error::Parameter(format!(
                "simplification tolerance must be >= 0, got {}",
                self.dp_tolerance_m
            )));
        }
        if !(self.min_hole_area_m2 >= 0.0) {
            return Err(Error::Parameter(format!(
                "minimum hole area must be >= 0, got {}",
                self.min_hole_area_m2
            )));
        }
        Ok(())
    }
}

/// Wall-clock seconds spent in each stage.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StageTimings {
    pub mask_s: f64,
    pub vectorize_s: f64,
    pub classify_s: f64,
    pub rasterize_s: f64,
}

/// What a pipeline run produced, stage by stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub mask: WoodyMaskReport,
    /// Connected components that survived vectorization (= feature count).
    pub component_count: usize,
    /// Feature count per class code (index = code; Background stays 0).
    pub class_counts: [usize; TofClass::COUNT],
    pub timings: StageTimings,
}

/// Run the whole reference workflow on an aligned nDSM + imagery pair.
///
/// Returns the classified vector layer, the label raster painted from it
/// (band 0, `u8` class codes on the input grid), and the run report. An
/// input with no woody pixels is a valid scene: the feature list is empty
/// and the label raster is all background.
pub fn run_reference_pipeline(
    ndsm: &RasterGrid,
    dop: &RasterGrid,
    params: &PipelineParams,
) -> Result<(Vec<TofFeature>, RasterGrid, RunReport)> {
    params.validate()?;

    let start = Instant::now();
    let (mask, mask_report) =
        build_woody_mask(ndsm, dop, &params.mask).map_err(|e| e.in_stage("mask"))?;
    let mask_s = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let polygons = vectorize_mask(&mask)
        .and_then(|polys| {
            polys
                .into_iter()
                .map(|p| {
                    simplify_dp(
                        &drop_small_holes(p, params.min_hole_area_m2),
                        params.dp_tolerance_m,
                    )
                })
                .collect::<Result<Vec<_>>>()
        })
        .map_err(|e| e.in_stage("vectorize"))?;
    let vectorize_s = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let features = polygons
        .into_iter()
        .enumerate()
        .map(|(i, poly)| TofFeature::from_polygon(i as u64, poly, &params.classify))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("classify"))?;
    let classify_s = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let labels = rasterize_features(&features, ndsm.width, ndsm.height, ndsm.transform)
        .map_err(|e| e.in_stage("rasterize"))?;
    let rasterize_s = start.elapsed().as_secs_f64();

    let report = RunReport {
        mask: mask_report,
        component_count: features.len(),
        class_counts: class_counts(&features),
        timings: StageTimings {
            mask_s,
            vectorize_s,
            classify_s,
            rasterize_s,
        },
    };
    Ok((features, labels, report))
}
