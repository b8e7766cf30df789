use std::path::PathBuf;

use serde_json::json;
use tofmap_core::classify::{class_counts, TofClass, TofFeature};
use tofmap_core::io::geojson::write_geojson;
use tofmap_core::io::geotiff::read_geotiff;
use tofmap_core::raster::BinaryMask;
use tofmap_core::vectorize::{drop_small_holes, simplify_dp, vectorize_mask};

use crate::commands::{print_json, ClassifyOverrides, VectorizeOverrides};
use crate::config::PipelineConfig;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Binary mask GeoTIFF (8-bit, nonzero = woody candidate)
    #[arg(long)]
    mask: PathBuf,
    /// Output GeoJSON feature collection; classes use the default rules,
    /// rerun `classify` to change them
    #[arg(long)]
    out: PathBuf,
    /// Config file supplying defaults for the flags below
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    vectorize: VectorizeOverrides,
    #[command(flatten)]
    classify: ClassifyOverrides,
}

pub fn exec(args: Args) -> anyhow::Result<()> {
    let mut cfg = PipelineConfig::load(args.config.as_deref())?;
    args.vectorize.apply(&mut cfg.vectorize);
    args.classify.apply(&mut cfg.classify);
    let classify_params = cfg.classify.to_params();

    let mask = BinaryMask::from_grid(&read_geotiff(&args.mask)?)?;
    let polygons = vectorize_mask(&mask)?;
    let mut features = Vec::with_capacity(polygons.len());
    for (i, poly) in polygons.into_iter().enumerate() {
        let poly = drop_small_holes(poly, cfg.vectorize.min_hole_area_m2);
        let poly = simplify_dp(&poly, cfg.vectorize.dp_tolerance_m)?;
        features.push(TofFeature::from_polygon(i as u64, poly, &classify_params)?);
    }
    write_geojson(&args.out, &features)?;

    let counts = class_counts(&features);
    print_json(&json!({
        "out": args.out,
        "features": features.len(),
        "class_counts": TofClass::WOODY
            .iter()
            .map(|c| (c.name().to_string(), json!(counts[c.code() as usize])))
            .collect::<serde_json::Map<String, serde_json::Value>>(),
    }))
}
