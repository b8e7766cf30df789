use std::path::PathBuf;

use serde_json::json;
use tofmap_core::classify::{class_counts, TofClass};
use tofmap_core::io::geojson::write_geojson;
use tofmap_core::io::geotiff::{read_geotiff, write_geotiff};
use tofmap_core::io::manifest::write_json;
use tofmap_core::pipeline::run_reference_pipeline;

use crate::commands::{
    over, print_json, require_exists, require_path, create_out_dir, ClassifyOverrides,
    MaskOverrides, VectorizeOverrides,
};
use crate::config::PipelineConfig;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Config file; every value below can override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// nDSM GeoTIFF (single float band, meters above ground)
    #[arg(long)]
    ndsm: Option<PathBuf>,
    /// 4-band orthophoto GeoTIFF (red, green, blue, near-infrared)
    #[arg(long)]
    dop: Option<PathBuf>,
    /// Directory receiving features.geojson, labels.tif, report.json
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    mask: MaskOverrides,
    #[command(flatten)]
    vectorize: VectorizeOverrides,
    #[command(flatten)]
    classify: ClassifyOverrides,
}

pub fn exec(args: Args) -> anyhow::Result<()> {
    let mut cfg = PipelineConfig::load(args.config.as_deref())?;
    over(&mut cfg.paths.ndsm, args.ndsm.map(Some));
    over(&mut cfg.paths.dop, args.dop.map(Some));
    over(&mut cfg.paths.out_dir, args.out_dir.map(Some));
    args.mask.apply(&mut cfg.mask);
    args.vectorize.apply(&mut cfg.vectorize);
    args.classify.apply(&mut cfg.classify);

    // Configuration must be complete and plausible before any compute.
    let ndsm_path = require_path(cfg.paths.ndsm.clone(), "nDSM raster (--ndsm)")?;
    let dop_path = require_path(cfg.paths.dop.clone(), "orthophoto raster (--dop)")?;
    let out_dir = require_path(cfg.paths.out_dir.clone(), "output directory (--out-dir)")?;
    require_exists(&ndsm_path, "nDSM raster")?;
    require_exists(&dop_path, "orthophoto raster")?;
    let params = cfg.pipeline_params();
    params.validate()?;

    let ndsm = read_geotiff(&ndsm_path)?;
    let dop = read_geotiff(&dop_path)?;
    let (features, labels, report) = run_reference_pipeline(&ndsm, &dop, &params)?;

    create_out_dir(&out_dir)?;
    let features_path = out_dir.join("features.geojson");
    let labels_path = out_dir.join("labels.tif");
    let report_path = out_dir.join("report.json");
    write_geojson(&features_path, &features).map_err(|e| e.in_stage("write"))?;
    write_geotiff(&labels_path, &labels).map_err(|e| e.in_stage("write"))?;
    // The effective configuration, rerunnable as is via --config.
    std::fs::write(out_dir.join("config.toml"), cfg.to_toml())?;
    write_json(
        &report_path,
        &json!({
            "config": cfg,
            "report": report,
            "outputs": { "features": features_path, "labels": labels_path },
        }),
    )
    .map_err(|e| e.in_stage("write"))?;

    let counts = class_counts(&features);
    print_json(&json!({
        "out_dir": out_dir,
        "features": features.len(),
        "class_counts": TofClass::WOODY
            .iter()
            .map(|c| (c.name().to_string(), json!(counts[c.code() as usize])))
            .collect::<serde_json::Map<String, serde_json::Value>>(),
        "timings_s": report.timings,
        "outputs": [features_path, labels_path, report_path],
    }))
}
