use std::path::PathBuf;

use serde_json::json;
use tofmap_core::io::geotiff::{read_geotiff, write_geotiff};
use tofmap_core::io::manifest::write_json;
use tofmap_core::mask::build_woody_mask;

use crate::commands::{print_json, MaskOverrides};
use crate::config::PipelineConfig;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// nDSM GeoTIFF (single float band, meters above ground)
    #[arg(long)]
    ndsm: PathBuf,
    /// 4-band orthophoto GeoTIFF (red, green, blue, near-infrared)
    #[arg(long)]
    dop: PathBuf,
    /// Output mask GeoTIFF (8-bit, 1 = woody candidate)
    #[arg(long)]
    out: PathBuf,
    /// Also write the mask report (pixel counts, NDVI split) as JSON
    #[arg(long)]
    report: Option<PathBuf>,
    /// Config file supplying defaults for the flags below
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    mask: MaskOverrides,
}

pub fn exec(args: Args) -> anyhow::Result<()> {
    let mut cfg = PipelineConfig::load(args.config.as_deref())?;
    args.mask.apply(&mut cfg.mask);
    let params = cfg.mask.to_params();

    let ndsm = read_geotiff(&args.ndsm)?;
    let dop = read_geotiff(&args.dop)?;
    let (mask, report) = build_woody_mask(&ndsm, &dop, &params)?;
    write_geotiff(&args.out, &mask.to_grid())?;
    if let Some(path) = &args.report {
        write_json(path, &report)?;
    }
    print_json(&json!({
        "mask": args.out,
        "width": mask.width,
        "height": mask.height,
        "woody_pixels": mask.count_true(),
        "report": report,
    }))
}
