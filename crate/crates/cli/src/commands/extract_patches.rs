use std::path::PathBuf;

use serde_json::json;
use tofmap_core::io::geotiff::read_geotiff;
use tofmap_core::io::patchdir::write_patch_pair;
use tofmap_core::patches::for_each_patch;

use crate::commands::{create_out_dir, over, print_json};
use crate::config::PipelineConfig;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Image tile GeoTIFF
    #[arg(long)]
    image: PathBuf,
    /// Label tile GeoTIFF, co-registered with the image
    #[arg(long)]
    labels: PathBuf,
    /// Tile name used as the patch file prefix
    #[arg(long)]
    tile_id: String,
    /// Directory receiving `{tile}_{row}_{col}_{variant}.tif` pairs
    #[arg(long)]
    out_dir: PathBuf,
    /// Config file supplying defaults for the flags below
    #[arg(long)]
    config: Option<PathBuf>,
    /// Square window size in pixels
    #[arg(long)]
    window: Option<usize>,
    /// Step between window origins
    #[arg(long)]
    stride: Option<usize>,
    /// Also write horizontally and vertically flipped copies
    #[arg(
        long,
        num_args = 0..=1,
        default_missing_value = "true",
        action = clap::ArgAction::Set
    )]
    augment: Option<bool>,
}

pub fn exec(args: Args) -> anyhow::Result<()> {
    let mut cfg = PipelineConfig::load(args.config.as_deref())?;
    over(&mut cfg.patches.window, args.window);
    over(&mut cfg.patches.stride, args.stride);
    over(&mut cfg.patches.augment, args.augment);

    let image = read_geotiff(&args.image)?;
    let labels = read_geotiff(&args.labels)?;
    create_out_dir(&args.out_dir)?;
    let written = for_each_patch(
        &image,
        &labels,
        cfg.patches.window,
        cfg.patches.stride,
        cfg.patches.augment,
        |patch| write_patch_pair(&args.out_dir, &args.tile_id, &patch).map(|_| ()),
    )?;
    print_json(&json!({
        "out_dir": args.out_dir,
        "tile_id": args.tile_id,
        "window": cfg.patches.window,
        "stride": cfg.patches.stride,
        "augment": cfg.patches.augment,
        "patches": written,
    }))
}
