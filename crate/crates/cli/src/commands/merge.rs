use std::path::PathBuf;

use anyhow::anyhow;
use serde_json::json;
use tofmap_core::io::geotiff::{read_geotiff, write_geotiff};
use tofmap_core::io::patchdir::read_softmax_dir;
use tofmap_core::merge::{SoftmaxAccumulator, VoteMode};
use tofmap_core::raster::GeoTransform;

use crate::commands::print_json;

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum ModeArg {
    /// Average probabilities, one argmax at the end
    Soft,
    /// Every window casts a one-hot vote for its local argmax
    Hard,
}

impl From<ModeArg> for VoteMode {
    fn from(value: ModeArg) -> Self {
        match value {
            ModeArg::Soft => VoteMode::Soft,
            ModeArg::Hard => VoteMode::Hard,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Directory of per-window probability GeoTIFFs with JSON sidecars
    #[arg(long)]
    in_dir: PathBuf,
    /// Output label GeoTIFF (8-bit class codes)
    #[arg(long)]
    out_labels: PathBuf,
    /// Optional output of the per-class mean probabilities (float bands)
    #[arg(long)]
    out_probs: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Soft)]
    mode: ModeArg,
    /// Copy extent and georeference from this GeoTIFF (e.g. the source tile)
    #[arg(long)]
    like: Option<PathBuf>,
    /// Tile width in pixels; default: from --like, else inferred from windows
    #[arg(long)]
    width: Option<usize>,
    /// Tile height in pixels; default: from --like, else inferred from windows
    #[arg(long)]
    height: Option<usize>,
}

pub fn exec(args: Args) -> anyhow::Result<()> {
    let patches = read_softmax_dir(&args.in_dir)?;
    if patches.is_empty() {
        return Err(anyhow!(
            "no prediction windows found in {}",
            args.in_dir.display()
        ));
    }

    let like = args.like.as_deref().map(read_geotiff).transpose()?;
    let width = args
        .width
        .or(like.as_ref().map(|g| g.width))
        .unwrap_or_else(|| patches.iter().map(|p| p.col + p.window).max().unwrap_or(0));
    let height = args
        .height
        .or(like.as_ref().map(|g| g.height))
        .unwrap_or_else(|| patches.iter().map(|p| p.row + p.window).max().unwrap_or(0));
    let transform = match &like {
        Some(grid) => grid.transform,
        None => GeoTransform::new(0.0, height as f64, 1.0, 1.0)?,
    };

    let mut acc = SoftmaxAccumulator::new(width, height, transform)?;
    for patch in &patches {
        acc.accumulate_patch(patch, args.mode.into())?;
    }
    let (labels, probs) = acc.finalize()?;
    write_geotiff(&args.out_labels, &labels)?;
    if let Some(path) = &args.out_probs {
        write_geotiff(path, &probs)?;
    }
    print_json(&json!({
        "out_labels": args.out_labels,
        "out_probs": args.out_probs,
        "windows": patches.len(),
        "width": width,
        "height": height,
    }))
}
