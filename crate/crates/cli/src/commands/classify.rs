use std::path::PathBuf;

use serde_json::json;
use tofmap_core::classify::{class_counts, classify_layer, TofClass};
use tofmap_core::io::geojson::{read_geojson, write_geojson};

use crate::commands::{print_json, ClassifyOverrides};
use crate::config::PipelineConfig;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Input GeoJSON feature collection of polygons
    #[arg(long = "in")]
    input: PathBuf,
    /// Output GeoJSON with recomputed descriptors and classes
    #[arg(long)]
    out: PathBuf,
    /// Config file supplying defaults for the flags below
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    classify: ClassifyOverrides,
}

pub fn exec(args: Args) -> anyhow::Result<()> {
    let mut cfg = PipelineConfig::load(args.config.as_deref())?;
    args.classify.apply(&mut cfg.classify);

    let features = read_geojson(&args.input)?;
    let features = classify_layer(features, &cfg.classify.to_params())?;
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
