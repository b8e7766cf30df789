use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde_json::json;
use tofmap_core::fixture::{generate_fixture, SceneSpec, ShapeKind, ShapeSpec};
use tofmap_core::io::geotiff::write_geotiff;
use tofmap_core::io::manifest::write_json;

use crate::commands::{create_out_dir, print_json};

#[derive(Debug, clap::Args)]
#[command(group(
    clap::ArgGroup::new("source").required(true).args(["scene", "demo"])
))]
pub struct Args {
    /// Scene description file (.toml or .json)
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Render the built-in four-class demo scene (200 x 200 m)
    #[arg(long)]
    demo: bool,
    /// Noise seed; the same scene and seed give bit-identical rasters
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Directory receiving ndsm.tif, dop.tif, labels.tif, scene.json,
    /// fixture.json
    #[arg(long)]
    out_dir: PathBuf,
}

/// A scene with one specimen of every woody class plus a tall bare
/// structure the NDVI split has to reject: a 1000 x 1000 px tile at 0.2 m.
fn demo_scene() -> SceneSpec {
    let rect = |name: &str, min_x: f64, min_y: f64, size_x: f64, size_y: f64, h: f64, ndvi: f64| {
        ShapeSpec {
            shape: ShapeKind::Rect {
                min_x,
                min_y,
                size_x,
                size_y,
            },
            height_m: h,
            ndvi,
            name: Some(name.to_string()),
        }
    };
    SceneSpec {
        width: 1000,
        height: 1000,
        pixel_size: 0.2,
        origin: None,
        background_height: 0.0,
        background_ndvi: 0.05,
        vegetation_ndvi_min: 0.3,
        height_threshold: 3.0,
        ndsm_sigma: 0.0,
        ndvi_sigma: 0.0,
        shapes: vec![
            rect("forest block", 10.0, 10.0, 80.0, 80.0, 20.0, 0.7),
            rect("hedgerow", 105.0, 20.0, 90.0, 6.0, 8.0, 0.6),
            rect("grove", 20.0, 120.0, 40.0, 30.0, 12.0, 0.65),
            rect("single crown", 120.0, 60.0, 18.0, 18.0, 6.0, 0.75),
            rect("building", 150.0, 120.0, 30.0, 30.0, 8.0, 0.0),
        ],
    }
}

fn load_scene(path: &Path) -> anyhow::Result<SceneSpec> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read scene {}", path.display()))?;
    if path.extension().is_some_and(|ext| ext == "json") {
        serde_json::from_str(&text)
            .with_context(|| format!("scene {} is not a valid JSON scene", path.display()))
    } else {
        toml::from_str(&text)
            .with_context(|| format!("scene {} is not a valid TOML scene", path.display()))
    }
}

pub fn exec(args: Args) -> anyhow::Result<()> {
    let scene = match &args.scene {
        Some(path) => load_scene(path)?,
        None if args.demo => demo_scene(),
        None => return Err(anyhow!("either --scene or --demo is required")),
    };

    let fixture = generate_fixture(&scene, args.seed)?;
    create_out_dir(&args.out_dir)?;
    let ndsm = args.out_dir.join("ndsm.tif");
    let dop = args.out_dir.join("dop.tif");
    let labels = args.out_dir.join("labels.tif");
    write_geotiff(&ndsm, &fixture.ndsm)?;
    write_geotiff(&dop, &fixture.dop)?;
    write_geotiff(&labels, &fixture.labels)?;
    write_json(&args.out_dir.join("scene.json"), &scene)?;
    write_json(
        &args.out_dir.join("fixture.json"),
        &json!({ "seed": args.seed, "shapes": fixture.shapes }),
    )?;

    print_json(&json!({
        "out_dir": args.out_dir,
        "seed": args.seed,
        "width": scene.width,
        "height": scene.height,
        "shapes": fixture.shapes,
        "files": [ndsm, dop, labels],
    }))
}
