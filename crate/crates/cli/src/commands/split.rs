use std::path::PathBuf;

use serde_json::json;
use tofmap_core::io::manifest::{read_manifest_csv, write_json};
use tofmap_core::split::{generalization_plan, select_validation_test, SplitScope};

use crate::commands::{over, print_json};
use crate::config::PipelineConfig;

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum ScopeArg {
    /// Match each study area's own class distribution
    PerArea,
    /// Match the pooled distribution of all areas
    Global,
}

impl From<ScopeArg> for SplitScope {
    fn from(value: ScopeArg) -> Self {
        match value {
            ScopeArg::PerArea => SplitScope::PerArea,
            ScopeArg::Global => SplitScope::Global,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Tile manifest CSV (tile_id, study_area, extent, class fractions)
    #[arg(long)]
    manifest: PathBuf,
    /// Output JSON: the selected plan, or the combination list with
    /// --leave-one-area-out
    #[arg(long)]
    out: PathBuf,
    /// Config file supplying defaults for the flags below
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Validation tiles drawn per study area
    #[arg(long)]
    val_tiles: Option<usize>,
    /// Test tiles drawn per study area
    #[arg(long)]
    test_tiles: Option<usize>,
    /// Largest tolerated per-class deviation in percentage points
    #[arg(long)]
    max_deviation_pp: Option<f64>,
    /// Give up after this many rejected draws per area
    #[arg(long)]
    max_attempts: Option<u64>,
    #[arg(long, value_enum)]
    scope: Option<ScopeArg>,
    /// Emit leave-one-area-out generalization combinations instead of a
    /// validation/test selection
    #[arg(
        long,
        conflicts_with_all = ["seed", "val_tiles", "test_tiles", "max_deviation_pp", "max_attempts", "scope"]
    )]
    leave_one_area_out: bool,
}

pub fn exec(args: Args) -> anyhow::Result<()> {
    let tiles = read_manifest_csv(&args.manifest)?;

    if args.leave_one_area_out {
        let mut areas: Vec<String> = Vec::new();
        for tile in &tiles {
            if !areas.contains(&tile.study_area) {
                areas.push(tile.study_area.clone());
            }
        }
        let combos = generalization_plan(&areas)?;
        write_json(&args.out, &combos)?;
        return print_json(&json!({
            "out": args.out,
            "areas": areas,
            "combinations": combos.len(),
        }));
    }

    let mut cfg = PipelineConfig::load(args.config.as_deref())?;
    over(&mut cfg.split.seed, args.seed);
    over(&mut cfg.split.val_tiles, args.val_tiles);
    over(&mut cfg.split.test_tiles, args.test_tiles);
    over(&mut cfg.split.max_deviation_pp, args.max_deviation_pp);
    over(&mut cfg.split.max_attempts, args.max_attempts);
    over(&mut cfg.split.scope, args.scope.map(SplitScope::from));

    let plan = select_validation_test(&tiles, cfg.split.seed, &cfg.split.to_params())?;
    write_json(&args.out, &plan)?;
    print_json(&json!({
        "out": args.out,
        "seed": plan.seed,
        "train": plan.train.len(),
        "val": plan.val.len(),
        "test": plan.test.len(),
        "max_deviation_pp": plan.max_deviation_pp,
    }))
}
