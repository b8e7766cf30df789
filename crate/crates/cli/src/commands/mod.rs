//! One module per subcommand plus the shared override plumbing.

pub mod build_mask;
pub mod classify;
pub mod eval;
pub mod extract_patches;
pub mod fixture;
pub mod merge;
pub mod run;
pub mod split;
pub mod vectorize;

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::Subcommand;
use serde::Serialize;

use crate::config::{ClassifySection, MaskSection, VectorizeSection};

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the woody-vegetation reference mask from an nDSM and 4-band imagery
    BuildMask(build_mask::Args),
    /// Trace a binary mask into polygons with holes and simplified outlines
    Vectorize(vectorize::Args),
    /// (Re)classify polygons into Forest, Patch, Linear, Tree by shape rules
    Classify(classify::Args),
    /// Select validation/test tiles under a class-distribution constraint,
    /// or list leave-one-area-out combinations
    Split(split::Args),
    /// Cut an image/label tile pair into training windows with flip augmentation
    ExtractPatches(extract_patches::Args),
    /// Average per-window softmax predictions into a full-tile label map
    Merge(merge::Args),
    /// Compare predicted and ground-truth label rasters pixel by pixel
    Eval(eval::Args),
    /// Render a synthetic scene into nDSM, imagery, and label rasters
    Fixture(fixture::Args),
    /// Run the full reference pipeline: mask, vectorize, classify, rasterize
    Run(run::Args),
}

pub fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::BuildMask(args) => build_mask::exec(args),
        Command::Vectorize(args) => vectorize::exec(args),
        Command::Classify(args) => classify::exec(args),
        Command::Split(args) => split::exec(args),
        Command::ExtractPatches(args) => extract_patches::exec(args),
        Command::Merge(args) => merge::exec(args),
        Command::Eval(args) => eval::exec(args),
        Command::Fixture(args) => fixture::exec(args),
        Command::Run(args) => run::exec(args),
    }
}

/// Success output: one pretty-printed JSON object on stdout. A closed pipe
/// (e.g. `tofmap ... | head`) is not an error.
pub(crate) fn print_json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    use std::io::Write;
    let text = serde_json::to_string_pretty(value)?;
    let mut stdout = std::io::stdout().lock();
    match writeln!(stdout, "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

pub(crate) fn over<T>(slot: &mut T, value: Option<T>) {
    if let Some(value) = value {
        *slot = value;
    }
}

/// Resolve a path that may come from the command line or the config file;
/// missing means a configuration error before any compute happens.
pub(crate) fn require_path(value: Option<PathBuf>, what: &str) -> anyhow::Result<PathBuf> {
    value.ok_or_else(|| {
        anyhow!("no {what} given: set it on the command line or in the config file")
    })
}

pub(crate) fn require_exists(path: &Path, what: &str) -> anyhow::Result<()> {
    if !path.exists() {
        return Err(anyhow!("{what} {} does not exist", path.display()));
    }
    Ok(())
}

pub(crate) fn create_out_dir(path: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(path)
        .with_context(|| format!("cannot create output directory {}", path.display()))
}

/// Mask-stage flags shared by `build-mask` and `run`.
#[derive(Debug, clap::Args)]
pub struct MaskOverrides {
    /// Minimum object height in meters (inclusive)
    #[arg(long)]
    pub height_threshold: Option<f64>,
    /// Closing structuring element size in pixels, columns then rows (both odd)
    #[arg(long, num_args = 2, value_names = ["COLS", "ROWS"])]
    pub closing_window: Option<Vec<usize>>,
    /// Iteration cap for the NDVI two-means split
    #[arg(long)]
    pub kmeans_max_iter: Option<usize>,
    /// Convergence tolerance on center movement for the NDVI split
    #[arg(long)]
    pub kmeans_tol: Option<f64>,
}

impl MaskOverrides {
    pub fn apply(&self, section: &mut MaskSection) {
        over(&mut section.height_threshold, self.height_threshold);
        if let Some(w) = &self.closing_window {
            section.closing_window = (w[0], w[1]);
        }
        over(&mut section.kmeans_max_iter, self.kmeans_max_iter);
        over(&mut section.kmeans_tol, self.kmeans_tol);
    }
}

/// Vectorize-stage flags shared by `vectorize` and `run`.
#[derive(Debug, clap::Args)]
pub struct VectorizeOverrides {
    /// Douglas-Peucker tolerance in meters (0 keeps traced outlines)
    #[arg(long)]
    pub dp_tolerance_m: Option<f64>,
    /// Fill interior holes smaller than this area before simplification
    #[arg(long)]
    pub min_hole_area_m2: Option<f64>,
}

impl VectorizeOverrides {
    pub fn apply(&self, section: &mut VectorizeSection) {
        over(&mut section.dp_tolerance_m, self.dp_tolerance_m);
        over(&mut section.min_hole_area_m2, self.min_hole_area_m2);
    }
}

/// Classifier flags shared by `vectorize`, `classify`, and `run`.
#[derive(Debug, clap::Args)]
pub struct ClassifyOverrides {
    /// Let an elongated shape win Linear even below the Tree area cutoff
    #[arg(
        long,
        num_args = 0..=1,
        default_missing_value = "true",
        action = clap::ArgAction::Set
    )]
    pub linear_first: Option<bool>,
}

impl ClassifyOverrides {
    pub fn apply(&self, section: &mut ClassifySection) {
        over(&mut section.linear_first, self.linear_first);
    }
}
