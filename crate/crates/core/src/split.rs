//! Dataset splitting: per-tile class distributions, constrained selection of
//! validation/test tiles, the patch window grid, and leave-one-area-out
//! generalization plans.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::TofClass;
use crate::error::{Error, Result};
use crate::raster::RasterGrid;

/// Share of tile pixels covered by each mapped woody class. Background is
/// implicit (one minus the sum).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassFractions {
    pub forest: f64,
    pub patch: f64,
    pub linear: f64,
    pub tree: f64,
}

impl ClassFractions {
    /// Order matches [`TofClass::WOODY`].
    pub fn as_array(&self) -> [f64; 4] {
        [self.forest, self.patch, self.linear, self.tree]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        ClassFractions {
            forest: a[0],
            patch: a[1],
            linear: a[2],
            tree: a[3],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.as_array();
        if a.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Validation(format!(
                "class fractions must lie in [0, 1], got {a:?}"
            )));
        }
        let sum: f64 = a.iter().sum();
        if sum > 1.0 + 1e-9 {
            return Err(Error::Validation(format!(
                "class fractions sum to {sum}, which exceeds 1"
            )));
        }
        Ok(())
    }
}

/// Per-tile record used for split planning: identity, provenance, size, and
/// the class distribution over its pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileManifest {
    pub tile_id: String,
    pub study_area: String,
    /// Tile size in pixels (width, height); 5000 x 5000 for the survey tiles.
    pub extent: (usize, usize),
    pub class_fractions: ClassFractions,
}

impl TileManifest {
    pub fn pixel_count(&self) -> u64 {
        self.extent.0 as u64 * self.extent.1 as u64
    }

    pub fn validate(&self) -> Result<()> {
        if self.tile_id.is_empty() {
            return Err(Error::Validation("tile_id must not be empty".into()));
        }
        if self.study_area.is_empty() {
            return Err(Error::Validation(format!(
                "tile {}: study_area must not be empty",
                self.tile_id
            )));
        }
        if self.extent.0 == 0 || self.extent.1 == 0 {
            return Err(Error::Validation(format!(
                "tile {}: extent must be positive, got {:?}",
                self.tile_id, self.extent
            )));
        }
        self.class_fractions.validate()
    }
}

/// Outcome of the constrained validation/test selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
    pub seed: u64,
    /// Largest per-class deviation (percentage points) between a selected
    /// subset and its study-area distribution, over all areas and both the
    /// validation and test subsets.
    pub max_deviation_pp: f64,
}

/// What the selected subsets must match: each study area's own distribution
/// (default), or the pooled distribution of the whole dataset. Either way
/// the draw itself stays per-area so every area contributes the same number
/// of validation and test tiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitScope {
    PerArea,
    Global,
}

/// Knobs for [`select_validation_test`]. Defaults mirror the survey setup:
/// five validation and five test tiles per study area, accepted only when
/// every class share stays within one percentage point of the area share.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitParams {
    pub val_tiles: usize,
    pub test_tiles: usize,
    pub max_deviation_pp: f64,
    pub max_attempts: u64,
    pub scope: SplitScope,
}

impl Default for SplitParams {
    fn default() -> Self {
        SplitParams {
            val_tiles: 5,
            test_tiles: 5,
            max_deviation_pp: 1.0,
            max_attempts: 100_000,
            scope: SplitScope::PerArea,
        }
    }
}

impl SplitParams {
    pub fn validate(&self) -> Result<()> {
        if self.val_tiles == 0 || self.test_tiles == 0 {
            return Err(Error::Parameter(
                "val_tiles and test_tiles must be positive".into(),
            ));
        }
        if !(self.max_deviation_pp > 0.0) {
            return Err(Error::Parameter(format!(
                "max_deviation_pp must be positive, got {}",
                self.max_deviation_pp
            )));
        }
        if self.max_attempts == 0 {
            return Err(Error::Parameter("max_attempts must be positive".into()));
        }
        Ok(())
    }
}

/// One leave-one-area-out configuration: the held-out test area and the
/// areas that supply training and validation tiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizationCombo {
    /// 1-based position in the plan listing.
    pub combination: usize,
    pub train_val: Vec<String>,
    pub test: String,
}

/// Class distribution of a label raster: per-class pixel share over all
/// pixels. Expects a single 8-bit band holding class codes 0-4.
pub fn tile_distribution(labels: &RasterGrid) -> Result<ClassFractions> {
    if labels.bands.len() != 1 {
        return Err(Error::Parameter(format!(
            "label raster must have exactly one band, got {}",
            labels.bands.len()
        )));
    }
    let codes = labels.band_u8(0)?;
    let mut counts = [0u64; TofClass::COUNT];
    for &code in codes {
        let class = TofClass::from_code(code)?;
        counts[class.code() as usize] += 1;
    }
    let total = codes.len() as f64;
    if total == 0.0 {
        return Err(Error::EmptyInput("label raster has no pixels".into()));
    }
    Ok(ClassFractions {
        forest: counts[TofClass::Forest.code() as usize] as f64 / total,
        patch: counts[TofClass::Patch.code() as usize] as f64 / total,
        linear: counts[TofClass::Linear.code() as usize] as f64 / total,
        tree: counts[TofClass::Tree.code() as usize] as f64 / total,
    })
}

/// Pixel-weighted aggregate class fractions over a set of tiles.
pub fn aggregate_fractions(tiles: &[&TileManifest]) -> ClassFractions {
    let mut weighted = [0.0f64; 4];
    let mut pixels = 0.0f64;
    for t in tiles {
        let w = t.pixel_count() as f64;
        for (acc, frac) in weighted.iter_mut().zip(t.class_fractions.as_array()) {
            *acc += w * frac;
        }
        pixels += w;
    }
    if pixels == 0.0 {
        return ClassFractions::default();
    }
    ClassFractions::from_array(weighted.map(|v| v / pixels))
}

/// Largest per-class difference between two distributions, in percentage
/// points.
fn deviation_pp(a: &ClassFractions, b: &ClassFractions) -> f64 {
    a.as_array()
        .iter()
        .zip(b.as_array())
        .map(|(x, y)| (x - y).abs() * 100.0)
        .fold(0.0, f64::max)
}

/// Groups tile indices by study area, areas ordered by first appearance so
/// the caller's manifest order stays meaningful.
fn group_by_area(tiles: &[TileManifest]) -> Vec<(String, Vec<usize>)> {
    let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
    for (idx, t) in tiles.iter().enumerate() {
        match groups.iter_mut().find(|(area, _)| *area == t.study_area) {
            Some((_, members)) => members.push(idx),
            None => groups.push((t.study_area.clone(), vec![idx])),
        }
    }
    groups
}

/// Seeded random search for validation and test tiles.
///
/// Per study area, repeatedly draws `val_tiles + test_tiles` distinct tiles
/// and accepts the draw once both subsets match the area's pixel-weighted
/// class distribution within `max_deviation_pp` for every class. The search
/// is deterministic for a given seed and manifest order. Remaining tiles
/// become the training set.
pub fn select_validation_test(
    tiles: &[TileManifest],
    seed: u64,
    params: &SplitParams,
) -> Result<SplitPlan> {
    params.validate()?;
    for t in tiles {
        t.validate()?;
    }
    {
        let mut ids: Vec<&str> = tiles.iter().map(|t| t.tile_id.as_str()).collect();
        ids.sort_unstable();
        if let Some(dup) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Validation(format!("duplicate tile_id '{}'", dup[0])));
        }
    }

    let draw = params.val_tiles + params.test_tiles;
    // Keep a real training set: at least five tiles per area must remain
    // after the draw (15 tiles per area at the default 5 + 5).
    let min_tiles = draw + 5;
    let groups = group_by_area(tiles);
    for (area, members) in &groups {
        if members.len() < min_tiles {
            return Err(Error::Parameter(format!(
                "study area '{area}' has {} tiles; at least {min_tiles} are required \
                 for a {} + {} validation/test draw",
                members.len(),
                params.val_tiles,
                params.test_tiles
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let area_tiles: Vec<Vec<&TileManifest>> = groups
        .iter()
        .map(|(_, members)| members.iter().map(|&i| &tiles[i]).collect())
        .collect();

    // One accepted draw per area (indices into that area's tile list) plus
    // the deviation it achieved.
    let accepted: Vec<(Vec<usize>, f64)> = match params.scope {
        SplitScope::PerArea => {
            let mut out = Vec::with_capacity(groups.len());
            for ((area, _), tiles_of_area) in groups.iter().zip(&area_tiles) {
                let target = aggregate_fractions(tiles_of_area);
                let mut best = f64::INFINITY;
                let mut found = None;
                for _ in 0..params.max_attempts {
                    let picks =
                        rand::seq::index::sample(&mut rng, tiles_of_area.len(), draw).into_vec();
                    let dev = draw_deviation(&picks, tiles_of_area, params.val_tiles, &target);
                    best = best.min(dev);
                    if dev <= params.max_deviation_pp {
                        found = Some((picks, dev));
                        break;
                    }
                }
                let Some(hit) = found else {
                    return Err(Error::ConstraintInfeasible {
                        limit_pp: params.max_deviation_pp,
                        best_deviation_pp: best,
                        attempts: params.max_attempts,
                    }
                    .in_stage(&format!("split study area '{area}'")));
                };
                out.push(hit);
            }
            out
        }
        SplitScope::Global => {
            let all: Vec<&TileManifest> = tiles.iter().collect();
            let target = aggregate_fractions(&all);
            let mut best = f64::INFINITY;
            let mut found = None;
            for _ in 0..params.max_attempts {
                let draws: Vec<Vec<usize>> = area_tiles
                    .iter()
                    .map(|t| rand::seq::index::sample(&mut rng, t.len(), draw).into_vec())
                    .collect();
                let mut val_pool = Vec::new();
                let mut test_pool = Vec::new();
                for (picks, tiles_of_area) in draws.iter().zip(&area_tiles) {
                    for (slot, &i) in picks.iter().enumerate() {
                        if slot < params.val_tiles {
                            val_pool.push(tiles_of_area[i]);
                        } else {
                            test_pool.push(tiles_of_area[i]);
                        }
                    }
                }
                let dev = deviation_pp(&aggregate_fractions(&val_pool), &target)
                    .max(deviation_pp(&aggregate_fractions(&test_pool), &target));
                best = best.min(dev);
                if dev <= params.max_deviation_pp {
                    found = Some((draws, dev));
                    break;
                }
            }
            let Some((draws, dev)) = found else {
                return Err(Error::ConstraintInfeasible {
                    limit_pp: params.max_deviation_pp,
                    best_deviation_pp: best,
                    attempts: params.max_attempts,
                }
                .in_stage("split (global scope)"));
            };
            draws.into_iter().map(|picks| (picks, dev)).collect()
        }
    };

    let mut plan = SplitPlan {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
        seed,
        max_deviation_pp: 0.0,
    };
    for ((picks, dev), tiles_of_area) in accepted.iter().zip(&area_tiles) {
        plan.max_deviation_pp = plan.max_deviation_pp.max(*dev);
        let mut chosen = vec![false; tiles_of_area.len()];
        for (slot, &i) in picks.iter().enumerate() {
            chosen[i] = true;
            let id = tiles_of_area[i].tile_id.clone();
            if slot < params.val_tiles {
                plan.val.push(id);
            } else {
                plan.test.push(id);
            }
        }
        for (i, t) in tiles_of_area.iter().enumerate() {
            if !chosen[i] {
                plan.train.push(t.tile_id.clone());
            }
        }
    }
    Ok(plan)
}

/// Deviation of one per-area draw against a target distribution: the worse
/// of the validation and test subset deviations.
fn draw_deviation(
    picks: &[usize],
    tiles_of_area: &[&TileManifest],
    val_tiles: usize,
    target: &ClassFractions,
) -> f64 {
    let val: Vec<&TileManifest> = picks[..val_tiles].iter().map(|&i| tiles_of_area[i]).collect();
    let test: Vec<&TileManifest> = picks[val_tiles..].iter().map(|&i| tiles_of_area[i]).collect();
    deviation_pp(&aggregate_fractions(&val), target)
        .max(deviation_pp(&aggregate_fractions(&test), target))
}

/// Window start offsets along one axis: 0, stride, 2*stride, ... while the
/// window still fits, plus a final edge-aligned offset at `extent - window`
/// so the axis is fully covered. Sorted and unique by construction.
pub fn window_origins(extent: usize, window: usize, stride: usize) -> Result<Vec<usize>> {
    if window == 0 {
        return Err(Error::Parameter("window must be positive".into()));
    }
    if stride == 0 {
        return Err(Error::Parameter("stride must be positive".into()));
    }
    if window > extent {
        return Err(Error::Parameter(format!(
            "window {window} exceeds extent {extent}"
        )));
    }
    let mut origins: Vec<usize> = (0..)
        .step_by(stride)
        .take_while(|o| o + window <= extent)
        .collect();
    let last = extent - window;
    if origins.last() != Some(&last) {
        origins.push(last);
    }
    Ok(origins)
}

/// Leave-one-area-out configurations: one combination per input area, held
/// out as the test area in input order, with the remaining areas (also in
/// input order) providing training and validation data.
pub fn generalization_plan(areas: &[String]) -> Result<Vec<GeneralizationCombo>> {
    if areas.len() < 2 {
        return Err(Error::Parameter(format!(
            "generalization plan needs at least 2 study areas, got {}",
            areas.len()
        )));
    }
    {
        let mut sorted = areas.to_vec();
        sorted.sort_unstable();
        if let Some(dup) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Parameter(format!(
                "duplicate study area '{}'",
                dup[0]
            )));
        }
    }
    Ok(areas
        .iter()
        .enumerate()
        .map(|(i, test)| GeneralizationCombo {
            combination: i + 1,
            train_val: areas
                .iter()
                .filter(|a| *a != test)
                .cloned()
                .collect(),
            test: test.clone(),
        })
        .collect())
}
