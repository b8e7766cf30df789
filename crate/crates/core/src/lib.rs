//! Woody-vegetation mapping toolkit.
//!
//! The library covers the non-learning parts of a trees-outside-forests
//! mapping workflow: deriving a woody reference mask from height and imagery
//! rasters, turning it into classified polygons, preparing dataset splits and
//! patches, merging sliding-window softmax predictions into seamless class
//! maps, and evaluating predictions pixel-wise.

pub mod classify;
pub mod error;
pub mod eval;
pub mod fixture;
pub mod geometry;
pub mod io;
pub mod kmeans;
pub mod mask;
pub mod merge;
pub mod morphology;
pub mod patches;
pub mod pipeline;
pub mod polygon;
pub mod raster;
pub mod rasterize;
pub mod split;
pub mod vectorize;

pub use error::{Error, Result};
