//! Synthetic ground truth and the two observation channels.

use super::config::ScenarioConfig;
use super::rng::{SimRng, FIELD_STREAM};
use crate::error::{Error, Result};
use crate::farm::{mean_ndvi, FuzzyParams, Tile, TileStatus};

/// Ground-truth tiles in id order (`tile_id = row * cols + col`).
///
/// Each tile's pixels sit on a `ceil(sqrt(N))`-wide sub-grid. A pixel's value
/// is `base + jitter * z`, minus the severity of every blight patch whose
/// disc contains the pixel centre, clamped to `[-1, 1]`. One normal draw is
/// taken per pixel in id order, then pixel order.
pub fn generate_farm(config: &ScenarioConfig) -> Result<Vec<Tile>> {
    config.validate()?;
    let mut rng = SimRng::stream(config.seed, FIELD_STREAM);
    let n = config.pixels_per_tile as usize;
    let side = (n as f64).sqrt().ceil() as usize;
    let field = &config.field;
    let mut tiles = Vec::with_capacity(config.tile_count());
    for row in 0..config.rows {
        for col in 0..config.cols {
            let pixels = (0..n)
                .map(|j| {
                    let px = col as f64 + ((j % side) as f64 + 0.5) / side as f64;
                    let py = row as f64 + ((j / side) as f64 + 0.5) / side as f64;
                    let blight: f64 = field
                        .blight_patches
                        .iter()
                        .filter(|p| (px - p.center.x).hypot(py - p.center.y) <= p.radius)
                        .map(|p| p.severity)
                        .sum();
                    let z = rng.standard_normal();
                    (field.base_ndvi + field.pixel_jitter_sigma * z - blight).clamp(-1.0, 1.0)
                })
                .collect();
            tiles.push(Tile::new(row * config.cols + col, row, col, pixels)?);
        }
    }
    Ok(tiles)
}

/// Low-resolution survey reading: true mean plus Gaussian noise, clamped.
pub fn observe_survey(tile: &Tile, sigma: f64, rng: &mut SimRng) -> f64 {
    let z = rng.standard_normal();
    (tile.true_mean() + sigma * z).clamp(-1.0, 1.0)
}

/// Close-range inspection: the exact mean. Marks the tile inspected and
/// refreshes its confidence.
pub fn observe_inspection(tile: &mut Tile, fuzzy: &FuzzyParams) -> Result<f64> {
    if !matches!(tile.status, TileStatus::PendingInspection | TileStatus::Inspecting) {
        return Err(Error::InvalidState(format!(
            "tile {} is {} and cannot be inspected",
            tile.tile_id,
            tile.status.as_str()
        )));
    }
    let mean = mean_ndvi(&tile.pixels)?;
    tile.record_inspection(mean, fuzzy)?;
    Ok(mean)
}

/// Boustrophedon order: even rows left to right, odd rows right to left.
pub fn scan_order(rows: u32, cols: u32) -> Vec<u32> {
    let mut order = Vec::with_capacity(rows as usize * cols as usize);
    for row in 0..rows {
        let base = row * cols;
        if row % 2 == 0 {
            order.extend((0..cols).map(|c| base + c));
        } else {
            order.extend((0..cols).rev().map(|c| base + c));
        }
    }
    order
}
