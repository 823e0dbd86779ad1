//! Farm grid, NDVI aggregation and the fuzzy confidence indicator.
//!
//! A tile's health is judged from the mean NDVI of its pixels. Two ramp
//! membership functions grade that mean as `Good` and `Bad`; the confidence
//! indicator is the absolute gap between the two grades. A tile whose grades
//! are close together is ambiguous and becomes a candidate for inspection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ramp boundaries for the `Good` (rising on `[a1, b1]`) and `Bad`
/// (falling on `[a2, b2]`) memberships.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuzzyParams {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

impl Default for FuzzyParams {
    fn default() -> Self {
        Self { a1: -0.2, b1: 0.4, a2: -0.6, b2: 0.2 }
    }
}

impl FuzzyParams {
    pub fn new(a1: f64, b1: f64, a2: f64, b2: f64) -> Result<Self> {
        Self { a1, b1, a2, b2 }.validate()
    }

    /// Returns `self` unchanged when every boundary lies in `[-1, 1]` and
    /// both ramps have strictly positive width.
    pub fn validate(self) -> Result<Self> {
        for (name, v) in [("a1", self.a1), ("b1", self.b1), ("a2", self.a2), ("b2", self.b2)] {
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::InvalidParam(format!("{name} out of [-1,1]: {v}")));
            }
        }
        if self.a1 >= self.b1 {
            return Err(Error::InvalidParam("a1 < b1 required".into()));
        }
        if self.a2 >= self.b2 {
            return Err(Error::InvalidParam("a2 < b2 required".into()));
        }
        Ok(self)
    }
}

/// Inspection trigger and battery reserve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Confidence below which a tile is sent for inspection, in `[0, 1]`.
    pub t_alpha: f64,
    /// Battery percentage a drone must strictly exceed after the task.
    pub t_b: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { t_alpha: 0.5, t_b: 20.0 }
    }
}

impl Thresholds {
    pub fn new(t_alpha: f64, t_b: f64) -> Result<Self> {
        Self { t_alpha, t_b }.validate()
    }

    pub fn validate(self) -> Result<Self> {
        if !(0.0..=1.0).contains(&self.t_alpha) {
            return Err(Error::InvalidParam(format!("t_alpha out of [0,1]: {}", self.t_alpha)));
        }
        if !(0.0..=100.0).contains(&self.t_b) {
            return Err(Error::InvalidParam(format!("t_b out of [0,100]: {}", self.t_b)));
        }
        Ok(self)
    }
}

fn check_ndvi(x: f64) -> Result<f64> {
    if (-1.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(Error::Domain(x))
    }
}

/// Degree to which NDVI `x` reads as healthy crop.
pub fn mu_good(x: f64, p: &FuzzyParams) -> Result<f64> {
    let x = check_ndvi(x)?;
    Ok(if x < p.a1 {
        0.0
    } else if x > p.b1 {
        1.0
    } else {
        (x - p.a1) / (p.b1 - p.a1)
    })
}

/// Degree to which NDVI `x` reads as unhealthy crop (decreasing ramp).
pub fn mu_bad(x: f64, p: &FuzzyParams) -> Result<f64> {
    let x = check_ndvi(x)?;
    Ok(if x < p.a2 {
        1.0
    } else if x > p.b2 {
        0.0
    } else {
        (p.b2 - x) / (p.b2 - p.a2)
    })
}

/// Arithmetic mean of a tile's pixel NDVI values.
pub fn mean_ndvi(pixels: &[f64]) -> Result<f64> {
    if pixels.is_empty() {
        return Err(Error::Empty("pixel list"));
    }
    for &p in pixels {
        check_ndvi(p)?;
    }
    let mean = pixels.iter().sum::<f64>() / pixels.len() as f64;
    // Summation rounding can nudge a mean of saturated pixels past the bound.
    Ok(mean.clamp(-1.0, 1.0))
}

/// Confidence indicator `|mu_good - mu_bad|` of a mean NDVI.
pub fn confidence(v_bar: f64, p: &FuzzyParams) -> Result<f64> {
    Ok((mu_good(v_bar, p)? - mu_bad(v_bar, p)?).abs())
}

/// Strict `alpha < t_alpha`.
pub fn needs_inspection(alpha: f64, thresholds: &Thresholds) -> bool {
    alpha < thresholds.t_alpha
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TileStatus {
    Unscanned,
    Surveyed,
    PendingInspection,
    Inspecting,
    Inspected,
}

impl TileStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TileStatus::Unscanned => "unscanned",
            TileStatus::Surveyed => "surveyed",
            TileStatus::PendingInspection => "pending_inspection",
            TileStatus::Inspecting => "inspecting",
            TileStatus::Inspected => "inspected",
        }
    }
}

/// One grid cell of the farm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tile {
    pub tile_id: u32,
    pub row: u32,
    pub col: u32,
    /// Ground-truth per-pixel NDVI.
    pub pixels: Vec<f64>,
    pub observed_mean: Option<f64>,
    pub confidence: Option<f64>,
    pub status: TileStatus,
}

impl Tile {
    pub fn new(tile_id: u32, row: u32, col: u32, pixels: Vec<f64>) -> Result<Self> {
        if pixels.is_empty() {
            return Err(Error::Empty("pixel list"));
        }
        for &p in &pixels {
            check_ndvi(p)?;
        }
        Ok(Self {
            tile_id,
            row,
            col,
            pixels,
            observed_mean: None,
            confidence: None,
            status: TileStatus::Unscanned,
        })
    }

    /// Tile centre in tile units, `(col + 0.5, row + 0.5)`.
    pub fn center(&self) -> crate::fleet::Position {
        crate::fleet::Position::new(self.col as f64 + 0.5, self.row as f64 + 0.5)
    }

    pub fn true_mean(&self) -> f64 {
        // Pixels are validated on construction.
        mean_ndvi(&self.pixels).unwrap_or(0.0)
    }

    /// Store a survey observation. Allowed from `unscanned` or `surveyed`.
    pub fn record_survey(&mut self, observed_mean: f64, p: &FuzzyParams) -> Result<f64> {
        match self.status {
            TileStatus::Unscanned | TileStatus::Surveyed => {}
            s => return Err(self.bad_transition(s, TileStatus::Surveyed)),
        }
        let alpha = confidence(observed_mean, p)?;
        self.observed_mean = Some(observed_mean);
        self.confidence = Some(alpha);
        self.status = TileStatus::Surveyed;
        Ok(alpha)
    }

    pub fn mark_pending(&mut self) -> Result<()> {
        self.transition(
            &[TileStatus::Surveyed, TileStatus::PendingInspection, TileStatus::Inspecting],
            TileStatus::PendingInspection,
        )
    }

    pub fn mark_inspecting(&mut self) -> Result<()> {
        self.transition(&[TileStatus::PendingInspection], TileStatus::Inspecting)
    }

    /// Store the exact inspection result and close the tile.
    pub fn record_inspection(&mut self, observed_mean: f64, p: &FuzzyParams) -> Result<f64> {
        match self.status {
            TileStatus::PendingInspection | TileStatus::Inspecting => {}
            s => return Err(self.bad_transition(s, TileStatus::Inspected)),
        }
        let alpha = confidence(observed_mean, p)?;
        self.observed_mean = Some(observed_mean);
        self.confidence = Some(alpha);
        self.status = TileStatus::Inspected;
        Ok(alpha)
    }

    fn transition(&mut self, from: &[TileStatus], to: TileStatus) -> Result<()> {
        if !from.contains(&self.status) {
            return Err(self.bad_transition(self.status, to));
        }
        self.status = to;
        Ok(())
    }

    fn bad_transition(&self, from: TileStatus, to: TileStatus) -> Error {
        Error::InvalidState(format!(
            "tile {}: cannot move from {} to {}",
            self.tile_id,
            from.as_str(),
            to.as_str()
        ))
    }
}
