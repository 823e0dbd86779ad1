use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::rng::{SimRng, LAYOUT_STREAM};
use crate::error::{Error, Result};
use crate::farm::{FuzzyParams, Thresholds};
use crate::fleet::{BatteryModel, DroneKind, DroneState, Position};

/// A disc of damaged crop; pixels inside it lose `severity` NDVI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlightPatch {
    pub center: Position,
    pub radius: f64,
    pub severity: f64,
}

/// Synthetic ground truth: healthy base NDVI, per-pixel jitter and blight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldConfig {
    pub base_ndvi: f64,
    pub pixel_jitter_sigma: f64,
    pub blight_patches: Vec<BlightPatch>,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            base_ndvi: 0.6,
            pixel_jitter_sigma: 0.05,
            blight_patches: vec![
                BlightPatch { center: Position::new(5.0, 5.0), radius: 3.0, severity: 0.55 },
                BlightPatch { center: Position::new(15.0, 8.0), radius: 2.5, severity: 0.65 },
                BlightPatch { center: Position::new(8.0, 15.0), radius: 3.5, severity: 0.5 },
            ],
        }
    }
}

/// Everything a run depends on. The ledger is a pure function of this value.
///
/// Missing keys take their defaults when loaded from JSON; unknown keys are
/// rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub rows: u32,
    pub cols: u32,
    pub pixels_per_tile: u32,
    pub fuzzy: FuzzyParams,
    pub thresholds: Thresholds,
    pub t_insp: f64,
    /// Time the survey drone spends per tile.
    pub survey_period: f64,
    pub survey_noise_sigma: f64,
    pub field: FieldConfig,
    pub fleet: Vec<DroneState>,
    pub battery_model: BatteryModel,
    pub duration: f64,
    pub seed: u64,
    /// Keep decision records for surveyed tiles that needed no inspection.
    pub record_no_trigger: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            rows: 20,
            cols: 20,
            pixels_per_tile: 16,
            fuzzy: FuzzyParams::default(),
            thresholds: Thresholds::default(),
            t_insp: 5.0,
            survey_period: 1.0,
            survey_noise_sigma: 0.1,
            field: FieldConfig::default(),
            fleet: default_fleet(20),
            battery_model: BatteryModel::default(),
            duration: 500.0,
            seed: 42,
            record_no_trigger: true,
        }
    }
}

/// One survey drone and three inspection drones parked along the `y = 0` edge.
fn default_fleet(cols: u32) -> Vec<DroneState> {
    let w = cols as f64;
    let mut fleet = vec![DroneState::ready(0, DroneKind::Survey, Position::new(0.0, 0.0), 2.0, 100.0)];
    for (i, x) in [0.0, w / 2.0, w].into_iter().enumerate() {
        fleet.push(DroneState::ready(i as u32 + 1, DroneKind::Inspection, Position::new(x, 0.0), 2.0, 100.0));
    }
    fleet
}

impl ScenarioConfig {
    /// Default parameters on a `rows x cols` grid with three blight patches
    /// placed from `seed`.
    pub fn generated(rows: u32, cols: u32, seed: u64) -> Self {
        let mut rng = SimRng::stream(seed, LAYOUT_STREAM);
        let (w, h) = (cols as f64, rows as f64);
        let scale = w.min(h);
        let blight_patches = (0..3)
            .map(|_| BlightPatch {
                center: Position::new(rng.uniform_range(0.0, w), rng.uniform_range(0.0, h)),
                radius: rng.uniform_range(0.1, 0.2) * scale.max(1.0),
                severity: rng.uniform_range(0.45, 0.7),
            })
            .collect();
        Self {
            rows,
            cols,
            seed,
            fleet: default_fleet(cols),
            field: FieldConfig { blight_patches, ..FieldConfig::default() },
            ..Self::default()
        }
    }

    pub fn tile_count(&self) -> usize {
        self.rows as usize * self.cols as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParam(msg));
        if self.rows == 0 || self.cols == 0 {
            return bad("rows and cols must be >= 1".into());
        }
        if self.rows.checked_mul(self.cols).is_none() {
            return bad("grid too large".into());
        }
        if self.pixels_per_tile == 0 {
            return bad("pixels_per_tile must be >= 1".into());
        }
        self.fuzzy.validate()?;
        self.thresholds.validate()?;
        self.battery_model.validate()?;
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return bad("duration must be > 0".into());
        }
        if !(self.t_insp >= 0.0 && self.t_insp.is_finite()) {
            return bad("t_insp must be >= 0".into());
        }
        if !(self.survey_period > 0.0 && self.survey_period.is_finite()) {
            return bad("survey_period must be > 0".into());
        }
        if !(self.survey_noise_sigma >= 0.0 && self.field.pixel_jitter_sigma >= 0.0) {
            return bad("noise sigmas must be >= 0".into());
        }
        if !(-1.0..=1.0).contains(&self.field.base_ndvi) {
            return bad("base_ndvi out of [-1,1]".into());
        }
        for p in &self.field.blight_patches {
            if !(p.radius >= 0.0 && p.severity.is_finite() && p.center.x.is_finite() && p.center.y.is_finite()) {
                return bad("blight patch needs a finite centre, radius >= 0 and finite severity".into());
            }
        }
        let mut ids = HashSet::new();
        for d in &self.fleet {
            d.validate()?;
            if !ids.insert(d.drone_id) {
                return bad(format!("duplicate drone_id {}", d.drone_id));
            }
        }
        let surveys = self.fleet.iter().filter(|d| d.kind == DroneKind::Survey).count();
        if surveys != 1 {
            return bad(format!("exactly one survey drone required, found {surveys}"));
        }
        if !self.fleet.iter().any(|d| d.kind == DroneKind::Inspection) {
            return bad("at least one inspection drone required".into());
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }
}
