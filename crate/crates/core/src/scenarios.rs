//! Hand-built planning situations mirroring the two explanation scenarios
//! used throughout the tests, the CLI examples and the benches.
//!
//! * Scenario one: the fastest drone (2) is rejected on battery, so a slower
//!   drone (1) is dispatched.
//! * Scenario two: a busy drone (3) that must finish its current task first
//!   still beats an idle drone (4) on total time.

use crate::farm::{FuzzyParams, Thresholds, Tile};
use crate::fleet::{BatteryModel, DroneKind, DroneState, DroneStatus, Position, Task};
use crate::ledger::{EventBody, Ledger, StatusSnapshot, TileCounts};
use crate::planner::{plan, DecisionRecord, PlanningParams};
use crate::sim::ScenarioConfig;

/// One planning call with everything it needs.
#[derive(Debug, Clone)]
pub struct PlanningFixture {
    pub rows: u32,
    pub cols: u32,
    pub tile: Tile,
    pub fleet: Vec<DroneState>,
    pub params: PlanningParams,
    pub sim_time: f64,
}

impl PlanningFixture {
    /// Plan as decision 1 and capture the matching snapshot.
    pub fn decide(&self) -> (DecisionRecord, StatusSnapshot) {
        let record = plan(&self.tile, &self.fleet, &self.params, self.sim_time, 1).expect("fixture tile is observed");
        let mut tiles = TileCounts { surveyed: 1, ..TileCounts::default() };
        tiles.unscanned = self.rows * self.cols - 1;
        let snapshot = StatusSnapshot { decision_id: 1, sim_time: self.sim_time, drones: self.fleet.clone(), tiles };
        (record, snapshot)
    }

    pub fn scenario_config(&self) -> ScenarioConfig {
        ScenarioConfig {
            rows: self.rows,
            cols: self.cols,
            thresholds: self.params.thresholds,
            t_insp: self.params.t_insp,
            battery_model: self.params.battery,
            fleet: self.fleet.clone(),
            ..ScenarioConfig::default()
        }
    }

    /// A one-decision ledger: the survey image and the decision it caused.
    pub fn ledger(&self) -> Ledger {
        let (record, snapshot) = self.decide();
        let mut ledger = Ledger::new(self.scenario_config());
        let t = self.sim_time;
        let survey_id = self.fleet.iter().find(|d| d.kind == DroneKind::Survey).map_or(0, |d| d.drone_id);
        let events = [
            EventBody::SurveyImage {
                tile_id: self.tile.tile_id,
                drone_id: survey_id,
                observed_mean: record.trigger.observed_mean,
                confidence: record.trigger.confidence,
            },
            EventBody::Decision {
                decision_id: 1,
                tile_id: self.tile.tile_id,
                outcome: record.outcome,
                selected_drone_id: record.selected_drone_id,
            },
        ];
        for e in events {
            ledger.push_event(t, e).expect("times are equal");
        }
        if let Some(drone_id) = record.selected_drone_id {
            let queued = self.fleet.iter().any(|d| d.drone_id == drone_id && d.is_busy());
            ledger
                .push_event(t, EventBody::Dispatch { decision_id: 1, drone_id, tile_id: self.tile.tile_id, queued })
                .expect("times are equal");
        }
        ledger.append_decision(record, snapshot).expect("first decision");
        ledger
    }
}

fn surveyed_tile(tile_id: u32, row: u32, col: u32, ndvi: f64) -> Tile {
    let mut tile = Tile::new(tile_id, row, col, vec![ndvi]).expect("valid NDVI");
    tile.record_survey(ndvi, &FuzzyParams::default()).expect("fresh tile");
    tile
}

fn standard_params(t_insp: f64) -> PlanningParams {
    PlanningParams { thresholds: Thresholds { t_alpha: 0.5, t_b: 20.0 }, t_insp, battery: BatteryModel::default() }
}

/// 10x10 farm; tile 25 (row 2, col 5, centre (5.5, 2.5)) reads NDVI 0.1,
/// confidence 0.375. Speed 2, `t_insp` 5, drains 1.0 / 0.5.
///
/// * drone 2 at (5.5, 4.5), 21.5%: delta_t 1 + 5 = 6, battery 21.5 - 1 - 2.5 = 18 (rejected);
/// * drone 1 at (5.5, 10.5), 51.5%: delta_t 4 + 5 = 9, battery 51.5 - 4 - 2.5 = 45 (selected).
pub fn scenario_one() -> PlanningFixture {
    PlanningFixture {
        rows: 10,
        cols: 10,
        tile: surveyed_tile(25, 2, 5, 0.1),
        fleet: vec![
            DroneState::ready(0, DroneKind::Survey, Position::new(5.5, 2.5), 2.0, 100.0),
            DroneState::ready(1, DroneKind::Inspection, Position::new(5.5, 10.5), 2.0, 51.5),
            DroneState::ready(2, DroneKind::Inspection, Position::new(5.5, 4.5), 2.0, 21.5),
        ],
        params: standard_params(5.0),
        sim_time: 26.0,
    }
}

/// 20x20 farm; tile 70 (row 3, col 10, centre (10.5, 3.5)) reads NDVI 0.1.
/// Speed 2, `t_insp` 4.
///
/// * drone 3 inspecting tile 110 (centre (10.5, 5.5)) with 2 left, 80%:
///   delta_t 2 + 1 + 4 = 7, battery 80 - 1 - 1 - 2 = 76;
/// * drone 4 ready at (10.5, 17.5), 90%: delta_t 7 + 4 = 11, battery 90 - 7 - 2 = 81.
pub fn scenario_two() -> PlanningFixture {
    let busy_at = Position::new(10.5, 5.5);
    PlanningFixture {
        rows: 20,
        cols: 20,
        tile: surveyed_tile(70, 3, 10, 0.1),
        fleet: vec![
            DroneState::ready(0, DroneKind::Survey, Position::new(10.5, 3.5), 2.0, 100.0),
            DroneState {
                drone_id: 3,
                kind: DroneKind::Inspection,
                position: busy_at,
                speed: 2.0,
                battery: 80.0,
                status: DroneStatus::Inspecting,
                current_task: Some(Task {
                    tile_id: 110,
                    target: busy_at,
                    flight_remaining: 0.0,
                    inspect_remaining: 2.0,
                }),
                queued_task: None,
            },
            DroneState::ready(4, DroneKind::Inspection, Position::new(10.5, 17.5), 2.0, 90.0),
        ],
        params: standard_params(4.0),
        sim_time: 71.0,
    }
}
