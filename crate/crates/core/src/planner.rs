//! Greedy what-if dispatch planning.
//!
//! When a surveyed tile's confidence falls below `t_alpha`, every eligible
//! inspection drone is simulated against it. Drones whose predicted battery
//! does not exceed `t_b` are rejected; the remaining options are ranked by
//! total time and the fastest one wins. The whole event, rejected
//! alternatives included, is captured in a [`DecisionRecord`].

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farm::{needs_inspection, Thresholds, Tile};
use crate::fleet::{simulate_assignment, BatteryModel, CandidateOption, DroneKind, DroneState};

/// The observation that prompted a planning event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trigger {
    pub tile_id: u32,
    pub observed_mean: f64,
    pub confidence: f64,
    pub t_alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Dispatched,
    NoFeasibleDrone,
    NoTrigger,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Dispatched => "dispatched",
            Outcome::NoFeasibleDrone => "no_feasible_drone",
            Outcome::NoTrigger => "no_trigger",
        }
    }
}

/// Audit entry for one planning event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionRecord {
    pub decision_id: u64,
    pub sim_time: f64,
    pub trigger: Trigger,
    pub candidates: Vec<CandidateOption>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selected_drone_id: Option<u32>,
    pub outcome: Outcome,
    pub thresholds_snapshot: Thresholds,
}

impl DecisionRecord {
    pub fn selected(&self) -> Option<&CandidateOption> {
        let id = self.selected_drone_id?;
        self.candidates.iter().find(|c| c.drone_id == id)
    }

    /// Checks the structural guarantees every record must satisfy.
    pub fn check_invariants(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidState(format!("decision {}: {msg}", self.decision_id)));
        for c in &self.candidates {
            if c.feasible != (c.predicted_battery > self.thresholds_snapshot.t_b)
                || c.feasible == c.rejection_reason.is_some()
            {
                return fail("candidate feasibility inconsistent");
            }
            if c.delta_t != c.t_rem + c.t_disp + c.t_insp {
                return fail("delta_t is not the sum of its parts");
            }
        }
        let mut ids: Vec<_> = self.candidates.iter().map(|c| c.drone_id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return fail("duplicate candidate drone");
        }
        match self.outcome {
            Outcome::Dispatched => {
                let best = rank(&self.candidates).first().map(|c| c.drone_id);
                if best.is_none() || best != self.selected_drone_id {
                    return fail("selected drone is not the fastest feasible candidate");
                }
            }
            Outcome::NoFeasibleDrone => {
                if self.selected_drone_id.is_some() || self.candidates.iter().any(|c| c.feasible) {
                    return fail("no_feasible_drone with a feasible candidate");
                }
            }
            Outcome::NoTrigger => {
                if self.trigger.confidence < self.trigger.t_alpha
                    || !self.candidates.is_empty()
                    || self.selected_drone_id.is_some()
                {
                    return fail("no_trigger record with a low confidence or candidates");
                }
            }
        }
        Ok(())
    }
}

/// Static inputs shared by every planning call in a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanningParams {
    pub thresholds: Thresholds,
    pub t_insp: f64,
    pub battery: BatteryModel,
}

/// Drones that may be offered a new task: living inspection drones with no
/// task already waiting in their queue.
pub fn is_eligible(drone: &DroneState) -> bool {
    drone.kind == DroneKind::Inspection && !drone.is_stranded() && drone.queued_task.is_none()
}

fn by_time_then_id(a: &CandidateOption, b: &CandidateOption) -> Ordering {
    a.delta_t.total_cmp(&b.delta_t).then(a.drone_id.cmp(&b.drone_id))
}

/// Feasible candidates, fastest first; equal times go to the lower drone id.
pub fn rank(candidates: &[CandidateOption]) -> Vec<&CandidateOption> {
    let mut ranked: Vec<_> = candidates.iter().filter(|c| c.feasible).collect();
    ranked.sort_by(|a, b| by_time_then_id(a, b));
    ranked
}

/// Run one planning event for `tile` against the current fleet.
///
/// The caller is responsible for applying the dispatch when the outcome is
/// [`Outcome::Dispatched`].
pub fn plan(
    tile: &Tile,
    fleet: &[DroneState],
    params: &PlanningParams,
    sim_time: f64,
    decision_id: u64,
) -> Result<DecisionRecord> {
    let (Some(observed_mean), Some(confidence)) = (tile.observed_mean, tile.confidence) else {
        return Err(Error::InvalidState(format!("tile {} has no observation", tile.tile_id)));
    };
    let thresholds = params.thresholds;
    let mut record = DecisionRecord {
        decision_id,
        sim_time,
        trigger: Trigger { tile_id: tile.tile_id, observed_mean, confidence, t_alpha: thresholds.t_alpha },
        candidates: Vec::new(),
        selected_drone_id: None,
        outcome: Outcome::NoTrigger,
        thresholds_snapshot: thresholds,
    };
    if !needs_inspection(confidence, &thresholds) {
        return Ok(record);
    }

    let mut candidates = Vec::new();
    for drone in fleet.iter().filter(|d| is_eligible(d)) {
        candidates.push(simulate_assignment(drone, tile, params.t_insp, &params.battery, &thresholds)?);
    }
    candidates.sort_by_key(|c| c.drone_id);
    record.selected_drone_id = rank(&candidates).first().map(|c| c.drone_id);
    record.outcome = match record.selected_drone_id {
        Some(_) => Outcome::Dispatched,
        None => Outcome::NoFeasibleDrone,
    };
    record.candidates = candidates;
    Ok(record)
}
