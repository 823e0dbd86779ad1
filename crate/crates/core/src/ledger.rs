//! Append-only record of a simulation run: the event stream, every decision
//! record and the fleet snapshot taken for it.
//!
//! Persisted as one JSON document. Keys follow struct field order and floats
//! use the shortest representation that round-trips, so equal ledgers
//! serialize to identical bytes.

use std::collections::VecDeque;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farm::{Tile, TileStatus};
use crate::fleet::DroneState;
use crate::planner::{DecisionRecord, Outcome};
use crate::sim::ScenarioConfig;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequeueReason {
    NoFeasibleDrone,
    DroneStranded,
}

/// Kind-specific part of an [`Event`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EventBody {
    SurveyImage {
        tile_id: u32,
        drone_id: u32,
        observed_mean: f64,
        confidence: f64,
    },
    Decision {
        decision_id: u64,
        tile_id: u32,
        outcome: Outcome,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        selected_drone_id: Option<u32>,
    },
    Dispatch {
        decision_id: u64,
        drone_id: u32,
        tile_id: u32,
        /// True when the drone was busy and queued the tile.
        queued: bool,
    },
    TaskCompleted {
        drone_id: u32,
        tile_id: u32,
    },
    ModelUpdated {
        tile_id: u32,
        observed_mean: f64,
        confidence: f64,
    },
    DroneStranded {
        drone_id: u32,
        abandoned: Vec<u32>,
    },
    TileQueued {
        tile_id: u32,
        decision_id: u64,
    },
    TileRequeued {
        tile_id: u32,
        reason: RequeueReason,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        decision_id: Option<u64>,
    },
}

impl EventBody {
    pub fn kind(&self) -> &'static str {
        match self {
            EventBody::SurveyImage { .. } => "survey_image",
            EventBody::Decision { .. } => "decision",
            EventBody::Dispatch { .. } => "dispatch",
            EventBody::TaskCompleted { .. } => "task_completed",
            EventBody::ModelUpdated { .. } => "model_updated",
            EventBody::DroneStranded { .. } => "drone_stranded",
            EventBody::TileQueued { .. } => "tile_queued",
            EventBody::TileRequeued { .. } => "tile_requeued",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    /// Creation order; with `time` gives a total order.
    pub seq: u64,
    #[serde(flatten)]
    pub body: EventBody,
}

/// Tile counts by status.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TileCounts {
    pub unscanned: u32,
    pub surveyed: u32,
    pub pending_inspection: u32,
    pub inspecting: u32,
    pub inspected: u32,
}

impl TileCounts {
    pub fn tally(tiles: &[Tile]) -> Self {
        let mut c = Self::default();
        for t in tiles {
            match t.status {
                TileStatus::Unscanned => c.unscanned += 1,
                TileStatus::Surveyed => c.surveyed += 1,
                TileStatus::PendingInspection => c.pending_inspection += 1,
                TileStatus::Inspecting => c.inspecting += 1,
                TileStatus::Inspected => c.inspected += 1,
            }
        }
        c
    }
}

/// Fleet and farm state captured right before a planning call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatusSnapshot {
    pub decision_id: u64,
    pub sim_time: f64,
    pub drones: Vec<DroneState>,
    pub tiles: TileCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ledger {
    pub schema_version: String,
    pub scenario_config: ScenarioConfig,
    pub events: Vec<Event>,
    pub decisions: Vec<DecisionRecord>,
    pub snapshots: Vec<StatusSnapshot>,
}

impl Ledger {
    pub fn new(scenario_config: ScenarioConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            scenario_config,
            events: Vec::new(),
            decisions: Vec::new(),
            snapshots: Vec::new(),
        }
    }

    /// Append an event and return its sequence number.
    pub fn push_event(&mut self, time: f64, body: EventBody) -> Result<u64> {
        if let Some(last) = self.events.last() {
            if time < last.time {
                return Err(Error::InvalidState(format!(
                    "event time {time} precedes previous event at {}",
                    last.time
                )));
            }
        }
        let seq = self.events.len() as u64;
        self.events.push(Event { time, seq, body });
        Ok(seq)
    }

    pub fn last_decision_id(&self) -> u64 {
        self.decisions.last().map_or(0, |d| d.decision_id)
    }

    pub fn append_decision(&mut self, record: DecisionRecord, snapshot: StatusSnapshot) -> Result<()> {
        let expected = self.last_decision_id() + 1;
        if record.decision_id != expected {
            return Err(Error::Sequence { expected, got: record.decision_id });
        }
        if snapshot.decision_id != record.decision_id {
            return Err(Error::InvalidState(format!(
                "snapshot for decision {} attached to decision {}",
                snapshot.decision_id, record.decision_id
            )));
        }
        self.decisions.push(record);
        self.snapshots.push(snapshot);
        Ok(())
    }

    pub fn get_decision(&self, decision_id: u64) -> Result<(&DecisionRecord, &StatusSnapshot)> {
        let idx = decision_id
            .checked_sub(1)
            .ok_or(Error::DecisionNotFound(decision_id))? as usize;
        match (self.decisions.get(idx), self.snapshots.get(idx)) {
            (Some(r), Some(s)) if r.decision_id == decision_id => Ok((r, s)),
            _ => Err(Error::DecisionNotFound(decision_id)),
        }
    }

    /// Tiles still waiting for a drone at the end of the event stream, in
    /// queue order.
    pub fn pending_tiles(&self) -> Vec<u32> {
        let mut queue: VecDeque<u32> = VecDeque::new();
        for e in &self.events {
            match e.body {
                EventBody::TileQueued { tile_id, .. } | EventBody::TileRequeued { tile_id, .. } => {
                    queue.retain(|&t| t != tile_id);
                    queue.push_back(tile_id);
                }
                EventBody::Dispatch { tile_id, .. } => queue.retain(|&t| t != tile_id),
                _ => {}
            }
        }
        queue.into()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("schema_version") {
            Some(serde_json::Value::String(v)) if v == SCHEMA_VERSION => {}
            Some(serde_json::Value::String(v)) => return Err(Error::SchemaVersion(v.clone())),
            Some(other) => return Err(Error::SchemaVersion(other.to_string())),
            None => return Err(Error::SchemaVersion(String::new())),
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
