//! Digital twin of a farm surveyed by a drone fleet.
//!
//! A survey drone images the field tile by tile. Each image is scored with a
//! fuzzy confidence indicator; ambiguous tiles trigger a what-if planner that
//! simulates every inspection drone and dispatches the fastest one that keeps
//! enough battery. Every decision lands in a JSON ledger, and the
//! [`explain`] module answers natural-language questions about it using
//! retrieval over a small knowledge base.

pub mod error;
pub mod explain;
pub mod farm;
pub mod fleet;
pub mod ledger;
pub mod planner;
pub mod scenarios;
pub mod sim;

pub use error::{BackendErrorKind, Error, Result};
pub use farm::{confidence, mean_ndvi, mu_bad, mu_good, needs_inspection, FuzzyParams, Thresholds, Tile, TileStatus};
pub use fleet::{
    apply_dispatch, simulate_assignment, tick, travel_time, BatteryModel, CandidateOption, DroneEvent, DroneKind,
    DroneState, DroneStatus, Position, QueuedTask, RejectionReason, Task,
};
pub use ledger::{Event, EventBody, Ledger, RequeueReason, StatusSnapshot, TileCounts};
pub use planner::{plan, rank, DecisionRecord, Outcome, PlanningParams, Trigger};
pub use sim::{run, ScenarioConfig, Simulation};
