//! The sense → score → plan → dispatch → update loop, driven by a
//! deterministic discrete-event clock.

mod config;
mod engine;
mod field;
mod rng;

pub use config::{BlightPatch, FieldConfig, ScenarioConfig};
pub use engine::{run, Simulation};
pub use field::{generate_farm, observe_inspection, observe_survey, scan_order};
pub use rng::SimRng;
