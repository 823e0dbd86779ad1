//! Input builders shared by the criterion benches.

use farmtwin::scenarios::PlanningFixture;
use farmtwin::sim::SimRng;
use farmtwin::{DroneKind, DroneState, DroneStatus, Position, Task};

/// A planning call against `drones` inspection drones scattered over a
/// 20x20 field, about half of them busy.
pub fn random_fleet_fixture(seed: u64, drones: u32) -> PlanningFixture {
    let mut rng = SimRng::new(seed);
    let mut fixture = farmtwin::scenarios::scenario_one();
    fixture.rows = 20;
    fixture.cols = 20;
    fixture.fleet = vec![DroneState::ready(0, DroneKind::Survey, Position::default(), 2.0, 100.0)];
    for id in 1..=drones {
        let pos = Position::new(rng.uniform_range(0.0, 20.0), rng.uniform_range(0.0, 20.0));
        let mut d = DroneState::ready(id, DroneKind::Inspection, pos, 2.0, rng.uniform_range(0.0, 100.0));
        if rng.uniform() < 0.5 {
            d.status = DroneStatus::Inspecting;
            d.current_task = Some(Task {
                tile_id: 0,
                target: pos,
                flight_remaining: 0.0,
                inspect_remaining: rng.uniform_range(0.0, 10.0),
            });
        }
        fixture.fleet.push(d);
    }
    fixture
}
