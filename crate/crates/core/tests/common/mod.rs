//! Test-only helpers: a brute-force planning oracle and random instances.
#![allow(dead_code)]

use farmtwin::{
    BatteryModel, DroneKind, DroneState, DroneStatus, FuzzyParams, PlanningParams, Position, QueuedTask, Task,
    Thresholds, Tile,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Recompute every candidate from raw drone fields and return the fastest
/// feasible drone. Written independently of `simulate_assignment`.
pub fn oracle_plan(tile: &Tile, fleet: &[DroneState], params: &PlanningParams) -> Option<u32> {
    let alpha = tile.confidence.expect("observed tile");
    if alpha >= params.thresholds.t_alpha {
        return None;
    }
    let tx = tile.col as f64 + 0.5;
    let ty = tile.row as f64 + 0.5;
    let mut best: Option<(f64, u32)> = None;
    for d in fleet {
        if d.kind == DroneKind::Survey || d.battery <= 0.0 || d.queued_task.is_some() {
            continue;
        }
        let (fly_left, insp_left, sx, sy) = match &d.current_task {
            Some(t) => (t.flight_remaining, t.inspect_remaining, t.target.x, t.target.y),
            None => (0.0, 0.0, d.position.x, d.position.y),
        };
        let dist = ((tx - sx) * (tx - sx) + (ty - sy) * (ty - sy)).sqrt();
        let fly = dist / d.speed;
        let total = fly_left + insp_left + fly + params.t_insp;
        let used = params.battery.fly_drain * (fly_left + fly) + params.battery.inspect_drain * (insp_left + params.t_insp);
        if d.battery - used <= params.thresholds.t_b {
            continue;
        }
        let better = match best {
            None => true,
            Some((bt, bid)) => total < bt || (total == bt && d.drone_id < bid),
        };
        if better {
            best = Some((total, d.drone_id));
        }
    }
    best.map(|(_, id)| id)
}

/// One random planning problem.
#[derive(Debug, Clone)]
pub struct Instance {
    pub tile: Tile,
    pub fleet: Vec<DroneState>,
    pub params: PlanningParams,
}

/// A surveyed tile on the 20x20 field with a random observed mean.
pub fn random_tile(rng: &mut ChaCha8Rng) -> Tile {
    let (row, col) = (rng.random_range(0..20u32), rng.random_range(0..20u32));
    let ndvi = rng.random_range(-1.0..=1.0);
    let mut tile = Tile::new(row * 20 + col, row, col, vec![ndvi]).unwrap();
    tile.record_survey(ndvi, &FuzzyParams::default()).unwrap();
    tile
}

fn random_pos(rng: &mut ChaCha8Rng) -> Position {
    Position::new(rng.random_range(0.0..=20.0), rng.random_range(0.0..=20.0))
}

/// Up to six drones: one survey drone plus inspection drones that may be
/// ready, flying, inspecting, carrying a queued task, or out of battery.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tile = random_tile(&mut rng);
    let n = rng.random_range(1..=6usize);
    let mut fleet = Vec::with_capacity(n);
    for i in 0..n {
        let id = i as u32 + 1;
        if i == 0 && rng.random_bool(0.5) {
            fleet.push(DroneState::ready(id, DroneKind::Survey, random_pos(&mut rng), 2.0, 100.0));
            continue;
        }
        // Occasionally clone the previous drone under a new id to force ties.
        if let Some(prev) = fleet.last().filter(|p: &&DroneState| p.kind == DroneKind::Inspection) {
            if rng.random_bool(0.1) {
                let mut twin = prev.clone();
                twin.drone_id = id;
                fleet.push(twin);
                continue;
            }
        }
        let battery = if rng.random_bool(0.05) { 0.0 } else { rng.random_range(0.0..=100.0) };
        let speed = rng.random_range(0.5..=4.0);
        let mut d = DroneState::ready(id, DroneKind::Inspection, random_pos(&mut rng), speed, battery);
        if rng.random_bool(0.5) {
            let t_rem: f64 = rng.random_range(0.0..=10.0);
            let target = random_pos(&mut rng);
            let flying = rng.random_bool(0.5);
            let inspect_remaining = if flying { rng.random_range(0.0..=t_rem) } else { t_rem };
            d.status = if flying { DroneStatus::Flying } else { DroneStatus::Inspecting };
            if !flying {
                d.position = target;
            }
            d.current_task = Some(Task {
                tile_id: 1000 + id,
                target,
                flight_remaining: t_rem - inspect_remaining,
                inspect_remaining,
            });
            if rng.random_bool(0.15) {
                d.queued_task = Some(QueuedTask { tile_id: 2000 + id, target: random_pos(&mut rng), t_insp: 5.0 });
            }
        }
        fleet.push(d);
    }
    let params = PlanningParams {
        thresholds: Thresholds { t_alpha: rng.random_range(0.2..=0.9), t_b: rng.random_range(0.0..=40.0) },
        t_insp: rng.random_range(1.0..=8.0),
        battery: BatteryModel::default(),
    };
    Instance { tile, fleet, params }
}

/// Tiles whose survey asked for an inspection but that ended neither
/// inspected nor waiting in the queue with a `no_feasible_drone` record.
pub fn dropped_triggers(sim: &farmtwin::Simulation) -> Vec<u32> {
    use farmtwin::{EventBody, Outcome, TileStatus};
    let ledger = sim.ledger();
    let t_alpha = ledger.scenario_config.thresholds.t_alpha;
    let pending: Vec<u32> = sim.pending().collect();
    let mut triggered: Vec<u32> = ledger
        .events
        .iter()
        .filter_map(|e| match e.body {
            EventBody::SurveyImage { tile_id, confidence, .. } if confidence < t_alpha => Some(tile_id),
            _ => None,
        })
        .collect();
    triggered.sort_unstable();
    triggered.dedup();
    triggered
        .into_iter()
        .filter(|&id| {
            let inspected = sim.tiles()[id as usize].status == TileStatus::Inspected;
            let waiting = pending.contains(&id)
                && ledger
                    .decisions
                    .iter()
                    .any(|d| d.trigger.tile_id == id && d.outcome == Outcome::NoFeasibleDrone);
            !(inspected || waiting)
        })
        .collect()
}

/// A small ledger from a random scenario; some runs strand drones, some are
/// cut short by the duration.
pub fn random_ledger(seed: u64) -> farmtwin::Ledger {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cfg = farmtwin::ScenarioConfig::generated(rng.random_range(1..=5), rng.random_range(1..=5), rng.random());
    for d in cfg.fleet.iter_mut().filter(|d| d.kind == DroneKind::Inspection) {
        d.battery = rng.random_range(1.0..=100.0);
        d.speed = rng.random_range(0.5..=3.0);
    }
    cfg.duration = rng.random_range(1.0..=60.0);
    cfg.t_insp = rng.random_range(0.5..=6.0);
    cfg.record_no_trigger = rng.random_bool(0.5);
    farmtwin::run(cfg).unwrap()
}
