//! Drone state, kinematics, battery accounting and the what-if simulation of
//! sending one inspection drone to one tile.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farm::{Thresholds, Tile};

/// Remaining times at or below this are treated as finished.
pub const TIME_EPS: f64 = 1e-9;

/// Planar position in tile units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DroneKind {
    Survey,
    Inspection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DroneStatus {
    Ready,
    Flying,
    Inspecting,
}

impl DroneStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            DroneStatus::Ready => "ready",
            DroneStatus::Flying => "flying",
            DroneStatus::Inspecting => "inspecting",
        }
    }
}

/// The task a drone is executing: fly to `target`, then inspect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Task {
    pub tile_id: u32,
    pub target: Position,
    pub flight_remaining: f64,
    pub inspect_remaining: f64,
}

impl Task {
    /// Time until the task is finished.
    pub fn t_rem(&self) -> f64 {
        self.flight_remaining + self.inspect_remaining
    }
}

/// A task accepted while busy; started once the current one completes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueuedTask {
    pub tile_id: u32,
    pub target: Position,
    pub t_insp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DroneState {
    pub drone_id: u32,
    pub kind: DroneKind,
    pub position: Position,
    /// Tile units per time unit.
    pub speed: f64,
    /// Percent, `[0, 100]`.
    pub battery: f64,
    pub status: DroneStatus,
    #[serde(default)]
    pub current_task: Option<Task>,
    #[serde(default)]
    pub queued_task: Option<QueuedTask>,
}

impl DroneState {
    pub fn ready(drone_id: u32, kind: DroneKind, position: Position, speed: f64, battery: f64) -> Self {
        Self {
            drone_id,
            kind,
            position,
            speed,
            battery,
            status: DroneStatus::Ready,
            current_task: None,
            queued_task: None,
        }
    }

    /// A drone with an empty battery never flies again.
    pub fn is_stranded(&self) -> bool {
        self.battery <= 0.0
    }

    pub fn is_busy(&self) -> bool {
        self.current_task.is_some()
    }

    /// Remaining time of the current task, zero when ready.
    pub fn t_rem(&self) -> f64 {
        self.current_task.map_or(0.0, |t| t.t_rem())
    }

    pub fn validate(&self) -> Result<()> {
        let id = self.drone_id;
        if !(self.speed > 0.0 && self.speed.is_finite()) {
            return Err(Error::InvalidParam(format!("drone {id}: speed must be > 0")));
        }
        if !(0.0..=100.0).contains(&self.battery) {
            return Err(Error::InvalidParam(format!("drone {id}: battery out of [0,100]")));
        }
        if (self.status == DroneStatus::Ready) != self.current_task.is_none() {
            return Err(Error::InvalidParam(format!(
                "drone {id}: status {} inconsistent with current_task",
                self.status.as_str()
            )));
        }
        if self.queued_task.is_some() && self.current_task.is_none() {
            return Err(Error::InvalidParam(format!("drone {id}: queued task without a current task")));
        }
        if let Some(t) = self.current_task {
            if !(t.flight_remaining >= 0.0 && t.inspect_remaining >= 0.0) {
                return Err(Error::InvalidParam(format!("drone {id}: negative remaining time")));
            }
            if self.status == DroneStatus::Inspecting && t.flight_remaining > 0.0 {
                return Err(Error::InvalidParam(format!("drone {id}: inspecting with flight remaining")));
            }
        }
        if self.kind == DroneKind::Survey && self.is_busy() {
            return Err(Error::InvalidParam(format!("drone {id}: survey drones take no tasks")));
        }
        Ok(())
    }

    /// Simulated time until the next state change (arrival, completion or
    /// stranding), or `None` if the drone will stay as it is.
    pub fn time_to_next_transition(&self, battery: &BatteryModel) -> Option<f64> {
        if self.is_stranded() || self.kind == DroneKind::Survey {
            return None;
        }
        let (phase, drain) = match (self.status, self.current_task) {
            (DroneStatus::Flying, Some(t)) => (Some(t.flight_remaining), battery.fly_drain),
            (DroneStatus::Inspecting, Some(t)) => (Some(t.inspect_remaining), battery.inspect_drain),
            _ => (None, battery.idle_drain),
        };
        let strand = (drain > 0.0).then(|| self.battery / drain);
        match (phase, strand) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

/// Linear battery drain per time unit, by activity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryModel {
    pub fly_drain: f64,
    pub inspect_drain: f64,
    pub idle_drain: f64,
}

impl Default for BatteryModel {
    fn default() -> Self {
        Self { fly_drain: 1.0, inspect_drain: 0.5, idle_drain: 0.0 }
    }
}

impl BatteryModel {
    pub fn validate(self) -> Result<Self> {
        for (name, v) in [
            ("fly_drain", self.fly_drain),
            ("inspect_drain", self.inspect_drain),
            ("idle_drain", self.idle_drain),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParam(format!("{name} must be >= 0")));
            }
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectionReason {
    BatteryBelowThreshold,
}

impl RejectionReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectionReason::BatteryBelowThreshold => "battery_below_threshold",
        }
    }
}

/// Outcome of one what-if simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateOption {
    pub drone_id: u32,
    pub t_rem: f64,
    pub t_disp: f64,
    pub t_insp: f64,
    pub delta_t: f64,
    pub predicted_battery: f64,
    pub feasible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejection_reason: Option<RejectionReason>,
}

/// Straight-line flight time.
pub fn travel_time(from: &Position, to: &Position, speed: f64) -> Result<f64> {
    if speed.is_nan() || speed <= 0.0 {
        return Err(Error::InvalidParam(format!("speed must be > 0, got {speed}")));
    }
    Ok(from.distance(to) / speed)
}

/// What-if: total time and battery left if `drone` were sent to `target`.
///
/// A busy drone first finishes its current task, then departs from that
/// task's tile centre. Pure; nothing is mutated.
pub fn simulate_assignment(
    drone: &DroneState,
    target: &Tile,
    t_insp: f64,
    battery: &BatteryModel,
    thresholds: &Thresholds,
) -> Result<CandidateOption> {
    if drone.kind != DroneKind::Inspection {
        return Err(Error::InvalidParam(format!(
            "drone {} is a survey drone and cannot inspect",
            drone.drone_id
        )));
    }
    let (t_rem, start, rem_flight, rem_inspect) = match drone.current_task {
        Some(task) => (task.t_rem(), task.target, task.flight_remaining, task.inspect_remaining),
        None => (0.0, drone.position, 0.0, 0.0),
    };
    let t_disp = travel_time(&start, &target.center(), drone.speed)?;
    let delta_t = t_rem + t_disp + t_insp;
    let predicted_battery = (drone.battery
        - battery.inspect_drain * rem_inspect
        - battery.fly_drain * rem_flight
        - battery.fly_drain * t_disp
        - battery.inspect_drain * t_insp)
        .max(0.0);
    let feasible = predicted_battery > thresholds.t_b;
    Ok(CandidateOption {
        drone_id: drone.drone_id,
        t_rem,
        t_disp,
        t_insp,
        delta_t,
        predicted_battery,
        feasible,
        rejection_reason: (!feasible).then_some(RejectionReason::BatteryBelowThreshold),
    })
}

/// Hand `target` to the selected drone: a ready drone takes off at once, a
/// busy one queues it behind its current task.
pub fn apply_dispatch(drone: &DroneState, target: &Tile, t_insp: f64) -> Result<DroneState> {
    if drone.kind != DroneKind::Inspection {
        return Err(Error::InvalidState(format!("drone {} cannot inspect", drone.drone_id)));
    }
    if drone.is_stranded() {
        return Err(Error::InvalidState(format!("drone {} is stranded", drone.drone_id)));
    }
    if drone.queued_task.is_some() {
        return Err(Error::InvalidState(format!(
            "drone {} already has a queued task",
            drone.drone_id
        )));
    }
    let mut next = drone.clone();
    let dest = target.center();
    if drone.is_busy() {
        next.queued_task = Some(QueuedTask { tile_id: target.tile_id, target: dest, t_insp });
    } else {
        next.status = DroneStatus::Flying;
        next.current_task = Some(Task {
            tile_id: target.tile_id,
            target: dest,
            flight_remaining: travel_time(&drone.position, &dest, drone.speed)?,
            inspect_remaining: t_insp,
        });
    }
    Ok(next)
}

/// State changes emitted while time advances.
#[derive(Debug, Clone, PartialEq)]
pub enum DroneEvent {
    Arrived { time: f64, drone_id: u32, tile_id: u32 },
    TaskCompleted { time: f64, drone_id: u32, tile_id: u32 },
    /// Battery ran out; `abandoned` lists the tiles of the dropped tasks.
    Stranded { time: f64, drone_id: u32, abandoned: Vec<u32> },
}

/// Advance one drone by `dt` starting at simulated time `now`.
///
/// A zero `dt` only resolves transitions that are already due (a flight of
/// zero length, say). Stranded and survey drones do not change.
pub fn tick(drone: &DroneState, dt: f64, now: f64, battery: &BatteryModel) -> (DroneState, Vec<DroneEvent>) {
    let mut d = drone.clone();
    let mut events = Vec::new();
    if d.is_stranded() || d.kind == DroneKind::Survey {
        return (d, events);
    }
    let mut left = dt.max(0.0);
    let mut t = now;

    loop {
        match (d.status, d.current_task) {
            (DroneStatus::Flying, Some(mut task)) => {
                if task.flight_remaining <= TIME_EPS {
                    task.flight_remaining = 0.0;
                    d.position = task.target;
                    d.current_task = Some(task);
                    d.status = DroneStatus::Inspecting;
                    events.push(DroneEvent::Arrived { time: t, drone_id: d.drone_id, tile_id: task.tile_id });
                    continue;
                }
                if left <= 0.0 {
                    break;
                }
                let (step, strands) = limit_by_battery(d.battery, battery.fly_drain, left.min(task.flight_remaining));
                let frac = step / task.flight_remaining;
                d.position.x += (task.target.x - d.position.x) * frac;
                d.position.y += (task.target.y - d.position.y) * frac;
                task.flight_remaining -= step;
                d.current_task = Some(task);
                d.battery = (d.battery - battery.fly_drain * step).max(0.0);
                left -= step;
                t += step;
                if strands {
                    events.push(strand(&mut d, t));
                    break;
                }
            }
            (DroneStatus::Inspecting, Some(mut task)) => {
                if task.inspect_remaining <= TIME_EPS {
                    events.push(DroneEvent::TaskCompleted { time: t, drone_id: d.drone_id, tile_id: task.tile_id });
                    match d.queued_task.take() {
                        Some(q) => {
                            d.status = DroneStatus::Flying;
                            d.current_task = Some(Task {
                                tile_id: q.tile_id,
                                target: q.target,
                                flight_remaining: d.position.distance(&q.target) / d.speed,
                                inspect_remaining: q.t_insp,
                            });
                        }
                        None => {
                            d.status = DroneStatus::Ready;
                            d.current_task = None;
                        }
                    }
                    continue;
                }
                if left <= 0.0 {
                    break;
                }
                let (step, strands) =
                    limit_by_battery(d.battery, battery.inspect_drain, left.min(task.inspect_remaining));
                task.inspect_remaining -= step;
                d.current_task = Some(task);
                d.battery = (d.battery - battery.inspect_drain * step).max(0.0);
                left -= step;
                t += step;
                if strands {
                    events.push(strand(&mut d, t));
                    break;
                }
            }
            _ => {
                if left <= 0.0 {
                    break;
                }
                let (step, strands) = limit_by_battery(d.battery, battery.idle_drain, left);
                d.battery = (d.battery - battery.idle_drain * step).max(0.0);
                t += step;
                if strands {
                    events.push(strand(&mut d, t));
                }
                break;
            }
        }
    }
    (d, events)
}

/// Shorten `step` to the moment the battery empties, if it does.
fn limit_by_battery(level: f64, drain: f64, step: f64) -> (f64, bool) {
    if drain > 0.0 && drain * step >= level {
        (level / drain, true)
    } else {
        (step, false)
    }
}

fn strand(d: &mut DroneState, time: f64) -> DroneEvent {
    d.battery = 0.0;
    d.status = DroneStatus::Ready;
    let abandoned = d
        .current_task
        .take()
        .map(|t| t.tile_id)
        .into_iter()
        .chain(d.queued_task.take().map(|q| q.tile_id))
        .collect();
    DroneEvent::Stranded { time, drone_id: d.drone_id, abandoned }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tile_at(tile_id: u32, row: u32, col: u32) -> Tile {
        Tile::new(tile_id, row, col, vec![0.1]).unwrap()
    }

    fn bm(fly: f64, insp: f64) -> BatteryModel {
        BatteryModel { fly_drain: fly, inspect_drain: insp, idle_drain: 0.0 }
    }

    fn thresholds() -> Thresholds {
        Thresholds::new(0.5, 20.0).unwrap()
    }

    #[test]
    fn travel_time_examples() {
        let o = Position::new(0.0, 0.0);
        assert_eq!(travel_time(&o, &Position::new(10.0, 0.0), 2.0).unwrap(), 5.0);
        assert_eq!(travel_time(&Position::new(3.0, 7.0), &Position::new(3.0, 7.0), 0.3).unwrap(), 0.0);
        assert_eq!(travel_time(&o, &Position::new(3.0, 4.0), 1.0).unwrap(), 5.0);
        assert!(travel_time(&o, &o, 0.0).is_err());
        assert!(travel_time(&o, &o, -1.0).is_err());
    }

    #[test]
    fn simulate_ready_drone_on_target() {
        let target = tile_at(0, 2, 3);
        let d = DroneState::ready(1, DroneKind::Inspection, target.center(), 2.0, 100.0);
        let c = simulate_assignment(&d, &target, 5.0, &bm(1.0, 0.5), &thresholds()).unwrap();
        assert_eq!((c.t_rem, c.t_disp, c.delta_t), (0.0, 0.0, 5.0));
        assert_eq!(c.predicted_battery, 97.5);
        assert!(c.feasible);
        assert_eq!(c.rejection_reason, None);
    }

    fn busy_drone(battery: f64) -> (DroneState, Tile) {
        // Current task tile centre (0.5, 0.5); target tile centre (8.5, 0.5): distance 8.
        let target = tile_at(8, 0, 8);
        let d = DroneState {
            drone_id: 2,
            kind: DroneKind::Inspection,
            position: Position::new(0.5, 0.5),
            speed: 2.0,
            battery,
            status: DroneStatus::Inspecting,
            current_task: Some(Task {
                tile_id: 0,
                target: Position::new(0.5, 0.5),
                flight_remaining: 0.0,
                inspect_remaining: 3.0,
            }),
            queued_task: None,
        };
        (d, target)
    }

    #[test]
    fn simulate_busy_drone() {
        // 3 + 8/2 + 5 = 12; 60 - 0.5*3 - 1*4 - 0.5*5 = 52.
        let (d, target) = busy_drone(60.0);
        let c = simulate_assignment(&d, &target, 5.0, &bm(1.0, 0.5), &thresholds()).unwrap();
        assert_eq!((c.t_rem, c.t_disp, c.t_insp, c.delta_t), (3.0, 4.0, 5.0, 12.0));
        assert_eq!(c.predicted_battery, 52.0);
        assert!(c.feasible);
    }

    #[test]
    fn simulate_busy_drone_low_battery() {
        let (d, target) = busy_drone(25.0);
        let c = simulate_assignment(&d, &target, 5.0, &bm(1.0, 0.5), &thresholds()).unwrap();
        assert_eq!(c.predicted_battery, 17.0);
        assert!(!c.feasible);
        assert_eq!(c.rejection_reason, Some(RejectionReason::BatteryBelowThreshold));
    }

    #[test]
    fn simulate_clamps_battery_and_rejects_survey() {
        let target = tile_at(0, 9, 9);
        let d = DroneState::ready(1, DroneKind::Inspection, Position::default(), 1.0, 3.0);
        let c = simulate_assignment(&d, &target, 5.0, &bm(1.0, 0.5), &thresholds()).unwrap();
        assert_eq!(c.predicted_battery, 0.0);
        let s = DroneState::ready(0, DroneKind::Survey, Position::default(), 1.0, 100.0);
        assert!(simulate_assignment(&s, &target, 5.0, &bm(1.0, 0.5), &thresholds()).is_err());
    }

    #[test]
    fn dispatch_ready_drone_takes_off() {
        let target = tile_at(7, 0, 7);
        let d = DroneState::ready(1, DroneKind::Inspection, Position::new(0.5, 0.5), 2.0, 100.0);
        let next = apply_dispatch(&d, &target, 5.0).unwrap();
        assert_eq!(next.status, DroneStatus::Flying);
        let task = next.current_task.unwrap();
        assert_eq!(task.tile_id, 7);
        assert_eq!(task.t_rem(), 7.0 / 2.0 + 5.0);
        assert_eq!(next.queued_task, None);
    }

    #[test]
    fn dispatch_busy_drone_queues_once() {
        let (d, _) = busy_drone(60.0);
        let next = apply_dispatch(&d, &tile_at(9, 0, 9), 5.0).unwrap();
        assert_eq!(next.queued_task.map(|q| q.tile_id), Some(9));
        assert_eq!(next.current_task, d.current_task);
        let err = apply_dispatch(&next, &tile_at(10, 1, 0), 5.0).unwrap_err();
        assert!(matches!(err, Error::InvalidState(_)));
    }

    #[test]
    fn tick_completes_inspection() {
        let mut d = busy_drone(50.0).0;
        d.current_task.as_mut().unwrap().inspect_remaining = 2.0;
        let (next, events) = tick(&d, 2.0, 10.0, &bm(1.0, 0.5));
        assert_eq!(next.status, DroneStatus::Ready);
        assert_eq!(next.battery, 49.0);
        assert_eq!(events, vec![DroneEvent::TaskCompleted { time: 12.0, drone_id: 2, tile_id: 0 }]);
    }

    #[test]
    fn tick_flight_progresses_linearly() {
        let target = tile_at(4, 0, 8);
        let d = DroneState::ready(1, DroneKind::Inspection, Position::new(0.5, 0.5), 2.0, 100.0);
        let d = apply_dispatch(&d, &target, 5.0).unwrap();
        let (next, events) = tick(&d, 1.0, 0.0, &bm(1.0, 0.5));
        assert!(events.is_empty());
        assert_eq!(next.status, DroneStatus::Flying);
        assert_eq!(next.current_task.unwrap().flight_remaining, 3.0);
        assert_eq!(next.position, Position::new(2.5, 0.5));
        assert_eq!(next.battery, 99.0);
    }

    #[test]
    fn tick_strands_on_empty_battery() {
        let target = tile_at(4, 0, 8);
        let d = DroneState::ready(1, DroneKind::Inspection, Position::new(0.5, 0.5), 2.0, 0.3);
        let d = apply_dispatch(&d, &target, 5.0).unwrap();
        let (next, events) = tick(&d, 1.0, 4.0, &bm(1.0, 0.5));
        assert_eq!(next.battery, 0.0);
        assert!(next.is_stranded());
        assert_eq!(next.status, DroneStatus::Ready);
        assert_eq!(next.current_task, None);
        assert_eq!(events.len(), 1);
        match &events[0] {
            DroneEvent::Stranded { time, drone_id, abandoned } => {
                assert!((time - 4.3).abs() < 1e-12);
                assert_eq!(*drone_id, 1);
                assert_eq!(abandoned, &vec![4]);
            }
            e => panic!("unexpected {e:?}"),
        }
        // Stranded drones stay put.
        let (again, ev) = tick(&next, 5.0, 5.0, &bm(1.0, 0.5));
        assert_eq!(again, next);
        assert!(ev.is_empty());
    }

    #[test]
    fn tick_runs_whole_task_then_queued_task() {
        let d = DroneState::ready(1, DroneKind::Inspection, Position::new(0.5, 0.5), 2.0, 100.0);
        let d = apply_dispatch(&d, &tile_at(1, 0, 2), 5.0).unwrap(); // 1 flight + 5 inspect
        let d = apply_dispatch(&d, &tile_at(2, 0, 4), 5.0).unwrap(); // queued: 1 flight + 5
        let (next, events) = tick(&d, 12.0, 0.0, &bm(1.0, 0.5));
        let kinds: Vec<_> = events
            .iter()
            .map(|e| match e {
                DroneEvent::Arrived { time, tile_id, .. } => ("arrived", *tile_id, *time),
                DroneEvent::TaskCompleted { time, tile_id, .. } => ("done", *tile_id, *time),
                DroneEvent::Stranded { time, .. } => ("stranded", 0, *time),
            })
            .collect();
        assert_eq!(
            kinds,
            vec![("arrived", 1, 1.0), ("done", 1, 6.0), ("arrived", 2, 7.0), ("done", 2, 12.0)]
        );
        assert_eq!(next.status, DroneStatus::Ready);
        assert_eq!(next.battery, 100.0 - 2.0 - 5.0);
    }

    #[test]
    fn next_transition_times() {
        let b = bm(1.0, 0.5);
        let idle = DroneState::ready(1, DroneKind::Inspection, Position::default(), 2.0, 50.0);
        assert_eq!(idle.time_to_next_transition(&b), None);
        let idle_drain = BatteryModel { idle_drain: 2.0, ..b };
        assert_eq!(idle.time_to_next_transition(&idle_drain), Some(25.0));
        let (busy, _) = busy_drone(1.0);
        assert_eq!(busy.time_to_next_transition(&b), Some(2.0));
    }

    #[test]
    fn validate_drone_state() {
        let mut d = DroneState::ready(1, DroneKind::Inspection, Position::default(), 2.0, 50.0);
        assert!(d.validate().is_ok());
        d.speed = 0.0;
        assert!(d.validate().is_err());
        d.speed = 1.0;
        d.status = DroneStatus::Flying;
        assert!(d.validate().is_err());
        d.status = DroneStatus::Ready;
        d.battery = 120.0;
        assert!(d.validate().is_err());
    }
}
