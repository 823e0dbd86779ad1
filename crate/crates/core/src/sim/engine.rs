use std::collections::VecDeque;

use super::config::ScenarioConfig;
use super::field::{generate_farm, observe_inspection, observe_survey, scan_order};
use super::rng::{SimRng, SURVEY_STREAM};
use crate::error::{Error, Result};
use crate::farm::{Tile, TileStatus};
use crate::fleet::{apply_dispatch, tick, DroneEvent, DroneKind, DroneState};
use crate::ledger::{EventBody, Ledger, RequeueReason, StatusSnapshot, TileCounts};
use crate::planner::{plan, Outcome, PlanningParams};

/// Single-threaded discrete-event run of one scenario.
///
/// Each step jumps to the earliest of the next survey image and the next
/// drone transition. Drone transitions at that instant are handled first (in
/// drone-id order), then the survey image. Tiles that find no feasible drone
/// wait in a FIFO queue that is re-planned after every completed task and
/// after a drone strands with work in hand.
pub struct Simulation {
    config: ScenarioConfig,
    params: PlanningParams,
    tiles: Vec<Tile>,
    fleet: Vec<DroneState>,
    survey_rng: SimRng,
    scan_order: Vec<u32>,
    scanned: usize,
    pending: VecDeque<u32>,
    ledger: Ledger,
    now: f64,
    finished: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum PlanSource {
    Survey,
    Requeue,
}

impl Simulation {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let tiles = generate_farm(&config)?;
        let mut fleet = config.fleet.clone();
        fleet.sort_by_key(|d| d.drone_id);
        Ok(Self {
            params: PlanningParams {
                thresholds: config.thresholds,
                t_insp: config.t_insp,
                battery: config.battery_model,
            },
            tiles,
            fleet,
            survey_rng: SimRng::stream(config.seed, SURVEY_STREAM),
            scan_order: scan_order(config.rows, config.cols),
            scanned: 0,
            pending: VecDeque::new(),
            ledger: Ledger::new(config.clone()),
            now: 0.0,
            finished: false,
            config,
        })
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn fleet(&self) -> &[DroneState] {
        &self.fleet
    }

    /// Tiles waiting for a feasible drone, in queue order.
    pub fn pending(&self) -> impl Iterator<Item = u32> + '_ {
        self.pending.iter().copied()
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn into_ledger(self) -> Ledger {
        self.ledger
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn run_to_end(&mut self) -> Result<()> {
        while self.step()? {}
        Ok(())
    }

    /// Process the next instant. Returns `false` once the run is over.
    pub fn step(&mut self) -> Result<bool> {
        if self.finished {
            return Ok(false);
        }
        let next_survey = (self.scanned < self.scan_order.len())
            .then(|| (self.scanned + 1) as f64 * self.config.survey_period);
        let next_drone = self
            .fleet
            .iter()
            .filter_map(|d| d.time_to_next_transition(&self.params.battery))
            .map(|dt| self.now + dt)
            .min_by(f64::total_cmp);
        let t_next = match (next_survey, next_drone) {
            (Some(a), Some(b)) => a.min(b),
            (a, b) => match a.or(b) {
                Some(t) => t,
                None => return self.finish(),
            },
        };
        if t_next > self.config.duration {
            let dt = self.config.duration - self.now;
            for d in &mut self.fleet {
                *d = tick(d, dt, self.now, &self.params.battery).0;
            }
            self.now = self.config.duration;
            return self.finish();
        }

        let dt = t_next - self.now;
        let mut drone_events = Vec::new();
        for d in &mut self.fleet {
            let (next, events) = tick(d, dt, self.now, &self.params.battery);
            *d = next;
            drone_events.extend(events);
        }
        self.now = t_next;
        for e in drone_events {
            self.handle_drone_event(e)?;
        }
        if next_survey.is_some_and(|t| t <= t_next) {
            self.survey_next()?;
        }
        if self.scanned == self.scan_order.len()
            && self.pending.is_empty()
            && self.tiles.iter().all(|t| matches!(t.status, TileStatus::Surveyed | TileStatus::Inspected))
        {
            return self.finish();
        }
        Ok(true)
    }

    fn finish(&mut self) -> Result<bool> {
        self.finished = true;
        Ok(false)
    }

    fn log(&mut self, body: EventBody) -> Result<()> {
        self.ledger.push_event(self.now, body)?;
        Ok(())
    }

    fn tile_mut(&mut self, tile_id: u32) -> Result<&mut Tile> {
        self.tiles
            .get_mut(tile_id as usize)
            .ok_or_else(|| Error::InvalidState(format!("unknown tile {tile_id}")))
    }

    fn handle_drone_event(&mut self, event: DroneEvent) -> Result<()> {
        match event {
            DroneEvent::Arrived { tile_id, .. } => self.tile_mut(tile_id)?.mark_inspecting(),
            DroneEvent::TaskCompleted { drone_id, tile_id, .. } => {
                self.log(EventBody::TaskCompleted { drone_id, tile_id })?;
                let fuzzy = self.config.fuzzy;
                let tile = self.tile_mut(tile_id)?;
                let observed_mean = observe_inspection(tile, &fuzzy)?;
                let confidence = tile.confidence.unwrap_or_default();
                self.log(EventBody::ModelUpdated { tile_id, observed_mean, confidence })?;
                self.replan_pending()
            }
            DroneEvent::Stranded { drone_id, abandoned, .. } => {
                self.log(EventBody::DroneStranded { drone_id, abandoned: abandoned.clone() })?;
                for &tile_id in &abandoned {
                    self.tile_mut(tile_id)?.mark_pending()?;
                    self.pending.push_back(tile_id);
                    self.log(EventBody::TileRequeued {
                        tile_id,
                        reason: RequeueReason::DroneStranded,
                        decision_id: None,
                    })?;
                }
                if abandoned.is_empty() {
                    Ok(())
                } else {
                    self.replan_pending()
                }
            }
        }
    }

    fn survey_next(&mut self) -> Result<()> {
        let tile_id = self.scan_order[self.scanned];
        self.scanned += 1;
        let idx = tile_id as usize;
        let center = self.tiles[idx].center();
        let survey_id = match self.fleet.iter_mut().find(|d| d.kind == DroneKind::Survey) {
            Some(d) => {
                d.position = center;
                d.drone_id
            }
            None => return Err(Error::InvalidState("no survey drone".into())),
        };
        let observed_mean = observe_survey(&self.tiles[idx], self.config.survey_noise_sigma, &mut self.survey_rng);
        let confidence = self.tiles[idx].record_survey(observed_mean, &self.config.fuzzy)?;
        self.log(EventBody::SurveyImage { tile_id, drone_id: survey_id, observed_mean, confidence })?;
        self.decide(tile_id, PlanSource::Survey)
    }

    fn replan_pending(&mut self) -> Result<()> {
        for _ in 0..self.pending.len() {
            if let Some(tile_id) = self.pending.pop_front() {
                self.decide(tile_id, PlanSource::Requeue)?;
            }
        }
        Ok(())
    }

    fn decide(&mut self, tile_id: u32, source: PlanSource) -> Result<()> {
        let decision_id = self.ledger.last_decision_id() + 1;
        let record = plan(&self.tiles[tile_id as usize], &self.fleet, &self.params, self.now, decision_id)?;
        if record.outcome == Outcome::NoTrigger && !self.config.record_no_trigger {
            return Ok(());
        }
        let snapshot = StatusSnapshot {
            decision_id,
            sim_time: self.now,
            drones: self.fleet.clone(),
            tiles: TileCounts::tally(&self.tiles),
        };
        let outcome = record.outcome;
        let selected = record.selected_drone_id;
        self.log(EventBody::Decision { decision_id, tile_id, outcome, selected_drone_id: selected })?;
        self.ledger.append_decision(record, snapshot)?;

        match (outcome, selected) {
            (Outcome::Dispatched, Some(drone_id)) => {
                let idx = self
                    .fleet
                    .iter()
                    .position(|d| d.drone_id == drone_id)
                    .ok_or_else(|| Error::InvalidState(format!("selected drone {drone_id} missing")))?;
                let queued = self.fleet[idx].is_busy();
                self.fleet[idx] = apply_dispatch(&self.fleet[idx], &self.tiles[tile_id as usize], self.params.t_insp)?;
                self.tile_mut(tile_id)?.mark_pending()?;
                self.log(EventBody::Dispatch { decision_id, drone_id, tile_id, queued })
            }
            (Outcome::NoFeasibleDrone, _) => {
                self.tile_mut(tile_id)?.mark_pending()?;
                self.pending.push_back(tile_id);
                match source {
                    PlanSource::Survey => self.log(EventBody::TileQueued { tile_id, decision_id }),
                    PlanSource::Requeue => self.log(EventBody::TileRequeued {
                        tile_id,
                        reason: RequeueReason::NoFeasibleDrone,
                        decision_id: Some(decision_id),
                    }),
                }
            }
            _ => Ok(()),
        }
    }
}

/// Run `config` to completion and return its ledger.
pub fn run(config: ScenarioConfig) -> Result<Ledger> {
    let mut sim = Simulation::new(config)?;
    sim.run_to_end()?;
    Ok(sim.into_ledger())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fleet::Position;
    use crate::sim::FieldConfig;

    fn count(ledger: &Ledger, kind: &str) -> usize {
        ledger.events.iter().filter(|e| e.body.kind() == kind).count()
    }

    fn small(base_ndvi: f64) -> ScenarioConfig {
        ScenarioConfig {
            rows: 2,
            cols: 2,
            survey_noise_sigma: 0.0,
            field: FieldConfig { base_ndvi, pixel_jitter_sigma: 0.0, blight_patches: vec![] },
            fleet: vec![
                DroneState::ready(0, DroneKind::Survey, Position::default(), 2.0, 100.0),
                DroneState::ready(1, DroneKind::Inspection, Position::default(), 2.0, 100.0),
            ],
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn healthy_farm_triggers_nothing() {
        let ledger = run(small(0.6)).unwrap();
        assert_eq!(count(&ledger, "survey_image"), 4);
        assert_eq!(ledger.decisions.len(), 4);
        assert!(ledger.decisions.iter().all(|d| d.outcome == Outcome::NoTrigger));
        assert_eq!(count(&ledger, "dispatch"), 0);
    }

    #[test]
    fn no_trigger_records_can_be_suppressed() {
        let cfg = ScenarioConfig { record_no_trigger: false, ..small(0.6) };
        let ledger = run(cfg).unwrap();
        assert_eq!(count(&ledger, "survey_image"), 4);
        assert!(ledger.decisions.is_empty());
    }

    #[test]
    fn single_ambiguous_tile() {
        // 1x1 farm at NDVI 0.1 (confidence 0.375). Survey at t=1; drone 1
        // flies from (0,0) to (0.5,0.5) (t_disp = sqrt(0.5)/2), inspects 5.
        let cfg = ScenarioConfig { rows: 1, cols: 1, ..small(0.1) };
        let ledger = run(cfg).unwrap();
        let kinds: Vec<_> = ledger.events.iter().map(|e| e.body.kind()).collect();
        assert_eq!(kinds, vec!["survey_image", "decision", "dispatch", "task_completed", "model_updated"]);
        assert_eq!(ledger.decisions.len(), 1);
        assert_eq!(ledger.decisions[0].outcome, Outcome::Dispatched);
        let done = &ledger.events[3];
        let expected = 1.0 + 0.5f64.sqrt() / 2.0 + 5.0;
        assert!((done.time - expected).abs() < 1e-12, "{}", done.time);
    }

    #[test]
    fn tile_waits_for_a_drone_with_battery() {
        // Only drone has 22% battery: 0.5*5 inspect alone leaves <= 20 after the flight.
        let mut cfg = ScenarioConfig { rows: 1, cols: 1, ..small(0.1) };
        cfg.fleet[1].battery = 22.0;
        let mut sim = Simulation::new(cfg).unwrap();
        sim.run_to_end().unwrap();
        assert_eq!(sim.pending().collect::<Vec<_>>(), vec![0]);
        let ledger = sim.into_ledger();
        assert_eq!(ledger.decisions[0].outcome, Outcome::NoFeasibleDrone);
        assert_eq!(ledger.pending_tiles(), vec![0]);
        assert_eq!(count(&ledger, "tile_queued"), 1);
    }

    #[test]
    fn queued_tile_is_replanned_after_completion() {
        // Two ambiguous tiles, one drone: the second is queued behind the first.
        let cfg = ScenarioConfig { rows: 1, cols: 2, ..small(0.1) };
        let ledger = run(cfg).unwrap();
        let dispatches: Vec<_> = ledger
            .events
            .iter()
            .filter_map(|e| match e.body {
                EventBody::Dispatch { tile_id, queued, .. } => Some((tile_id, queued)),
                _ => None,
            })
            .collect();
        assert_eq!(dispatches, vec![(0, false), (1, true)]);
        assert_eq!(count(&ledger, "task_completed"), 2);
    }

    #[test]
    fn duration_cuts_the_run() {
        let cfg = ScenarioConfig { duration: 2.5, ..small(0.6) };
        let ledger = run(cfg).unwrap();
        assert_eq!(count(&ledger, "survey_image"), 2);
    }

    #[test]
    fn stranded_drone_requeues_its_tile() {
        let cfg = ScenarioConfig { rows: 1, cols: 1, ..small(0.1) };
        let mut sim = Simulation::new(cfg).unwrap();
        // Drain the drone behind the planner's back once it has taken off.
        while sim.ledger().events.iter().all(|e| e.body.kind() != "dispatch") {
            assert!(sim.step().unwrap());
        }
        sim.fleet[1].battery = 0.5;
        sim.run_to_end().unwrap();
        let ledger = sim.ledger();
        assert_eq!(count(ledger, "drone_stranded"), 1);
        let reasons: Vec<_> = ledger
            .events
            .iter()
            .filter_map(|e| match e.body {
                EventBody::TileRequeued { reason, .. } => Some(reason),
                _ => None,
            })
            .collect();
        assert_eq!(reasons, vec![RequeueReason::DroneStranded, RequeueReason::NoFeasibleDrone]);
        assert_eq!(ledger.decisions.last().unwrap().outcome, Outcome::NoFeasibleDrone);
        assert_eq!(sim.pending().collect::<Vec<_>>(), vec![0]);
    }
}
