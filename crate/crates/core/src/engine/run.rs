use super::event::{next_event, resolve, EngineConfig, Event, EventKind};
use super::state::ParticleState;
use super::velocity::{velocities, VelocityAssignment};
use crate::error::{Error, Result};

/// Where in a run an observer is being called.
#[derive(Debug, Clone, Copy)]
pub enum Moment<'a> {
    Initial,
    /// Right after the event has been resolved.
    Event(&'a Event),
    Final,
}

/// Callback invoked with immutable views of the state along a run.
pub trait Observer {
    fn observe(
        &mut self,
        moment: Moment<'_>,
        state: &ParticleState,
        velocities: &VelocityAssignment,
    ) -> Result<()>;
}

impl<F> Observer for F
where
    F: FnMut(Moment<'_>, &ParticleState, &VelocityAssignment) -> Result<()>,
{
    fn observe(
        &mut self,
        moment: Moment<'_>,
        state: &ParticleState,
        velocities: &VelocityAssignment,
    ) -> Result<()> {
        self(moment, state, velocities)
    }
}

impl Observer for () {
    fn observe(&mut self, _: Moment<'_>, _: &ParticleState, _: &VelocityAssignment) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    /// Keep the state after every event. Memory grows as `O(N^3)`.
    pub keep_snapshots: bool,
    /// Sorted times at which the free-flight state is recorded.
    pub sample_times: Vec<f64>,
    /// Overrides the tolerances derived from the initial hull.
    pub config: Option<EngineConfig>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EventCounts {
    pub cross: usize,
    pub stick: usize,
    pub cluster: usize,
}

impl EventCounts {
    pub fn total(&self) -> usize {
        self.cross + self.stick + self.cluster
    }

    fn add(&mut self, event: &Event) {
        for c in &event.contacts {
            match c.kind {
                EventKind::Cross => self.cross += 1,
                EventKind::Stick => self.stick += 1,
                EventKind::Cluster => self.cluster += 1,
            }
        }
    }
}

/// Outcome of one integrator step.
#[derive(Debug, Clone)]
pub struct Step {
    pub state: ParticleState,
    pub event: Option<Event>,
    /// Velocities used during the free flight that ended the step.
    pub velocities: VelocityAssignment,
}

/// Advances to the next collision, or to `horizon` if it comes first, and
/// resolves the collision.
pub fn step(state: &ParticleState, horizon: f64, cfg: &EngineConfig) -> Result<Step> {
    let vel = velocities(state, cfg.colocation_tol);
    step_with(state, vel, horizon, cfg)
}

fn step_with(
    state: &ParticleState,
    mut vel: VelocityAssignment,
    horizon: f64,
    cfg: &EngineConfig,
) -> Result<Step> {
    let event = next_event(state, &vel, cfg)?;
    match event {
        Some(ev) if ev.time <= horizon => {
            vel.valid_until = ev.time;
            let moved = state.advanced(&vel.vx, &vel.vy, ev.time);
            let next = resolve(&ev, &moved, cfg)?;
            Ok(Step {
                state: next,
                event: Some(ev),
                velocities: vel,
            })
        }
        other => {
            vel.valid_until = other.map_or(f64::INFINITY, |e| e.time);
            let end = if horizon.is_finite() { horizon } else { state.t() };
            Ok(Step {
                state: state.advanced(&vel.vx, &vel.vy, end.max(state.t())),
                event: None,
                velocities: vel,
            })
        }
    }
}

/// Everything produced by [`run`].
#[derive(Debug, Clone)]
pub struct SimulationRecord {
    pub initial: ParticleState,
    pub horizon: f64,
    pub config: EngineConfig,
    pub events: Vec<Event>,
    /// Initial state followed by the state after each event (if kept).
    pub snapshots: Vec<ParticleState>,
    pub samples: Vec<ParticleState>,
    pub final_state: ParticleState,
    /// First time at which every velocity vanishes.
    pub stationary_at: Option<f64>,
    pub counts: EventCounts,
    pub velocity_evaluations: usize,
    /// Largest `|sum v| * N` seen at any velocity evaluation.
    pub max_momentum_units: i64,
    pub max_speed: f64,
}

impl SimulationRecord {
    pub fn n(&self) -> usize {
        self.initial.n()
    }

    /// `N(N + 1)`.
    pub fn collision_bound(&self) -> usize {
        collision_bound(self.n())
    }

    /// State at time `t`, rebuilt from the last snapshot before `t`.
    /// Needs `keep_snapshots`.
    pub fn state_at(&self, t: f64) -> Option<ParticleState> {
        let t = t.min(self.final_state.t());
        let k = self.snapshots.partition_point(|s| s.t() <= t);
        let base = self.snapshots.get(k.checked_sub(1)?)?;
        let vel = velocities(base, self.config.colocation_tol);
        Some(base.advanced(&vel.vx, &vel.vy, t))
    }
}

pub fn collision_bound(n: usize) -> usize {
    n * (n + 1)
}

/// Runs the event-driven integrator until `horizon` (may be `+inf`) or until
/// every particle is at rest.
pub fn run(initial: &ParticleState, horizon: f64) -> Result<SimulationRecord> {
    run_with(initial, horizon, &RunOptions::default(), &mut ())
}

pub fn run_with<O: Observer + ?Sized>(
    initial: &ParticleState,
    horizon: f64,
    options: &RunOptions,
    observer: &mut O,
) -> Result<SimulationRecord> {
    if !(horizon >= initial.t()) {
        return Err(Error::InvalidConfig(format!(
            "horizon {horizon} precedes the initial time {}",
            initial.t()
        )));
    }
    let cfg = options.config.unwrap_or_else(|| EngineConfig::for_state(initial));
    let n = initial.n();
    let bound = collision_bound(n);
    let (lo, hi) = initial.support();
    let hull_slack = 1e-12 * lo.abs().max(hi.abs()).max(1.0);

    let mut state = snap_groups(initial, cfg.colocation_tol);
    let mut vel = velocities(&state, cfg.colocation_tol);
    let mut record = SimulationRecord {
        initial: state.clone(),
        horizon,
        config: cfg,
        events: Vec::new(),
        snapshots: Vec::new(),
        samples: Vec::new(),
        final_state: state.clone(),
        stationary_at: None,
        counts: EventCounts::default(),
        velocity_evaluations: 0,
        max_momentum_units: 0,
        max_speed: 0.0,
    };
    if options.keep_snapshots {
        record.snapshots.push(state.clone());
    }
    let mut samples = options.sample_times.iter().copied().peekable();
    observer.observe(Moment::Initial, &state, &vel)?;

    loop {
        check_velocities(&vel, &mut record)?;
        if vel.is_stationary() {
            record.stationary_at = Some(state.t());
            break;
        }
        let out = step_with(&state, vel, horizon, &cfg)?;
        let end = out.state.t();
        while let Some(&ts) = samples.peek() {
            if ts > end {
                break;
            }
            if ts >= state.t() {
                let v = &out.velocities;
                record.samples.push(state.advanced(&v.vx, &v.vy, ts));
            }
            samples.next();
        }
        state = out.state;
        let Some(event) = out.event else {
            break;
        };
        record.counts.add(&event);
        if record.counts.total() > bound {
            return Err(Error::CollisionBoundExceeded {
                count: record.counts.total(),
                bound,
            });
        }
        check_support(&state, lo, hi, hull_slack)?;
        vel = velocities(&state, cfg.colocation_tol);
        check_separation(&state, &vel)?;
        observer.observe(Moment::Event(&event), &state, &vel)?;
        record.events.push(event);
        if options.keep_snapshots {
            record.snapshots.push(state.clone());
        }
    }

    // stationary before the horizon: everything after is constant
    for ts in samples {
        if ts <= horizon {
            let mut s = state.clone();
            s.t = ts;
            record.samples.push(s);
        }
    }
    let final_vel = velocities(&state, cfg.colocation_tol);
    observer.observe(Moment::Final, &state, &final_vel)?;
    record.final_state = state;
    Ok(record)
}

fn snap_groups(state: &ParticleState, tol: f64) -> ParticleState {
    let mut s = state.clone();
    for g in velocities(state, tol).groups {
        s.x[g.x.clone()].fill(g.position);
        s.y[g.y.clone()].fill(g.position);
    }
    s
}

fn check_velocities(vel: &VelocityAssignment, record: &mut SimulationRecord) -> Result<()> {
    record.velocity_evaluations += 1;
    let m = vel.momentum_units().abs();
    record.max_momentum_units = record.max_momentum_units.max(m);
    let speed = vel.max_speed();
    record.max_speed = record.max_speed.max(speed);
    if speed > 2.0 {
        return Err(Error::SpeedBound { speed });
    }
    Ok(())
}

fn check_support(state: &ParticleState, lo: f64, hi: f64, slack: f64) -> Result<()> {
    let (a, b) = state.support();
    for position in [a, b] {
        if position < lo - slack || position > hi + slack {
            return Err(Error::SupportViolation { lo, hi, position });
        }
    }
    Ok(())
}

/// Same-species particles may only coincide as members of a matched cluster
/// that was present from the start; anything else is a collision.
fn check_separation(state: &ParticleState, vel: &VelocityAssignment) -> Result<()> {
    for (label, p, u) in [('x', state.x(), &vel.units_x), ('y', state.y(), &vel.units_y)] {
        let clash = |k: usize| p[k + 1] <= p[k] && (u[k] != 0 || u[k + 1] != 0);
        if let Some(k) = (0..p.len().saturating_sub(1)).find(|&k| clash(k)) {
            return Err(Error::SameSpeciesCollision {
                species: label,
                left: k,
                right: k + 1,
                time: state.t(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(x: &[f64], y: &[f64]) -> ParticleState {
        ParticleState::new(x.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn head_on_pair_sticks_once() {
        let rec = run(&state(&[0.0], &[1.0]), 2.0).unwrap();
        assert_eq!(rec.events.len(), 1);
        assert_eq!(rec.events[0].time, 0.5);
        assert_eq!(rec.counts.stick, 1);
        assert_eq!(rec.stationary_at, Some(0.5));
        assert_eq!(rec.final_state.x(), &[0.5]);
    }

    #[test]
    fn identical_discretizations_do_not_move() {
        let s = state(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]);
        let rec = run(&s, 5.0).unwrap();
        assert!(rec.events.is_empty());
        assert_eq!(rec.stationary_at, Some(0.0));
        assert_eq!(rec.final_state.x(), s.x());
    }

    #[test]
    fn two_blocks_end_paired() {
        let rec = run(&state(&[-2.0, -1.0], &[0.0, 1.0]), f64::INFINITY).unwrap();
        assert!(rec.final_state.is_paired());
        assert!(rec.counts.total() <= 6);
        assert_eq!(rec.events[0].kind(), EventKind::Cross);
        assert_eq!(rec.max_momentum_units, 0);
        let b0 = rec.initial.barycenter();
        assert!((rec.final_state.barycenter() - b0).abs() < 1e-12);
    }

    #[test]
    fn crossing_flips_order_and_sets_velocity() {
        let s = state(&[-2.0, -1.0], &[0.0, 1.0]);
        let cfg = EngineConfig::for_state(&s);
        let out = step(&s, f64::INFINITY, &cfg).unwrap();
        let v = velocities(&out.state, cfg.colocation_tol);
        // x2 now has y1 on its left: its cross terms cancel
        assert_eq!(v.vx[1], 0.5);
    }

    #[test]
    fn horizon_stops_free_flight() {
        let rec = run(&state(&[0.0], &[1.0]), 0.25).unwrap();
        assert!(rec.events.is_empty());
        assert_eq!(rec.final_state.t(), 0.25);
        assert_eq!(rec.final_state.x(), &[0.25]);
        assert_eq!(rec.stationary_at, None);
    }

    #[test]
    fn samples_and_snapshots() {
        let opts = RunOptions {
            keep_snapshots: true,
            sample_times: vec![0.0, 0.25, 0.5, 1.0],
            config: None,
        };
        let rec = run_with(&state(&[0.0], &[1.0]), 1.0, &opts, &mut ()).unwrap();
        assert_eq!(rec.samples.len(), 4);
        assert_eq!(rec.samples[1].x(), &[0.25]);
        assert_eq!(rec.samples[3].y(), &[0.5]);
        assert_eq!(rec.snapshots.len(), 2);
        assert_eq!(rec.state_at(0.1).unwrap().y(), &[0.9]);
    }

    #[test]
    fn observer_sees_every_event() {
        let mut times = Vec::new();
        let mut obs = |m: Moment<'_>, s: &ParticleState, _: &VelocityAssignment| {
            if let Moment::Event(_) = m {
                times.push(s.t());
            }
            Ok(())
        };
        let rec = run_with(
            &state(&[-2.0, -1.0], &[0.0, 1.0]),
            f64::INFINITY,
            &RunOptions::default(),
            &mut obs,
        )
        .unwrap();
        assert_eq!(times.len(), rec.events.len());
    }

    #[test]
    fn rejects_horizon_before_start() {
        assert!(run(&state(&[0.0], &[1.0]), -1.0).is_err());
    }
}
