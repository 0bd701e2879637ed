//! Exact event-driven integration of the two-species particle system.
//!
//! Between collisions every velocity is constant, so the integrator advances
//! linearly to the next collision time computed in closed form and resolves
//! the collision by re-evaluating the velocity rule.

mod event;
mod run;
mod state;
mod velocity;

pub use event::{next_event, resolve, Contact, EngineConfig, Event, EventKind};
pub use run::{
    collision_bound, run, run_with, step, EventCounts, Moment, Observer, RunOptions,
    SimulationRecord, Step,
};
pub use state::{ParticleState, Species};
pub use velocity::{velocities, ColocationGroup, VelocityAssignment};
