//! Exact simulation of a one-dimensional two-species aggregation model.
//!
//! Two populations of `N` particles each, with equal masses `1/N`, interact
//! through the Newtonian kernel `|x|`: particles repel their own species and
//! attract the other. Velocities are piecewise constant in time, so the
//! [`engine`] integrates the system exactly from collision to collision.
//! [`measures`] turns particle states into densities and compares them in
//! Wasserstein distance, [`diagnostics`] tracks energy and norms along a run,
//! [`oracle`] holds independent reference solvers and [`harness`] drives
//! convergence studies across particle counts.

// `!(a >= b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod harness;
pub mod measures;
pub mod oracle;

pub use engine::{
    run, run_with, velocities, EngineConfig, Event, EventKind, ParticleState, RunOptions,
    SimulationRecord, Species, VelocityAssignment,
};
pub use error::{Error, Result};
pub use measures::{EmpiricalMeasure, InitialDensity, PiecewiseDensity};
