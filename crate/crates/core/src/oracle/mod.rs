//! Independent reference solvers used to validate the engine.
//!
//! * [`fine_step_integrate`]: fixed-step RK4 on the system with the sign
//!   kernel replaced by a linear ramp of width `delta`.
//! * [`exact_rational_run`]: an event-driven replica in exact arithmetic.

mod fine_step;
mod rational;

pub use fine_step::{
    fine_step_integrate, regularized_rhs, sup_distance, OracleSample, OracleTrajectory,
    RegularizedKernel,
};
pub use rational::{
    compare_event_logs, exact_rational_run, to_f64, LogMismatch, RationalContact, RationalEvent,
    RationalRun, RationalState,
};
