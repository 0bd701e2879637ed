//! Energy, `L^m` norms and support along a run.
//!
//! The discrete interaction energy is
//!
//! ```text
//! F = -1/2 sum m_i m_k |x_i - x_k| - 1/2 sum n_j n_l |y_j - y_l| + sum m_i n_j |x_i - y_j|
//! ```
//!
//! and the particle system is its gradient flow, so `F` decreases at rate
//! `sum (v_x^2 + v_y^2) / N` between collisions.

use std::fmt;
use std::io::{self, Write};

use crate::engine::{
    velocities, EventKind, Moment, Observer, ParticleState, RunOptions, SimulationRecord,
    VelocityAssignment,
};
use crate::error::{Error, Result};
use crate::measures::PiecewiseDensity;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyValue {
    pub total: f64,
    pub self_x: f64,
    pub self_y: f64,
    pub cross: f64,
}

impl EnergyValue {
    /// Sum of the magnitudes of the three terms; scales the rounding error
    /// of `total`.
    pub fn magnitude(&self) -> f64 {
        self.self_x.abs() + self.self_y.abs() + self.cross.abs()
    }
}

/// Evaluates `F` in `O(N log N)` with prefix sums over the sorted arrays.
pub fn energy(state: &ParticleState) -> EnergyValue {
    let n = state.n();
    let w = 1.0 / (n as f64 * n as f64);
    let self_x = 0.0 - w * self_sum(state.x());
    let self_y = 0.0 - w * self_sum(state.y());
    let cross = w * cross_sum(state.x(), state.y());
    EnergyValue {
        total: self_x + self_y + cross,
        self_x,
        self_y,
        cross,
    }
}

/// `sum_{i<k} (p_k - p_i)` for sorted `p`.
fn self_sum(p: &[f64]) -> f64 {
    let n = p.len() as f64;
    p.iter()
        .enumerate()
        .map(|(k, &v)| v * (2.0 * k as f64 - n + 1.0))
        .sum()
}

/// `sum_{i,j} |x_i - y_j|` for sorted `x`, `y`.
fn cross_sum(x: &[f64], y: &[f64]) -> f64 {
    let mut prefix = Vec::with_capacity(y.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &v in y {
        acc += v;
        prefix.push(acc);
    }
    let total = acc;
    let n = y.len() as f64;
    x.iter()
        .map(|&xi| {
            let c = y.partition_point(|&v| v <= xi);
            let below = prefix[c];
            let cf = c as f64;
            (xi * cf - below) + (total - below - xi * (n - cf))
        })
        .sum()
}

/// Exponent of an `L^m` norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LmOrder {
    Finite(f64),
    Infinity,
}

impl LmOrder {
    pub fn new(m: f64) -> Result<Self> {
        if m == f64::INFINITY {
            Ok(LmOrder::Infinity)
        } else if m.is_finite() && m > 1.0 {
            Ok(LmOrder::Finite(m))
        } else {
            Err(Error::InvalidExponent(m))
        }
    }

    /// The monitored default `{2, 3, inf}`.
    pub fn defaults() -> Vec<LmOrder> {
        vec![LmOrder::Finite(2.0), LmOrder::Finite(3.0), LmOrder::Infinity]
    }

    /// CSV column name: `l2`, `l3`, `linf`, `l2.5`.
    pub fn column(&self) -> String {
        format!("l{self}")
    }
}

impl fmt::Display for LmOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LmOrder::Infinity => f.write_str("inf"),
            LmOrder::Finite(m) => write!(f, "{m}"),
        }
    }
}

impl std::str::FromStr for LmOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if matches!(s, "inf" | "infinity" | "Inf") {
            return Ok(LmOrder::Infinity);
        }
        let m: f64 = s
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad exponent {s:?}")))?;
        LmOrder::new(m)
    }
}

/// `||d||_m = (sum h_i^m |cell_i|)^(1/m)`, or the largest height for `m = inf`.
pub fn lm_norm(density: &PiecewiseDensity, order: LmOrder) -> f64 {
    match order {
        LmOrder::Infinity => lm_norm_power(density, order),
        LmOrder::Finite(m) => lm_norm_power(density, order).powf(1.0 / m),
    }
}

/// `||d||_m^m`; for `m = inf` the sup norm itself.
pub fn lm_norm_power(density: &PiecewiseDensity, order: LmOrder) -> f64 {
    match order {
        LmOrder::Infinity => density.heights().iter().fold(0.0, |a, &h| a.max(h)),
        LmOrder::Finite(m) => density.cells().map(|(a, b, h)| h.powf(m) * (b - a)).sum(),
    }
}

/// The monitored quantity of one state: `||rho||_m^m + ||eta||_m^m` for finite
/// `m` and `max(||rho||_inf, ||eta||_inf)` for `m = inf` (the limit of the
/// `m`-th root of the sum). `NaN` when a species cannot be reconstructed,
/// which happens for `N = 1` or coincident same-species particles.
pub fn species_norm(state: &ParticleState, order: LmOrder) -> f64 {
    let (Ok(rho), Ok(eta)) = (
        PiecewiseDensity::reconstruct(state.x()),
        PiecewiseDensity::reconstruct(state.y()),
    ) else {
        return f64::NAN;
    };
    let (a, b) = (lm_norm_power(&rho, order), lm_norm_power(&eta, order));
    match order {
        LmOrder::Infinity => a.max(b),
        LmOrder::Finite(_) => a + b,
    }
}

/// `(a, b) = (min(x_1, y_1), max(x_N, y_N))`.
pub fn support(state: &ParticleState) -> (f64, f64) {
    state.support()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub energy: EnergyValue,
    /// One entry per configured order, see [`species_norm`].
    pub norms: Vec<f64>,
    pub support: (f64, f64),
    pub events_cross: usize,
    pub events_stick: usize,
    pub events_cluster: usize,
    /// `sum v^2 / N` of the velocities leaving this row.
    pub dissipation: f64,
    pub barycenter: f64,
    pub min_gap: f64,
}

/// Diagnostics at the initial time, every event time and the final time.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsTrace {
    pub orders: Vec<LmOrder>,
    pub rows: Vec<TraceRow>,
}

impl DiagnosticsTrace {
    pub const BASE_HEADER: [&'static str; 5] = ["t", "energy", "self_x", "self_y", "cross"];

    pub fn new(orders: Vec<LmOrder>) -> Self {
        Self {
            orders,
            rows: Vec::new(),
        }
    }

    /// Rebuilds the trace from a record that kept its snapshots.
    pub fn from_record(record: &SimulationRecord, orders: Vec<LmOrder>) -> Result<Self> {
        if record.snapshots.is_empty() {
            return Err(Error::InvalidConfig(
                "record has no snapshots; run with keep_snapshots".into(),
            ));
        }
        let mut builder = TraceBuilder::new(orders);
        let tol = record.config.colocation_tol;
        for (k, s) in record.snapshots.iter().enumerate() {
            let vel = velocities(s, tol);
            let moment = match k {
                0 => Moment::Initial,
                _ => Moment::Event(&record.events[k - 1]),
            };
            builder.observe(moment, s, &vel)?;
        }
        let vel = velocities(&record.final_state, tol);
        builder.observe(Moment::Final, &record.final_state, &vel)?;
        Ok(builder.finish())
    }

    pub fn header(&self) -> String {
        let mut cols: Vec<String> = Self::BASE_HEADER.iter().map(|s| s.to_string()).collect();
        cols.extend(self.orders.iter().map(LmOrder::column));
        cols.extend(["a", "b", "events_cross", "events_stick"].map(String::from));
        cols.join(",")
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.header())?;
        for r in &self.rows {
            write!(
                w,
                "{:?},{:?},{:?},{:?},{:?}",
                r.t, r.energy.total, r.energy.self_x, r.energy.self_y, r.energy.cross
            )?;
            for v in &r.norms {
                write!(w, ",{v:?}")?;
            }
            writeln!(
                w,
                ",{:?},{:?},{},{}",
                r.support.0, r.support.1, r.events_cross, r.events_stick
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn column(&self, order: LmOrder) -> Option<Vec<f64>> {
        let k = self.orders.iter().position(|o| *o == order)?;
        Some(self.rows.iter().map(|r| r.norms[k]).collect())
    }
}

/// [`Observer`] that assembles a [`DiagnosticsTrace`] while a run proceeds.
#[derive(Debug, Clone)]
pub struct TraceBuilder {
    trace: DiagnosticsTrace,
    cross: usize,
    stick: usize,
    cluster: usize,
}

impl TraceBuilder {
    pub fn new(orders: Vec<LmOrder>) -> Self {
        Self {
            trace: DiagnosticsTrace::new(orders),
            cross: 0,
            stick: 0,
            cluster: 0,
        }
    }

    pub fn finish(self) -> DiagnosticsTrace {
        self.trace
    }

    fn row(&self, state: &ParticleState, vel: &VelocityAssignment) -> TraceRow {
        TraceRow {
            t: state.t(),
            energy: energy(state),
            norms: self
                .trace
                .orders
                .iter()
                .map(|&o| species_norm(state, o))
                .collect(),
            support: state.support(),
            events_cross: self.cross,
            events_stick: self.stick,
            events_cluster: self.cluster,
            dissipation: vel.dissipation_rate(),
            barycenter: state.barycenter(),
            min_gap: state.min_same_species_gap(),
        }
    }
}

impl Observer for TraceBuilder {
    fn observe(
        &mut self,
        moment: Moment<'_>,
        state: &ParticleState,
        vel: &VelocityAssignment,
    ) -> Result<()> {
        match moment {
            Moment::Initial => {}
            Moment::Event(ev) => {
                for c in &ev.contacts {
                    match c.kind {
                        EventKind::Cross => self.cross += 1,
                        EventKind::Stick => self.stick += 1,
                        EventKind::Cluster => self.cluster += 1,
                    }
                }
            }
            Moment::Final => {
                // the last event may coincide with the end of the run
                if self.trace.rows.last().is_some_and(|r| r.t >= state.t()) {
                    return Ok(());
                }
            }
        }
        let row = self.row(state, vel);
        self.trace.rows.push(row);
        Ok(())
    }
}

/// Runs the engine and records diagnostics in one pass.
pub fn traced_run(
    initial: &ParticleState,
    horizon: f64,
    options: &RunOptions,
    orders: Vec<LmOrder>,
) -> Result<(SimulationRecord, DiagnosticsTrace)> {
    let mut builder = TraceBuilder::new(orders);
    let record = crate::engine::run_with(initial, horizon, options, &mut builder)?;
    Ok((record, builder.finish()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DissipationViolation {
    /// Index of the row that starts the offending interval.
    pub index: usize,
    pub t0: f64,
    pub t1: f64,
    pub expected: f64,
    pub observed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DissipationReport {
    pub intervals: usize,
    /// Largest `|dF - expected| / |expected|` over intervals with nonzero
    /// dissipation.
    pub max_relative_error: f64,
    pub violations: Vec<DissipationViolation>,
    /// Intervals where `F` increased beyond rounding.
    pub increases: Vec<usize>,
    pub min_energy: f64,
}

impl DissipationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty() && self.increases.is_empty()
    }
}

/// Checks `dF = -(sum v^2 / N) dt` on every interval between rows and that
/// `F` never increases.
///
/// The comparison allows `rel_tol` relative to the expected drop plus a
/// floor of a few ulps of the energy terms, since `F` is a difference of
/// sums that are individually much larger than the drop near the end of a
/// run.
pub fn energy_dissipation_check(trace: &DiagnosticsTrace, rel_tol: f64) -> DissipationReport {
    let mut report = DissipationReport {
        intervals: 0,
        max_relative_error: 0.0,
        violations: Vec::new(),
        increases: Vec::new(),
        min_energy: trace
            .rows
            .iter()
            .map(|r| r.energy.total)
            .fold(f64::INFINITY, f64::min),
    };
    for (k, w) in trace.rows.windows(2).enumerate() {
        let (r0, r1) = (&w[0], &w[1]);
        let dt = r1.t - r0.t;
        let expected = -r0.dissipation * dt;
        let observed = r1.energy.total - r0.energy.total;
        let floor = 64.0 * f64::EPSILON * (r0.energy.magnitude() + r1.energy.magnitude());
        report.intervals += 1;
        if expected != 0.0 {
            let rel = (observed - expected).abs() / expected.abs();
            report.max_relative_error = report.max_relative_error.max(rel);
        }
        if (observed - expected).abs() > rel_tol * expected.abs() + floor {
            report.violations.push(DissipationViolation {
                index: k,
                t0: r0.t,
                t1: r1.t,
                expected,
                observed,
            });
        }
        if observed > floor {
            report.increases.push(k);
        }
    }
    report
}

/// Rows (by index of the later row) at which a monitored norm grew by more
/// than `rel_tol` relative. `NaN` entries are skipped.
pub fn norm_increases(trace: &DiagnosticsTrace, rel_tol: f64) -> Vec<(LmOrder, usize, f64, f64)> {
    let mut out = Vec::new();
    for (k, &order) in trace.orders.iter().enumerate() {
        for (i, w) in trace.rows.windows(2).enumerate() {
            let (a, b) = (w[0].norms[k], w[1].norms[k]);
            if a.is_nan() || b.is_nan() {
                continue;
            }
            if b > a * (1.0 + rel_tol) {
                out.push((order, i + 1, a, b));
            }
        }
    }
    out
}

/// True when every support interval is contained in the previous one up to
/// `tol`.
pub fn support_nested(trace: &DiagnosticsTrace, tol: f64) -> bool {
    trace.rows.windows(2).all(|w| {
        let (a0, b0) = w[0].support;
        let (a1, b1) = w[1].support;
        a1 >= a0 - tol && b1 <= b0 + tol
    })
}
