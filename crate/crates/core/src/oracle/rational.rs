//! Event-driven replica in exact rational arithmetic.
//!
//! With equal masses every velocity is an integer multiple of `1/N`, so all
//! collision times and places stay rational. This replica shares no code with
//! the floating engine: velocities come from direct counting and the next
//! collision from a search over all opposite-species pairs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::engine::{Event, EventKind, ParticleState};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalState {
    pub t: BigRational,
    pub x: Vec<BigRational>,
    pub y: Vec<BigRational>,
}

impl RationalState {
    pub fn new(x: Vec<BigRational>, y: Vec<BigRational>) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::OracleParameter("species sizes must match and be positive".into()));
        }
        for p in [&x, &y] {
            if p.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::OracleParameter("positions must be sorted".into()));
            }
        }
        Ok(Self {
            t: BigRational::zero(),
            x,
            y,
        })
    }

    /// Positions `num / den` with a common denominator.
    pub fn from_ratios(x: &[i64], y: &[i64], den: i64) -> Result<Self> {
        let r = |v: &i64| BigRational::new(BigInt::from(*v), BigInt::from(den));
        Self::new(x.iter().map(r).collect(), y.iter().map(r).collect())
    }

    /// Exact binary value of every float; fails on non-finite input.
    pub fn from_state(state: &ParticleState) -> Result<Self> {
        let conv = |p: &[f64]| -> Result<Vec<BigRational>> {
            p.iter()
                .map(|&v| {
                    BigRational::from_float(v).ok_or_else(|| {
                        Error::OracleParameter(format!("{v} has no rational value"))
                    })
                })
                .collect()
        };
        let mut s = Self::new(conv(state.x())?, conv(state.y())?)?;
        s.t = BigRational::from_float(state.t())
            .ok_or_else(|| Error::OracleParameter("non-finite time".into()))?;
        Ok(s)
    }

    pub fn to_state(&self) -> Result<ParticleState> {
        let f = |p: &[BigRational]| p.iter().map(to_f64).collect::<Vec<_>>();
        ParticleState::at_time(to_f64(&self.t), f(&self.x), f(&self.y))
    }

    fn n(&self) -> usize {
        self.x.len()
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalContact {
    pub location: BigRational,
    pub kind: EventKind,
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalEvent {
    pub time: BigRational,
    pub contacts: Vec<RationalContact>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalRun {
    pub events: Vec<RationalEvent>,
    pub final_state: RationalState,
    pub stationary_at: Option<BigRational>,
}

/// Velocities times `N`, by counting. The virtual order inside a point is:
/// the lower-indexed excess of either species to the left, matched indices
/// in place, the higher-indexed excess to the right.
fn velocity_units(s: &RationalState) -> (Vec<i64>, Vec<i64>) {
    let n = s.n() as i64;
    let units = |own: &[BigRational], other: &[BigRational]| -> Vec<i64> {
        own.iter()
            .enumerate()
            .map(|(i, p)| {
                let i = i as i64;
                let below = other.iter().filter(|q| *q < p).count() as i64;
                let at = other.iter().filter(|q| *q == p).count() as i64;
                let opp_left = if i < below {
                    below
                } else if i >= below + at {
                    below + at
                } else {
                    return 0;
                };
                // same species: i on the left, n - 1 - i on the right
                let same = i - (n - 1 - i);
                same - opp_left + (n - opp_left)
            })
            .collect()
    };
    (units(&s.x, &s.y), units(&s.y, &s.x))
}

/// Runs the replica until `horizon` (`None` for no limit) or stationarity.
pub fn exact_rational_run(initial: &RationalState, horizon: Option<&BigRational>) -> Result<RationalRun> {
    let n = initial.n();
    let bound = n * (n + 1);
    let nn = BigRational::from_integer(BigInt::from(n));
    let mut s = initial.clone();
    let mut events = Vec::new();
    let mut count = 0usize;

    loop {
        let (ux, uy) = velocity_units(&s);
        if ux.iter().chain(&uy).all(|&u| u == 0) {
            let t = s.t.clone();
            return Ok(RationalRun {
                events,
                final_state: s,
                stationary_at: Some(t),
            });
        }
        let vel = |u: i64| BigRational::from_integer(BigInt::from(u)) / &nn;
        let vx: Vec<BigRational> = ux.iter().map(|&u| vel(u)).collect();
        let vy: Vec<BigRational> = uy.iter().map(|&u| vel(u)).collect();

        let mut best: Option<BigRational> = None;
        for i in 0..n {
            for j in 0..n {
                let gap = &s.y[j] - &s.x[i];
                let closing = &vx[i] - &vy[j];
                if gap.is_zero() || closing.is_zero() {
                    continue;
                }
                let dt = gap / closing;
                if dt > BigRational::zero() && best.as_ref().is_none_or(|b| dt < *b) {
                    best = Some(dt);
                }
            }
        }
        let Some(dt) = best else {
            // no more collisions: free flight to the horizon
            if let Some(h) = horizon {
                let dt = h - &s.t;
                advance(&mut s, &vx, &vy, &dt);
            }
            return Ok(RationalRun {
                events,
                final_state: s,
                stationary_at: None,
            });
        };
        let time = &s.t + &dt;
        if horizon.is_some_and(|h| time > *h) {
            let dt = horizon.unwrap() - &s.t;
            advance(&mut s, &vx, &vy, &dt);
            return Ok(RationalRun {
                events,
                final_state: s,
                stationary_at: None,
            });
        }
        let before = s.clone();
        advance(&mut s, &vx, &vy, &dt);

        // every opposite pair that meets now, grouped by place
        let mut places: Vec<BigRational> = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if before.x[i] != before.y[j] && s.x[i] == s.y[j] && !places.contains(&s.x[i]) {
                    places.push(s.x[i].clone());
                }
            }
        }
        places.sort();
        let contacts: Vec<RationalContact> = places
            .into_iter()
            .map(|loc| {
                let xs: Vec<usize> = (0..n).filter(|&i| s.x[i] == loc).collect();
                let ys: Vec<usize> = (0..n).filter(|&j| s.y[j] == loc).collect();
                let kind = match (xs.as_slice(), ys.as_slice()) {
                    ([i], [j]) => EventKind::binary(*i, *j),
                    _ => EventKind::Cluster,
                };
                RationalContact {
                    location: loc,
                    kind,
                    x: xs,
                    y: ys,
                }
            })
            .collect();
        // coincident same-species particles are allowed only inside a
        // matched cluster, where both are at rest
        let (ux, uy) = velocity_units(&s);
        for (species, p, u) in [('x', &s.x, &ux), ('y', &s.y, &uy)] {
            let clash = |k: usize| p[k] >= p[k + 1] && (u[k] != 0 || u[k + 1] != 0);
            if let Some(k) = (0..n.saturating_sub(1)).find(|&k| clash(k)) {
                return Err(Error::SameSpeciesCollision {
                    species,
                    left: k,
                    right: k + 1,
                    time: to_f64(&time),
                });
            }
        }
        count += contacts.len();
        if count > bound {
            return Err(Error::CollisionBoundExceeded { count, bound });
        }
        events.push(RationalEvent { time, contacts });
    }
}

fn advance(s: &mut RationalState, vx: &[BigRational], vy: &[BigRational], dt: &BigRational) {
    for (p, v) in s.x.iter_mut().zip(vx).chain(s.y.iter_mut().zip(vy)) {
        *p += v * dt;
    }
    s.t += dt;
}

/// First disagreement between a floating event log and an exact one.
#[derive(Debug, Clone, PartialEq)]
pub enum LogMismatch {
    Length { float: usize, exact: usize },
    Time { index: usize, float: f64, exact: f64 },
    Contacts { index: usize },
    Location { index: usize, float: f64, exact: f64 },
}

/// Same events in the same order with the same participants and kinds, and
/// times within `rel_tol` relative. Locations are compared with the same
/// tolerance scaled by `scale` (the support diameter).
pub fn compare_event_logs(
    float: &[Event],
    exact: &[RationalEvent],
    rel_tol: f64,
    scale: f64,
) -> std::result::Result<(), LogMismatch> {
    if float.len() != exact.len() {
        return Err(LogMismatch::Length {
            float: float.len(),
            exact: exact.len(),
        });
    }
    for (index, (f, e)) in float.iter().zip(exact).enumerate() {
        let te = to_f64(&e.time);
        if (f.time - te).abs() > rel_tol * te.abs() {
            return Err(LogMismatch::Time {
                index,
                float: f.time,
                exact: te,
            });
        }
        if f.contacts.len() != e.contacts.len() {
            return Err(LogMismatch::Contacts { index });
        }
        for (cf, ce) in f.contacts.iter().zip(&e.contacts) {
            if cf.kind != ce.kind || cf.x != ce.x || cf.y != ce.y {
                return Err(LogMismatch::Contacts { index });
            }
            let le = to_f64(&ce.location);
            if (cf.location - le).abs() > rel_tol * (le.abs() + scale) {
                return Err(LogMismatch::Location {
                    index,
                    float: cf.location,
                    exact: le,
                });
            }
        }
    }
    Ok(())
}
