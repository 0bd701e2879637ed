use std::cmp::Ordering;
use std::fmt;

use super::state::{ParticleState, Species};
use super::velocity::VelocityAssignment;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    /// Binary opposite-species collision with different indices; the pair
    /// passes through each other.
    Cross,
    /// Binary collision of equal indices; the pair stays attached forever.
    Stick,
    /// Three or more particles meet at one point.
    Cluster,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Cross => "cross",
            EventKind::Stick => "stick",
            EventKind::Cluster => "cluster",
        }
    }

    /// Classification of a binary `x_i` / `y_j` collision by index.
    pub fn binary(i: usize, j: usize) -> Self {
        if i == j {
            EventKind::Stick
        } else {
            EventKind::Cross
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Particles meeting at one location.
#[derive(Debug, Clone, PartialEq)]
pub struct Contact {
    pub location: f64,
    pub kind: EventKind,
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

impl Contact {
    fn classify(x: &[usize], y: &[usize]) -> EventKind {
        match (x, y) {
            ([i], [j]) => EventKind::binary(*i, *j),
            _ => EventKind::Cluster,
        }
    }
}

/// All collisions happening at one instant, possibly at several places.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    pub contacts: Vec<Contact>,
}

impl Event {
    /// Location of the first contact.
    pub fn location(&self) -> f64 {
        self.contacts[0].location
    }

    /// Kind of a single-contact event; `Cluster` when several contacts merged.
    pub fn kind(&self) -> EventKind {
        match self.contacts.as_slice() {
            [c] => c.kind,
            _ => EventKind::Cluster,
        }
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.contacts.iter().filter(|c| c.kind == kind).count()
    }
}

/// Numerical tolerances of the event-driven integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    /// Positions closer than this are one co-location group.
    pub colocation_tol: f64,
    /// Collision times within this relative window are simultaneous.
    pub tie_rel_tol: f64,
}

impl EngineConfig {
    pub const COLOCATION_REL: f64 = 1e-12;
    pub const TIE_REL: f64 = 1e-12;

    /// Tolerances scaled by the diameter of the initial support.
    pub fn for_state(state: &ParticleState) -> Self {
        Self::relative(state, Self::COLOCATION_REL, Self::TIE_REL)
    }

    /// Co-location tolerance `colocation_rel * diameter`, tie window
    /// `tie_rel` relative.
    pub fn relative(state: &ParticleState, colocation_rel: f64, tie_rel: f64) -> Self {
        Self {
            colocation_tol: colocation_rel * state.diameter(),
            tie_rel_tol: tie_rel,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    pos: f64,
    units: i64,
    species: Species,
    index: usize,
}

impl Entry {
    fn id(&self, n: usize) -> usize {
        match self.species {
            Species::X => self.index,
            Species::Y => n + self.index,
        }
    }
}

fn sorted_entries(state: &ParticleState, vel: &VelocityAssignment) -> Vec<Entry> {
    let n = state.n();
    let mut pos_x = state.x().to_vec();
    let mut pos_y = state.y().to_vec();
    for g in &vel.groups {
        pos_x[g.x.clone()].fill(g.position);
        pos_y[g.y.clone()].fill(g.position);
    }
    let mut entries: Vec<Entry> = (0..n)
        .map(|i| Entry {
            pos: pos_x[i],
            units: vel.units_x[i],
            species: Species::X,
            index: i,
        })
        .chain((0..n).map(|j| Entry {
            pos: pos_y[j],
            units: vel.units_y[j],
            species: Species::Y,
            index: j,
        }))
        .collect();
    // co-located particles separate in velocity order
    entries.sort_by(|a, b| {
        a.pos
            .total_cmp(&b.pos)
            .then(a.units.cmp(&b.units))
            .then(a.species.cmp(&b.species))
            .then(a.index.cmp(&b.index))
    });
    entries
}

/// Earliest collision under the current velocities, or `None` when no pair of
/// neighbours is closing.
///
/// Linear trajectories first meet between neighbours in the (virtual) order,
/// so only adjacent pairs are inspected; the time is `gap / closing speed`.
/// Pairs whose times agree within the tie tolerance are merged into a single
/// event, grouped by location.
pub fn next_event(
    state: &ParticleState,
    vel: &VelocityAssignment,
    cfg: &EngineConfig,
) -> Result<Option<Event>> {
    let n = state.n();
    let entries = sorted_entries(state, vel);
    let scale = n as f64;

    let mut candidates: Vec<(f64, usize)> = Vec::new();
    for (k, w) in entries.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let closing = a.units - b.units;
        if closing <= 0 {
            continue;
        }
        if a.species == b.species {
            let (left, right) = (a.index.min(b.index), a.index.max(b.index));
            return Err(Error::SameSpeciesCollision {
                species: a.species.label(),
                left,
                right,
                time: state.t(),
            });
        }
        let gap = b.pos - a.pos;
        if gap <= 0.0 {
            return Err(Error::NotColocated(format!(
                "{}{} and {}{} overlap while closing at t = {}",
                a.species,
                a.index + 1,
                b.species,
                b.index + 1,
                state.t()
            )));
        }
        candidates.push((gap * scale / closing as f64, k));
    }
    let Some(dt_min) = candidates
        .iter()
        .map(|c| c.0)
        .min_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal))
    else {
        return Ok(None);
    };
    let time = state.t() + dt_min;
    let window = cfg.tie_rel_tol * time.abs().max(dt_min);

    // union-find over the tied pairs
    let mut parent: Vec<usize> = (0..2 * n).collect();
    fn find(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    let mut involved = Vec::new();
    for &(dt, k) in &candidates {
        if dt - dt_min <= window {
            let (a, b) = (entries[k].id(n), entries[k + 1].id(n));
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
            involved.push(a);
            involved.push(b);
        }
    }

    let pos_at = |e: &Entry| e.pos + e.units as f64 / scale * dt_min;
    let by_id: Vec<Entry> = {
        let mut v = entries.clone();
        v.sort_by_key(|e| e.id(n));
        v
    };
    involved.sort_unstable();
    involved.dedup();

    let mut roots: Vec<usize> = involved.iter().map(|&id| find(&mut parent, id)).collect();
    roots.sort_unstable();
    roots.dedup();

    let mut contacts = Vec::with_capacity(roots.len());
    let mut taken = vec![false; 2 * n];
    for root in roots {
        let members: Vec<&Entry> = involved
            .iter()
            .filter(|&&id| find(&mut parent, id) == root)
            .map(|&id| &by_id[id])
            .collect();
        // stationary members (matched clusters) pin the location exactly
        let location = members
            .iter()
            .find(|e| e.units == 0)
            .map(|e| e.pos)
            .unwrap_or_else(|| members.iter().map(|e| pos_at(e)).sum::<f64>() / members.len() as f64);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for e in &by_id {
            let id = e.id(n);
            let member = members.iter().any(|m| m.id(n) == id);
            if taken[id] {
                continue;
            }
            if member || (pos_at(e) - location).abs() <= cfg.colocation_tol {
                taken[id] = true;
                match e.species {
                    Species::X => xs.push(e.index),
                    Species::Y => ys.push(e.index),
                }
            }
        }
        contacts.push(Contact {
            location,
            kind: Contact::classify(&xs, &ys),
            x: xs,
            y: ys,
        });
    }
    contacts.sort_by(|a, b| a.location.total_cmp(&b.location));
    Ok(Some(Event { time, contacts }))
}

/// Applies the collision law at the event: participants are placed exactly at
/// the contact point. Which way a pair continues (crossing, sticking or
/// detaching from a cluster) is decided by the velocity rule evaluated on the
/// resulting co-location groups.
pub fn resolve(event: &Event, state: &ParticleState, cfg: &EngineConfig) -> Result<ParticleState> {
    let mut next = state.clone();
    let slack = contact_slack(state, cfg);
    for c in &event.contacts {
        if c.x.len() + c.y.len() < 2 {
            return Err(Error::NotColocated(format!(
                "contact at {} has a single participant",
                c.location
            )));
        }
        if c.x.is_empty() || c.y.is_empty() {
            let (species, idx) = if c.x.is_empty() {
                ('y', &c.y)
            } else {
                ('x', &c.x)
            };
            return Err(Error::SameSpeciesCollision {
                species,
                left: idx[0],
                right: idx[idx.len() - 1],
                time: event.time,
            });
        }
        for (species, indices) in [(Species::X, &c.x), (Species::Y, &c.y)] {
            let positions = match species {
                Species::X => &mut next.x,
                Species::Y => &mut next.y,
            };
            for &i in indices {
                if (positions[i] - c.location).abs() > slack {
                    return Err(Error::NotColocated(format!(
                        "{species}{} is at {} but the contact is at {}",
                        i + 1,
                        positions[i],
                        c.location
                    )));
                }
                positions[i] = c.location;
            }
        }
    }
    next.t = event.time;
    Ok(next)
}

fn contact_slack(state: &ParticleState, cfg: &EngineConfig) -> f64 {
    (1e3 * cfg.colocation_tol).max(1e-9 * (1.0 + state.diameter()))
}

#[cfg(test)]
mod tests {
    use super::super::velocity::velocities;
    use super::*;

    fn setup(x: &[f64], y: &[f64]) -> (ParticleState, VelocityAssignment, EngineConfig) {
        let s = ParticleState::new(x.to_vec(), y.to_vec()).unwrap();
        let cfg = EngineConfig::for_state(&s);
        let v = velocities(&s, cfg.colocation_tol);
        (s, v, cfg)
    }

    #[test]
    fn head_on_pair_sticks_at_midpoint() {
        let (s, v, cfg) = setup(&[0.0], &[1.0]);
        let ev = next_event(&s, &v, &cfg).unwrap().unwrap();
        assert_eq!(ev.time, 0.5);
        assert_eq!(ev.location(), 0.5);
        assert_eq!(ev.kind(), EventKind::Stick);
    }

    #[test]
    fn first_crossing_of_two_blocks() {
        let (s, v, cfg) = setup(&[-2.0, -1.0], &[0.0, 1.0]);
        let ev = next_event(&s, &v, &cfg).unwrap().unwrap();
        assert!((ev.time - 1.0 / 3.0).abs() < 1e-15);
        assert!((ev.location() + 0.5).abs() < 1e-15);
        assert_eq!(ev.kind(), EventKind::Cross);
        assert_eq!(ev.contacts[0].x, vec![1]);
        assert_eq!(ev.contacts[0].y, vec![0]);
    }

    #[test]
    fn paired_state_has_no_event() {
        let (s, v, cfg) = setup(&[0.0, 1.0, 3.0], &[0.0, 1.0, 3.0]);
        assert!(next_event(&s, &v, &cfg).unwrap().is_none());
    }

    #[test]
    fn symmetric_simultaneous_contacts_merge() {
        // two mirror-image head-on pairs far apart collide at the same instant
        let (s, v, cfg) = setup(&[0.0, 10.0], &[1.0, 11.0]);
        let ev = next_event(&s, &v, &cfg).unwrap().unwrap();
        assert_eq!(ev.time, 1.0);
        let locs: Vec<f64> = ev.contacts.iter().map(|c| c.location).collect();
        assert_eq!(locs, vec![0.5, 10.5]);
        assert_eq!(ev.count(EventKind::Stick), 2);
        assert_eq!(ev.kind(), EventKind::Cluster);
    }

    #[test]
    fn resolve_snaps_participants() {
        let (s, v, cfg) = setup(&[0.0], &[1.0]);
        let ev = next_event(&s, &v, &cfg).unwrap().unwrap();
        let moved = s.advanced(&v.vx, &v.vy, ev.time);
        let after = resolve(&ev, &moved, &cfg).unwrap();
        assert_eq!(after.x(), &[0.5]);
        assert_eq!(after.y(), &[0.5]);
    }

    #[test]
    fn resolve_rejects_same_species_contact() {
        let s = ParticleState::new(vec![0.0, 0.0], vec![5.0, 6.0]).unwrap();
        let ev = Event {
            time: 0.0,
            contacts: vec![Contact {
                location: 0.0,
                kind: EventKind::Cluster,
                x: vec![0, 1],
                y: vec![],
            }],
        };
        let cfg = EngineConfig::for_state(&s);
        assert!(matches!(
            resolve(&ev, &s, &cfg),
            Err(Error::SameSpeciesCollision { species: 'x', .. })
        ));
    }
}
