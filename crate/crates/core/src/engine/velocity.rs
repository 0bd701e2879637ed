use std::ops::Range;

use super::state::{ParticleState, Species};

/// Particles of both species sitting at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ColocationGroup {
    pub position: f64,
    pub x: Range<usize>,
    pub y: Range<usize>,
}

impl ColocationGroup {
    /// Indices present in both species; these particles never move again.
    pub fn matched(&self) -> Range<usize> {
        let lo = self.x.start.max(self.y.start);
        let hi = self.x.end.min(self.y.end);
        lo..hi.max(lo)
    }

    pub fn is_mixed(&self) -> bool {
        !self.x.is_empty() && !self.y.is_empty()
    }

    pub fn len(&self) -> usize {
        self.x.len() + self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self, species: Species) -> &Range<usize> {
        match species {
            Species::X => &self.x,
            Species::Y => &self.y,
        }
    }
}

/// Piecewise-constant velocities valid until the next collision.
///
/// Velocities are stored as integer units `v * N`: with equal masses every
/// moving particle has an odd unit count in `[-(2N-1), 2N-1]` and matched
/// cluster members have zero.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityAssignment {
    pub vx: Vec<f64>,
    pub vy: Vec<f64>,
    pub units_x: Vec<i64>,
    pub units_y: Vec<i64>,
    pub valid_until: f64,
    /// Co-location groups with at least two particles.
    pub groups: Vec<ColocationGroup>,
}

impl VelocityAssignment {
    pub fn n(&self) -> usize {
        self.vx.len()
    }

    pub fn units(&self, species: Species) -> &[i64] {
        match species {
            Species::X => &self.units_x,
            Species::Y => &self.units_y,
        }
    }

    pub fn velocity(&self, species: Species, index: usize) -> f64 {
        match species {
            Species::X => self.vx[index],
            Species::Y => self.vy[index],
        }
    }

    /// `sum(v_x + v_y)` in units of `1/N`; zero for every valid assignment.
    pub fn momentum_units(&self) -> i64 {
        self.units_x.iter().chain(&self.units_y).sum()
    }

    /// `||v||_w^2 = (1/N) sum (v_x^2 + v_y^2)`, the energy dissipation rate.
    pub fn dissipation_rate(&self) -> f64 {
        let n = self.n() as f64;
        self.vx.iter().chain(&self.vy).map(|v| v * v).sum::<f64>() / n
    }

    pub fn max_speed(&self) -> f64 {
        self.vx.iter().chain(&self.vy).fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_stationary(&self) -> bool {
        self.units_x.iter().chain(&self.units_y).all(|&u| u == 0)
    }
}

/// Velocities of the gradient flow at `state`.
///
/// Every particle that is not a matched member of a mixed cluster moves with
/// `v N = (i - 1) - (N - i) - L + (N - L) = 2i - 1 - 2L` (1-based `i`), where `L`
/// counts the opposite species on its left. Inside a co-location group the
/// particles are first displaced infinitesimally: excess particles of the
/// lower-indexed species detach to the left, excess particles of the
/// higher-indexed species detach to the right, and the common indices stay
/// put. `L` is then read off this virtual ordering, which reproduces the
/// closed-form detachment speeds of an initial cluster. A one-species group
/// scatters in index order.
///
/// Positions closer than `tol` form one group. Runs in `O(N)` on sorted input.
pub fn velocities(state: &ParticleState, tol: f64) -> VelocityAssignment {
    let n = state.n();
    let (x, y) = (state.x(), state.y());
    let mut units_x = vec![0i64; n];
    let mut units_y = vec![0i64; n];
    let mut groups = Vec::new();

    let (mut i, mut j) = (0usize, 0usize);
    while i < n || j < n {
        let anchor = match (x.get(i), y.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        let mut i2 = i;
        while i2 < n && x[i2] - anchor <= tol {
            i2 += 1;
        }
        let mut j2 = j;
        while j2 < n && y[j2] - anchor <= tol {
            j2 += 1;
        }
        for k in i..i2 {
            units_x[k] = detach_units(k, j, j2);
        }
        for k in j..j2 {
            units_y[k] = detach_units(k, i, i2);
        }
        if (i2 - i) + (j2 - j) > 1 {
            groups.push(ColocationGroup {
                position: anchor,
                x: i..i2,
                y: j..j2,
            });
        }
        i = i2;
        j = j2;
    }

    let scale = n as f64;
    VelocityAssignment {
        vx: units_x.iter().map(|&u| u as f64 / scale).collect(),
        vy: units_y.iter().map(|&u| u as f64 / scale).collect(),
        units_x,
        units_y,
        valid_until: f64::INFINITY,
        groups,
    }
}

/// Units `v N` of particle `k` (0-based) whose group holds opposite-species
/// indices `[lo, hi)`; `lo` of them lie strictly to the left of the group.
fn detach_units(k: usize, lo: usize, hi: usize) -> i64 {
    let k = k as i64;
    if k < lo as i64 {
        2 * k + 1 - 2 * lo as i64
    } else if k >= hi as i64 {
        2 * k + 1 - 2 * hi as i64
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(x: &[f64], y: &[f64]) -> ParticleState {
        ParticleState::new(x.to_vec(), y.to_vec()).unwrap()
    }

    /// Direct evaluation of the ODE right-hand side for separated particles.
    fn direct_rhs(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = x.len() as f64;
        let sign = |r: f64| if r > 0.0 { 1.0 } else if r < 0.0 { -1.0 } else { 0.0 };
        let vx = x
            .iter()
            .map(|&xi| {
                x.iter().map(|&xk| sign(xi - xk)).sum::<f64>() / n
                    - y.iter().map(|&yk| sign(xi - yk)).sum::<f64>() / n
            })
            .collect();
        let vy = y
            .iter()
            .map(|&yj| {
                y.iter().map(|&yk| sign(yj - yk)).sum::<f64>() / n
                    - x.iter().map(|&xk| sign(yj - xk)).sum::<f64>() / n
            })
            .collect();
        (vx, vy)
    }

    #[test]
    fn separated_pair_of_blocks() {
        let s = state(&[0.0, 1.0], &[2.0, 3.0]);
        let v = velocities(&s, 0.0);
        assert_eq!(v.vx, vec![0.5, 1.5]);
        assert_eq!(v.vy, vec![-1.5, -0.5]);
        let (dx, dy) = direct_rhs(s.x(), s.y());
        assert_eq!(v.vx, dx);
        assert_eq!(v.vy, dy);
        assert!(v.groups.is_empty());
    }

    #[test]
    fn mixed_cluster_detaches() {
        // x = (0, 0, 1, 2), y = (-1, 0, 0, 3); group at 0 holds x_{1,2}, y_{2,3}
        let v = velocities(&state(&[0.0, 0.0, 1.0, 2.0], &[-1.0, 0.0, 0.0, 3.0]), 0.0);
        assert_eq!(v.groups.len(), 1);
        let g = &v.groups[0];
        assert_eq!((g.x.clone(), g.y.clone()), (0..2, 1..3));
        assert_eq!(g.matched(), 1..2);
        assert_eq!(v.vx[1], 0.0);
        assert_eq!(v.vy[1], 0.0);
        assert_eq!(v.vx[0], -0.25);
        assert_eq!(v.vy[2], 0.25);
        assert_eq!(v.momentum_units(), 0);
    }

    #[test]
    fn single_pair_on_top_is_frozen() {
        let v = velocities(&state(&[0.0], &[0.0]), 0.0);
        assert!(v.is_stationary());
    }

    #[test]
    fn one_species_group_scatters() {
        let v = velocities(&state(&[1.0, 1.0, 1.0], &[0.0, 5.0, 6.0]), 0.0);
        assert!(v.units_x.windows(2).all(|w| w[1] - w[0] == 2));
        assert_eq!(v.momentum_units(), 0);
    }

    #[test]
    fn tolerance_merges_nearby_particles() {
        let v = velocities(&state(&[0.0], &[1e-15]), 1e-12);
        assert!(v.is_stationary());
        assert_eq!(v.groups.len(), 1);
    }
}
