use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Species {
    X,
    Y,
}

impl Species {
    pub fn label(self) -> char {
        match self {
            Species::X => 'x',
            Species::Y => 'y',
        }
    }

    pub fn other(self) -> Self {
        match self {
            Species::X => Species::Y,
            Species::Y => Species::X,
        }
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Positions of both species at one instant. Each species holds `N` particles
/// of mass `1/N`, sorted in non-decreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    pub(crate) t: f64,
    pub(crate) x: Vec<f64>,
    pub(crate) y: Vec<f64>,
}

impl ParticleState {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        Self::at_time(0.0, x, y)
    }

    pub fn at_time(t: f64, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidState(format!("time must be finite and >= 0, got {t}")));
        }
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::InvalidState(format!(
                "both species need the same positive count, got {} and {}",
                x.len(),
                y.len()
            )));
        }
        for (species, v) in [(Species::X, &x), (Species::Y, &y)] {
            if v.iter().any(|p| !p.is_finite()) {
                return Err(Error::InvalidState(format!("{species} positions must be finite")));
            }
            if let Some(k) = v.windows(2).position(|w| w[0] > w[1]) {
                return Err(Error::InvalidState(format!(
                    "{species} positions are not sorted at index {}",
                    k + 1
                )));
            }
        }
        Ok(Self { t, x, y })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn positions(&self, species: Species) -> &[f64] {
        match species {
            Species::X => &self.x,
            Species::Y => &self.y,
        }
    }

    /// Particles per species.
    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// `[min(x_1, y_1), max(x_N, y_N)]`.
    pub fn support(&self) -> (f64, f64) {
        let n = self.n();
        (self.x[0].min(self.y[0]), self.x[n - 1].max(self.y[n - 1]))
    }

    pub fn diameter(&self) -> f64 {
        let (a, b) = self.support();
        b - a
    }

    /// Mean position of all `2N` particles.
    pub fn barycenter(&self) -> f64 {
        let sum: f64 = self.x.iter().chain(&self.y).sum();
        sum / (2 * self.n()) as f64
    }

    /// Smallest gap between consecutive particles of the same species;
    /// `+inf` when `N = 1`.
    pub fn min_same_species_gap(&self) -> f64 {
        self.x
            .windows(2)
            .chain(self.y.windows(2))
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_paired(&self) -> bool {
        self.x == self.y
    }

    /// Free flight with the given velocities up to time `t`.
    pub(crate) fn advanced(&self, vx: &[f64], vy: &[f64], t: f64) -> Self {
        let dt = t - self.t;
        let mv = |p: &[f64], v: &[f64]| p.iter().zip(v).map(|(p, v)| p + v * dt).collect();
        Self {
            t,
            x: mv(&self.x, vx),
            y: mv(&self.y, vy),
        }
    }
}
