use crate::error::{Error, Result};

/// Cumulative distribution function of a compactly supported measure on the line.
///
/// Stored as knots `x_0 < ... < x_K` with the left limit `F(x_k-)` and the value
/// `F(x_k)` at every knot; between knots the function is affine from `F(x_k)` to
/// `F(x_{k+1}-)`. Jumps encode atoms, rising segments encode densities.
#[derive(Debug, Clone, PartialEq)]
pub struct Cdf {
    knots: Vec<f64>,
    below: Vec<f64>,
    at: Vec<f64>,
}

impl Cdf {
    pub fn new(knots: Vec<f64>, below: Vec<f64>, at: Vec<f64>) -> Result<Self> {
        if knots.is_empty() || knots.len() != below.len() || knots.len() != at.len() {
            return Err(Error::InvalidMeasure("cdf arrays must be non-empty and equally long".into()));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidMeasure("cdf knots must be finite".into()));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMeasure("cdf knots must be strictly increasing".into()));
        }
        if below[0] != 0.0 {
            return Err(Error::InvalidMeasure("cdf must vanish left of the first knot".into()));
        }
        let mut prev = 0.0;
        for (b, a) in below.iter().zip(&at) {
            if *b < prev || *a < *b {
                return Err(Error::InvalidMeasure("cdf must be non-decreasing".into()));
            }
            prev = *a;
        }
        Ok(Self { knots, below, at })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// `F(x_k-)` for every knot.
    pub fn left_limits(&self) -> &[f64] {
        &self.below
    }

    /// `F(x_k)` for every knot.
    pub fn values(&self) -> &[f64] {
        &self.at
    }

    /// Total mass, `F(+inf)`.
    pub fn total(&self) -> f64 {
        *self.at.last().expect("non-empty")
    }

    /// Right-continuous evaluation `F(x) = mu((-inf, x])`.
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.knots.partition_point(|&knot| knot <= x);
        if k == 0 {
            return 0.0;
        }
        let k = k - 1;
        if k + 1 == self.knots.len() || x == self.knots[k] {
            return self.at[k];
        }
        let (x0, x1) = (self.knots[k], self.knots[k + 1]);
        let (f0, f1) = (self.at[k], self.below[k + 1]);
        f0 + (f1 - f0) * (x - x0) / (x1 - x0)
    }

    /// Values of `F` at the two ends of the open interval `(x_k, x_{k+1})`,
    /// taken as limits from inside.
    pub(crate) fn interval_ends(&self, k: usize) -> (f64, f64) {
        (self.at[k], self.below[k + 1])
    }
}
