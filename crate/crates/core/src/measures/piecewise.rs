use super::cdf::Cdf;
use crate::error::{Error, Result};

/// Piecewise-constant density: height `heights[i]` on `[z_i, z_{i+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseDensity {
    breakpoints: Vec<f64>,
    heights: Vec<f64>,
}

impl PiecewiseDensity {
    pub fn new(breakpoints: Vec<f64>, heights: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 || heights.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidMeasure(
                "piecewise density needs K+1 breakpoints for K heights, K >= 1".into(),
            ));
        }
        check_strictly_increasing(&breakpoints)?;
        if heights.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(Error::InvalidMeasure("heights must be positive and finite".into()));
        }
        Ok(Self { breakpoints, heights })
    }

    /// Lagrangian reconstruction from sorted particle positions: each gap
    /// `[z_i, z_{i+1})` gets height `1 / (n (z_{i+1} - z_i))`, i.e. mass `1/n`.
    ///
    /// With `n` equal to the number of gaps the result is a probability
    /// density; see [`PiecewiseDensity::reconstruct`].
    pub fn from_positions(positions: &[f64], n: usize) -> Result<Self> {
        if positions.len() < 2 {
            return Err(Error::InvalidMeasure(
                "reconstruction needs at least two particles".into(),
            ));
        }
        if n == 0 {
            return Err(Error::InvalidMeasure("mass normalization n must be positive".into()));
        }
        check_strictly_increasing(positions)?;
        let scale = n as f64;
        let heights = positions
            .windows(2)
            .map(|w| 1.0 / (scale * (w[1] - w[0])))
            .collect();
        Ok(Self {
            breakpoints: positions.to_vec(),
            heights,
        })
    }

    /// Unit-mass reconstruction over the `len - 1` gaps of the given particles.
    pub fn reconstruct(positions: &[f64]) -> Result<Self> {
        Self::from_positions(positions, positions.len().saturating_sub(1).max(1))
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// `(z_i, z_{i+1}, height)` for every cell.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.heights)
            .map(|(w, &h)| (w[0], w[1], h))
    }

    pub fn mass(&self) -> f64 {
        self.cells().map(|(a, b, h)| h * (b - a)).sum()
    }

    pub fn cdf(&self) -> Cdf {
        let mut values = Vec::with_capacity(self.breakpoints.len());
        let mut acc = 0.0;
        values.push(0.0);
        for (a, b, h) in self.cells() {
            acc += h * (b - a);
            values.push(acc);
        }
        Cdf::new(self.breakpoints.clone(), values.clone(), values)
            .expect("piecewise cdf is valid by construction")
    }
}

/// Uniformly weighted atoms `(1/N) sum delta_{a_k}`; coincident atoms allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    atoms: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(atoms: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("empirical measure needs at least one atom".into()));
        }
        if atoms.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidMeasure("atoms must be finite".into()));
        }
        if let Some(index) = atoms.windows(2).position(|w| w[0] > w[1]) {
            return Err(Error::UnsortedAtoms { index: index + 1 });
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn cdf(&self) -> Cdf {
        let n = self.atoms.len() as f64;
        let mut knots: Vec<f64> = Vec::new();
        let mut below = Vec::new();
        let mut at = Vec::new();
        let mut count = 0usize;
        for &a in &self.atoms {
            if knots.last() == Some(&a) {
                count += 1;
                *at.last_mut().unwrap() = count as f64 / n;
            } else {
                below.push(count as f64 / n);
                count += 1;
                knots.push(a);
                at.push(count as f64 / n);
            }
        }
        Cdf::new(knots, below, at).expect("empirical cdf is valid by construction")
    }
}

fn check_strictly_increasing(values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidMeasure("positions must be finite".into()));
    }
    if let Some(i) = values.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::DuplicatePosition {
            index: i + 1,
            left: values[i],
            right: values[i + 1],
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn heights_follow_gap_formula() {
        let d = PiecewiseDensity::from_positions(&[0.0, 0.5, 1.0], 3).unwrap();
        assert_eq!(d.breakpoints(), &[0.0, 0.5, 1.0]);
        for h in d.heights() {
            assert!(close(*h, 2.0 / 3.0));
        }
        let d = PiecewiseDensity::from_positions(&[0.0, 1.0], 2).unwrap();
        assert_eq!(d.heights(), &[0.5]);
        let d = PiecewiseDensity::from_positions(&[0.0, 0.1, 1.0], 3).unwrap();
        assert!(close(d.heights()[0], 1.0 / (3.0 * 0.1)));
        assert!(close(d.heights()[1], 1.0 / (3.0 * 0.9)));
        assert!(close(d.heights()[0], 3.333_333_333_333_333));
        assert!(close(d.heights()[1], 0.370_370_370_370_370_4));
    }

    #[test]
    fn reconstruction_has_unit_mass() {
        let d = PiecewiseDensity::reconstruct(&[-1.0, 0.25, 0.3, 4.0]).unwrap();
        assert!(close(d.mass(), 1.0));
    }

    #[test]
    fn duplicates_are_rejected() {
        assert!(matches!(
            PiecewiseDensity::from_positions(&[0.0, 1.0, 1.0], 3),
            Err(Error::DuplicatePosition { index: 2, .. })
        ));
    }

    #[test]
    fn cdf_integrates_heights() {
        let d = PiecewiseDensity::from_positions(&[0.0, 0.5, 1.0], 3).unwrap();
        let f = d.cdf();
        // 2/3 * 0.5 + 2/3 * 0.25
        assert!(close(f.eval(0.75), 0.5));
        let u = PiecewiseDensity::new(vec![0.0, 1.0], vec![1.0]).unwrap();
        for x in [0.0, 0.3, 0.9, 1.0] {
            assert!(close(u.cdf().eval(x), x));
        }
    }

    #[test]
    fn empirical_cdf_is_a_staircase() {
        let e = EmpiricalMeasure::new(vec![0.0, 1.0]).unwrap();
        let f = e.cdf();
        assert_eq!(f.eval(-0.1), 0.0);
        assert_eq!(f.eval(0.0), 0.5);
        assert_eq!(f.eval(0.99), 0.5);
        assert_eq!(f.eval(1.0), 1.0);
        let e = EmpiricalMeasure::new(vec![0.0, 0.0, 2.0]).unwrap();
        assert!(close(e.cdf().eval(0.0), 2.0 / 3.0));
        assert!(EmpiricalMeasure::new(vec![1.0, 0.0]).is_err());
    }
}
