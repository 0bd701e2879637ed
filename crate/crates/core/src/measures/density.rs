use std::path::Path;

use super::cdf::Cdf;
use crate::error::{Error, Result};

const MASS_TOL: f64 = 1e-12;
const BISECTION_TOL: f64 = 1e-12;
const BISECTION_MAX_ITER: usize = 200;

/// A weighted uniform component `weight * uniform(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformComponent {
    pub weight: f64,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DensityKind {
    Uniform { a: f64, b: f64 },
    Mixture(Vec<UniformComponent>),
    /// CDF samples `(x_k, F(x_k))`, linearly interpolated.
    Tabulated { x: Vec<f64>, f: Vec<f64> },
}

/// Absolutely continuous, compactly supported probability density used as
/// initial datum for one species.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialDensity {
    kind: DensityKind,
    hull: (f64, f64),
}

impl InitialDensity {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidDensity(format!("uniform({a}, {b}) needs a < b")));
        }
        Ok(Self {
            kind: DensityKind::Uniform { a, b },
            hull: (a, b),
        })
    }

    pub fn mixture(components: Vec<UniformComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidDensity("empty mixture".into()));
        }
        for c in &components {
            if !(c.a.is_finite() && c.b.is_finite() && c.a < c.b) {
                return Err(Error::InvalidDensity(format!(
                    "mixture component uniform({}, {}) needs a < b",
                    c.a, c.b
                )));
            }
            if !(c.weight.is_finite() && c.weight > 0.0) {
                return Err(Error::InvalidDensity(format!("non-positive weight {}", c.weight)));
            }
        }
        let mass: f64 = components.iter().map(|c| c.weight).sum();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::NotNormalized { mass });
        }
        let lo = components.iter().map(|c| c.a).fold(f64::INFINITY, f64::min);
        let hi = components.iter().map(|c| c.b).fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            kind: DensityKind::Mixture(components),
            hull: (lo, hi),
        })
    }

    /// Tabulated CDF: strictly increasing abscissae, values non-decreasing from
    /// 0 to 1.
    pub fn tabulated(x: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        if x.len() < 2 || x.len() != f.len() {
            return Err(Error::InvalidDensity(
                "tabulated cdf needs at least two (x, F) rows".into(),
            ));
        }
        if x.iter().chain(&f).any(|v| !v.is_finite()) {
            return Err(Error::InvalidDensity("tabulated cdf contains non-finite values".into()));
        }
        if let Some(k) = x.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDensity(format!(
                "tabulated x must be strictly increasing (row {})",
                k + 1
            )));
        }
        if let Some(k) = f.windows(2).position(|w| w[0] > w[1]) {
            return Err(Error::InvalidDensity(format!(
                "tabulated F must be non-decreasing (row {})",
                k + 1
            )));
        }
        if f[0].abs() > MASS_TOL || f.iter().any(|&v| v < -MASS_TOL) {
            return Err(Error::InvalidDensity("tabulated F must start at 0".into()));
        }
        let mass = *f.last().unwrap();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::NotNormalized { mass });
        }
        let first_rise = f.iter().position(|&v| v > 0.0).unwrap_or(1);
        let lo = x[first_rise.saturating_sub(1)];
        let full = f.iter().position(|&v| v >= 1.0 - MASS_TOL).unwrap_or(f.len() - 1);
        let hi = x[full];
        Ok(Self {
            kind: DensityKind::Tabulated { x, f },
            hull: (lo, hi),
        })
    }

    /// Reads a two-column `x F(x)` table; whitespace separated, `#` starts a
    /// comment.
    pub fn from_cdf_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse_cdf_table(&text)
    }

    pub fn parse_cdf_table(text: &str) -> Result<Self> {
        let mut xs = Vec::new();
        let mut fs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<f64> {
                tok.ok_or_else(|| {
                    Error::InvalidDensity(format!("line {}: expected two columns", lineno + 1))
                })?
                .parse::<f64>()
                .map_err(|e| Error::InvalidDensity(format!("line {}: {e}", lineno + 1)))
            };
            let x = parse(cols.next())?;
            let f = parse(cols.next())?;
            if cols.next().is_some() {
                return Err(Error::InvalidDensity(format!(
                    "line {}: expected exactly two columns",
                    lineno + 1
                )));
            }
            xs.push(x);
            fs.push(f);
        }
        Self::tabulated(xs, fs)
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    /// Convex hull of the support.
    pub fn hull(&self) -> (f64, f64) {
        self.hull
    }

    /// Piecewise-linear CDF; exact for every supported kind.
    pub fn cdf(&self) -> Cdf {
        let (knots, values) = match &self.kind {
            DensityKind::Uniform { a, b } => (vec![*a, *b], vec![0.0, 1.0]),
            DensityKind::Mixture(components) => {
                let mut knots: Vec<f64> = components.iter().flat_map(|c| [c.a, c.b]).collect();
                knots.sort_by(f64::total_cmp);
                knots.dedup();
                let values = knots
                    .iter()
                    .map(|&x| {
                        components
                            .iter()
                            .map(|c| c.weight * ((x - c.a) / (c.b - c.a)).clamp(0.0, 1.0))
                            .sum::<f64>()
                    })
                    .collect();
                (knots, values)
            }
            DensityKind::Tabulated { x, f } => {
                let values: Vec<f64> = f.iter().map(|v| v.clamp(0.0, 1.0)).collect();
                (x.clone(), values)
            }
        };
        let mut below = values.clone();
        below[0] = 0.0;
        let mut at = values;
        at[0] = 0.0;
        Cdf::new(knots, below, at).expect("density cdf is valid by construction")
    }

    /// Smallest `x` with `F(x) >= target`.
    fn lower_quantile(&self, cdf: &Cdf, target: f64) -> Result<f64> {
        match self.kind {
            DensityKind::Tabulated { .. } => bisect_lower_quantile(cdf, target, self.hull),
            _ => Ok(invert_piecewise_linear(cdf, target)),
        }
    }

    /// Splits the mass into `n` slabs of mass `1/n` and returns the right end of
    /// each slab, `x_1 < ... < x_n`; the left end of the first slab (the hull
    /// minimum) is not a particle. The last point is the right end of the hull.
    pub fn discretize(&self, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::InvalidDensity("discretization needs N >= 1".into()));
        }
        let cdf = self.cdf();
        let mass = cdf.total();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::NotNormalized { mass });
        }
        let mut out = Vec::with_capacity(n);
        for i in 1..n {
            let target = i as f64 / n as f64;
            out.push(self.lower_quantile(&cdf, target)?);
        }
        out.push(self.hull.1);
        Ok(out)
    }
}

/// Closed-form inversion of a continuous piecewise-linear CDF.
fn invert_piecewise_linear(cdf: &Cdf, target: f64) -> f64 {
    let knots = cdf.knots();
    let values = cdf.values();
    let k = values.partition_point(|&v| v < target);
    if k == 0 {
        return knots[0];
    }
    if k == knots.len() {
        return knots[knots.len() - 1];
    }
    let (x0, x1) = (knots[k - 1], knots[k]);
    let (f0, f1) = (values[k - 1], values[k]);
    if values[k] == target {
        // first knot reaching the target; flat stretches to its left never do
        return x1;
    }
    x0 + (target - f0) / (f1 - f0) * (x1 - x0)
}

fn bisect_lower_quantile(cdf: &Cdf, target: f64, hull: (f64, f64)) -> Result<f64> {
    let (mut lo, mut hi) = hull;
    if cdf.eval(lo) >= target {
        return Ok(lo);
    }
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= BISECTION_TOL {
            return Ok(hi);
        }
        let mid = 0.5 * (lo + hi);
        if cdf.eval(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::BisectionFailed {
        target,
        iterations: BISECTION_MAX_ITER,
    })
}

impl std::fmt::Display for InitialDensity {
    /// Preset notation: `uniform:a,b`, `mix:w*uniform:a,b+...`, or
    /// `cdf:<k points>` for tables.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            DensityKind::Uniform { a, b } => write!(f, "uniform:{a},{b}"),
            DensityKind::Mixture(cs) => {
                f.write_str("mix:")?;
                for (k, c) in cs.iter().enumerate() {
                    if k > 0 {
                        f.write_str("+")?;
                    }
                    write!(f, "{}*uniform:{},{}", c.weight, c.a, c.b)?;
                }
                Ok(())
            }
            DensityKind::Tabulated { x, .. } => write!(f, "cdf:<{} points>", x.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_half() -> InitialDensity {
        InitialDensity::mixture(vec![
            UniformComponent { weight: 0.5, a: 0.0, b: 1.0 },
            UniformComponent { weight: 0.5, a: 2.0, b: 3.0 },
        ])
        .unwrap()
    }

    #[test]
    fn uniform_quantiles() {
        let d = InitialDensity::uniform(0.0, 1.0).unwrap();
        assert_eq!(d.discretize(4).unwrap(), vec![0.25, 0.5, 0.75, 1.0]);
        assert_eq!(d.discretize(1).unwrap(), vec![1.0]);
    }

    /// Independent bisection on the analytic mixture CDF.
    fn mixture_oracle(target: f64) -> f64 {
        let f = |x: f64| 0.5 * x.clamp(0.0, 1.0) + 0.5 * (x - 2.0).clamp(0.0, 1.0);
        let (mut lo, mut hi) = (0.0_f64, 3.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    #[test]
    fn mixture_quantiles_skip_the_gap() {
        let expected: Vec<f64> = (1..=4).map(|i| mixture_oracle(i as f64 / 4.0)).collect();
        for (e, v) in expected.iter().zip([0.5, 1.0, 2.5, 3.0]) {
            assert!((e - v).abs() < 1e-12);
        }
        let got = half_half().discretize(4).unwrap();
        assert_eq!(got, vec![0.5, 1.0, 2.5, 3.0]);
    }

    #[test]
    fn tabulated_bisection_matches_closed_form() {
        let d = InitialDensity::tabulated(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 0.5, 0.5, 1.0]).unwrap();
        let got = d.discretize(4).unwrap();
        let want = half_half().discretize(4).unwrap();
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-12, "{g} vs {w}");
        }
        assert_eq!(d.hull(), (0.0, 3.0));
    }

    #[test]
    fn tabulated_hull_ignores_flat_tails() {
        let d = InitialDensity::tabulated(vec![-5.0, 0.0, 1.0, 4.0], vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(d.hull(), (0.0, 1.0));
        assert_eq!(d.discretize(2).unwrap(), vec![0.5, 1.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            InitialDensity::mixture(vec![UniformComponent { weight: 0.7, a: 0.0, b: 1.0 }]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            InitialDensity::tabulated(vec![0.0, 1.0], vec![0.0, 0.9]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(InitialDensity::tabulated(vec![0.0, 0.0], vec![0.0, 1.0]).is_err());
        assert!(InitialDensity::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 0.8, 0.6]).is_err());
        assert!(InitialDensity::uniform(1.0, 1.0).is_err());
        assert!(InitialDensity::uniform(0.0, 1.0).unwrap().discretize(0).is_err());
    }

    #[test]
    fn bisection_gives_up_on_huge_hulls() {
        let d = InitialDensity::tabulated(vec![0.0, 1e80], vec![0.0, 1.0]).unwrap();
        assert!(matches!(d.discretize(3), Err(Error::BisectionFailed { .. })));
    }

    #[test]
    fn parses_comment_table() {
        let text = "# x F\n0 0\n0.5 0.25 # midpoint\n\n2 1\n";
        let d = InitialDensity::parse_cdf_table(text).unwrap();
        assert_eq!(d.hull(), (0.0, 2.0));
        assert!(InitialDensity::parse_cdf_table("0 0\n1\n").is_err());
        assert!(InitialDensity::parse_cdf_table("0 0\n1 one\n").is_err());
    }
}
