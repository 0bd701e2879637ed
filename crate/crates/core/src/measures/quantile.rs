use super::cdf::Cdf;

/// One affine piece of a quantile function: on `[s0, s1)` the map runs
/// linearly from `x0` to `x1`. Atoms give flat pieces (`x0 == x1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileSegment {
    pub s0: f64,
    pub s1: f64,
    pub x0: f64,
    pub x1: f64,
}

impl QuantileSegment {
    pub fn slope(&self) -> f64 {
        (self.x1 - self.x0) / (self.s1 - self.s0)
    }

    /// Affine formula of this piece, valid (as a limit) on the closed interval.
    pub fn at(&self, s: f64) -> f64 {
        if s <= self.s0 {
            return self.x0;
        }
        if s >= self.s1 {
            return self.x1;
        }
        self.x0 + (self.x1 - self.x0) * ((s - self.s0) / (self.s1 - self.s0))
    }
}

/// Pseudo-inverse `X(s) = inf { x : F(x) > s }` of a cumulative distribution
/// function, as a non-decreasing piecewise-affine map on `[0, mass]`.
///
/// Consecutive segments share their `s` boundary; a jump of `X` between
/// segments encodes a gap in the support.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileFunction {
    segments: Vec<QuantileSegment>,
}

impl QuantileFunction {
    pub fn from_cdf(cdf: &Cdf) -> Self {
        let knots = cdf.knots();
        let below = cdf.left_limits();
        let at = cdf.values();
        let mut segments = Vec::with_capacity(2 * knots.len());
        for k in 0..knots.len() {
            if at[k] > below[k] {
                segments.push(QuantileSegment {
                    s0: below[k],
                    s1: at[k],
                    x0: knots[k],
                    x1: knots[k],
                });
            }
            if k + 1 < knots.len() {
                let (f0, f1) = cdf.interval_ends(k);
                if f1 > f0 {
                    segments.push(QuantileSegment {
                        s0: f0,
                        s1: f1,
                        x0: knots[k],
                        x1: knots[k + 1],
                    });
                }
            }
        }
        Self { segments }
    }

    pub fn segments(&self) -> &[QuantileSegment] {
        &self.segments
    }

    /// Total mass covered, i.e. the right end of the `s` domain.
    pub fn mass(&self) -> f64 {
        self.segments.last().map_or(0.0, |seg| seg.s1)
    }

    /// Index of the segment containing `s` (right-continuous convention).
    pub(crate) fn segment_index(&self, s: f64) -> usize {
        let idx = self.segments.partition_point(|seg| seg.s1 <= s);
        idx.min(self.segments.len().saturating_sub(1))
    }

    /// Right-continuous evaluation. Values of `s` beyond the mass return the
    /// right end of the support.
    pub fn eval(&self, s: f64) -> f64 {
        if self.segments.is_empty() {
            return f64::NAN;
        }
        let seg = &self.segments[self.segment_index(s)];
        seg.at(s)
    }

    /// Rebuilds `F(x) = |{ s in [0, mass] : X(s) <= x }|` from the quantile map.
    pub fn cdf_at(&self, x: f64) -> f64 {
        let mut measure = 0.0;
        for seg in &self.segments {
            if seg.x1 <= x {
                measure += seg.s1 - seg.s0;
            } else if seg.x0 <= x {
                // rising piece crossing x; flat pieces are handled above
                let frac = (x - seg.x0) / (seg.x1 - seg.x0);
                measure += frac * (seg.s1 - seg.s0);
            } else {
                break;
            }
        }
        measure
    }

    /// Sorted union of all segment boundaries in `s`.
    pub(crate) fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.segments
            .iter()
            .map(|seg| seg.s0)
            .chain(self.segments.last().map(|seg| seg.s1))
    }
}
