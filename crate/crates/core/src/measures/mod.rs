//! One-dimensional probability measures: initial densities, piecewise-constant
//! reconstructions and empirical measures, with their distribution functions,
//! pseudo-inverses and Wasserstein distances.
//!
//! In one dimension optimal transport is monotone, so `W_p` reduces to an
//! `L^p` distance between quantile functions. Every measure here has a
//! piecewise-affine quantile function, which makes the distances exact up to
//! floating rounding for `p` in {1, 2}.

mod cdf;
mod density;
mod piecewise;
mod quantile;
mod wasserstein;

pub use cdf::Cdf;
pub use density::{DensityKind, InitialDensity, UniformComponent};
pub use piecewise::{EmpiricalMeasure, PiecewiseDensity};
pub use quantile::{QuantileFunction, QuantileSegment};
pub use wasserstein::{cdf_l1_distance, quantile_distance, w1_via_cdf, wasserstein_p};

/// A compactly supported measure with an exactly representable CDF.
pub trait Measure {
    fn cdf(&self) -> Cdf;

    fn quantile(&self) -> QuantileFunction {
        QuantileFunction::from_cdf(&self.cdf())
    }
}

impl Measure for InitialDensity {
    fn cdf(&self) -> Cdf {
        InitialDensity::cdf(self)
    }
}

impl Measure for PiecewiseDensity {
    fn cdf(&self) -> Cdf {
        PiecewiseDensity::cdf(self)
    }
}

impl Measure for EmpiricalMeasure {
    fn cdf(&self) -> Cdf {
        EmpiricalMeasure::cdf(self)
    }
}

impl Measure for Cdf {
    fn cdf(&self) -> Cdf {
        self.clone()
    }
}

/// Free-function form of [`Measure::cdf`].
pub fn cdf<M: Measure + ?Sized>(measure: &M) -> Cdf {
    measure.cdf()
}

/// Free-function form of [`QuantileFunction::from_cdf`].
pub fn pseudo_inverse(cdf: &Cdf) -> QuantileFunction {
    QuantileFunction::from_cdf(cdf)
}
