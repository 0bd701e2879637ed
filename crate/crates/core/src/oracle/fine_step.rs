use crate::engine::{run_with, ParticleState, RunOptions};
use crate::error::{Error, Result};

/// `sign_delta(r) = r / delta` on `[-delta, delta]`, `sign(r)` outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizedKernel {
    delta: f64,
}

impl RegularizedKernel {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::OracleParameter(format!(
                "smoothing width must be positive, got {delta}"
            )));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    #[inline]
    pub fn sign(&self, r: f64) -> f64 {
        if r > self.delta {
            1.0
        } else if r < -self.delta {
            -1.0
        } else {
            r / self.delta
        }
    }

    /// Right-hand side of the regularized system, `O(N^2)`.
    pub fn rhs(&self, x: &[f64], y: &[f64], vx: &mut [f64], vy: &mut [f64]) {
        let inv = 1.0 / x.len() as f64;
        for (i, &xi) in x.iter().enumerate() {
            let mut s = 0.0;
            for &xk in x {
                s += self.sign(xi - xk);
            }
            for &yk in y {
                s -= self.sign(xi - yk);
            }
            vx[i] = s * inv;
        }
        for (j, &yj) in y.iter().enumerate() {
            let mut s = 0.0;
            for &yk in y {
                s += self.sign(yj - yk);
            }
            for &xk in x {
                s -= self.sign(yj - xk);
            }
            vy[j] = s * inv;
        }
    }
}

/// Velocities of the regularized system at `state`.
pub fn regularized_rhs(state: &ParticleState, delta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let kernel = RegularizedKernel::new(delta)?;
    let n = state.n();
    let (mut vx, mut vy) = (vec![0.0; n], vec![0.0; n]);
    kernel.rhs(state.x(), state.y(), &mut vx, &mut vy);
    Ok((vx, vy))
}

/// Positions at one time. Labels follow the particles, so the arrays need not
/// stay sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl OracleSample {
    /// Largest position difference to `state`, matching labels.
    pub fn distance_to(&self, state: &ParticleState) -> f64 {
        self.x
            .iter()
            .zip(state.x())
            .chain(self.y.iter().zip(state.y()))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleTrajectory {
    pub delta: f64,
    pub dt: f64,
    pub samples: Vec<OracleSample>,
}

impl OracleTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }
}

/// Classical RK4 on the regularized system with a fixed step `dt <= delta/4`.
/// Every `stride`-th step is kept, plus the first and the last.
pub fn fine_step_integrate(
    initial: &ParticleState,
    delta: f64,
    dt: f64,
    horizon: f64,
    stride: usize,
) -> Result<OracleTrajectory> {
    let kernel = RegularizedKernel::new(delta)?;
    if !(dt > 0.0) || dt > delta / 4.0 {
        return Err(Error::OracleParameter(format!(
            "step {dt} must lie in (0, delta/4] with delta = {delta}"
        )));
    }
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(Error::OracleParameter(format!("horizon must be finite and >= 0, got {horizon}")));
    }
    let stride = stride.max(1);
    let n = initial.n();
    let steps = (horizon / dt).ceil() as usize;

    let mut x = initial.x().to_vec();
    let mut y = initial.y().to_vec();
    let mut samples = vec![OracleSample {
        t: initial.t(),
        x: x.clone(),
        y: y.clone(),
    }];
    let buf = || vec![0.0; n];
    let (mut k1x, mut k1y, mut k2x, mut k2y) = (buf(), buf(), buf(), buf());
    let (mut k3x, mut k3y, mut k4x, mut k4y) = (buf(), buf(), buf(), buf());
    let (mut tx, mut ty) = (buf(), buf());

    for step in 1..=steps {
        let t0 = initial.t() + (step - 1) as f64 * dt;
        let t1 = (initial.t() + step as f64 * dt).min(initial.t() + horizon);
        let h = t1 - t0;
        kernel.rhs(&x, &y, &mut k1x, &mut k1y);
        stage(&x, &y, &k1x, &k1y, 0.5 * h, &mut tx, &mut ty);
        kernel.rhs(&tx, &ty, &mut k2x, &mut k2y);
        stage(&x, &y, &k2x, &k2y, 0.5 * h, &mut tx, &mut ty);
        kernel.rhs(&tx, &ty, &mut k3x, &mut k3y);
        stage(&x, &y, &k3x, &k3y, h, &mut tx, &mut ty);
        kernel.rhs(&tx, &ty, &mut k4x, &mut k4y);
        for i in 0..n {
            x[i] += h / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            y[i] += h / 6.0 * (k1y[i] + 2.0 * k2y[i] + 2.0 * k3y[i] + k4y[i]);
        }
        if step % stride == 0 || step == steps {
            samples.push(OracleSample {
                t: t1,
                x: x.clone(),
                y: y.clone(),
            });
        }
    }
    Ok(OracleTrajectory { delta, dt, samples })
}

fn stage(x: &[f64], y: &[f64], kx: &[f64], ky: &[f64], h: f64, tx: &mut [f64], ty: &mut [f64]) {
    for i in 0..x.len() {
        tx[i] = x[i] + h * kx[i];
        ty[i] = y[i] + h * ky[i];
    }
}

/// Sup-norm distance between the oracle trajectory and the exact engine,
/// evaluated at every oracle sample.
pub fn sup_distance(initial: &ParticleState, trajectory: &OracleTrajectory) -> Result<f64> {
    let times = trajectory.times();
    let horizon = times.last().copied().unwrap_or(initial.t());
    let options = RunOptions {
        sample_times: times,
        ..Default::default()
    };
    let record = run_with(initial, horizon, &options, &mut ())?;
    Ok(trajectory
        .samples
        .iter()
        .zip(&record.samples)
        .map(|(o, e)| o.distance_to(e))
        .fold(0.0, f64::max))
}
