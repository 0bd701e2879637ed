use std::fmt::Write as _;

use crossdrift::diagnostics::{energy, TraceBuilder};
use crossdrift::engine::{run_with, EngineConfig, Moment, Observer, RunOptions, SimulationRecord};
use crossdrift::harness::{
    census_csv, collision_census, convergence_study, ensure_dir, initial_state, write_atomic,
    write_study, StudyConfig,
};
use crossdrift::oracle::{fine_step_integrate, sup_distance};
use crossdrift::{Error, ParticleState, Result};

use super::{CensusArgs, ConvergeArgs, Densities, OracleArgs, Positions, SimulateArgs, Tolerances};

fn build_state(densities: &Densities, n: Option<u64>, positions: &Positions) -> Result<ParticleState> {
    match (&positions.x, &positions.y) {
        (Some(x), Some(y)) => {
            if n.is_some_and(|n| n as usize != x.len()) {
                return Err(Error::InvalidConfig(format!(
                    "--n {} disagrees with {} explicit positions",
                    n.unwrap_or_default(),
                    x.len()
                )));
            }
            ParticleState::new(x.clone(), y.clone())
        }
        _ => {
            let n = n.ok_or_else(|| Error::InvalidConfig("--n or --x/--y is required".into()))?;
            initial_state(&densities.rho.resolve()?, &densities.eta.resolve()?, n as usize)
        }
    }
}

fn study_config(
    densities: &Densities,
    n_list: Vec<usize>,
    horizon: f64,
    tolerances: &Tolerances,
) -> Result<StudyConfig> {
    let mut cfg = StudyConfig::new(densities.rho.resolve()?, densities.eta.resolve()?, n_list, horizon);
    cfg.colocation_rel = tolerances.colocation_rel;
    cfg.tie_rel = tolerances.tie_rel;
    Ok(cfg)
}

fn fmt_time(t: Option<f64>) -> String {
    t.map(|t| format!("{t:?}")).unwrap_or_else(|| "-".into())
}

fn summary(record: &SimulationRecord) -> String {
    let c = record.counts;
    format!(
        "N={} t={:?} events={} cross={} stick={} cluster={} final_energy={:?} t_stationary={}",
        record.n(),
        record.final_state.t(),
        c.total(),
        c.cross,
        c.stick,
        c.cluster,
        energy(&record.final_state).total,
        fmt_time(record.stationary_at)
    )
}

fn sample_times(dt: f64, horizon: f64) -> Result<Vec<f64>> {
    if !horizon.is_finite() {
        return Err(Error::InvalidConfig("--sample needs a finite --t".into()));
    }
    let steps = (horizon / dt + 1e-9).floor() as usize;
    let mut times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    if times.last().is_some_and(|&t| t < horizon) {
        times.push(horizon);
    }
    Ok(times)
}

/// Collects the state at every observer call alongside the diagnostics.
struct Recorder {
    trace: TraceBuilder,
    frames: Option<Vec<ParticleState>>,
}

impl Observer for Recorder {
    fn observe(
        &mut self,
        moment: Moment<'_>,
        state: &ParticleState,
        velocities: &crossdrift::VelocityAssignment,
    ) -> Result<()> {
        self.trace.observe(moment, state, velocities)?;
        if let Some(frames) = &mut self.frames {
            frames.push(state.clone());
        }
        Ok(())
    }
}

fn trajectory_csv(mut frames: Vec<ParticleState>) -> String {
    frames.sort_by(|a, b| a.t().total_cmp(&b.t()));
    frames.dedup_by(|a, b| a.t() == b.t() && a.x() == b.x() && a.y() == b.y());
    let mut s = String::from("t,species,index,position\n");
    for f in &frames {
        for (label, pos) in [("x", f.x()), ("y", f.y())] {
            for (i, p) in pos.iter().enumerate() {
                let _ = writeln!(s, "{:?},{label},{},{p:?}", f.t(), i + 1);
            }
        }
    }
    s
}

pub fn simulate(a: SimulateArgs) -> Result<()> {
    let initial = build_state(&a.densities, a.n, &a.positions)?;
    let options = RunOptions {
        sample_times: match a.sample {
            Some(dt) => sample_times(dt, a.t)?,
            None => Vec::new(),
        },
        config: Some(EngineConfig::relative(
            &initial,
            a.tolerances.colocation_rel,
            a.tolerances.tie_rel,
        )),
        ..Default::default()
    };
    let want_frames = a.out.is_some() && !a.no_trajectory;
    let mut recorder = Recorder {
        trace: TraceBuilder::new(a.m_list.clone()),
        frames: want_frames.then(Vec::new),
    };
    let record = run_with(&initial, a.t, &options, &mut recorder)?;

    if let Some(dir) = &a.out {
        ensure_dir(dir)?;
        let trace = recorder.trace.finish();
        write_atomic(&dir.join("trace.csv"), trace.to_csv().as_bytes())?;
        if let Some(mut frames) = recorder.frames {
            frames.extend(record.samples.iter().cloned());
            write_atomic(&dir.join("trajectory.csv"), trajectory_csv(frames).as_bytes())?;
        }
        write_atomic(&dir.join("config"), simulate_echo(&a, &initial).as_bytes())?;
    }
    println!("{}", summary(&record));
    Ok(())
}

fn simulate_echo(a: &SimulateArgs, initial: &ParticleState) -> String {
    let join = |v: &[f64]| v.iter().map(|p| format!("{p:?}")).collect::<Vec<_>>().join(",");
    let mut s = String::new();
    if a.positions.x.is_some() {
        let _ = writeln!(s, "x={}", join(initial.x()));
        let _ = writeln!(s, "y={}", join(initial.y()));
    } else {
        for (key, d) in [("rho", &a.densities.rho), ("eta", &a.densities.eta)] {
            let text = match d {
                super::DensityArg::Ready(d) => d.to_string(),
                super::DensityArg::CdfFile(p) => format!("cdf:{}", p.display()),
            };
            let _ = writeln!(s, "{key}={text}");
        }
    }
    let _ = writeln!(s, "n={}", initial.n());
    let _ = writeln!(s, "horizon={:?}", a.t);
    if let Some(dt) = a.sample {
        let _ = writeln!(s, "sample={dt:?}");
    }
    let orders: Vec<String> = a.m_list.iter().map(|o| o.to_string()).collect();
    let _ = writeln!(s, "m_list={}", orders.join(","));
    let _ = writeln!(s, "colocation_rel={:?}", a.tolerances.colocation_rel);
    let _ = writeln!(s, "tie_rel={:?}", a.tolerances.tie_rel);
    s
}

pub fn converge(a: ConvergeArgs) -> Result<()> {
    let mut cfg = study_config(&a.densities, a.n_list, a.t, &a.tolerances)?;
    if let Some(times) = a.eval_times {
        cfg.eval_times = times;
    }
    cfg.p = a.p;
    cfg.orders = a.m_list;
    cfg.seed = a.seed;
    cfg.parallel = !a.sequential;
    let out = convergence_study(&cfg)?;
    match &a.out {
        Some(dir) => {
            write_study(dir, &out)?;
        }
        None => print!("{}", out.rates.to_csv()),
    }

    let events: usize = out.runs.iter().map(|r| r.record.counts.total()).sum();
    let coupling_ok = out.coupling.iter().all(|c| c.holds());
    let lipschitz_ok = out.lipschitz.iter().all(|c| c.holds());
    let last = out.runs.last().map(|r| &r.record);
    let finest = last.map(|r| r.n()).unwrap_or_default();
    let final_energy = last.map(|r| energy(&r.final_state).total).unwrap_or(f64::NAN);
    println!(
        "counts={} events={events} finest_N={finest} final_energy={final_energy:?} t_stationary={} coupling_bound={} lipschitz={}",
        cfg.n_list.len(),
        fmt_time(last.and_then(|r| r.stationary_at)),
        if coupling_ok { "ok" } else { "violated" },
        if lipschitz_ok { "ok" } else { "violated" },
    );
    Ok(())
}

pub fn census(a: CensusArgs) -> Result<()> {
    let mut cfg = study_config(&a.densities, a.n_list, 0.0, &a.tolerances)?;
    cfg.eval_times = vec![0.0];
    let rows = collision_census(&cfg)?;
    let csv = census_csv(&rows);
    match &a.out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                ensure_dir(dir)?;
            }
            write_atomic(path, csv.as_bytes())?;
        }
        None => print!("{csv}"),
    }
    let events: usize = rows.iter().map(|r| r.events).sum();
    let latest = rows.iter().filter_map(|r| r.t_stationary).fold(None, |m: Option<f64>, t| {
        Some(m.map_or(t, |m| m.max(t)))
    });
    println!(
        "counts={} events={events} max_events_over_bound={:.4} t_stationary_max={}",
        rows.len(),
        rows.iter()
            .map(|r| r.events as f64 / (r.n * (r.n + 1)) as f64)
            .fold(0.0, f64::max),
        fmt_time(latest)
    );
    Ok(())
}

pub fn oracle_compare(a: OracleArgs) -> Result<()> {
    let initial = build_state(&a.densities, a.n, &a.positions)?;
    let steps = (a.t / a.dt).ceil() as u64;
    let stride = (steps / a.points).max(1) as usize;
    let trajectory = fine_step_integrate(&initial, a.delta, a.dt, a.t, stride)?;
    let distance = sup_distance(&initial, &trajectory)?;
    let record = run_with(&initial, a.t, &RunOptions::default(), &mut ())?;
    println!("{} delta={:?} sup_distance={distance:?}", summary(&record), a.delta);
    Ok(())
}
