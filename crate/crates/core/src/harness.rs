//! Convergence studies over a list of particle counts.
//!
//! The continuum limit has no closed form, so convergence is measured as
//! self-convergence: the distance between the reconstructions for `N` and
//! for the next count in the list.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::diagnostics::{traced_run, DiagnosticsTrace, LmOrder};
use crate::engine::{EngineConfig, ParticleState, RunOptions, SimulationRecord, Species};
use crate::error::{Error, Result};
use crate::measures::{wasserstein_p, EmpiricalMeasure, InitialDensity, PiecewiseDensity};

/// Slack added to the speed bound in the Lipschitz check.
pub const LIPSCHITZ_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub rho: InitialDensity,
    pub eta: InitialDensity,
    /// Strictly increasing particle counts, typically doubling.
    pub n_list: Vec<usize>,
    pub horizon: f64,
    /// Sorted times in `[0, horizon]`.
    pub eval_times: Vec<f64>,
    /// Wasserstein order.
    pub p: f64,
    pub orders: Vec<LmOrder>,
    /// Echoed in the study directory; the presets are deterministic.
    pub seed: u64,
    /// Run the particle counts on the rayon pool.
    pub parallel: bool,
    /// Co-location tolerance relative to the initial support diameter.
    pub colocation_rel: f64,
    /// Relative window within which collision times are simultaneous.
    pub tie_rel: f64,
}

impl StudyConfig {
    pub fn new(rho: InitialDensity, eta: InitialDensity, n_list: Vec<usize>, horizon: f64) -> Self {
        let mut eval_times = vec![0.0];
        if horizon > 0.0 {
            eval_times.push(horizon);
        }
        Self {
            rho,
            eta,
            n_list,
            horizon,
            eval_times,
            p: 1.0,
            orders: LmOrder::defaults(),
            seed: 0,
            parallel: true,
            colocation_rel: EngineConfig::COLOCATION_REL,
            tie_rel: EngineConfig::TIE_REL,
        }
    }

    fn run_options(&self, initial: &ParticleState, sample_times: Vec<f64>) -> RunOptions {
        RunOptions {
            sample_times,
            config: Some(EngineConfig::relative(initial, self.colocation_rel, self.tie_rel)),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_list.is_empty() || self.n_list.contains(&0) {
            return bad("N-list must hold positive counts".into());
        }
        if self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return bad(format!("N-list {:?} is not strictly increasing", self.n_list));
        }
        if !(self.horizon >= 0.0) || !self.horizon.is_finite() {
            return bad(format!("horizon must be finite and >= 0, got {}", self.horizon));
        }
        if self.eval_times.windows(2).any(|w| w[1] < w[0]) {
            return bad("evaluation times must be sorted".into());
        }
        if self
            .eval_times
            .iter()
            .any(|&t| !(0.0..=self.horizon).contains(&t))
        {
            return bad(format!("evaluation times must lie in [0, {}]", self.horizon));
        }
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return Err(Error::InvalidOrder(self.p));
        }
        if !(self.colocation_rel >= 0.0) || !(self.tie_rel >= 0.0) {
            return bad("tolerances must be non-negative".into());
        }
        Ok(())
    }

    /// Plain `key=value` lines.
    pub fn echo(&self) -> String {
        let join = |v: Vec<String>| v.join(",");
        let mut s = String::new();
        let _ = writeln!(s, "rho={}", self.rho);
        let _ = writeln!(s, "eta={}", self.eta);
        let _ = writeln!(s, "n_list={}", join(self.n_list.iter().map(|n| n.to_string()).collect()));
        let _ = writeln!(s, "horizon={:?}", self.horizon);
        let _ = writeln!(s, "eval_times={}", join(self.eval_times.iter().map(|t| format!("{t:?}")).collect()));
        let _ = writeln!(s, "p={:?}", self.p);
        let _ = writeln!(s, "m_list={}", join(self.orders.iter().map(|o| o.to_string()).collect()));
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "colocation_rel={:?}", self.colocation_rel);
        let _ = writeln!(s, "tie_rel={:?}", self.tie_rel);
        s
    }
}

/// Discretizes both densities with `n` particles each.
pub fn initial_state(rho: &InitialDensity, eta: &InitialDensity, n: usize) -> Result<ParticleState> {
    ParticleState::new(rho.discretize(n)?, eta.discretize(n)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub t: f64,
    /// The coarser count of the pair; the finer one is the next in the list.
    pub n: usize,
    pub n_fine: usize,
    pub wp_rho: f64,
    pub wp_eta: f64,
    /// `log2(W_prev / W) / log2(n_fine / n)`, against the previous pair at
    /// the same time.
    pub order_rho: Option<f64>,
    pub order_eta: Option<f64>,
    /// `W / W_prev`.
    pub ratio_rho: Option<f64>,
    pub ratio_eta: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
}

impl RateTable {
    pub const HEADER: &'static str = "t,N,Wp_rho,Wp_eta,order_rho,order_eta";

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|v| format!("{v:?}")).unwrap_or_default();
        let mut s = String::new();
        let _ = writeln!(s, "{}", Self::HEADER);
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:?},{},{:?},{:?},{},{}",
                r.t,
                r.n,
                r.wp_rho,
                r.wp_eta,
                opt(r.order_rho),
                opt(r.order_eta)
            );
        }
        s
    }

    pub fn at_time(&self, t: f64) -> impl Iterator<Item = &RateRow> {
        self.rows.iter().filter(move |r| r.t == t)
    }
}

/// `W_1(empirical, reconstruction)` against `diameter / (2N)` for one species.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingCheck {
    pub t: f64,
    pub n: usize,
    pub species: Species,
    pub w1: f64,
    pub bound: f64,
}

impl CouplingCheck {
    pub fn holds(&self) -> bool {
        self.w1 <= self.bound
    }
}

/// `W_p` between reconstructions at two times against `2 |t - s|`.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzCheck {
    pub n: usize,
    pub species: Species,
    pub s: f64,
    pub t: f64,
    pub distance: f64,
    pub bound: f64,
}

impl LipschitzCheck {
    pub fn holds(&self) -> bool {
        self.distance <= self.bound + LIPSCHITZ_SLACK
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CensusRow {
    pub n: usize,
    pub events: usize,
    pub crossings: usize,
    pub sticks: usize,
    pub t_stationary: Option<f64>,
}

impl CensusRow {
    fn from_record(record: &SimulationRecord) -> Self {
        Self {
            n: record.n(),
            events: record.counts.total(),
            crossings: record.counts.cross,
            sticks: record.counts.stick,
            t_stationary: record.stationary_at,
        }
    }
}

pub const CENSUS_HEADER: &str = "N,events,crossings,sticks,t_stationary";

pub fn census_csv(rows: &[CensusRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{CENSUS_HEADER}");
    for r in rows {
        let ts = r.t_stationary.map(|t| format!("{t:?}")).unwrap_or_default();
        let _ = writeln!(s, "{},{},{},{},{}", r.n, r.events, r.crossings, r.sticks, ts);
    }
    s
}

/// One particle count of a study.
#[derive(Debug, Clone)]
pub struct StudyRun {
    pub n: usize,
    pub record: SimulationRecord,
    pub trace: DiagnosticsTrace,
    /// Reconstructions `(rho, eta)` at the evaluation times; `None` for `N = 1`.
    pub densities: Vec<Option<(PiecewiseDensity, PiecewiseDensity)>>,
}

#[derive(Debug, Clone)]
pub struct StudyOutput {
    pub config: StudyConfig,
    pub runs: Vec<StudyRun>,
    pub rates: RateTable,
    pub coupling: Vec<CouplingCheck>,
    pub lipschitz: Vec<LipschitzCheck>,
    pub census: Vec<CensusRow>,
}

fn run_one(config: &StudyConfig, n: usize) -> Result<(StudyRun, Vec<CouplingCheck>, Vec<LipschitzCheck>)> {
    let initial = initial_state(&config.rho, &config.eta, n)?;
    let options = config.run_options(&initial, config.eval_times.clone());
    let (record, trace) = traced_run(&initial, config.horizon, &options, config.orders.clone())?;

    let mut coupling = Vec::new();
    let mut densities = Vec::with_capacity(record.samples.len());
    for s in &record.samples {
        if n < 2 {
            densities.push(None);
            continue;
        }
        let rho = PiecewiseDensity::reconstruct(s.x())?;
        let eta = PiecewiseDensity::reconstruct(s.y())?;
        for (species, pos, dens) in [(Species::X, s.x(), &rho), (Species::Y, s.y(), &eta)] {
            let emp = EmpiricalMeasure::new(pos.to_vec())?;
            coupling.push(CouplingCheck {
                t: s.t(),
                n,
                species,
                w1: wasserstein_p(&emp, dens, 1.0)?,
                bound: (pos[n - 1] - pos[0]) / (2.0 * n as f64),
            });
        }
        densities.push(Some((rho, eta)));
    }

    let mut lipschitz = Vec::new();
    for a in 0..densities.len() {
        for b in a + 1..densities.len() {
            let (Some(da), Some(db)) = (&densities[a], &densities[b]) else {
                continue;
            };
            let (s, t) = (record.samples[a].t(), record.samples[b].t());
            for (species, u, v) in [(Species::X, &da.0, &db.0), (Species::Y, &da.1, &db.1)] {
                lipschitz.push(LipschitzCheck {
                    n,
                    species,
                    s,
                    t,
                    distance: wasserstein_p(u, v, config.p)?,
                    bound: 2.0 * (t - s).abs(),
                });
            }
        }
    }
    Ok((
        StudyRun {
            n,
            record,
            trace,
            densities,
        },
        coupling,
        lipschitz,
    ))
}

/// Runs every particle count to the horizon and compares consecutive counts.
pub fn convergence_study(config: &StudyConfig) -> Result<StudyOutput> {
    config.validate()?;
    let results: Vec<Result<_>> = if config.parallel {
        config.n_list.par_iter().map(|&n| run_one(config, n)).collect()
    } else {
        config.n_list.iter().map(|&n| run_one(config, n)).collect()
    };
    let mut runs = Vec::new();
    let mut coupling = Vec::new();
    let mut lipschitz = Vec::new();
    for r in results {
        let (run, c, l) = r?;
        runs.push(run);
        coupling.extend(c);
        lipschitz.extend(l);
    }

    let mut rates = RateTable::default();
    for (k, &t) in config.eval_times.iter().enumerate() {
        let mut prev: Option<(f64, f64)> = None;
        for w in runs.windows(2) {
            let (Some(Some(coarse)), Some(Some(fine))) = (w[0].densities.get(k), w[1].densities.get(k))
            else {
                continue;
            };
            let wr = wasserstein_p(&coarse.0, &fine.0, config.p)?;
            let we = wasserstein_p(&coarse.1, &fine.1, config.p)?;
            let span = (w[1].n as f64 / w[0].n as f64).log2();
            let order = |old: f64, new: f64| (old / new).log2() / span;
            rates.rows.push(RateRow {
                t,
                n: w[0].n,
                n_fine: w[1].n,
                wp_rho: wr,
                wp_eta: we,
                order_rho: prev.map(|p| order(p.0, wr)),
                order_eta: prev.map(|p| order(p.1, we)),
                ratio_rho: prev.map(|p| wr / p.0),
                ratio_eta: prev.map(|p| we / p.1),
            });
            prev = Some((wr, we));
        }
    }
    let census = runs.iter().map(|r| CensusRow::from_record(&r.record)).collect();
    Ok(StudyOutput {
        config: config.clone(),
        runs,
        rates,
        coupling,
        lipschitz,
        census,
    })
}

/// Runs every count of the config to stationarity and tabulates collisions.
/// Fails if a run exceeds `N(N + 1)` events.
pub fn collision_census(config: &StudyConfig) -> Result<Vec<CensusRow>> {
    config.validate()?;
    let one = |n: usize| -> Result<CensusRow> {
        let initial = initial_state(&config.rho, &config.eta, n)?;
        let options = config.run_options(&initial, Vec::new());
        let record = crate::engine::run_with(&initial, f64::INFINITY, &options, &mut ())?;
        Ok(CensusRow::from_record(&record))
    };
    if config.parallel {
        config.n_list.par_iter().map(|&n| one(n)).collect()
    } else {
        config.n_list.iter().map(|&n| one(n)).collect()
    }
}

/// Writes `contents` to a temporary file next to `path` and renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let io_err = |e: std::io::Error| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| io_err(std::io::Error::other("no file name")))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io_err)
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })
}

/// Writes `config`, `trace_N<n>.csv` per count, `rates.csv` and `census.csv`.
/// Returns the paths written.
pub fn write_study(dir: &Path, output: &StudyOutput) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> Result<()> {
        let path = dir.join(name);
        write_atomic(&path, body.as_bytes())?;
        written.push(path);
        Ok(())
    };
    put("config".into(), output.config.echo())?;
    for r in &output.runs {
        put(format!("trace_N{}.csv", r.n), r.trace.to_csv())?;
    }
    put("rates.csv".into(), output.rates.to_csv())?;
    put("census.csv".into(), census_csv(&output.census))?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(a: f64, b: f64) -> InitialDensity {
        InitialDensity::uniform(a, b).unwrap()
    }

    #[test]
    fn identical_densities_freeze() {
        let mut cfg = StudyConfig::new(uniform(0.0, 1.0), uniform(0.0, 1.0), vec![4, 8, 16], 1.0);
        cfg.parallel = false;
        let out = convergence_study(&cfg).unwrap();
        assert!(out.census.iter().all(|c| c.events == 0 && c.t_stationary == Some(0.0)));
        // distances are the same at both times: the state never moves
        let at0: Vec<f64> = out.rates.at_time(0.0).map(|r| r.wp_rho).collect();
        let at1: Vec<f64> = out.rates.at_time(1.0).map(|r| r.wp_rho).collect();
        assert_eq!(at0, at1);
        assert!(at0[1] < at0[0]);
        assert!(out.coupling.iter().all(CouplingCheck::holds));
        assert!(out.lipschitz.iter().all(LipschitzCheck::holds));
    }

    #[test]
    fn single_count_has_no_rates() {
        let cfg = StudyConfig::new(uniform(-2.0, -1.0), uniform(1.0, 2.0), vec![10], 1.0);
        let out = convergence_study(&cfg).unwrap();
        assert!(out.rates.rows.is_empty());
        assert_eq!(out.runs.len(), 1);
        assert_eq!(out.rates.to_csv(), format!("{}\n", RateTable::HEADER));
    }

    #[test]
    fn validation() {
        let base = StudyConfig::new(uniform(0.0, 1.0), uniform(1.0, 2.0), vec![4, 8], 1.0);
        let mut c = base.clone();
        c.n_list = vec![8, 4];
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.eval_times = vec![0.0, 2.0];
        assert!(c.validate().is_err());
        let mut c = base;
        c.p = 0.5;
        assert!(matches!(c.validate(), Err(Error::InvalidOrder(_))));
    }

    #[test]
    fn census_counts() {
        let mut cfg = StudyConfig::new(uniform(-2.0, -1.0), uniform(1.0, 2.0), vec![1, 10], 1.0);
        cfg.parallel = false;
        let rows = collision_census(&cfg).unwrap();
        assert_eq!(rows[0].events, 1);
        assert!(rows[1].events <= 110);
        assert!(rows[1].t_stationary.is_some());
        let csv = census_csv(&[CensusRow {
            n: 3,
            events: 0,
            crossings: 0,
            sticks: 0,
            t_stationary: Some(0.0),
        }]);
        assert_eq!(csv, "N,events,crossings,sticks,t_stationary\n3,0,0,0,0.0\n");
    }

    #[test]
    fn study_directory_layout() {
        let dir = std::env::temp_dir().join(format!("crossdrift-study-{}", std::process::id()));
        let mut cfg = StudyConfig::new(uniform(-2.0, -1.0), uniform(1.0, 2.0), vec![4, 8], 2.0);
        cfg.eval_times = vec![0.0, 1.0, 2.0];
        let out = convergence_study(&cfg).unwrap();
        let paths = write_study(&dir, &out).unwrap();
        let names: Vec<String> = paths
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(names, ["config", "trace_N4.csv", "trace_N8.csv", "rates.csv", "census.csv"]);
        let config = fs::read_to_string(dir.join("config")).unwrap();
        assert!(config.contains("rho=uniform:-2,-1\n"));
        assert!(config.contains("n_list=4,8\n"));
        assert!(fs::read_dir(&dir).unwrap().all(|e| !e.unwrap().file_name().to_string_lossy().ends_with(".tmp")));
        fs::remove_dir_all(&dir).unwrap();
    }
}
