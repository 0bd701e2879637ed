use std::fs;
use std::process::{Command, Output};

fn crossdrift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crossdrift"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field<'a>(line: &'a str, key: &str) -> &'a str {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(key)?.strip_prefix('='))
        .unwrap_or_else(|| panic!("no {key} in {line:?}"))
}

#[test]
fn simulate_writes_trace_and_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = crossdrift(&[
        "simulate", "--n", "4", "--t", "10", "--sample", "0.5", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let line = stdout(&o);
    assert_eq!(field(&line, "N"), "4");
    // two blocks of four reach rest well before t = 10
    assert_ne!(field(&line, "t_stationary"), "-");

    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(
        lines.next(),
        Some("t,energy,self_x,self_y,cross,l2,l3,linf,a,b,events_cross,events_stick")
    );
    let energies: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(energies.windows(2).all(|w| w[1] <= w[0] + 1e-12));

    let traj = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,species,index,position\n"));
    let body: Vec<&str> = traj.lines().skip(1).collect();
    assert_eq!(body.len() % 8, 0);
    // samples every 0.5 show up as frames
    assert!(body.iter().any(|l| l.starts_with("2.5,x,1,")));
    let times: Vec<f64> = body.iter().map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(times.windows(2).all(|w| w[0] <= w[1]));

    let config = fs::read_to_string(out.join("config")).unwrap();
    assert!(config.contains("rho=uniform:-2,-1\n"));
    assert!(config.contains("n=4\n"));
    assert!(fs::read_dir(&out).unwrap().all(|e| !e.unwrap().file_name().to_string_lossy().ends_with(".tmp")));
}

#[test]
fn simulate_explicit_positions() {
    // x2 and y1 close at speed 3 and meet at t = 1/3; the pairs end up stuck
    let o = crossdrift(&["simulate", "--x", "-1,0", "--y", "1,2", "--t", "inf"]);
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o);
    assert_eq!(field(&line, "N"), "2");
    assert_eq!(field(&line, "final_energy"), "0.0");
    let events: usize = field(&line, "events").parse().unwrap();
    assert!(events <= 6);
}

#[test]
fn census_of_paired_data_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("census.csv");
    let o = crossdrift(&[
        "census", "--rho", "uniform:0,1", "--eta", "uniform:0,1", "--n-list", "7", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        fs::read_to_string(&path).unwrap(),
        "N,events,crossings,sticks,t_stationary\n7,0,0,0,0.0\n"
    );
}

#[test]
fn census_stays_below_bound() {
    let o = crossdrift(&["census", "--n-list", "5,10"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for row in text.lines().skip(1).take(2) {
        let cols: Vec<usize> = row.split(',').take(2).map(|c| c.parse().unwrap()).collect();
        assert!(cols[1] <= cols[0] * (cols[0] + 1), "{row}");
    }
}

#[test]
fn converge_writes_study() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("study");
    let o = crossdrift(&[
        "converge", "--n-list", "8,16,32", "--t", "1", "--eval-times", "0,0.5,1", "--sequential",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let line = stdout(&o);
    assert_eq!(field(&line, "coupling_bound"), "ok");
    assert_eq!(field(&line, "lipschitz"), "ok");
    for name in ["config", "trace_N8.csv", "trace_N16.csv", "trace_N32.csv", "rates.csv", "census.csv"] {
        assert!(out.join(name).is_file(), "{name}");
    }
    let rates = fs::read_to_string(out.join("rates.csv")).unwrap();
    assert_eq!(rates.lines().count(), 1 + 3 * 2);
}

#[test]
fn oracle_compare_reports_distance() {
    let o = crossdrift(&[
        "oracle-compare", "--x", "-2,-1", "--y", "0,1", "--t", "1", "--delta", "1e-3", "--dt", "2.5e-4",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let d: f64 = field(&stdout(&o), "sup_distance").parse().unwrap();
    assert!(d < 1e-2, "{d}");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["simulate", "--n", "0", "--t", "1"][..],
        &["simulate", "--n", "3"],
        &["simulate", "--rho", "gauss:0,1", "--n", "3", "--t", "1"],
        &["simulate", "--x", "0,1", "--t", "1"],
        &["converge", "--n-list", "20,10", "--t", "1"],
        &["oracle-compare", "--n", "2", "--t", "1", "--delta", "1e-3", "--dt", "1e-3"],
        &["frobnicate"],
    ] {
        assert_eq!(crossdrift(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unreadable_table_exits_66() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.txt");
    let arg = format!("cdf:{}", missing.display());
    let o = crossdrift(&["simulate", "--rho", &arg, "--n", "3", "--t", "1"]);
    assert_eq!(o.status.code(), Some(66));
}

#[test]
fn unwritable_output_exits_66() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain");
    fs::write(&file, "x").unwrap();
    let o = crossdrift(&["simulate", "--n", "3", "--t", "1", "--out", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(66));
}

#[test]
fn broken_invariant_exits_70() {
    // an absurd tie window merges collisions that happen at different places
    let o = crossdrift(&["simulate", "--n", "10", "--t", "4", "--tie-rel", "1000"]);
    assert_eq!(o.status.code(), Some(70));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("collision participants meet at one point"), "{err}");
}

#[test]
fn cdf_table_input() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("rho.txt");
    fs::write(&table, "# uniform on [0, 2]\n0 0\n1 0.5\n2 1\n").unwrap();
    let arg = format!("cdf:{}", table.display());
    let o = crossdrift(&["simulate", "--rho", &arg, "--eta", "uniform:0,2", "--n", "5", "--t", "1"]);
    assert_eq!(o.status.code(), Some(0));
    // identical data: nothing moves
    assert_eq!(field(&stdout(&o), "events"), "0");
}
