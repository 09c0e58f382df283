use entemp_core::runner::{self, Scale};
use entemp_core::thermo::uniform_eps;
use entemp_core::{ChannelSumParams, MetricSpec, RunConfig, SweepParams};

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn sweep_independent_of_thread_count() {
    let m = MetricSpec::schwarzschild(2);
    let p = SweepParams { eps: uniform_eps(1e-5, 4), channels: ChannelSumParams { l_max: 40, tol: 1e-8 } };
    let a = in_pool(1, || entemp_core::epsilon_sweep(&m, 40, 10, &p).unwrap());
    let b = in_pool(3, || entemp_core::epsilon_sweep(&m, 40, 10, &p).unwrap());
    assert_eq!(a, b);
}

#[test]
fn table1_hawking_column_is_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let t = runner::cmd_table1(Scale::Desk, dir.path()).unwrap();
    assert_eq!(t.rows.len(), 5);
    for row in &t.rows {
        let exact = (1.0 - row.q * row.q) / (4.0 * std::f64::consts::PI);
        assert!((row.t_bh - exact).abs() <= 1e-12);
    }
    let csv = std::fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("Schwarzschild,0.0,"));
}

#[test]
fn run_reports_flat_background_without_horizon() {
    let cfg = RunConfig::from_toml(
        "metric.kind = \"flat\"\nsites = 30\npartitions = [6, 12]\neps = [0.0, 1e-6, 2e-6]\nl_max = 3\n",
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let report = runner::cmd_run(&cfg, dir.path()).unwrap();
    assert!(!report.has_horizon);
    assert_eq!(report.t_hawking, 0.0);
    assert_eq!(report.relative_deviation, None);
    assert_eq!(report.per_n.len(), 2);
    let written: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(written["per_n"][1]["n"], 12);
}

#[test]
fn oracle_check_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let check = runner::oracle_check(3).unwrap();
    assert!(check.passed());
    assert!(check.cases.iter().any(|c| c.name == "[[2,-1],[-1,2]]"));
    assert!(check.cases.iter().any(|c| c.name.starts_with("flat K0 N=3")));
    runner::cmd_area_law(
        &RunConfig::from_toml("metric.kind = \"flat\"\nsites = 40\npartitions = [6, 8, 10, 12]\nl_max = 10\ntol = 0\n").unwrap(),
        dir.path(),
    )
    .unwrap();
    assert!(dir.path().join("area_law.json").exists());
}
