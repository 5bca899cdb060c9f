use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use noma_aoii::config::SystemConfig;
use noma_aoii::harness;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_noma-aoii"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should start")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn default_config() -> String {
    configs().join("default.toml").to_str().unwrap().to_string()
}

fn experiment(name: &str) -> String {
    configs()
        .join("experiments")
        .join(name)
        .to_str()
        .unwrap()
        .to_string()
}

/// `(value1, value2, value)` triples of a sweep CSV.
fn sweep_points(csv_text: &str) -> Vec<(f64, Option<f64>, f64)> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    reader
        .deserialize::<harness::SweepRow>()
        .map(|r| {
            let r = r.unwrap();
            (r.value1, r.value2, r.value)
        })
        .collect()
}

#[test]
fn shipped_config_is_the_default_and_round_trips() {
    let cfg = SystemConfig::load(default_config()).unwrap();
    assert_eq!(cfg, SystemConfig::default());
    let again = SystemConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
    assert_eq!(again, cfg);
}

#[test]
fn analytic_json_matches_library() {
    let out = run(&["analytic", &default_config()]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(&stdout(&out)).unwrap();
    let report = harness::cmd_analytic(&SystemConfig::default()).unwrap();
    let metrics = report.metrics();
    assert_eq!(json.len(), metrics.len());
    for (name, value) in metrics {
        assert_eq!(json[&name].as_f64().unwrap(), value, "{name}");
    }
    for rho in ["rho0", "rho1", "rho2"] {
        assert!(json[rho].as_f64().unwrap() < 1.0);
    }
}

#[test]
fn analytic_csv_lists_metric_value_pairs() {
    let out = run(&["--format", "csv", "analytic", &default_config()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("metric,value"));
    let aoi = lines.find(|l| l.starts_with("aoi_blended,")).unwrap();
    let value: f64 = aoi.split(',').nth(1).unwrap().parse().unwrap();
    assert!((value - 0.389_219_681_424_477_3).abs() < 1e-12);
}

#[test]
fn unstable_scheduler_exits_3_naming_c5() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "hot.toml", "[queue]\nframe_duration = 0.04\n");
    for cmd in ["analytic", "simulate"] {
        let out = run(&[cmd, &cfg, "--packets", "1000"][..if cmd == "analytic" { 2 } else { 4 }]);
        assert_eq!(out.status.code(), Some(3), "{cmd}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("C5"), "{cmd}");
    }
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_field = write(dir.path(), "bad.toml", "[queue]\nmu7 = 3.0\n");
    let bad_syntax = write(dir.path(), "syntax.toml", "[queue\n");
    let missing = dir
        .path()
        .join("missing.toml")
        .to_str()
        .unwrap()
        .to_string();
    for cfg in [&bad_field, &bad_syntax, &missing] {
        assert_eq!(run(&["analytic", cfg]).status.code(), Some(2), "{cfg}");
    }
    let empty = write(
        dir.path(),
        "empty.toml",
        "name = \"e\"\noutputs = [\"d0\"]\n[[sweep]]\npath = \"queue.mu0\"\nvalues = []\n",
    );
    assert_eq!(run(&["sweep", &empty]).status.code(), Some(2));
    let unknown_path = write(
        dir.path(),
        "path.toml",
        "name = \"e\"\noutputs = [\"d0\"]\n[[sweep]]\npath = \"queue.nope\"\nvalues = [1.0]\n",
    );
    assert_eq!(run(&["sweep", &unknown_path]).status.code(), Some(2));
}

#[test]
fn unreachable_similarity_threshold_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "strict.toml",
        "[scenario]\nsimilarity_threshold = 0.97\ncategory_boundary = 0.99\n",
    );
    let out = run(&["optimize", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("P3"));
}

#[test]
fn simulate_is_byte_identical_for_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("report{k}.json"));
        let trace = dir.path().join(format!("trace{k}.csv"));
        let status = run(&[
            "--out",
            out.to_str().unwrap(),
            "simulate",
            &default_config(),
            "--seed",
            "42",
            "--packets",
            "20000",
            "--trace",
            trace.to_str().unwrap(),
        ]);
        assert_eq!(status.status.code(), Some(0));
        outputs.push((std::fs::read(out).unwrap(), std::fs::read(trace).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let trace = String::from_utf8(outputs[0].1.clone()).unwrap();
    assert_eq!(
        trace.lines().next(),
        Some("n,alpha,T,w0,h0,category,wi,hi,beta")
    );
    assert_eq!(trace.lines().count(), 18_001);
}

#[test]
fn simulate_csv_reports_both_modes() {
    let out = run(&[
        "--format",
        "csv",
        "simulate",
        &default_config(),
        "--seed",
        "7",
        "--packets",
        "20000",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(
        text.lines().next(),
        Some("metric,analytic_paper_mode,analytic_flow_mode,simulated,half_width,rel_err")
    );
    let metrics: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    for m in [
        "scheduler_delay",
        "server1_delay",
        "server2_delay",
        "aoi_blended",
        "aoii",
    ] {
        assert_eq!(metrics.iter().filter(|x| **x == m).count(), 1, "{m}");
    }
}

#[test]
fn optimize_emits_flagged_trace_and_product_invariant() {
    let out = run(&["optimize", &default_config()]);
    assert_eq!(out.status.code(), Some(0));
    let report: harness::OptimizeReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report.trace.len(), 101);
    let best: Vec<_> = report.trace.iter().filter(|t| t.best).collect();
    assert_eq!(best.len(), 1);
    assert_eq!(best[0].k, report.best_index);
    assert_eq!(best[0].objective, report.aoi_min);
    assert_eq!(
        report.aoii_min,
        report.aoi_min * (1.0 - report.mean_similarity)
    );

    let csv_out = run(&["--format", "csv", "optimize", &default_config()]);
    let text = stdout(&csv_out);
    assert_eq!(text.lines().count(), 102);
    assert!(text.starts_with("k,mu0,mu1,mu2,objective,feasible,best,reason"));
}

#[test]
fn sweep_rows_are_rectangular() {
    for (name, rows) in [
        ("rate_vs_power_and_symbols.toml", 11 * 20),
        ("similarity_vs_power.toml", 11 * 7),
        ("server2_delay_vs_rate.toml", 11),
        ("aoi_vs_category_share.toml", 9 * 3 * 4),
        ("aoii_vs_power_and_update_rate.toml", 11 * 3),
        ("aoii_vs_power_and_category_share.toml", 11 * 3),
    ] {
        let out = run(&["sweep", &experiment(name)]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        let text = stdout(&out);
        assert!(text.starts_with("experiment,param1,value1,param2,value2,metric,value,reason\n"));
        assert_eq!(text.lines().count(), rows + 1, "{name}");
    }
}

#[test]
fn sweep_output_is_deterministic() {
    let a = run(&["sweep", &experiment("aoi_vs_category_share.toml")]);
    let b = run(&["sweep", &experiment("aoi_vs_category_share.toml")]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn stage_delays_strictly_decrease() {
    for name in [
        "scheduler_delay_vs_rate.toml",
        "server1_delay_vs_rate.toml",
        "server2_delay_vs_rate.toml",
    ] {
        let out = run(&["sweep", &experiment(name)]);
        let finite: Vec<f64> = sweep_points(&stdout(&out))
            .into_iter()
            .map(|p| p.2)
            .filter(|v| v.is_finite())
            .collect();
        assert!(finite.len() >= 5, "{name}");
        assert!(finite.windows(2).all(|w| w[1] < w[0]), "{name}: {finite:?}");
    }
}

#[test]
fn aoii_nonincreasing_in_power() {
    let out = run(&["sweep", &experiment("aoii_vs_power_and_update_rate.toml")]);
    let points = sweep_points(&stdout(&out));
    for frame in [0.1, 0.125, 0.15] {
        let series: Vec<f64> = points
            .iter()
            .filter(|p| p.1 == Some(frame))
            .map(|p| p.2)
            .collect();
        assert_eq!(series.len(), 11);
        assert!(series.iter().all(|v| v.is_finite()));
        assert!(
            series.windows(2).all(|w| w[1] <= w[0]),
            "{frame}: {series:?}"
        );
    }
}
