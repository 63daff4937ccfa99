//! Command-line behaviour: subcommands, exit codes and the artifact files.

use std::path::{Path, PathBuf};
use std::process::Command;

use aoi_core::cli::{run_cli, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK};
use aoi_core::harness::experiment::TRAJECTORY_CSV_HEADER;
use aoi_core::harness::schema::{parse_summary, parse_trajectory_csv};
use aoi_core::harness::{ExperimentConfig, SampleStats};
use aoi_core::sim::TRACE_CSV_HEADER;
use aoi_core::solver::{solve_fixed_point, SolverConfig};
use aoi_core::{DelayModel, MomentBounds, PolicySpec};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn aoi(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("aoi").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn without_output_line(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with("    \"output\": "))
        .map(|l| format!("{l}\n"))
        .collect()
}

#[test]
fn solve_prints_the_optimum_as_json() {
    let r = aoi(&["solve", "--model", "lognormal:1,1.5", "--cost", "0"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    let m = DelayModel::lognormal(1.0, 1.5).unwrap();
    let oracle =
        solve_fixed_point(&m, &MomentBounds::exact(&m), 0.0, &SolverConfig::default()).unwrap();
    assert_eq!(v["gamma_star"].as_f64().unwrap(), oracle.gamma_star);
    assert_eq!(v["h_star"].as_f64().unwrap(), oracle.h_star);
}

#[test]
fn solve_with_explicit_bounds_and_start() {
    let r = aoi(&[
        "solve",
        "--model",
        "constant:1",
        "--cost",
        "4.5",
        "--bounds",
        "1,1,1,1,1",
        "--gamma0",
        "100",
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert!((v["gamma_star"].as_f64().unwrap() - 3.0).abs() < 1e-9);
    assert_eq!(v["gamma0_clamped"], true);
}

#[test]
fn mismatched_bounds_warn_on_stderr() {
    let r = aoi(&["solve", "--model", "exponential:1", "--bounds", "2,3,4,9"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.stderr.contains("warning"), "{}", r.stderr);
}

#[test]
fn exit_codes() {
    let r = aoi(&["frobnicate"]);
    assert_eq!(r.code, EXIT_CONFIG);
    assert!(r.stderr.contains("Usage"), "{}", r.stderr);

    assert_eq!(aoi(&["solve", "--model", "lognormal:1"]).code, EXIT_CONFIG);
    assert_eq!(aoi(&["solve", "--model", "gamma:1,2"]).code, EXIT_CONFIG);
    assert_eq!(aoi(&["preset", "fig9"]).code, EXIT_CONFIG);
    assert_eq!(
        aoi(&["experiment", "--config", "/nonexistent/cfg.json"]).code,
        EXIT_CONFIG
    );

    let r = aoi(&[
        "solve",
        "--model",
        "lognormal:1,1.5",
        "--max-iter",
        "1",
        "--delta",
        "1e-300",
    ]);
    assert_eq!(r.code, EXIT_NUMERICAL);
    assert!(r.stderr.contains("did not converge"), "{}", r.stderr);

    assert_eq!(aoi(&["--help"]).code, EXIT_OK);
    assert_eq!(aoi(&["--version"]).code, EXIT_OK);
}

#[test]
fn binary_uses_the_same_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_aoi");
    let ok = Command::new(bin)
        .args(["solve", "--model", "constant:2"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    let v: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert!((v["h_star"].as_f64().unwrap() - 3.0).abs() < 1e-9);
    let bad = Command::new(bin).arg("nope").output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_CONFIG));
}

#[test]
fn preset_fig3_writes_three_panels_and_twins() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("runs");
    let r = aoi(&["preset", "fig3", "--out", out.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let paths: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(paths.len(), 6);

    let expected = [(1.0, 1.0), (1.0, 1.5), (2.0, 1.5)];
    for (i, (mu, sigma)) in expected.iter().enumerate() {
        let cfg = ExperimentConfig::load(out.join(format!("fig3_panel{}.json", i + 1))).unwrap();
        assert_eq!(cfg.model, DelayModel::lognormal(*mu, *sigma).unwrap());
        assert_eq!(cfg.cost, 0.0);
        assert_eq!(cfg.reps, 50);
        assert_eq!(cfg.frames, 100_000);
        assert_eq!(
            cfg.policies,
            vec![
                PolicySpec::ZeroWait,
                PolicySpec::optimal(),
                PolicySpec::online()
            ]
        );
        let twin = ExperimentConfig::load(out.join(format!("fig3_panel{}_truncated.json", i + 1)))
            .unwrap();
        assert_eq!(
            twin.model,
            DelayModel::truncated_lognormal(*mu, *sigma, 50.0).unwrap()
        );
        assert!(twin.check_bounds);
    }
}

#[test]
fn preset_fig4_costs_and_frames_flag() {
    let dir = tempfile::tempdir().unwrap();
    let r = aoi(&[
        "preset",
        "fig4",
        "--out",
        dir.path().to_str().unwrap(),
        "--frames",
        "5000",
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    for cost in [0, 5, 20] {
        let cfg = ExperimentConfig::load(dir.path().join(format!("fig4_cost{cost}.json"))).unwrap();
        assert_eq!(cfg.cost, cost as f64);
        assert_eq!(cfg.frames, 5000);
        assert_eq!(cfg.model, DelayModel::lognormal(1.0, 1.5).unwrap());
    }
}

#[test]
fn experiment_matches_golden_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = golden("small_experiment.json");
    let r = aoi(&[
        "experiment",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);

    let summary = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
    let expected = std::fs::read_to_string(golden("small_summary.json")).unwrap();
    assert_eq!(without_output_line(&summary), expected);
    for label in ["zero_wait", "fixed_threshold", "online_rm"] {
        let got = std::fs::read_to_string(dir.path().join(label).join("trajectory.csv")).unwrap();
        let want = std::fs::read_to_string(golden(&format!("small_{label}.csv"))).unwrap();
        assert_eq!(got, want, "{label}");
    }
}

#[test]
fn experiment_outputs_are_reproducible_and_thread_independent() {
    let cfg = golden("small_experiment.json");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let mut snapshots = Vec::new();
    for threads in ["1", "4", "4"] {
        let r = aoi(&[
            "experiment",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out,
            "--threads",
            threads,
        ]);
        assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
        let csv = std::fs::read(dir.path().join("online_rm/trajectory.csv")).unwrap();
        let summary = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
        snapshots.push((csv, summary));
    }
    assert_eq!(snapshots[0].0, snapshots[1].0);
    assert_eq!(snapshots[1], snapshots[2]);

    let r = aoi(&[
        "experiment",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out,
        "--seed",
        "8",
    ]);
    assert_eq!(r.code, EXIT_OK);
    let csv = std::fs::read(dir.path().join("online_rm/trajectory.csv")).unwrap();
    assert_ne!(csv, snapshots[0].0);
}

#[test]
fn artifacts_follow_the_documented_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = golden("small_experiment.json");
    aoi(&[
        "experiment",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);

    let text = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
    let raw: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["config", "gamma_star", "h_star", "policies"] {
        assert!(raw.get(key).is_some(), "summary.json lacks `{key}`");
    }
    let summary = parse_summary(&text).unwrap();
    assert_eq!(summary.policies.len(), 3);
    for p in &summary.policies {
        let file = p.trajectory_file.as_ref().unwrap();
        let csv = std::fs::read_to_string(dir.path().join(file)).unwrap();
        assert_eq!(csv.lines().next().unwrap(), TRAJECTORY_CSV_HEADER);
        let rows = parse_trajectory_csv(&csv).unwrap();
        assert_eq!(rows.len(), p.checkpoints.len());
        assert_eq!(rows.last().unwrap().mean_h_bar, p.final_h_bar.mean);
        let adaptive = p.label == "online_rm";
        assert!(
            rows.iter().all(|r| r.mean_gamma.is_some() == adaptive),
            "{}",
            p.label
        );
        for r in &rows {
            let half = 0.5 * (r.ci_hi - r.ci_lo);
            let expected = SampleStats {
                n: 3,
                mean: r.mean_h_bar,
                std: r.std_h_bar,
                ci_lo: 0.0,
                ci_hi: 0.0,
                degenerate: false,
            }
            .std_error()
                * 1.96;
            assert!((half - expected).abs() <= 1e-9 * (1.0 + expected));
        }
    }
}

#[test]
fn check_bounds_command() {
    let dir = tempfile::tempdir().unwrap();
    let capped = dir.path().join("capped.json");
    let model = DelayModel::truncated_lognormal(0.0, 0.5, 5.0).unwrap();
    let mut cfg = ExperimentConfig::new(model, vec![PolicySpec::online()], 1.0, 2000, 8);
    cfg.save(&capped).unwrap();
    let report_path = dir.path().join("report.json");
    let r = aoi(&[
        "check-bounds",
        "--config",
        capped.to_str().unwrap(),
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert!(report["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .all(|v| v["lhs"].is_number() && v["rhs"].is_number()));

    let uncapped = dir.path().join("uncapped.json");
    cfg.model = DelayModel::lognormal(0.0, 0.5).unwrap();
    cfg.save(&uncapped).unwrap();
    let r = aoi(&["check-bounds", "--config", uncapped.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_CONFIG);
    assert!(r.stderr.contains("cap"), "{}", r.stderr);
}

#[test]
fn simulate_writes_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let r = aoi(&[
        "simulate",
        "--model",
        "constant:1",
        "--cost",
        "4.5",
        "--policy",
        "fixed:3",
        "--frames",
        "10",
        "--out",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let text = std::fs::read_to_string(&trace).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], TRACE_CSV_HEADER);
    assert_eq!(lines.len(), 11);
    assert_eq!(lines[1], "1,1,2,3,4.5,9,3,3");
    let last_h_bar: f64 = lines[10].rsplit(',').next().unwrap().parse().unwrap();
    assert!((last_h_bar - 3.9).abs() < 1e-12);

    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["frames"], 10);

    let r = aoi(&[
        "simulate",
        "--model",
        "exponential:1",
        "--policy",
        "fixed",
        "--frames",
        "100",
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert_eq!(
        aoi(&["simulate", "--model", "exponential:1", "--policy", "greedy"]).code,
        EXIT_CONFIG
    );
}
