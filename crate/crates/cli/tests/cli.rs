use std::path::Path;
use std::process::{Command, Output};

use homodyne_core::sweep::{OutputFormat, SweepResult};
use homodyne_core::SpinEnsembleState;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erf;

fn homodyne(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_homodyne"))
        .args(args)
        .env_clear()
        .output()
        .expect("binary runs")
}

fn table(args: &[&str]) -> SweepResult {
    let out = homodyne(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    SweepResult::from_csv(std::str::from_utf8(&out.stdout).unwrap()).unwrap()
}

fn feasibility_json(args: &[&str]) -> (i32, serde_json::Value) {
    let out = homodyne(&[&["feasibility"], args].concat());
    let code = out.status.code().unwrap();
    let value = serde_json::from_slice(&out.stdout).unwrap_or(serde_json::Value::Null);
    (code, value)
}

#[test]
fn fig2a_small_ensemble_has_one_row_per_m() {
    let r = table(&["fig2", "a", "--N", "4"]);
    assert_eq!(r.rows.len(), 5);
    assert_eq!(r.column("m").unwrap(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
    for col in &r.columns[1..] {
        let total: f64 = r.column(col).unwrap().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn fig3b_two_atoms_saturate_at_one_quarter() {
    let r = table(&["fig3", "b", "--N", "2"]);
    let xi = r.column("xi_d_n_2").unwrap();
    assert!(xi.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    assert!((xi.last().unwrap() - 0.25).abs() < 1e-6);
}

#[test]
fn fig4b_single_round_matches_fig3b() {
    let f3 = table(&["fig3", "b", "--N", "40"]);
    let f4 = table(&["fig4", "b", "--n", "1"]);
    assert_eq!(f3.column("xi_d_n_40"), f4.column("xi_d_rounds_1"));
}

#[test]
fn csv_format_is_plain() {
    let out = homodyne(&["fig3", "c"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains('\r'));
    let row = text.lines().nth(2).unwrap();
    for cell in row.split(',') {
        let mantissa = cell.split('e').next().unwrap().replace(['-', '.'], "");
        assert_eq!(mantissa.len(), 17, "{cell}");
    }
}

#[test]
fn output_is_deterministic_and_thread_independent() {
    let args = ["sample", "dss", "--shots", "200", "--seed", "11"];
    let a = homodyne(&args).stdout;
    let b = homodyne(&args).stdout;
    let serial = homodyne(&[&args[..], &["--serial"]].concat()).stdout;
    assert_eq!(a, b);
    assert_eq!(a, serial);
    let other = homodyne(&["sample", "dss", "--shots", "200", "--seed", "12"]).stdout;
    assert_ne!(a, other);
}

#[test]
fn metadata_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    for (fmt, name) in [("csv", "out.csv"), ("json", "out.json")] {
        let path = dir.path().join(name);
        let out = homodyne(&[
            "sweep",
            "--protocol",
            "repetitive_sampled",
            "--param",
            "n",
            "--start",
            "1",
            "--stop",
            "9",
            "--count",
            "5",
            "--chi-p",
            "0.4",
            "--seed",
            "3",
            "--format",
            fmt,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
        let text = std::fs::read_to_string(&path).unwrap();
        let r = match fmt {
            "csv" => SweepResult::from_csv(&text).unwrap(),
            _ => SweepResult::from_json(&text).unwrap(),
        };
        let spec = &r.metadata.spec;
        assert_eq!(spec.protocol, "repetitive_sampled");
        assert_eq!(spec.parameter, "n");
        assert_eq!(spec.grid.count, 5);
        assert_eq!(spec.fixed.get("chi_p"), Some(&0.4));
        assert_eq!(spec.seed, 3);
        assert_eq!(r.metadata.seed, 3);
        assert_eq!(spec.output.as_deref(), path.to_str());
        let expected = if fmt == "csv" {
            OutputFormat::Csv
        } else {
            OutputFormat::Json
        };
        assert_eq!(spec.format, expected);
        assert_eq!(r.rows.len(), 5);
        assert_eq!(r.encode(spec.format), text);
    }
}

#[test]
fn single_shot_gives_single_record() {
    let r = table(&["sample", "superposition", "--n-shots", "1"]);
    assert_eq!(r.rows.len(), 1);
    assert_eq!(r.columns, ["shot", "outcome", "density", "fidelity"]);
}

#[test]
fn sampled_outcomes_follow_the_mixture() {
    let shots = 10_000;
    let chi = 0.4;
    let r = table(&[
        "sample", "dss", "--N", "40", "--chi-p", "0.4", "--shots", "10000", "--seed", "5",
    ]);
    let ys = r.column("outcome").unwrap();
    assert_eq!(ys.len(), shots);

    let dist = SpinEnsembleState::css(40).unwrap().prob_distribution();
    let cdf = |y: f64| -> f64 {
        dist.iter()
            .map(|(m, p)| p * 0.5 * (1.0 + erf(y + chi * m)))
            .sum()
    };
    let edges: Vec<f64> = (0..=16).map(|i| -4.0 + 0.5 * i as f64).collect();
    let mut observed = vec![0.0; edges.len() + 1];
    for y in &ys {
        observed[edges.partition_point(|e| e <= y)] += 1.0;
    }
    let mut probs = vec![cdf(edges[0])];
    probs.extend(edges.windows(2).map(|w| cdf(w[1]) - cdf(w[0])));
    probs.push(1.0 - cdf(edges[edges.len() - 1]));
    let n = shots as f64;
    let stat: f64 = observed
        .iter()
        .zip(&probs)
        .map(|(o, p)| (o - p * n).powi(2) / (p * n))
        .sum();
    let p_value = 1.0
        - ChiSquared::new((observed.len() - 1) as f64)
            .unwrap()
            .cdf(stat);
    assert!(p_value > 1e-3, "chi2 {stat}, p {p_value}");
}

#[test]
fn feasibility_reference_cavity() {
    let (code, v) = feasibility_json(&[]);
    assert_eq!(code, 0);
    let report = &v["report"];
    assert!(report["ok"].as_bool().unwrap());
    let bx = report["chi_x_bound"].as_f64().unwrap();
    let bp = report["chi_p_bound"].as_f64().unwrap();
    assert!((bx / 1.4e-4 - 1.0).abs() < 0.05, "{bx}");
    assert!((bp / 3.0 - 1.0).abs() < 0.05, "{bp}");

    let (code, long) = feasibility_json(&["--n_t", "10"]);
    assert_eq!(code, 0);
    let bp10 = long["report"]["chi_p_bound"].as_f64().unwrap();
    assert!((bp10 / (bp * 10f64.sqrt()) - 1.0).abs() < 1e-12);
    assert!((bp10 / 9.49 - 1.0).abs() < 0.02, "{bp10}");
    assert!(long["long_pulse_plan"].is_object());
}

#[test]
fn feasibility_flags_strong_probes() {
    let (code, v) = feasibility_json(&["--np", "1e8"]);
    assert_eq!(code, 3);
    assert!(!v["report"]["ok"].as_bool().unwrap());
}

#[test]
fn feasibility_writes_pulse_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pulse.csv");
    let (code, _) = feasibility_json(&[
        "--pulse",
        "optimal-x",
        "--pulse-csv",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("t,re_beta_in,im_beta_in,beta0,beta1,beta2")
    );
    assert!(lines.count() > 1000);
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        &["feasibility", "--g", "0"][..],
        &["fig2", "d"],
        &["fig2", "a", "--N", "0"],
        &["fig3", "a", "--chi-p", "-1"],
        &["fig4", "c", "--bogus"],
        &["sample", "dss", "--shots", "0"],
        &[
            "sweep",
            "--protocol",
            "dss",
            "--param",
            "chi_x",
            "--start",
            "0",
            "--stop",
            "1",
            "--count",
            "3",
        ],
        &[
            "sweep",
            "--protocol",
            "dss",
            "--param",
            "chi_p",
            "--start",
            "0",
            "--stop",
            "1",
            "--count",
            "1",
        ],
        &["feasibility", "--pulse", "optimal-x", "--n-t", "4"],
        &["fig2", "a", "--config", "/nonexistent/homodyne.toml"],
        &[],
    ] {
        let out = homodyne(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(homodyne(&["--help"]).status.code(), Some(0));
}

fn rows_with(config: Option<&Path>, env: Option<&str>, flag: Option<&str>) -> usize {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_homodyne"));
    cmd.env_clear().args(["fig2", "b"]);
    if let Some(path) = config {
        cmd.arg("--config").arg(path);
    }
    if let Some(n) = env {
        cmd.env("HOMODYNE_N", n);
    }
    if let Some(n) = flag {
        cmd.args(["--N", n]);
    }
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    SweepResult::from_csv(std::str::from_utf8(&out.stdout).unwrap())
        .unwrap()
        .rows
        .len()
}

#[test]
fn config_precedence_is_file_then_env_then_flag() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("homodyne.toml");
    std::fs::write(&path, "N = 6\nchi_x = 0.3\n").unwrap();
    assert_eq!(rows_with(None, None, None), 101);
    assert_eq!(rows_with(Some(&path), None, None), 7);
    assert_eq!(rows_with(Some(&path), Some("8"), None), 9);
    assert_eq!(rows_with(Some(&path), Some("8"), Some("10")), 11);
    assert_eq!(rows_with(None, Some("8"), None), 9);

    std::fs::write(&path, "atoms = 6\n").unwrap();
    let out = homodyne(&["fig2", "b", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
