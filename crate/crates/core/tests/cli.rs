use std::f64::consts::{FRAC_PI_2, SQRT_2};
use std::process::Command;

use serde_json::Value;

use svetlichny::cli::{
    read_csv, run, run_verify, VerifyContext, VerifyLevel, EXIT_IO, EXIT_OK, EXIT_USAGE,
    EXIT_VERIFY, NU_CHECK, THREADS_ENV,
};
use svetlichny::states::FamilyParameter;
use svetlichny::svetlichny::{violation_report, Variant};

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("svetlichny").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = invoke(args);
    assert_eq!(code, EXIT_OK, "{args:?}: {err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn nu_table_lists_sixteen_weights() {
    let (code, out, _) = invoke(&["nu-table"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 17);
    assert_eq!(lines[0], "w,nu_plus,nu_minus");
    assert_eq!(&lines[1..5], ["0,1,1", "1,-1,1", "2,-1,-1", "3,1,-1"]);
    assert_eq!(lines[16], "15,1,-1");
}

#[test]
fn bound_at_tangle_one_half_does_not_violate() {
    let v = json(&["bound", "--family", "gghz", "--n", "5", "--tau", "0.5"]);
    assert!((v["analytic_max"].as_f64().unwrap() - 16.0).abs() < 1e-12);
    assert_eq!(v["violates"], false);
    assert_eq!(v["lhv_bound"], 16.0);
    assert!((v["tangle"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn bound_for_biseparable_ms_state() {
    let v = json(&["bound", "--family", "ms", "--n", "4", "--alpha", "0"]);
    assert_eq!(v["analytic_max"], 8.0);
    assert_eq!(v["violates"], false);
    assert_eq!(v["numeric_max"], Value::Null);
}

#[test]
fn bound_for_ghz3_reaches_cap() {
    let v = json(&[
        "bound",
        "--family",
        "gghz",
        "--n",
        "3",
        "--alpha",
        "0.7853981634",
    ]);
    assert!((v["analytic_max"].as_f64().unwrap() - 4.0 * SQRT_2).abs() < 1e-9);
    assert_eq!(v["violates"], true);
    assert_eq!(v["family"]["family"], "gghz");
}

#[test]
fn bound_rejects_bad_parameters() {
    for args in [
        &["bound", "--family", "gghz", "--n", "5", "--alpha", "2.0"][..],
        &["bound", "--family", "gghz", "--n", "5", "--alpha", "-0.1"],
        &["bound", "--family", "gghz", "--n", "5", "--tau", "1.5"],
        &["bound", "--family", "ms", "--n", "2", "--alpha", "0.1"],
        &["bound", "--family", "ms", "--n", "5", "--tau", "0.3"],
        &[
            "bound", "--family", "gghz", "--n", "5", "--alpha", "0.1", "--tau", "0.2",
        ],
        &["bound", "--family", "gghz", "--n", "5"],
        &["bound", "--family", "w", "--n", "5", "--alpha", "0.1"],
        &["frobnicate"],
    ] {
        let (code, out, err) = invoke(args);
        assert_eq!(code, EXIT_USAGE, "{args:?}");
        assert!(out.is_empty());
        assert!(!err.is_empty());
    }
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = invoke(&["--help"]);
    assert_eq!(code, EXIT_OK);
    for cmd in ["bound", "sweep", "optimize", "verify", "nu-table"] {
        assert!(out.contains(cmd), "{cmd}");
    }
}

fn optimize(args: &[&str]) -> Value {
    let mut full = vec!["optimize"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--restarts", "16"]);
    json(&full)
}

#[test]
fn optimize_ghz3() {
    let v = optimize(&[
        "--family",
        "gghz",
        "--n",
        "3",
        "--alpha",
        "0.785398163397448",
    ]);
    assert!((v["best_value"].as_f64().unwrap() - 5.656854249492).abs() < 1e-6);
    assert!(v["variant"] == "plus" || v["variant"] == "minus");
    assert!(v["stationarity_residual"].as_f64().unwrap() >= 0.0);
    let settings = v["best_settings"].as_array().unwrap();
    assert_eq!(settings.len(), 3);
    for s in settings {
        for key in ["theta0", "phi0", "theta1", "phi1"] {
            let x = s[key].as_f64().unwrap();
            let rounded: f64 = format!("{x:.11e}").parse().unwrap();
            assert_eq!(x, rounded, "{key} not at 12 significant digits");
            assert!((0.0..2.0 * std::f64::consts::PI + 1e-9).contains(&x));
        }
    }
}

#[test]
fn optimize_ms5() {
    let v = optimize(&[
        "--family",
        "ms",
        "--n",
        "5",
        "--alpha",
        "1.0471975511965976",
    ]);
    assert!((v["best_value"].as_f64().unwrap() - 16.0 * 1.75f64.sqrt()).abs() < 1e-5);
}

#[test]
fn optimize_product_gghz4() {
    let v = optimize(&[
        "--family",
        "gghz",
        "--n",
        "4",
        "--alpha",
        "0",
        "--variant",
        "minus",
    ]);
    assert!((v["best_value"].as_f64().unwrap() - 4.0).abs() < 1e-6);
    assert_eq!(v["variant"], "minus");
}

#[test]
fn optimize_rejects_zero_restarts() {
    let (code, _, err) = invoke(&[
        "optimize",
        "--family",
        "gghz",
        "--n",
        "3",
        "--alpha",
        "0.2",
        "--restarts",
        "0",
    ]);
    assert_eq!(code, EXIT_USAGE, "{err}");
}

const HEADER: &str = "family,N,alpha,tau,variant,lhv_bound,analytic_max,numeric_max,violates,optimizer_restarts_converged";

fn sweep(extra: &[&str]) -> (tempfile::TempDir, std::path::PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.out");
    let mut args = vec!["sweep"];
    args.extend_from_slice(extra);
    let p = path.to_str().unwrap().to_string();
    args.extend_from_slice(&["--out", &p]);
    let (code, _, err) = invoke(&args);
    assert_eq!(code, EXIT_OK, "{err}");
    (dir, path)
}

#[test]
fn gghz4_sweep_with_optimizer() {
    let (_dir, path) = sweep(&[
        "--family",
        "gghz",
        "--n",
        "4",
        "--count",
        "25",
        "--optimize",
        "--restarts",
        "16",
    ]);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), HEADER);
    let rows = read_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 25);
    assert_eq!(rows[0].alpha, 0.0);
    assert_eq!(rows[24].alpha, FRAC_PI_2);
    for r in &rows {
        let numeric = r.numeric_max.unwrap();
        assert!(
            (numeric - r.analytic_max).abs() <= 1e-5,
            "alpha {}: {numeric} vs {}",
            r.alpha,
            r.analytic_max
        );
        assert!(r.optimizer_restarts_converged.unwrap() <= 16);
        assert!(r.variant == "plus" || r.variant == "minus");
    }
}

#[test]
fn ms3_sweep_analytic_column() {
    let (_dir, path) = sweep(&[
        "--family",
        "ms",
        "--n",
        "3",
        "--count",
        "11",
        "--variant",
        "plus",
    ]);
    let text = std::fs::read_to_string(&path).unwrap();
    let rows = read_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 11);
    for r in &rows {
        let expected = 4.0 * (1.0 + r.alpha.sin().powi(2)).sqrt();
        assert!((r.analytic_max - expected).abs() < 1e-12);
        assert!(r.numeric_max.is_none());
        assert!(r.optimizer_restarts_converged.is_none());
        assert_eq!(r.variant, "plus");
    }
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!((fields[7], fields[9]), ("", ""), "{line}");
    }
}

#[test]
fn tau_sweep_flips_violation_once() {
    let (_dir, path) = sweep(&[
        "--family",
        "gghz",
        "--n",
        "6",
        "--tau-start",
        "0.2",
        "--tau-stop",
        "0.8",
        "--count",
        "31",
    ]);
    let rows = read_csv(std::fs::File::open(&path).unwrap()).unwrap();
    let flips = rows
        .windows(2)
        .filter(|w| w[0].violates != w[1].violates)
        .count();
    assert_eq!(flips, 1);
    for r in &rows {
        assert_eq!(r.violates, r.tau.unwrap() > 0.5);
    }
}

#[test]
fn sweep_csv_round_trips() {
    let (_dir, path) = sweep(&[
        "--family", "gghz", "--n", "3", "--n-max", "9", "--count", "13",
    ]);
    let rows = read_csv(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(rows.len(), 7 * 13);
    for r in &rows {
        let fp = FamilyParameter::new(r.family, r.n, r.alpha).unwrap();
        let report = violation_report(&fp).unwrap();
        assert!((report.analytic_max - r.analytic_max).abs() <= 1e-12);
        assert_eq!(report.violates, r.violates);
    }
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().skip(1).all(|l| l.split(',').count() == 10));
}

#[test]
fn sweep_json_format() {
    let (_dir, path) = sweep(&[
        "--family", "ms", "--n", "4", "--count", "3", "--format", "json",
    ]);
    let v: Value = serde_json::from_reader(std::fs::File::open(&path).unwrap()).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["N"], 4);
    assert_eq!(rows[0]["numeric_max"], Value::Null);
}

#[test]
fn sweep_reports_io_failure() {
    let (code, _, err) = invoke(&[
        "sweep",
        "--family",
        "gghz",
        "--n",
        "4",
        "--count",
        "3",
        "--out",
        "/nonexistent-dir/x.csv",
    ]);
    assert_eq!(code, EXIT_IO, "{err}");
}

#[test]
fn sweep_rejects_single_point_grid() {
    let (code, _, _) = invoke(&[
        "sweep",
        "--family",
        "gghz",
        "--n",
        "4",
        "--count",
        "1",
        "--out",
        "/tmp/unused.csv",
    ]);
    assert_eq!(code, EXIT_USAGE);
}

fn flipped_nu(w: u32, v: Variant) -> i32 {
    -svetlichny::svetlichny::nu(w, v)
}

#[test]
fn verify_names_a_broken_nu_table() {
    let ctx = VerifyContext::new(VerifyLevel::Quick).with_nu(flipped_nu);
    let mut out = Vec::new();
    let mut err = Vec::new();
    assert_eq!(run_verify(&ctx, &mut out, &mut err), EXIT_VERIFY);
    let out = String::from_utf8(out).unwrap();
    let err = String::from_utf8(err).unwrap();
    assert!(out.contains(&format!("[FAIL] {NU_CHECK}")), "{out}");
    assert!(err.contains(NU_CHECK));
}

#[test]
fn binary_verify_quick_passes() {
    let start = std::time::Instant::now();
    let output = Command::new(env!("CARGO_BIN_EXE_svetlichny"))
        .args(["verify", "--level", "quick"])
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert_eq!(output.status.code(), Some(EXIT_OK), "{stdout}");
    assert!(!stdout.contains("[FAIL]"));
    assert!(start.elapsed().as_secs() < 60);
}

#[test]
fn binary_thread_count_does_not_change_results() {
    let run_with = |threads: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_svetlichny"));
        cmd.args([
            "optimize",
            "--family",
            "ms",
            "--n",
            "4",
            "--alpha",
            "0.4",
            "--restarts",
            "12",
            "--seed",
            "7",
        ]);
        match threads {
            Some(t) => cmd.env(THREADS_ENV, t),
            None => cmd.env_remove(THREADS_ENV),
        };
        let out = cmd.output().unwrap();
        assert_eq!(out.status.code(), Some(EXIT_OK));
        String::from_utf8(out.stdout).unwrap()
    };
    let one = run_with(Some("1"));
    assert_eq!(one, run_with(Some("3")));
    assert_eq!(one, run_with(None));
}

#[test]
fn binary_exit_codes() {
    let status = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_svetlichny"))
            .args(args)
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(status(&["nu-table"]), Some(EXIT_OK));
    assert_eq!(
        status(&["bound", "--family", "gghz", "--n", "1", "--alpha", "0"]),
        Some(EXIT_USAGE)
    );
    assert_eq!(status(&[]), Some(EXIT_USAGE));
    assert_eq!(
        status(&[
            "sweep",
            "--family",
            "gghz",
            "--n",
            "3",
            "--count",
            "2",
            "--out",
            "/nonexistent-dir/a.csv"
        ]),
        Some(EXIT_IO)
    );
}
