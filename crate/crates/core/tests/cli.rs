use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sigmadamp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_config(cmd: &str, config: &str, extra: &[&str]) -> Output {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.toml");
    std::fs::write(&path, config).unwrap();
    let mut args = vec![cmd, "--config", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const REFERENCE: &str = "[params]\nsigma = 1\ndelta = \"1/4\"\nn = 1\nq = 2\nm = 1\ns = 1\n";

#[test]
fn worked_examples_preset_lists_all_ten_rows() {
    let o = run(&["admissible", "--preset", "worked-examples"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema=1"));
    assert!(lines.next().unwrap().starts_with("sigma,delta,mu,n,q,m,s,p,theorem,interval"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    assert!(rows[0].starts_with("2,9/10,1,3,5,1,2,,T2A,\"(13/2, ∞)\""));
    assert!(rows[5].contains("T2B,\"[4, 9]\""));
    assert!(rows[6].contains("T3B,\"[4, 5]\""));
}

#[test]
fn empty_theorem_list_is_a_config_error() {
    let o = run_config("admissible", "[admissible]\ntheorems = []\n", &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("theorem list is empty"));
}

#[test]
fn unknown_keys_report_line_and_column() {
    let o = run_config("admissible", &format!("{REFERENCE}bogus = 3\n"), &[]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("line 8, column 1"), "{err}");
    assert!(err.contains("bogus"), "{err}");
}

#[test]
fn gate_failures_are_flagged_and_fatal_only_under_strict() {
    let cfg = "[params]\nsigma = 2\ndelta = \"7/8\"\nn = 4\nq = 4\nm = 1\ns = 2\n[admissible]\ntheorems = [\"T2B\"]\n";
    let o = run_config("admissible", cfg, &[]);
    assert_eq!(o.status.code(), Some(0));
    let row = stdout(&o).lines().last().unwrap().to_string();
    let cells: Vec<&str> = row.split(',').collect();
    // gate_failed is the 16th column.
    assert_eq!(cells[15], "true", "{row}");
    let o = run_config("admissible", cfg, &["--strict"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ndjson_rows_carry_constraints_and_eps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = run(&["admissible", "--preset", "worked-examples", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(out.join("admissible.ndjson")).unwrap();
    let rows: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 10);
    for key in ["theorem", "params", "interval", "active_constraints", "eps"] {
        assert!(rows[0].get(key).is_some(), "missing {key}");
    }
    assert_eq!(rows[5]["interval"], "[4, 9]");
    assert_eq!(rows[5]["params"]["delta"], "7/8");
    assert!(out.join("config.toml").exists());
}

#[test]
fn zero_data_skips_the_fit_and_succeeds() {
    let cfg = format!(
        "{REFERENCE}[decay_fit]\nwindow = [10.0, 100.0]\n[decay_fit.grid]\npoints = 1024\nhalf_length = 100.0\n[decay_fit.data]\nu0 = 0.0\n"
    );
    let o = run_config("decay-fit", &cfg, &["--strict"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).trim_end().ends_with("skipped"));
}

#[test]
fn decay_fit_fails_when_the_tolerance_is_too_tight() {
    let cfg = format!(
        "{REFERENCE}[decay_fit]\nwindow = [10.0, 200.0]\nsamples = 9\n[decay_fit.grid]\npoints = 8192\nhalf_length = 400.0\n"
    );
    assert_eq!(run_config("decay-fit", &cfg, &[]).status.code(), Some(0));
    assert_eq!(run_config("decay-fit", &cfg, &["--tol", "1e-6"]).status.code(), Some(2));
}

#[test]
fn quadrature_budget_exhaustion_exits_with_three() {
    let cfg = format!(
        "{REFERENCE}[kernel_norm]\nkernel = \"K0\"\nband = \"high\"\nregime = \"small_t\"\nbudget = 20\n"
    );
    let o = run_config("kernel-norm", &cfg, &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn bell_check_emits_b4() {
    let o = run(&["toolkit", "--preset", "bell-check"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == ",,,,,,,,bell-check,4,5,5,15,15,true"));
}

#[test]
fn gevrey_preset_stays_bounded() {
    let o = run(&["gevrey", "--preset", "gevrey", "--strict"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn preset_and_config_conflicts_are_rejected() {
    assert_eq!(run(&["admissible", "--preset", "gevrey"]).status.code(), Some(1));
    assert_eq!(run(&["admissible", "--preset", "nope"]).status.code(), Some(1));
    assert_eq!(run(&["admissible"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    let o = run(&["admissible", "--preset", "worked-examples", "--config", Path::new("x.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn rows_written_to_a_directory_match_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    let a = run(&["toolkit", "--preset", "faa-di-bruno"]);
    let b = run(&["toolkit", "--preset", "faa-di-bruno", "--out", out.to_str().unwrap()]);
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(std::fs::read(out.join("toolkit.csv")).unwrap(), a.stdout);
}
