//! Black-box checks of the `sdpi` binary: worked numeric examples, output
//! formats, determinism, unit handling, file output, and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

const LN_2: f64 = std::f64::consts::LN_2;

fn sdpi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdpi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = sdpi(args);
    assert!(
        out.status.success(),
        "sdpi {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

fn json_of(args: &[&str]) -> serde_json::Value {
    serde_json::from_str(&stdout_of(args)).expect("valid JSON artifact")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sdpi-cli-test-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("create scratch dir");
    dir
}

#[test]
fn eta_json_matches_binary_symmetric_closed_form() {
    let doc = json_of(&["eta", "bsc:0.1", "--json"]);
    assert!((doc["eta_tv"].as_f64().unwrap() - 0.8).abs() <= 1e-12);
    assert!((doc["eta_kl"].as_f64().unwrap() - 0.64).abs() <= 1e-12);
    assert!((doc["eta_chi2_sup"].as_f64().unwrap() - 0.64).abs() <= 1e-12);
    assert_eq!(doc["method"], "LECAM_BINARY_EXACT");
    assert_eq!(doc["certified"]["eta_kl"], true);
    assert_eq!(doc["channel"], "bsc:0.1");
}

#[test]
fn eta_text_reports_method_and_certification() {
    let text = stdout_of(&["eta", "bsc:0.1"]);
    assert!(text.contains("eta_tv: 0.8\n"), "{text}");
    assert!(text.contains("method: LECAM_BINARY_EXACT"), "{text}");
    assert!(text.contains("certified: tv=true chi2_sup=true kl=true"), "{text}");
}

#[test]
fn eta_accepts_bare_channel_file_paths() {
    let dir = scratch("eta-file");
    let path = dir.join("w.json");
    std::fs::write(
        &path,
        r#"{"input_size": 2, "output_size": 2, "matrix": [[0.9,0.1],[0.2,0.8]]}"#,
    )
    .unwrap();
    // Both the explicit file: head and the bare path must resolve.
    let spec = format!("file:{}", path.display());
    let doc = json_of(&["eta", &spec, "--json"]);
    assert!((doc["eta_tv"].as_f64().unwrap() - 0.7).abs() <= 1e-12);
    let doc = json_of(&["eta", path.to_str().unwrap(), "--json"]);
    assert!((doc["eta_tv"].as_f64().unwrap() - 0.7).abs() <= 1e-12);
    assert_eq!(doc["method"], "LECAM_BINARY_EXACT");
}

#[test]
fn eta_rejects_bad_specs_with_both_diagnostics() {
    let out = sdpi(&["eta", "no-such-file.json"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("not a readable file"), "{err}");
    let out = sdpi(&["eta", "bsc:1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("crossover probability"), "{err}");
}

#[test]
fn table1_text_matches_reference_values() {
    let text = stdout_of(&["table1", "--eta", "0.3"]);
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 4, "{text}");
    for (row, want) in rows.iter().zip([
        ("0.3", "0.3", "0.327"),
        ("0.09", "0.09", "0.117"),
        ("0.51", "0.6", "0.6"),
        ("0.51", "0.6", "0.9"),
    ]) {
        let cols: Vec<&str> = row.split_whitespace().collect();
        let k = cols.len();
        assert_eq!(
            (cols[k - 3], cols[k - 2], cols[k - 1]),
            want,
            "row {row:?}"
        );
    }
}

#[test]
fn netbound_reads_dag_files_and_methods_agree() {
    let dir = scratch("netbound");
    let path = dir.join("dag.json");
    std::fs::write(
        &path,
        r#"{"source": "X", "nodes": [
            {"id": "X"},
            {"id": "Y1", "parents": ["X"], "eta": 0.4},
            {"id": "Y2", "parents": ["X", "Y1"], "eta": 0.5},
            {"id": "Y3", "parents": ["Y1", "Y2"], "eta": 0.6}
        ]}"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let exact = json_of(&["netbound", p, "--sinks", "Y3", "--format", "json"]);
    let value = exact["percolation"]["value"].as_f64().unwrap();
    assert!((value - exact["recursion_bound"].as_f64().unwrap()).abs() <= 1e-12);
    assert!(value > 0.0 && value < 1.0);
    let paths = json_of(&["netbound", p, "--sinks", "Y3", "--method", "paths", "--format", "json"]);
    assert!(paths["shortcut_free_sum"].as_f64().unwrap() >= value - 1e-12);
    assert!(
        paths["all_paths_sum"].as_f64().unwrap()
            >= paths["shortcut_free_sum"].as_f64().unwrap() - 1e-12
    );
    let mc = json_of(&[
        "netbound", p, "--sinks", "Y3", "--method", "mc", "--samples", "200000", "--format",
        "json",
    ]);
    let est = mc["percolation"]["value"].as_f64().unwrap();
    let se = mc["percolation"]["stderr"].as_f64().unwrap();
    assert!((est - value).abs() <= 5.0 * se + 1e-9, "MC {est} vs exact {value} (se {se})");
}

#[test]
fn coupling_reports_equalities_and_triple_minimum() {
    let dir = scratch("coupling");
    let p = dir.join("p.json");
    let q = dir.join("q.json");
    std::fs::write(&p, "[[0.5,0.0],[0.0,0.5]]").unwrap();
    std::fs::write(&q, "[[0.0,0.5],[0.5,0.0]]").unwrap();
    let doc = json_of(&[
        "coupling",
        p.to_str().unwrap(),
        q.to_str().unwrap(),
        "--triple",
        "--format",
        "json",
    ]);
    assert!((doc["cost"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
    assert!((doc["pr_pair_differs"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
    assert!((doc["tv_joint"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
    assert!((doc["pr_x_differs"].as_f64().unwrap() - 0.0).abs() <= 1e-12);
    assert!((doc["triple_min"].as_f64().unwrap() - 2.0).abs() <= 1e-8);
}

#[test]
fn lessnoisy_orientation_follows_the_argument_order() {
    // Identity is less noisy than BSC(0.3): no counterexample expected.
    let clean = stdout_of(&["lessnoisy", "bsc:0.3", "bsc:0", "--trials", "2000"]);
    assert!(clean.contains("NO_COUNTEREXAMPLE_FOUND"), "{clean}");
    // The reverse claim is false and must produce a witness.
    let dirty = stdout_of(&["lessnoisy", "bsc:0", "bsc:0.3", "--trials", "2000"]);
    assert!(dirty.contains("NOT_LESS_NOISY"), "{dirty}");
}

#[test]
fn lessnoisy_erasure_reports_matched_erasure_probability() {
    let doc = json_of(&["lessnoisy", "bsc:0.2", "--erasure", "--format", "json"]);
    assert!((doc["eta_lower"].as_f64().unwrap() - 0.36).abs() <= 1e-12);
    assert!((doc["eta_upper"].as_f64().unwrap() - 0.36).abs() <= 1e-12);
    assert_eq!(doc["eta_exact"], true);
    assert!((doc["erasure_delta"].as_f64().unwrap() - 0.64).abs() <= 1e-12);
    assert_eq!(doc["verdict"]["verdict"], "NO_COUNTEREXAMPLE_FOUND", "{doc}");
}

#[test]
fn samorodnitsky_reproduces_the_half_eta_example() {
    // (1 − 2δ)² = ½ at δ = (1 − 2^(−1/2))/2.
    let delta = "0.14644660940672627";
    let doc = json_of(&[
        "samorodnitsky",
        "--component",
        &format!("bsc:{delta}"),
        "--n",
        "2",
        "--trials",
        "200",
        "--format",
        "json",
    ]);
    for eta in doc["etas"].as_array().unwrap() {
        assert!((eta.as_f64().unwrap() - 0.5).abs() <= 1e-12);
    }
    assert!((doc["base_prior"]["rhs"].as_f64().unwrap() - 0.75).abs() <= 1e-9);
    assert!(doc["base_prior"]["slack"].as_f64().unwrap() >= -1e-9);
    assert!(doc["max_violation"].as_f64().unwrap() <= 1e-9);
    assert_eq!(doc["base"], "bits");
}

#[test]
fn bsc_suite_rows_match_closed_forms() {
    let doc = json_of(&["bsc-suite", "--delta", "0.25", "--n-max", "2", "--format", "json"]);
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let r = &rows[1];
    assert_eq!(r["n"], 2);
    assert!((r["eta_tv_exact"].as_f64().unwrap() - 0.5).abs() <= 1e-12);
    assert!((r["kl_feedback_bound"].as_f64().unwrap() - 0.4375).abs() <= 1e-12);
    assert!((r["tv_product_bound"].as_f64().unwrap() - 0.75).abs() <= 1e-12);
    assert_eq!(doc["orderings_verified"], true);
}

#[test]
fn ficurve_csv_has_curve_header_and_pinned_origin() {
    let text = stdout_of(&["ficurve", "bsc", "0.25", "--grid", "9", "--format", "csv"]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,value,interpretation"));
    assert_eq!(lines.next(), Some("0,0,exact-single-use [bits]"));
    assert!(text.contains("1,"), "curve reaches t = 1: {text}");
}

#[test]
fn ficurve_erasure_witnesses_touch_the_bound() {
    let text = stdout_of(&["ficurve", "ec", "2", "0.3", "--n", "3", "--grid", "7", "--format", "csv"]);
    let cell = |label: &str| -> (f64, f64) {
        let line = text
            .lines()
            .find(|l| l.contains(label))
            .unwrap_or_else(|| panic!("missing {label} in {text}"));
        let mut it = line.split(',');
        let t: f64 = it.next().unwrap().parse().unwrap();
        let v: f64 = it.next().unwrap().parse().unwrap();
        (t, v)
    };
    for name in ["repetition", "single-parity"] {
        let (t_a, achieved) = cell(&format!("witness-{name}-achieved"));
        let (t_b, bound) = cell(&format!("bound-at-{name}-point"));
        assert!((t_a - t_b).abs() <= 1e-12);
        assert!(
            (achieved - bound).abs() <= 1e-9,
            "{name}: achieved {achieved} vs bound {bound}"
        );
    }
}

#[test]
fn estimator_output_is_deterministic_for_a_fixed_seed() {
    let args = ["ficurve", "bsc:0.2", "--grid", "4", "--restarts", "2", "--format", "csv"];
    let first = stdout_of(&args);
    let second = stdout_of(&args);
    assert_eq!(first, second, "same seed must give byte-identical artifacts");
    assert!(first.starts_with("t,value,interpretation\n"), "{first}");
    assert!(first.contains("estimated-lower-bound"), "{first}");
}

#[test]
fn out_flag_writes_the_artifact_to_a_file() {
    let dir = scratch("outflag");
    let path = dir.join("t1.txt");
    let direct = stdout_of(&["table1", "--eta", "0.3"]);
    let out = sdpi(&["table1", "--eta", "0.3", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty(), "artifact must go to the file only");
    assert_eq!(std::fs::read_to_string(&path).unwrap(), direct);
}

#[test]
fn nats_flag_scales_information_but_not_ratios() {
    let bits = json_of(&["lessnoisy", "bsc:0.2", "--erasure", "--format", "json"]);
    let nats = json_of(&["lessnoisy", "bsc:0.2", "--erasure", "--format", "json", "--nats"]);
    // Contraction coefficients are base-free.
    assert_eq!(bits["eta_lower"], nats["eta_lower"]);
    // The divergence-violation field carries units.
    let vb = bits["verdict"]["max_violation"].as_f64().unwrap();
    let vn = nats["verdict"]["max_violation"].as_f64().unwrap();
    assert!((vn - vb * LN_2).abs() <= 1e-15 + 1e-9 * vb.abs(), "bits {vb} vs nats {vn}");
    assert_eq!(bits["base"], "bits");
    assert_eq!(nats["base"], "nats");
}

#[test]
fn csv_is_reserved_for_curve_artifacts() {
    for args in [
        vec!["table1", "--format", "csv"],
        vec!["eta", "bsc:0.1", "--format", "csv"],
        vec!["coupling", "x", "y", "--format", "csv"],
    ] {
        let out = sdpi(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let out = sdpi(&["table1", "--format", "csv"]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("reserved for curve artifacts"), "{err}");
}

#[test]
fn usage_errors_exit_with_code_two() {
    assert_eq!(sdpi(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(sdpi(&["samorodnitsky"]).status.code(), Some(2));
    let out = sdpi(&["ficurve", "bsc", "0.25", "--grid", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("at least two knots"),
        "grid diagnostic names the constraint"
    );
}
