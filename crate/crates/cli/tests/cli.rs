//! End-to-end runs of the binary: stable exit codes, deterministic output,
//! and the documented file formats.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spectracalc"))
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process exited")
}

const DIAG123: &str = r#"{"mode": "numeric", "entries": [[1, 0, 0], [0, 2, 0], [0, 0, 3]]}"#;

const SHOWCASE: &str = r#"{
  "mode": "structured", "scalar_mode": "exact",
  "transform": [[1,2,3,4],[0,1,4,3],[2,0,1,1],[3,4,1,2]],
  "groups": [
    {"eigenvalue": 2, "block_sizes": [1]},
    {"eigenvalue": 3, "block_sizes": [1]},
    {"eigenvalue": 5, "block_sizes": [2]}
  ]
}"#;

const SHOWCASE_SCALED: &str = r#"{
  "mode": "structured", "scalar_mode": "exact",
  "transform": [[1,2,3,4],[0,1,4,3],[2,0,1,1],[3,4,1,2]],
  "groups": [
    {"eigenvalue": 2, "block_sizes": [1]},
    {"eigenvalue": 3, "block_sizes": [1]},
    {"eigenvalue": 10, "block_sizes": [2]}
  ]
}"#;

#[test]
fn decompose_diagonal_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write(dir.path(), "diag.json", DIAG123);
    let out = bin().arg("decompose").arg(&doc).output().unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("blocks [1]"));
    assert!(text.contains("all family identities hold"));
}

#[test]
fn decompose_showcase_structure() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write(dir.path(), "showcase.json", SHOWCASE);
    let out = bin().arg("decompose").arg(&doc).output().unwrap();
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("blocks [2]"));
}

#[test]
fn decompose_numeric_showcase_finds_structure() {
    // The showcase matrix as printed to two decimals decomposes to
    // {1},{1},{2} over eigenvalues near 2, 3, 5; the rounding perturbs the
    // defective pair by ~sqrt(5e-3), so the tolerances sit above that.
    let dir = tempfile::tempdir().unwrap();
    let doc = write(
        dir.path(),
        "x.json",
        r#"{"mode": "numeric", "entries": [
            [8.23, -1.91, 0.09, -2.14],
            [3.32, 2.73, 0.73, -1.59],
            [1.43, -0.23, 2.27, -0.66],
            [3.05, -1.18, -1.18, 1.77]],
            "tolerances": {"cluster_eps": 0.5, "recon_eps": 0.5, "rank_eps": 0.05}}"#,
    );
    let out = bin().arg("decompose").arg(&doc).output().unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("blocks [2]"), "{text}");
    assert!(text.contains("blocks [1]"), "{text}");
}

#[test]
fn decompose_ambiguous_clusters_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write(
        dir.path(),
        "near.json",
        r#"{"mode": "numeric", "entries": [[1, 0], [0, 1.000000000001]]}"#,
    );
    let out = bin()
        .arg("decompose")
        .arg(&doc)
        .arg("--cluster-eps")
        .arg("6e-13")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("clustering-ambiguous"));
}

#[test]
fn decompose_parse_error_exits_64() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write(dir.path(), "bad.json", "{ not json");
    let out = bin().arg("decompose").arg(&doc).output().unwrap();
    assert_eq!(code(&out), 64);
}

#[test]
fn classify_identical_and_scaled() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", SHOWCASE);
    let b = write(dir.path(), "b.json", SHOWCASE_SCALED);
    let out = bin().arg("classify").arg(&a).arg(&a).output().unwrap();
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("analogous"));
    assert!(text.contains("ratio 1"));

    let out = bin().arg("classify").arg(&a).arg(&b).output().unwrap();
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("ratio 2"));
    assert!(text.contains("determinant ratio: pass"));
}

#[test]
fn classify_different_partitions_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(
        dir.path(),
        "j2.json",
        r#"{"mode": "structured", "groups": [{"eigenvalue": 1, "block_sizes": [2]}]}"#,
    );
    let b = write(
        dir.path(),
        "diag.json",
        r#"{"mode": "structured", "groups": [{"eigenvalue": 1, "block_sizes": [1, 1]}]}"#,
    );
    let out = bin().arg("classify").arg(&a).arg(&b).output().unwrap();
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("not analogous"));
}

#[test]
fn classify_dimension_mismatch_exits_65() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", DIAG123);
    let b = write(
        dir.path(),
        "b.json",
        r#"{"mode": "numeric", "entries": [[1, 0], [0, 2]]}"#,
    );
    let out = bin().arg("classify").arg(&a).arg(&b).output().unwrap();
    assert_eq!(code(&out), 65);
}

#[test]
fn count_small_values_and_conventions() {
    let out = bin().arg("count").arg("2").output().unwrap();
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("families(2) = 3"));

    let out = bin()
        .arg("count")
        .arg("4")
        .arg("--both-conventions")
        .output()
        .unwrap();
    let text = stdout(&out);
    assert!(text.contains("families(4) = 15"));
    assert!(text.contains("unordered multisets) = 14"));

    let out = bin()
        .arg("count")
        .arg("100")
        .arg("--asymptotic")
        .arg("1")
        .output()
        .unwrap();
    let text = stdout(&out);
    assert!(text.contains("ratio = 1.04"), "{text}");

    let out = bin().arg("count").arg("500").output().unwrap();
    assert_eq!(code(&out), 64, "cap exceeded is a usage error");
}

#[test]
fn graph_is_deterministic_and_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write(
        dir.path(),
        "diag23.json",
        r#"{"mode": "numeric", "entries": [[2, 0], [0, 3]]}"#,
    );
    let one = bin().arg("graph").arg(&doc).output().unwrap();
    assert_eq!(code(&one), 0);
    let two = bin().arg("graph").arg(&doc).output().unwrap();
    assert_eq!(one.stdout, two.stdout, "byte-identical DOT");
    let text = stdout(&one);
    // Five nodes: two projectors, two nilpotents, zero.
    assert_eq!(text.matches("shape=").count(), 5);
    assert!(text.contains("digraph asg"));

    let dot_path = dir.path().join("out.dot");
    let out = bin()
        .arg("graph")
        .arg(&doc)
        .arg("--dot")
        .arg(&dot_path)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read(&dot_path).unwrap(), one.stdout);
}

#[test]
fn graph_showcase_has_single_degree_two_chain() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write(dir.path(), "showcase.json", SHOWCASE);
    let out = bin().arg("graph").arg(&doc).output().unwrap();
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let decays_to_zero = text.lines().filter(|l| l.contains("-> zero")).count();
    assert_eq!(decays_to_zero, 3);
    assert_eq!(text.matches("label=\"PN\"").count(), 1);
}

#[test]
fn apply_exp_to_nilpotent_block() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "exp.json", r#"{"builtin": "exp"}"#);
    let m = write(
        dir.path(),
        "j2.json",
        r#"{"mode": "numeric", "entries": [[0, 1], [0, 0]]}"#,
    );
    let out = bin()
        .arg("apply")
        .arg(&f)
        .arg(&m)
        .arg("--check")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("1.0000  1.0000"));
    assert!(text.contains("oracle residual"));
}

#[test]
fn apply_square_of_showcase_checks_out() {
    let dir = tempfile::tempdir().unwrap();
    // String coefficients are exact, matching the exact-mode document.
    let f = write(
        dir.path(),
        "square.json",
        r#"{"series": {"arity": 1, "coeffs": [[2, "1", "0"]]}}"#,
    );
    let m = write(dir.path(), "showcase.json", SHOWCASE);
    let out = bin()
        .arg("apply")
        .arg(&f)
        .arg(&m)
        .arg("--check")
        .arg("--oracle-degree")
        .arg("2")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn apply_two_variable_series_with_check() {
    let dir = tempfile::tempdir().unwrap();
    // exp(z1 + z2) truncated at total degree 10.
    let mut coeffs = Vec::new();
    for l1 in 0..=10u32 {
        for l2 in 0..=(10 - l1) {
            let fact = |n: u32| (1..=n).map(|k| k as f64).product::<f64>().max(1.0);
            coeffs.push(format!("[{l1}, {l2}, {:.17e}, 0.0]", 1.0 / (fact(l1) * fact(l2))));
        }
    }
    let f = write(
        dir.path(),
        "exp2.json",
        &format!(
            r#"{{"series": {{"arity": 2, "coeffs": [{}]}}}}"#,
            coeffs.join(", ")
        ),
    );
    let a = write(
        dir.path(),
        "a.json",
        r#"{"mode": "structured", "transform": "random_seed:5",
            "groups": [{"eigenvalue": [0.4, 0.1], "block_sizes": [2]},
                       {"eigenvalue": [-0.3, 0.0], "block_sizes": [1]}]}"#,
    );
    let b = write(
        dir.path(),
        "b.json",
        r#"{"mode": "structured", "transform": "random_seed:6",
            "groups": [{"eigenvalue": [0.2, -0.2], "block_sizes": [2]},
                       {"eigenvalue": [0.7, 0.0], "block_sizes": [1]}]}"#,
    );
    let out = bin()
        .arg("apply")
        .arg(&f)
        .arg(&a)
        .arg(&b)
        .arg("--check")
        .arg("--oracle-degree")
        .arg("10")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn apply_arity_mismatch_exits_65() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "exp.json", r#"{"builtin": "exp"}"#);
    let a = write(dir.path(), "a.json", DIAG123);
    let b = write(dir.path(), "b.json", DIAG123);
    let out = bin().arg("apply").arg(&f).arg(&a).arg(&b).output().unwrap();
    assert_eq!(code(&out), 65);
}

#[test]
fn apply_radius_violation_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "geo.json", r#"{"builtin": "geometric"}"#);
    let m = write(dir.path(), "big.json", DIAG123);
    let out = bin().arg("apply").arg(&f).arg(&m).output().unwrap();
    assert_eq!(code(&out), 3);
}

#[test]
fn apply_hybrid_document() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "exp.json", r#"{"builtin": "exp"}"#);
    let h = write(
        dir.path(),
        "hybrid.json",
        r#"{"discrete": [[0.5, 0.0, 2, 1]],
            "continuous": {"interval": [-0.4, 0.4], "nodes": 4, "m": 1},
            "transform": "random_seed:9"}"#,
    );
    let out = bin()
        .arg("apply")
        .arg(&f)
        .arg(&h)
        .arg("--check")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    // Deterministic across runs (seeded transform).
    let again = bin()
        .arg("apply")
        .arg(&f)
        .arg(&h)
        .arg("--check")
        .output()
        .unwrap();
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn apply_json_output_is_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "exp.json", r#"{"builtin": "exp"}"#);
    let m = write(
        dir.path(),
        "third.json",
        r#"{"mode": "numeric", "entries": [[0.333333333333333314829616256247]]}"#,
    );
    let out = bin().arg("apply").arg(&f).arg(&m).arg("--json").output().unwrap();
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let got = v["result"][0][0][0].as_f64().unwrap();
    assert!((got - (1.0f64 / 3.0).exp()).abs() < 1e-15);
}

#[test]
fn max_terms_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "poly.json",
        r#"{"series": {"arity": 1, "coeffs": [[0, 1.0, 0.0], [1, 1.0, 0.0], [2, 0.5, 0.0]]}}"#,
    );
    let m = write(dir.path(), "m.json", r#"{"mode": "numeric", "entries": [[0.5]]}"#);
    let out = bin()
        .arg("apply")
        .arg(&f)
        .arg(&m)
        .env("SPECTRACALC_MAX_TERMS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&out), 3, "series cap exhaustion is a numerical failure");
    let ok = bin().arg("apply").arg(&f).arg(&m).output().unwrap();
    assert_eq!(code(&ok), 0);
}

#[test]
fn verify_reports_clean_family() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write(dir.path(), "showcase.json", SHOWCASE);
    let out = bin().arg("verify").arg(&doc).output().unwrap();
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("all family identities hold"));
}
