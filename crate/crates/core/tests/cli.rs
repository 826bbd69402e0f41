//! Black-box tests of the `tsenor` binary: exit codes, output files and the
//! JSON summaries.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::Value;
use tempfile::TempDir;

use tsenor::block::DenseMatrix;
use tsenor::io::{encode, read_mask, read_matrix, write_mask, write_matrix, BenchReport, TnmDtype};

const GOLDEN_CSV: &str = "0.88,0.01,0.84,0.27\n0.01,0.71,0.75,0.53\n0.82,0.78,0.15,0.25\n0.29,0.50,0.26,0.95\n";

fn tsenor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsenor")).args(args).env("TNM_THREADS", "2").output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn summary(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(text.lines().last().expect("summary line")).expect("summary is JSON")
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    DenseMatrix::new(rows, cols, (0..rows * cols).map(|_| StandardNormal.sample(rng)).collect()).unwrap()
}

fn golden_tiled(times: usize) -> DenseMatrix {
    let base = tsenor::io::parse_csv(GOLDEN_CSV).unwrap();
    let size = 4 * times;
    let mut out = DenseMatrix::zeros(size, size);
    for i in 0..size {
        for j in 0..size {
            out.set(i, j, base.get(i % 4, j % 4));
        }
    }
    out
}

#[test]
fn solve_golden_block_block_and_verify_the_mask() {
    let dir = TempDir::new().unwrap();
    let input = path(&dir, "w.csv");
    let mask = path(&dir, "mask.tnm");
    std::fs::write(&input, GOLDEN_CSV).unwrap();

    let out = tsenor(&["solve", "--input", s(&input), "--pattern", "2:4", "--output", s(&mask)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let line = summary(&out);
    assert!((line["objective"].as_f64().unwrap() - 6.05).abs() < 1e-9, "{line}");
    assert_eq!(line["blocks"], 1);

    let check = tsenor(&["verify", "--mask", s(&mask), "--pattern", "2:4", "--transposable", "--exact"]);
    assert_eq!(code(&check), 0);
    assert_eq!(summary(&check)["feasible"], true);
}

#[test]
fn dense_pattern_keeps_everything() {
    let dir = TempDir::new().unwrap();
    let input = path(&dir, "w.csv");
    let mask = path(&dir, "mask.tnm");
    std::fs::write(&input, GOLDEN_CSV).unwrap();
    let out = tsenor(&["solve", "--input", s(&input), "--pattern", "4:4", "--output", s(&mask)]);
    assert_eq!(code(&out), 0);
    assert!(read_mask(&mask).unwrap().values().iter().all(|&v| v == 1.0));
}

#[test]
fn invalid_pattern_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let input = path(&dir, "w.csv");
    std::fs::write(&input, GOLDEN_CSV).unwrap();
    let out = tsenor(&["solve", "--input", s(&input), "--pattern", "5:4"]);
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());
}

#[test]
fn non_divisible_input_is_a_runtime_error() {
    let dir = TempDir::new().unwrap();
    let input = path(&dir, "w.csv");
    std::fs::write(&input, "1,2,3\n4,5,6\n7,8,9\n").unwrap();
    let out = tsenor(&["solve", "--input", s(&input), "--pattern", "2:4"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn exact_bench_has_zero_error_and_reruns_identically() {
    let dir = TempDir::new().unwrap();
    let a = path(&dir, "a.json");
    let b = path(&dir, "b.json");
    let csv = path(&dir, "a.csv");
    let args = |report: &Path| {
        vec![
            "bench".to_string(),
            "--blocks".into(),
            "40".into(),
            "--n".into(),
            "4".into(),
            "--m".into(),
            "8".into(),
            "--solvers".into(),
            "exact,tsenor,greedy2".into(),
            "--seed".into(),
            "9".into(),
            "--report".into(),
            report.to_str().unwrap().into(),
        ]
    };
    let mut first = args(&a);
    first.extend(["--csv".to_string(), s(&csv).to_string()]);
    let first: Vec<&str> = first.iter().map(String::as_str).collect();
    assert_eq!(code(&tsenor(&first)), 0);
    let second = args(&b);
    let second: Vec<&str> = second.iter().map(String::as_str).collect();
    assert_eq!(code(&tsenor(&second)), 0);

    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let report = BenchReport::read(&a).unwrap();
    assert_eq!(report.records.len(), 3);
    assert_eq!(report.records[0].solver, "exact");
    assert_eq!(report.records[0].mean_relative_error, 0.0);
    assert!(report.records.iter().all(|r| r.wall_time_ms.is_none()));
    let table = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(table.lines().count(), 4);
}

#[test]
fn bench_sweep_writes_one_row_per_pattern_and_variant() {
    let out = tsenor(&["bench", "--sweep", "--blocks", "3"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 8 * 5);
}

#[test]
fn magnitude_prune_on_tiled_weights() {
    let dir = TempDir::new().unwrap();
    let weights = path(&dir, "w.tnm");
    let gram = path(&dir, "h.tnm");
    let output = path(&dir, "pruned.tnm");
    let mask = path(&dir, "mask.tnm");
    let w = golden_tiled(2);
    write_matrix(&weights, &w, TnmDtype::F64).unwrap();
    write_matrix(&gram, &DenseMatrix::identity(8), TnmDtype::F64).unwrap();

    let out = tsenor(&[
        "prune", "--weights", s(&weights), "--gram", s(&gram), "--pattern", "2:4", "--method", "magnitude",
        "--output", s(&output), "--mask", s(&mask),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let line = summary(&out);
    assert_eq!(line["method"], "magnitude");
    assert!(line["iterations"].is_null());

    // Every 4x4 tile gets the golden-block optimum: 4 tiles of 6.05 kept out of the total mass.
    let pruned = read_matrix(&output).unwrap();
    let kept: f64 = pruned.values().iter().sum();
    assert!((kept - 4.0 * 6.05).abs() < 1e-9, "kept {kept}");
    let total: f64 = w.values().iter().map(|v| v * v).sum();
    let dropped: f64 = w.values().iter().zip(pruned.values()).map(|(a, b)| (a - b) * (a - b)).sum();
    let err = line["reconstruction_error"].as_f64().unwrap();
    assert!((err - dropped / total).abs() < 1e-9);

    let check = tsenor(&["verify", "--mask", s(&mask), "--pattern", "2:4", "--transposable", "--exact"]);
    assert_eq!(code(&check), 0);
}

#[test]
fn admm_prune_converges_on_a_synthetic_layer() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let weights = path(&dir, "w.tnm");
    let acts = path(&dir, "x.tnm");
    let output = path(&dir, "pruned.tnm");
    let trace = path(&dir, "trace.json");
    write_matrix(&weights, &gaussian(64, 64, &mut rng), TnmDtype::F64).unwrap();
    write_matrix(&acts, &gaussian(256, 64, &mut rng), TnmDtype::F32).unwrap();

    let out = tsenor(&[
        "prune", "--weights", s(&weights), "--activations", s(&acts), "--pattern", "2:4", "--output", s(&output),
        "--trace", s(&trace),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let line = summary(&out);
    assert_eq!(line["converged"], true);
    assert!(line["final_residual"].as_f64().unwrap() < 1e-3, "{line}");

    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(doc["method"], "admm");
    let iterations = doc["admm"]["iterations"].as_array().unwrap();
    assert_eq!(iterations.len() as u64, line["iterations"].as_u64().unwrap());
    assert!(doc["lambda"].as_f64().unwrap() > 0.0);
}

#[test]
fn wanda_with_unit_activations_matches_magnitude() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let weights = path(&dir, "w.tnm");
    let acts = path(&dir, "x.tnm");
    let wanda = path(&dir, "wanda.tnm");
    let magnitude = path(&dir, "magnitude.tnm");
    write_matrix(&weights, &gaussian(16, 16, &mut rng), TnmDtype::F64).unwrap();
    write_matrix(&acts, &DenseMatrix::identity(16), TnmDtype::F64).unwrap();
    for (method, out) in [("wanda", &wanda), ("magnitude", &magnitude)] {
        let run = tsenor(&[
            "prune", "--weights", s(&weights), "--activations", s(&acts), "--pattern", "4:8", "--method", method,
            "--output", s(out),
        ]);
        assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    }
    assert_eq!(std::fs::read(&wanda).unwrap(), std::fs::read(&magnitude).unwrap());
}

#[test]
fn verify_reports_column_violations() {
    let dir = TempDir::new().unwrap();
    let mask = path(&dir, "mask.tnm");
    // Each row keeps 2 of 4, but the first column keeps all four.
    let bad = DenseMatrix::from_rows(&[
        vec![1.0, 1.0, 0.0, 0.0],
        vec![1.0, 0.0, 1.0, 0.0],
        vec![1.0, 0.0, 0.0, 1.0],
        vec![1.0, 0.0, 1.0, 0.0],
    ])
    .unwrap();
    write_mask(&mask, &bad).unwrap();

    let rows_only = tsenor(&["verify", "--mask", s(&mask), "--pattern", "2:4"]);
    assert_eq!(code(&rows_only), 0);

    let out = tsenor(&["verify", "--mask", s(&mask), "--pattern", "2:4", "--transposable"]);
    assert_eq!(code(&out), 3);
    let line = summary(&out);
    assert_eq!(line["feasible"], false);
    let violations = line["violations"].as_array().unwrap();
    assert_eq!(violations.len(), 1);
    assert_eq!(violations[0]["axis"], "col");
    assert_eq!(violations[0]["line"], 0);
    assert_eq!(violations[0]["count"], 4);
}

#[test]
fn truncated_mask_file_is_a_runtime_error() {
    let dir = TempDir::new().unwrap();
    let mask = path(&dir, "mask.tnm");
    let bytes = encode(&DenseMatrix::identity(4), TnmDtype::Mask).unwrap();
    std::fs::write(&mask, &bytes[..bytes.len() - 3]).unwrap();
    let out = tsenor(&["verify", "--mask", s(&mask), "--pattern", "2:4"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("truncated"));
}
