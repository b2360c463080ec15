//! End-to-end smoke tests for the benchmark binary: each subcommand runs on
//! tiny configurations, emits well-formed CSV/JSON, reproduces byte-identically
//! under a fixed seed, and fails loudly on bad input.

use std::path::Path;
use std::process::{Command, Output};

fn bench(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparse-mpc-bench"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary should spawn")
}

fn run_ok(dir: &Path, args: &[&str]) -> String {
    let out = bench(dir, args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn csv_lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(str::to_owned)
        .collect()
}

#[test]
fn matvec_sweep_emits_rows_and_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "matvec-sweep",
        "--sizes",
        "32,64",
        "--sparsities",
        "0.99",
        "--seed",
        "11",
        "--out",
        "mv.csv",
    ];
    run_ok(dir.path(), &args);
    let lines = csv_lines(&dir.path().join("mv.csv"));
    assert_eq!(
        lines[0],
        "m,sparsity,algo,elements_sent,bytes_sent,rounds,peak_storage,nnz_x,nnz_y,opened_values"
    );
    // One sparse and one dense row per (size, sparsity) pair.
    assert_eq!(lines.len(), 1 + 4);
    assert_eq!(lines.iter().filter(|l| l.contains(",sparse,")).count(), 2);
    assert_eq!(lines.iter().filter(|l| l.contains(",dense,")).count(), 2);

    let first = std::fs::read(dir.path().join("mv.csv")).unwrap();
    run_ok(dir.path(), &args);
    let second = std::fs::read(dir.path().join("mv.csv")).unwrap();
    assert_eq!(first, second, "same seed must reproduce the file bit-identically");
}

#[test]
fn matmat_sweep_reports_minmult() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        dir.path(),
        &[
            "matmat-sweep",
            "--rows",
            "20",
            "--sizes",
            "64",
            "--sparsities",
            "0.95",
            "--out",
            "mm.csv",
        ],
    );
    let lines = csv_lines(&dir.path().join("mm.csv"));
    assert_eq!(
        lines[0],
        "n,m,sparsity,algo,elements_sent,bytes_sent,rounds,peak_storage,nnz_x,minmult,opened_values"
    );
    assert_eq!(lines.len(), 1 + 2);
    // Both rows of a config cite the same public minmult.
    let minmult: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(9).unwrap()).collect();
    assert_eq!(minmult[0], minmult[1]);
    assert!(minmult[0].parse::<u64>().unwrap() > 0);
}

#[test]
fn overhead_synthetic_orders_techniques() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(dir.path(), &["overhead", "--out", "ov.csv"]);
    let lines = csv_lines(&dir.path().join("ov.csv"));
    assert_eq!(lines[0], "dataset,technique,storage_elements,rows,cols");
    let get = |dataset: &str, technique: &str| -> u64 {
        lines[1..]
            .iter()
            .find(|l| l.starts_with(&format!("{dataset},{technique},")))
            .unwrap_or_else(|| panic!("missing {dataset}/{technique} row"))
            .split(',')
            .nth(2)
            .unwrap()
            .parse()
            .unwrap()
    };
    // Anonymization never changes the footprint; templates beat max-row
    // padding on skewed data and tie it on constant-degree data.
    assert_eq!(get("powerlaw", "anonymized"), get("powerlaw", "raw-sparse"));
    assert!(get("powerlaw", "template") < get("powerlaw", "max-pad"));
    assert_eq!(get("uniform", "raw-sparse"), get("uniform", "max-pad"));
    assert_eq!(get("uniform", "max-pad"), get("uniform", "template"));
}

#[test]
fn generate_round_trips_and_quantile_template_matches() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        dir.path(),
        &["generate", "--rows", "80", "--cols", "128", "--out", "gen.csv", "--seed", "5"],
    );
    let m = sparse_mpc::sparse::ingest_triplets(&dir.path().join("gen.csv")).unwrap();
    assert_eq!(m.rows, 80);
    assert!(m.nnz() >= 80, "every row draws at least one non-zero");

    let counts: Vec<String> = (1..=100).map(|c| c.to_string()).collect();
    std::fs::write(dir.path().join("counts.txt"), counts.join("\n")).unwrap();
    let stdout = run_ok(
        dir.path(),
        &["quantile-template", "--counts", "counts.txt", "--out", "t.json"],
    );
    assert!(stdout.contains("[25, 50, 75, 90, 99, 100]"), "unexpected output: {stdout}");
    let template = sparse_mpc::minimize::Template::load(&dir.path().join("t.json")).unwrap();
    assert_eq!(template.total_rows, 100);
    assert_eq!(template.blocks.last().unwrap().nnz_bound, 100);
}

#[test]
fn dp_and_pop_curves_emit_expected_grids() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        dir.path(),
        &["dp-curves", "--blocks", "4,8", "--rows", "256", "--out", "dp.csv"],
    );
    let lines = csv_lines(&dir.path().join("dp.csv"));
    assert_eq!(lines[0], "blocks,i,threshold,fhat,bound,epsilon,delta");
    assert_eq!(lines.len(), 1 + 4 + 8);

    run_ok(
        dir.path(),
        &[
            "pop-curves",
            "--lambdas",
            "0,5",
            "--rows",
            "256",
            "--sample-size",
            "64",
            "--out",
            "pop.csv",
        ],
    );
    let lines = csv_lines(&dir.path().join("pop.csv"));
    assert_eq!(lines[0], "degree,fraction,lambda,variant,bound");
    // lambda = 0 population bound equals the exact fraction.
    for line in &lines[1..] {
        let f: Vec<&str> = line.split(',').collect();
        if f[2] == "0.0" && f[3] == "population" {
            assert_eq!(f[1], f[4], "lambda=0 bound must equal the fraction: {line}");
        }
    }
}

#[test]
fn bad_inputs_exit_nonzero_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();

    let out = bench(dir.path(), &["matvec-sweep", "--sizes", "16384"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("must be in 1..="));

    let out = bench(dir.path(), &["matvec-sweep", "--sparsities", "1.5"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("sparsity"));

    let out = bench(dir.path(), &["matvec-sweep", "--parties", "3", "--threshold", "2"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("2t < N"));

    std::fs::write(dir.path().join("bad.txt"), "3\nnot-a-number\n").unwrap();
    let out = bench(dir.path(), &["quantile-template", "--counts", "bad.txt"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    // A config whose intermediate product list would blow the desk cap.
    let out = bench(
        dir.path(),
        &["matmat-sweep", "--rows", "100", "--sizes", "4096", "--sparsities", "0.99"],
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("desk-scale cap"));
}
