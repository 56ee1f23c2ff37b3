use std::path::Path;
use std::process::{Command, Output};

use entangle_core::io::StateFile;
use entangle_core::states;

fn entangle(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entangle"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Value of `KEY=` in a report.
fn value(out: &Output, key: &str) -> String {
    let prefix = format!("{key}=");
    stdout(out)
        .lines()
        .find_map(|l| l.strip_prefix(&prefix).map(str::to_string))
        .unwrap_or_else(|| panic!("no {key} in:\n{}", stdout(out)))
}

fn number(out: &Output, key: &str) -> f64 {
    value(out, key).parse().unwrap()
}

#[test]
fn gen_werner_matches_library_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = entangle(dir.path(), &["gen", "werner", "--p", "0.5", "-o", "w.state"]);
    assert!(out.status.success());
    assert_eq!(value(&out, "DIMS"), "2,2");
    let file = StateFile::read(dir.path().join("w.state")).unwrap();
    let rho = file.to_density().unwrap();
    let expected = states::werner(0.5).unwrap();
    assert_eq!(rho.matrix().as_slice(), expected.matrix().as_slice());
    // entrywise: (1 - p)/4 on the diagonal plus p/2 on the Φ+ block
    assert_eq!(rho.matrix()[(0, 0)].re, 0.375);
    assert_eq!(rho.matrix()[(0, 3)].re, 0.25);
    assert_eq!(rho.matrix()[(1, 1)].re, 0.125);
}

#[test]
fn gen_ghz_is_an_eight_dimensional_pure_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = entangle(dir.path(), &["gen", "ghz"]);
    let text = stdout(&out);
    assert!(text.starts_with("kind: pure\ndims: 2,2,2\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with('[')).count(), 8);
}

#[test]
fn gen_random_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gen", "random", "--dims", "3,3", "--rank", "2", "--seed", "7"];
    let a = entangle(dir.path(), &args);
    let b = entangle(dir.path(), &args);
    assert_eq!(a.stdout, b.stdout);
    let file = StateFile::parse(&stdout(&a)).unwrap();
    let rho = file.to_density().unwrap();
    assert_eq!(rho.spectrum().iter().filter(|&&l| l > 1e-10).count(), 2);
    assert_eq!(file.seed, Some(7));
}

#[test]
fn analyze_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    entangle(d, &["gen", "werner", "--p", "0.9", "-o", "w9.state"]);
    entangle(d, &["gen", "werner", "--p", "0.2", "-o", "w2.state"]);
    entangle(d, &["gen", "symasym", "--alpha", "0.7", "-o", "sa.state"]);

    let out = entangle(d, &["analyze", "w9.state"]);
    assert_eq!(out.status.code(), Some(1));
    assert!((number(&out, "PPT_MARGIN") + 0.425).abs() < 1e-12);
    assert_eq!(value(&out, "VERDICT"), "ENTANGLED");

    assert_eq!(entangle(d, &["analyze", "w2.state"]).status.code(), Some(0));

    let out = entangle(d, &["analyze", "sa.state"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(value(&out, "VERDICT"), "UNDECIDED");
}

#[test]
fn malformed_input_exits_64() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.state"), "dims: 2\nmatrix:\n[0.5, 0] [0, 0]\n[0, 0] [0.7, 0]\n").unwrap();
    let out = entangle(d, &["analyze", "bad.state"]);
    assert_eq!(out.status.code(), Some(64));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("trace deviates from 1 by 2.000e-1"), "{err}");
    assert_eq!(entangle(d, &["analyze", "missing.state"]).status.code(), Some(64));
    assert_eq!(entangle(d, &["no-such-command"]).status.code(), Some(64));
    assert_eq!(entangle(d, &["gen", "werner"]).status.code(), Some(64));
}

#[test]
fn distill_table_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = entangle(d, &["distill", "--fidelity", "0.75", "--target", "0.99"]);
    assert!(out.status.success());
    let afters: Vec<f64> = stdout(&out)
        .lines()
        .skip(1)
        .take_while(|l| !l.contains('='))
        .map(|l| l.split_whitespace().nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(afters.windows(2).all(|w| w[1] > w[0]));
    assert!(*afters.last().unwrap() >= 0.99);
    assert_eq!(value(&out, "REACHED_TARGET"), "true");

    let out = entangle(d, &["distill", "--fidelity", "1.0"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 1);

    assert_eq!(entangle(d, &["distill", "--fidelity", "0.4", "--target", "0.9"]).status.code(), Some(3));
    assert_eq!(entangle(d, &["distill", "--fidelity", "0.75", "--max-steps", "2"]).status.code(), Some(1));

    entangle(d, &["gen", "werner", "--p", "0.8", "-o", "w8.state"]);
    let out = entangle(d, &["distill", "w8.state", "--target", "0.95"]);
    assert!(out.status.success());
    assert!((number(&out, "INITIAL_FIDELITY") - 0.85).abs() < 1e-12);
}

#[test]
fn witness_build_then_eval() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    entangle(d, &["gen", "werner", "--p", "0.5", "-o", "w.state"]);
    let out = entangle(d, &["witness", "build", "w.state", "-o", "w.wit"]);
    assert!(out.status.success());
    let out = entangle(d, &["witness", "eval", "w.wit", "w.state"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((number(&out, "EXPECTATION") + 0.125).abs() < 1e-12);

    entangle(d, &["gen", "werner", "--p", "0.2", "-o", "ppt.state"]);
    let out = entangle(d, &["witness", "build", "ppt.state", "-o", "never.wit"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8(out.stderr).unwrap().contains("positive partial transpose"));
    assert!(!d.join("never.wit").exists());
}

#[test]
fn tripartite_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    entangle(d, &["gen", "ghz", "-o", "ghz.state"]);
    let out = entangle(d, &["witness", "classify3", "ghz.state"]);
    assert!(stdout(&out).contains("GHZ∖W evidence: -0.25"));
    assert_eq!(value(&out, "GHZ_NOT_W"), "true");

    entangle(d, &["witness", "named", "w", "-o", "w.wit"]);
    entangle(d, &["gen", "basis", "--dims", "2,2,2", "--index", "0", "-o", "zero.state"]);
    let out = entangle(d, &["witness", "eval", "w.wit", "zero.state"]);
    assert_ne!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("expectation: 0.6667"));
}

#[test]
fn jamiolkowski_and_optimize() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = entangle(d, &["witness", "jamiolkowski", "reduction", "--d", "3", "-o", "red.wit"]);
    assert!(out.status.success());
    entangle(d, &["gen", "maxent", "--d", "3", "-o", "phi.state"]);
    let out = entangle(d, &["witness", "eval", "red.wit", "phi.state"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((number(&out, "EXPECTATION") - (1.0 / 3.0 - 1.0)).abs() < 1e-12);

    let out = entangle(d, &["witness", "optimize", "red.wit", "--seed", "2", "--restarts", "6", "-o", "opt.wit"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(number(&out, "POST_MIN_PRODUCT").abs() < 1e-6);
    assert_eq!(entangle(d, &["witness", "optimize", "red.wit"]).status.code(), Some(64));
}

#[test]
fn measure_examples() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    entangle(d, &["gen", "bell", "-o", "bell.state"]);
    let out = entangle(d, &["measure", "bell.state", "--kind", "formation", "--seed", "1"]);
    assert!((number(&out, "VALUE") - 1.0).abs() < 1e-3);
    assert_eq!(value(&out, "BOUND"), "upper");
    assert!(stdout(&out).contains("upper estimate"));

    entangle(d, &["gen", "separable", "--dims", "2,2", "--terms", "3", "--seed", "4", "-o", "sep.state"]);
    let out = entangle(d, &["measure", "sep.state", "--kind", "relent", "--seed", "2"]);
    assert!(number(&out, "VALUE") <= 1e-3);

    entangle(d, &["gen", "maxent", "--d", "3", "-o", "m3.state"]);
    let out = entangle(d, &["measure", "m3.state", "--kind", "entropy"]);
    assert!((number(&out, "VALUE") - 3f64.log2()).abs() < 1e-9);
    assert_eq!(value(&out, "BOUND"), "exact");

    let out = entangle(d, &["measure", "bell.state", "--kind", "bounds", "--seed", "1"]);
    assert_eq!(value(&out, "PPT"), "false");
    assert_eq!(value(&out, "DISTILLABILITY"), "DISTILLABLE(1)");
    assert!(value(&out, "UPPER_LABEL").contains("conjectured"));

    assert_eq!(entangle(d, &["measure", "sep.state", "--kind", "entropy"]).status.code(), Some(64));
    assert_eq!(entangle(d, &["measure", "sep.state", "--kind", "relent"]).status.code(), Some(64));
}

#[test]
fn distillable_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    entangle(d, &["gen", "werner", "--p", "0.5", "-o", "w.state"]);
    let out = entangle(d, &["distillable", "w.state", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((number(&out, "VALUE") + 0.125).abs() < 1e-8);

    entangle(d, &["gen", "symasym", "--alpha", "0.8", "-o", "ppt.state"]);
    let out = entangle(d, &["distillable", "ppt.state", "--seed", "3", "--restarts", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(value(&out, "VERDICT"), "INCONCLUSIVE");
}

#[test]
fn sequential_and_parallel_agree() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    entangle(d, &["gen", "random", "--dims", "2,3", "--seed", "5", "-o", "r.state"]);
    let a = entangle(d, &["measure", "r.state", "--kind", "formation", "--seed", "8"]);
    let b = entangle(d, &["measure", "r.state", "--kind", "formation", "--seed", "8", "--sequential"]);
    assert_eq!(a.stdout, b.stdout);
}
