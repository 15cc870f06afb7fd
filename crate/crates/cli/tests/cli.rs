use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use locfit_cli::report::{read_compare_report, CompareReport, FitDocument, SCHEMA};

fn locfit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_locfit")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn synth(dir: &Path, name: &str, family: &str, params: &str, c: &str, n: &str, seed: &str) -> PathBuf {
    let path = dir.join(name);
    let out = locfit(&[
        "synth", "--family", family, "--params", params, "--c", c, "--n", n, "--seed", seed, "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn values(path: &Path) -> Vec<f64> {
    locfit::ingest::read_sample(path).unwrap().values
}

#[test]
fn measure_writes_one_line_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.txt");
    let out = locfit(&["measure", "--cmd", "true", "--runs", "5", "--warmup", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = values(&path);
    assert_eq!(v.len(), 5);
    assert!(v.iter().all(|x| *x > 0.0));
}

#[test]
fn measure_validation() {
    assert_eq!(code(&locfit(&["measure", "--runs", "3", "--out", "x.txt"])), 1);
    assert_eq!(code(&locfit(&["measure", "--cmd", "true", "--runs", "0", "--out", "x.txt"])), 1);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.txt");
    let failing = locfit(&["measure", "--cmd", "exit 4", "--runs", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&failing), 3);
}

#[test]
fn synth_is_reproducible_and_shifted() {
    let dir = tempfile::tempdir().unwrap();
    let a = synth(dir.path(), "a.txt", "lnormal", "0,0.1", "100", "1000", "7");
    let b = synth(dir.path(), "b.txt", "lnormal", "0,0.1", "100", "1000", "7");
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let v = values(&a);
    assert_eq!(v.len(), 1000);
    assert!(v.iter().all(|x| *x > 100.0));
    let negative = synth(dir.path(), "n.txt", "normal", "-3,1", "-1", "10", "1");
    assert_eq!(values(&negative).len(), 10);
}

#[test]
fn synth_rejects_bad_parameters() {
    let out = locfit(&["synth", "--family", "gamma", "--params", "2", "--n", "10", "--out", "x.txt"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("takes 2 parameters"));
    let out = locfit(&["synth", "--family", "gamma", "--params", "-2,1", "--n", "10", "--out", "x.txt"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn fit_counts_cells_and_validates_names() {
    let dir = tempfile::tempdir().unwrap();
    let s = synth(dir.path(), "s.txt", "gamma", "2,1", "10", "200", "3");
    let report = dir.path().join("fit.json");
    let out = locfit(&[
        "fit", "--input", s.to_str().unwrap(), "--families", "gamma,weibull", "--methods", "c3,standard", "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc: FitDocument = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc.schema, SCHEMA);
    assert_eq!(doc.cells.len(), 4);
    assert_eq!(doc.input.n, 200);
    assert!(doc.cells.iter().all(|c| c.ok()));
    let c3 = doc.cells.iter().find(|c| c.method.to_string() == "c3").unwrap();
    assert!(c3.outcome.as_ref().unwrap().c_hat.unwrap() < 10.0 + 1e-9 + values(&s).iter().cloned().fold(f64::INFINITY, f64::min));

    let out = locfit(&["fit", "--input", s.to_str().unwrap(), "--families", "gamma,nope"]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("nope") && err.contains("weibull") && err.contains("ollgg"), "{err}");

    let out = locfit(&["fit", "--input", s.to_str().unwrap(), "--methods", "c5"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn fit_all_methods_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let s = synth(dir.path(), "s.txt", "weibull", "2,1.5", "5", "100", "4");
    let out = locfit(&["fit", "--input", s.to_str().unwrap(), "--families", "weibull", "--methods", "all"]);
    assert_eq!(code(&out), 0);
    let doc: FitDocument = serde_json::from_slice(&out.stdout).unwrap();
    let methods: Vec<String> = doc.cells.iter().map(|c| c.method.to_string()).collect();
    assert_eq!(methods, ["standard", "inferC", "c1", "c2", "c3", "c4", "iteratedC"]);
}

#[test]
fn fit_exit_status_when_every_cell_fails() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("neg.txt");
    std::fs::write(&s, "-1\n-2\n-3\n").unwrap();
    let out = locfit(&["fit", "--input", s.to_str().unwrap(), "--families", "lnormal", "--methods", "standard"]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    let doc: FitDocument = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc.cells[0].error.is_some());
}

#[test]
fn io_and_parse_errors_exit_three() {
    let out = locfit(&["fit", "--input", "/nonexistent/sample.txt"]);
    assert_eq!(code(&out), 3);
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("bad.txt");
    std::fs::write(&s, "1\nabc\n").unwrap();
    let out = locfit(&["fit", "--input", s.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(code(&locfit(&["--help"])), 0);
    assert_eq!(code(&locfit(&["--version"])), 0);
    assert_eq!(code(&locfit(&["frobnicate"])), 1);
}

fn compare(dir: &Path, inputs: &[PathBuf], extra: &[&str]) -> (CompareReport, PathBuf) {
    let out_dir = dir.join("out");
    let mut args = vec!["compare".to_string()];
    for i in inputs {
        args.push("--input".into());
        args.push(i.display().to_string());
    }
    args.extend(extra.iter().map(|s| s.to_string()));
    args.push("--out-dir".into());
    args.push(out_dir.display().to_string());
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = locfit(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    (read_compare_report(&out_dir.join("report.json")).unwrap(), out_dir)
}

#[test]
fn compare_counts_and_marginalizes() {
    let dir = tempfile::tempdir().unwrap();
    let inputs: Vec<PathBuf> = (1..=3)
        .map(|s| synth(dir.path(), &format!("s{s}.txt"), "gamma", "2,1", "20", "150", &s.to_string()))
        .collect();
    let (report, out_dir) = compare(dir.path(), &inputs, &["--families", "gamma,weibull", "--methods", "standard,c3"]);
    assert_eq!(report.cells.len(), 12);
    assert!(report.marginalized);
    for metric in ["neg2l", "aic", "caic", "hqic", "bic"] {
        let deltas = &report.deltas[metric];
        assert_eq!(deltas.len(), 6, "{metric}");
        for set in &report.sets {
            let zeros = deltas.iter().filter(|d| d.set == set.label && d.delta == 0.0).count();
            assert_eq!(zeros, 1, "{metric} {}", set.label);
        }
        assert!(deltas.iter().all(|d| d.delta <= 0.0));
    }
    assert!(!report.deltas.contains_key("cv_neg2l"));
    for name in ["metrics.csv", "deltas.csv", "deltas_wide.csv", "wins.csv", "timings.csv"] {
        assert!(out_dir.join(name).exists(), "{name}");
    }
    let wide = std::fs::read_to_string(out_dir.join("deltas_wide.csv")).unwrap();
    assert!(wide.starts_with("metric,set,standard,c3\n"));
    // wins per metric and place sum to the number of sets
    let firsts: usize = report.wins.iter().filter(|w| w.metric == "aic" && w.place == 1).map(|w| w.count).sum();
    assert_eq!(firsts, 3);
}

#[test]
fn compare_per_family_and_folds() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = vec![
        synth(dir.path(), "a.txt", "weibull", "2,1.5", "3", "100", "1"),
        synth(dir.path(), "b.txt", "weibull", "2,1.5", "3", "100", "2"),
    ];
    let (report, out_dir) = compare(
        dir.path(),
        &inputs,
        &["--families", "gamma,weibull", "--methods", "c2,c4", "--folds", "5", "--per-family"],
    );
    assert!(!report.marginalized);
    assert_eq!(report.deltas["cv_neg2l"].len(), 8);
    assert!(report.cells.iter().all(|c| c.metrics.unwrap().cv_neg2l.is_some()));
    let header = std::fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    assert!(header.lines().next().unwrap().contains("cv_neg2l"));
    let within: Vec<_> = report.wins.iter().filter(|w| w.metric == "neg2l" && w.place == 1).collect();
    assert!(within.iter().all(|w| w.within_method == Some(w.method)));
    // each method ranks its families on every set
    assert_eq!(within.iter().map(|w| w.count).sum::<usize>(), 2 * 2);
}

#[test]
fn render_regenerates_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = vec![synth(dir.path(), "a.txt", "gamma", "3,2", "1", "120", "9")];
    let (_, out_dir) = compare(dir.path(), &inputs, &["--families", "gamma", "--methods", "standard,c2,inferC"]);
    let again = dir.path().join("again");
    let out = locfit(&[
        "render", "--report", out_dir.join("report.json").to_str().unwrap(), "--out-dir", again.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    for name in ["metrics.csv", "deltas.csv", "deltas_wide.csv", "wins.csv", "timings.csv"] {
        assert_eq!(std::fs::read(out_dir.join(name)).unwrap(), std::fs::read(again.join(name)).unwrap(), "{name}");
    }
    let garbage = dir.path().join("g.json");
    std::fs::write(&garbage, "{}").unwrap();
    let out = locfit(&["render", "--report", garbage.to_str().unwrap(), "--out-dir", again.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

#[test]
fn duplicate_labels_stay_distinct() {
    let dir = tempfile::tempdir().unwrap();
    let a = synth(dir.path(), "a.txt", "gamma", "2,1", "0", "60", "1");
    let (report, _) = compare(dir.path(), &[a.clone(), a], &["--families", "gamma", "--methods", "c2"]);
    assert_eq!(report.sets.len(), 2);
    assert_ne!(report.sets[0].label, report.sets[1].label);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let s = synth(dir.path(), "s.txt", "gamma", "2,1", "4", "80", "5");
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_locfit"))
            .env("LOCFIT_THREADS", threads)
            .args(["fit", "--input", s.to_str().unwrap(), "--families", "gamma,weibull", "--methods", "c2,inferC"])
            .output()
            .unwrap();
        assert_eq!(code(&out), 0);
        let doc: FitDocument = serde_json::from_slice(&out.stdout).unwrap();
        doc.cells.into_iter().map(|c| (c.family, c.method, c.outcome.unwrap().params)).collect::<Vec<_>>()
    };
    assert_eq!(run("1"), run("4"));
    let out = Command::new(env!("CARGO_BIN_EXE_locfit"))
        .env("LOCFIT_THREADS", "0")
        .args(["fit", "--input", s.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
}

#[test]
fn halves_summarizes_a_sample() {
    let dir = tempfile::tempdir().unwrap();
    let s = synth(dir.path(), "s.txt", "gamma", "2,1", "0", "100", "5");
    let out = locfit(&["halves", "--input", s.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["sup_distance"].as_f64().unwrap() >= 0.0);
}

#[test]
fn run_in_process() {
    assert_eq!(locfit_cli::run(["locfit", "fit"]), 1);
    assert_eq!(locfit_cli::run(["locfit", "--help"]), 0);
}
