//! Getting samples in: timing external commands, sample files, and
//! synthetic draws with a known location.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::Instant;

use crate::distributions::Family;
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Measured,
    File,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub values: Vec<f64>,
    pub label: String,
    pub provenance: Provenance,
    pub metadata: BTreeMap<String, String>,
}

impl Sample {
    pub fn new(values: Vec<f64>, label: impl Into<String>, provenance: Provenance) -> Self {
        Sample { values, label: label.into(), provenance, metadata: BTreeMap::new() }
    }
}

/// Environment variable carrying a per-run seed to measured children.
pub const SEED_ENV: &str = "LOCFIT_SEED";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MeasureOptions {
    /// When set, children see `LOCFIT_SEED=<value>`.
    pub seed_env: Option<u64>,
}

/// Runs `command` through `sh -c`, `warmup` times unrecorded and then `runs`
/// times, recording each child's wall-clock time from spawn to exit in
/// seconds. Children run one at a time.
pub fn measure_command(command: &str, runs: usize, warmup: usize, opts: &MeasureOptions) -> Result<Sample> {
    if command.trim().is_empty() {
        return Err(domain("command must not be empty"));
    }
    if runs == 0 {
        return Err(domain("runs must be at least 1"));
    }
    let run_once = |run: usize| -> Result<f64> {
        let mut cmd = Command::new("sh");
        cmd.arg("-c").arg(command).stdin(Stdio::null()).stdout(Stdio::null()).stderr(Stdio::null());
        if let Some(seed) = opts.seed_env {
            cmd.env(SEED_ENV, seed.to_string());
        }
        let t0 = Instant::now();
        let status = cmd
            .spawn()
            .and_then(|mut child| child.wait())
            .map_err(|e| Error::Measurement { run, message: e.to_string() })?;
        let elapsed = t0.elapsed().as_secs_f64();
        if !status.success() {
            return Err(Error::Measurement { run, message: format!("command exited with {status}") });
        }
        // a zero reading would break the strictly positive contract
        Ok(elapsed.max(1e-9))
    };
    for i in 0..warmup {
        run_once(i).map_err(|e| match e {
            Error::Measurement { message, .. } => {
                Error::Measurement { run: i, message: format!("warmup: {message}") }
            }
            other => other,
        })?;
    }
    let values = (0..runs).map(run_once).collect::<Result<Vec<_>>>()?;
    let mut sample = Sample::new(values, command, Provenance::Measured);
    sample.metadata.insert("command".into(), command.into());
    sample.metadata.insert("runs".into(), runs.to_string());
    sample.metadata.insert("warmup".into(), warmup.to_string());
    if let Some(seed) = opts.seed_env {
        sample.metadata.insert("seed".into(), seed.to_string());
    }
    Ok(sample)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSummary {
    pub mean: f64,
    pub sd: f64,
    /// 10th, 20th, …, 90th percentiles.
    pub deciles: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitHalves {
    pub first: HalfSummary,
    pub second: HalfSummary,
    /// Largest gap between the two halves' empirical cdfs.
    pub sup_distance: f64,
}

fn summarize_half(values: &[f64]) -> HalfSummary {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let deciles = (1..10)
        .map(|d| {
            let h = (sorted.len() - 1) as f64 * d as f64 / 10.0;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        })
        .collect();
    HalfSummary { mean, sd, deciles }
}

/// Two-sample Kolmogorov–Smirnov statistic.
fn ecdf_sup_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut sup) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    sup
}

/// Summaries of the first and second halves of a sample in recorded order,
/// for eyeballing drift during a measurement campaign.
pub fn split_halves_check(sample: &[f64]) -> Result<SplitHalves> {
    if sample.len() < 20 {
        return Err(Error::SampleTooSmall { needed: 20, got: sample.len() });
    }
    let (first, second) = sample.split_at(sample.len() / 2);
    Ok(SplitHalves {
        first: summarize_half(first),
        second: summarize_half(second),
        sup_distance: ecdf_sup_distance(first, second),
    })
}

/// Parses the sample file format: one number per line, `# key: value`
/// metadata lines, other `#` lines and blank lines ignored.
pub fn parse_sample(text: &str, label: impl Into<String>) -> Result<Sample> {
    let mut sample = Sample::new(Vec::new(), label, Provenance::File);
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once(':') {
                let k = k.trim();
                if !k.is_empty() {
                    sample.metadata.insert(k.to_string(), v.trim().to_string());
                }
            }
            continue;
        }
        let v: f64 = line.parse().map_err(|e| Error::Parse { line: i + 1, message: format!("{line:?}: {e}") })?;
        if !v.is_finite() {
            return Err(Error::Parse { line: i + 1, message: format!("non-finite value {line:?}") });
        }
        sample.values.push(v);
    }
    if let Some(label) = sample.metadata.get("label") {
        sample.label = label.clone();
    }
    Ok(sample)
}

/// Renders a sample in the file format; values use the shortest decimal
/// form that reads back exactly.
pub fn format_sample(sample: &Sample) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# label: {}", sample.label);
    for (k, v) in &sample.metadata {
        if k != "label" {
            let _ = writeln!(out, "# {k}: {v}");
        }
    }
    for v in &sample.values {
        let _ = writeln!(out, "{v}");
    }
    out
}

pub fn read_sample(path: &Path) -> Result<Sample> {
    let text = std::fs::read_to_string(path)?;
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut sample = parse_sample(&text, stem)?;
    sample.metadata.entry("path".into()).or_insert_with(|| path.display().to_string());
    Ok(sample)
}

pub fn write_sample(sample: &Sample, path: &Path) -> Result<()> {
    std::fs::write(path, format_sample(sample))?;
    Ok(())
}

/// `n` draws from `family(params)` shifted right by `c`.
///
/// ```
/// use locfit::distributions::builtin;
/// use locfit::ingest::synth_sample;
/// let s = synth_sample(builtin("lnormal").unwrap().as_ref(), &[0.0, 0.1], 100.0, 50, 7).unwrap();
/// assert!(s.values.iter().all(|x| *x > 100.0));
/// ```
pub fn synth_sample(family: &dyn Family, params: &[f64], c: f64, n: usize, seed: u64) -> Result<Sample> {
    if n == 0 {
        return Err(Error::SampleTooSmall { needed: 1, got: 0 });
    }
    if !c.is_finite() {
        return Err(domain(format!("location must be finite, got {c}")));
    }
    let values = family.draw(params, n, seed)?.into_iter().map(|x| x + c).collect();
    let mut sample = Sample::new(values, format!("{}-c{c}-s{seed}", family.name()), Provenance::Synthetic);
    let params_text: Vec<String> = params.iter().map(|p| p.to_string()).collect();
    sample.metadata.insert("family".into(), family.name().to_string());
    sample.metadata.insert("params".into(), params_text.join(","));
    sample.metadata.insert("c".into(), c.to_string());
    sample.metadata.insert("seed".into(), seed.to_string());
    Ok(sample)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::builtin;
    use proptest::prelude::*;

    #[test]
    fn measuring_a_no_op() {
        let s = measure_command("true", 3, 0, &MeasureOptions::default()).unwrap();
        assert_eq!(s.values.len(), 3);
        assert!(s.values.iter().all(|v| *v > 0.0));
        assert_eq!(s.provenance, Provenance::Measured);
        let s = measure_command("true", 5, 2, &MeasureOptions::default()).unwrap();
        assert_eq!(s.values.len(), 5);
    }

    #[test]
    fn failing_commands_name_the_run() {
        let err = measure_command("exit 3", 2, 0, &MeasureOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Measurement { run: 0, .. }), "{err}");
        // the second recorded run fails
        let dir = tempfile::tempdir().unwrap();
        let marker = dir.path().join("m");
        let cmd = format!("if [ -e {0} ]; then exit 1; else touch {0}; fi", marker.display());
        let err = measure_command(&cmd, 3, 0, &MeasureOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Measurement { run: 1, .. }), "{err}");
        assert!(measure_command("", 1, 0, &MeasureOptions::default()).is_err());
        assert!(measure_command("true", 0, 0, &MeasureOptions::default()).is_err());
    }

    #[test]
    fn seed_is_exported_only_on_request() {
        let cmd = format!("test -n \"${SEED_ENV}\"");
        assert!(measure_command(&cmd, 1, 0, &MeasureOptions::default()).is_err());
        let s = measure_command(&cmd, 1, 0, &MeasureOptions { seed_env: Some(4) }).unwrap();
        assert_eq!(s.metadata["seed"], "4");
    }

    #[test]
    fn split_halves_examples() {
        let same: Vec<f64> = (0..10).chain(0..10).map(f64::from).collect();
        assert_eq!(split_halves_check(&same).unwrap().sup_distance, 0.0);
        let step: Vec<f64> = [1.0; 10].into_iter().chain([2.0; 10]).collect();
        let r = split_halves_check(&step).unwrap();
        assert_eq!(r.sup_distance, 1.0);
        assert_eq!((r.first.mean, r.second.mean), (1.0, 2.0));
        assert_eq!(r.first.deciles.len(), 9);
        let iid = builtin("gamma").unwrap().draw(&[2.0, 1.0], 1000, 12).unwrap();
        assert!(split_halves_check(&iid).unwrap().sup_distance < 0.15);
        assert!(split_halves_check(&[1.0; 19]).is_err());
    }

    #[test]
    fn file_round_trip_and_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.txt");
        let mut s = Sample::new(vec![0.1, 2.5e-7, 1.0 / 3.0, 12345.678], "x", Provenance::Synthetic);
        s.metadata.insert("machine".into(), "X".into());
        write_sample(&s, &path).unwrap();
        let back = read_sample(&path).unwrap();
        assert_eq!(back.values, s.values);
        assert_eq!(back.metadata["machine"], "X");
        assert_eq!(back.label, "x");
        assert_eq!(back.provenance, Provenance::File);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let text = "# machine: X\n1.0\n2.0\n\n3.0\n4.0\nabc\n5.0\n";
        match parse_sample(text, "t").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 7),
            other => panic!("{other}"),
        }
        assert!(parse_sample("1\nNaN\n", "t").is_err());
        assert!(matches!(read_sample(Path::new("/nonexistent/file")), Err(Error::Io(_))));
    }

    #[test]
    fn synth_examples() {
        let w = builtin("weibull").unwrap();
        let plain = w.draw(&[1.0, 2.0], 20, 3).unwrap();
        assert_eq!(synth_sample(w.as_ref(), &[1.0, 2.0], 0.0, 20, 3).unwrap().values, plain);
        let a = synth_sample(w.as_ref(), &[1.0, 2.0], 5.0, 20, 3).unwrap();
        assert!(a.values.iter().all(|x| *x >= 5.0));
        assert_ne!(a.values, synth_sample(w.as_ref(), &[1.0, 2.0], 5.0, 20, 4).unwrap().values);
        assert_eq!(a.metadata["family"], "weibull");
        assert!(synth_sample(w.as_ref(), &[1.0], 0.0, 5, 1).is_err());
    }

    proptest! {
        #[test]
        fn files_round_trip(values in prop::collection::vec(-1e12f64..1e12, 0..50)) {
            let s = Sample::new(values.clone(), "p", Provenance::Synthetic);
            prop_assert_eq!(parse_sample(&format_sample(&s), "p").unwrap().values, values);
        }

        #[test]
        fn synth_shift_is_exact(c in -100.0f64..100.0, seed in any::<u64>()) {
            let g = builtin("gamma").unwrap();
            let base = synth_sample(g.as_ref(), &[2.0, 1.0], 0.0, 10, seed).unwrap();
            let moved = synth_sample(g.as_ref(), &[2.0, 1.0], c, 10, seed).unwrap();
            for (m, b) in moved.values.iter().zip(&base.values) {
                // (x + c) − c recovers x up to one rounding of the sum
                prop_assert!((m - c - b).abs() <= 4.0 * f64::EPSILON * (b.abs() + c.abs()));
            }
        }
    }
}
