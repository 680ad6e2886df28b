//! Benchmark harness: fraction sweeps over a dataset, repeated wall-clock
//! timing of the non-incremental and incremental reducers, and report output.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::approx::positive_region;
use crate::bits::{CoveringIndexSet, ObjectSet};
use crate::dynamic::{CoveringMutation, DynamicError, IncrementalState, MutationKind};
use crate::ingest::{build_cdis, load_csv, normalize, random_coarsen, random_refine, IngestError, NumericTable};
use crate::reduct::{all_reducts, nihv, preserves_positive_region, ReductSet};
use crate::related::related_family;
use crate::system::{CoveringDecisionSystem, SystemError, SystemFile};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Dynamic(#[from] DynamicError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid system file {path}: {reason}")]
    BadSystemFile { path: String, reason: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{algorithm} on {dataset} at {fraction}% took {seconds:.3} s, over the {limit:.3} s cap")]
    TimeoutExceeded {
        dataset: String,
        fraction: u32,
        algorithm: Algorithm,
        seconds: f64,
        limit: f64,
    },
    #[error("{algorithm} on {dataset} at {fraction}%: result does not preserve the positive region")]
    CorrectnessFailure {
        dataset: String,
        fraction: u32,
        algorithm: Algorithm,
    },
    #[error("report is empty")]
    EmptyReport,
}

impl BenchError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        BenchError::Io { path: path.display().to_string(), source }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "NIHV")]
    Nihv,
    #[serde(rename = "IHVR")]
    Ihvr,
    #[serde(rename = "IHVC")]
    Ihvc,
    #[serde(rename = "ALL_EXACT")]
    AllExact,
    #[serde(rename = "ALL_INCR")]
    AllIncr,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Nihv => "NIHV",
            Algorithm::Ihvr => "IHVR",
            Algorithm::Ihvc => "IHVC",
            Algorithm::AllExact => "ALL_EXACT",
            Algorithm::AllIncr => "ALL_INCR",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "NIHV" => Ok(Algorithm::Nihv),
            "IHVR" => Ok(Algorithm::Ihvr),
            "IHVC" => Ok(Algorithm::Ihvc),
            "ALL_EXACT" | "ALL" => Ok(Algorithm::AllExact),
            "ALL_INCR" => Ok(Algorithm::AllIncr),
            _ => Err(format!("unknown algorithm {s:?}")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub dataset: PathBuf,
    pub epsilon: f64,
    /// Percentages in `(0, 100]`.
    pub fractions: Vec<u32>,
    pub repeats: usize,
    pub mode: MutationKind,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub intensity: f64,
    /// Shuffle objects with this seed before taking fraction prefixes.
    pub shuffle: Option<u64>,
    /// Per-run time cap.
    pub timeout: Option<Duration>,
    pub decision_column: Option<String>,
    /// Untimed runs before the timed ones.
    pub warmup: usize,
}

impl BenchConfig {
    pub fn new(dataset: impl Into<PathBuf>, mode: MutationKind) -> Self {
        let incremental = match mode {
            MutationKind::Refine => Algorithm::Ihvr,
            MutationKind::Coarsen => Algorithm::Ihvc,
        };
        BenchConfig {
            dataset: dataset.into(),
            epsilon: 0.05,
            fractions: (1..=10).map(|i| i * 10).collect(),
            repeats: 10,
            mode,
            seed: 0,
            algorithms: vec![Algorithm::Nihv, incremental],
            intensity: 0.3,
            shuffle: None,
            timeout: None,
            decision_column: None,
            warmup: 1,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |s: String| Err(BenchError::InvalidConfig(s));
        if self.fractions.is_empty() {
            return bad("no fractions given".into());
        }
        if let Some(f) = self.fractions.iter().find(|&&f| f == 0 || f > 100) {
            return bad(format!("fraction {f} outside (0, 100]"));
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1".into());
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms selected".into());
        }
        if !(self.intensity > 0.0 && self.intensity <= 1.0) {
            return bad(format!("intensity {} outside (0, 1]", self.intensity));
        }
        for a in &self.algorithms {
            match (a, self.mode) {
                (Algorithm::Ihvr, MutationKind::Coarsen) => return bad("IHVR needs refine mode".into()),
                (Algorithm::Ihvc, MutationKind::Refine) => return bad("IHVC needs coarsen mode".into()),
                _ => {}
            }
        }
        Ok(())
    }
}

/// Parses `start:stop:step` or a comma-separated list of percentages.
pub fn parse_fractions(s: &str) -> Result<Vec<u32>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |p: &str| p.trim().parse::<u32>().map_err(|_| format!("bad fraction {p:?}"));
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step == 0 || start > stop {
                return Err(format!("bad range {s:?}"));
            }
            Ok((start..=stop).step_by(step as usize).collect())
        }
        [list] => list.split(',').map(num).collect(),
        _ => Err(format!("bad fractions {s:?}")),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub dataset: String,
    pub fraction: u32,
    pub algorithm: Algorithm,
    pub mean_s: f64,
    pub std_s: f64,
    pub reduct_size: usize,
    pub pos_fraction: f64,
    /// Raw per-repeat wall-clock seconds.
    pub timings: Vec<f64>,
}

impl BenchRow {
    /// Coefficient of variation `std / mean`.
    pub fn cv(&self) -> f64 {
        if self.mean_s > 0.0 {
            self.std_s / self.mean_s
        } else {
            0.0
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn row(&self, fraction: u32, algorithm: Algorithm) -> Option<&BenchRow> {
        self.rows
            .iter()
            .find(|r| r.fraction == fraction && r.algorithm == algorithm)
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (`n − 1` denominator); 0 for a single sample.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Loads the dataset (CSV, or a system file when the extension is `.json`)
/// and runs every configured cell.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport, BenchError> {
    config.validate()?;
    let path = &config.dataset;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    let system = if path.extension().is_some_and(|e| e == "json") {
        load_system_file(path)?
    } else {
        let table = load_csv(path, config.decision_column.as_deref())?;
        build_cdis(&normalize(&table), config.epsilon)?
    };
    run_benchmark_system(&name, &system, config)
}

pub fn load_system_file(path: &Path) -> Result<CoveringDecisionSystem, BenchError> {
    let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    let file: SystemFile = serde_json::from_str(&text).map_err(|e| BenchError::BadSystemFile {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    Ok(file.into_system()?)
}

/// Runs the sweep on an already built system.
pub fn run_benchmark_system(
    name: &str,
    system: &CoveringDecisionSystem,
    config: &BenchConfig,
) -> Result<BenchReport, BenchError> {
    config.validate()?;
    let n = system.universe_size();
    let mut order: Vec<usize> = (0..n).collect();
    if let Some(seed) = config.shuffle {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let mut report = BenchReport::default();
    for &fraction in &config.fractions {
        let k = ((fraction as f64 / 100.0) * n as f64).ceil() as usize;
        let keep = ObjectSet::from_iter_checked(n, order[..k.max(1)].iter().copied());
        let sub = if keep.is_full() { system.clone() } else { system.restrict(&keep)? };
        log::info!("{name}: {fraction}% ({} objects)", sub.universe_size());
        report.rows.extend(run_cell(name, fraction, &sub, config)?);
    }
    Ok(report)
}

/// Mutates the last covering of `system` and times each configured algorithm.
pub fn run_cell(
    name: &str,
    fraction: u32,
    system: &CoveringDecisionSystem,
    config: &BenchConfig,
) -> Result<Vec<BenchRow>, BenchError> {
    let target = system.len() - 1;
    let outcome = match config.mode {
        MutationKind::Refine => random_refine(system.covering(target), config.seed, config.intensity)?,
        MutationKind::Coarsen => random_coarsen(system.covering(target), config.seed, config.intensity)?,
    };
    let mutated = system.replace_covering(target, outcome.covering.clone())?;
    let mutation = CoveringMutation::new(system, target, config.mode, outcome.covering)?;

    let mut state = IncrementalState::new(system.clone(), target)?;
    if config.algorithms.contains(&Algorithm::AllIncr) {
        state = state.with_reducts();
    }
    let pos = positive_region(&mutated);
    let pos_fraction = pos.len() as f64 / mutated.universe_size() as f64;
    let mode = config.mode;

    let mut rows = Vec::new();
    for &algorithm in &config.algorithms {
        let run = || -> Result<Outcome, BenchError> {
            Ok(match algorithm {
                Algorithm::Nihv => Outcome::Heuristic(nihv(&mutated)),
                Algorithm::Ihvr => Outcome::Heuristic(state.ihvr(&state.update_related_refine(&mutation)?)),
                Algorithm::Ihvc => Outcome::Heuristic(state.ihvc(&state.update_related_coarsen(&mutation)?)),
                Algorithm::AllExact => Outcome::Exact(all_reducts(&related_family(&mutated))),
                Algorithm::AllIncr => {
                    let update = match mode {
                        MutationKind::Refine => {
                            let family = state.update_related_refine(&mutation)?;
                            state.incremental_all_reducts_refine(&family)?
                        }
                        MutationKind::Coarsen => {
                            let family = state.update_related_coarsen(&mutation)?;
                            state.incremental_all_reducts_coarsen(&family)?
                        }
                    };
                    Outcome::Exact(update.all)
                }
            })
        };
        for _ in 0..config.warmup {
            run()?;
        }
        let mut timings = Vec::with_capacity(config.repeats);
        let mut last = None;
        for _ in 0..config.repeats {
            let start = Instant::now();
            let out = run()?;
            let elapsed = start.elapsed();
            if let Some(limit) = config.timeout {
                if elapsed > limit {
                    return Err(BenchError::TimeoutExceeded {
                        dataset: name.to_string(),
                        fraction,
                        algorithm,
                        seconds: elapsed.as_secs_f64(),
                        limit: limit.as_secs_f64(),
                    });
                }
            }
            timings.push(elapsed.as_secs_f64());
            last = Some(out);
        }
        let out = last.expect("repeats >= 1");
        if !out.preserves(&mutated) {
            return Err(BenchError::CorrectnessFailure {
                dataset: name.to_string(),
                fraction,
                algorithm,
            });
        }
        rows.push(BenchRow {
            dataset: name.to_string(),
            fraction,
            algorithm,
            mean_s: mean(&timings),
            std_s: sample_std(&timings),
            reduct_size: out.size(),
            pos_fraction,
            timings,
        });
    }
    Ok(rows)
}

enum Outcome {
    Heuristic(CoveringIndexSet),
    Exact(ReductSet),
}

impl Outcome {
    fn preserves(&self, system: &CoveringDecisionSystem) -> bool {
        match self {
            Outcome::Heuristic(r) => preserves_positive_region(system, r),
            Outcome::Exact(rs) => rs.iter().all(|r| preserves_positive_region(system, r)),
        }
    }

    /// Heuristic cardinality, or the smallest exact reduct.
    fn size(&self) -> usize {
        match self {
            Outcome::Heuristic(r) => r.len(),
            Outcome::Exact(rs) => rs.min_size().unwrap_or(0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    /// One whitespace-separated series file per (dataset, algorithm), in a directory.
    Plot,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "plot" => Ok(ReportFormat::Plot),
            _ => Err(format!("unknown format {s:?}")),
        }
    }
}

pub const CSV_HEADER: &str = "dataset,fraction,algorithm,mean_s,std_s,reduct_size,pos_fraction";

pub fn to_csv(report: &BenchReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{:.9},{:.9},{},{:.6}\n",
            r.dataset, r.fraction, r.algorithm, r.mean_s, r.std_s, r.reduct_size, r.pos_fraction
        ));
    }
    out
}

/// Writes the report; returns the files written.
pub fn emit_report(report: &BenchReport, format: ReportFormat, path: &Path) -> Result<Vec<PathBuf>, BenchError> {
    if report.rows.is_empty() {
        return Err(BenchError::EmptyReport);
    }
    match format {
        ReportFormat::Csv => {
            fs::write(path, to_csv(report)).map_err(|e| BenchError::io(path, e))?;
            Ok(vec![path.to_path_buf()])
        }
        ReportFormat::Json => {
            let json = serde_json::to_string_pretty(&report.rows).expect("rows serialize");
            fs::write(path, json).map_err(|e| BenchError::io(path, e))?;
            Ok(vec![path.to_path_buf()])
        }
        ReportFormat::Plot => {
            fs::create_dir_all(path).map_err(|e| BenchError::io(path, e))?;
            let mut series: Vec<(&str, Algorithm)> = report
                .rows
                .iter()
                .map(|r| (r.dataset.as_str(), r.algorithm))
                .collect();
            series.sort();
            series.dedup();
            let mut written = Vec::new();
            for (dataset, algorithm) in series {
                let file = path.join(format!("{dataset}_{algorithm}.dat"));
                let mut body = String::from("# fraction mean_s std_s\n");
                for r in report.rows.iter().filter(|r| r.dataset == dataset && r.algorithm == algorithm) {
                    body.push_str(&format!("{} {:.9} {:.9}\n", r.fraction, r.mean_s, r.std_s));
                }
                fs::write(&file, body).map_err(|e| BenchError::io(&file, e))?;
                written.push(file);
            }
            Ok(written)
        }
    }
}

/// Seeded synthetic table: `classes` balanced labels and `attributes`
/// columns whose class separation weakens with the column index. Column `j`
/// draws `(c + w_j·u) / classes` with `u ~ U[0,1)` and `w_j` growing from 0.5,
/// so early columns give pure neighborhoods and later ones overlap classes.
pub fn synthetic_table(n: usize, attributes: usize, classes: usize, seed: u64) -> NumericTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<usize> = (0..n).map(|i| i % classes.max(1)).collect();
    let widths: Vec<f64> = (0..attributes).map(|j| 0.5 + 0.25 * j as f64).collect();
    let rows = labels
        .iter()
        .map(|&c| {
            widths
                .iter()
                .map(|w| (c as f64 + w * rng.gen::<f64>()) / classes as f64)
                .collect()
        })
        .collect();
    NumericTable::new(
        (1..=attributes).map(|j| format!("a{j}")).collect(),
        rows,
        labels.iter().map(|c| format!("c{c}")).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fraction_specs() {
        assert_eq!(parse_fractions("10:100:10").unwrap(), (1..=10).map(|i| i * 10).collect::<Vec<_>>());
        assert_eq!(parse_fractions("50,100").unwrap(), vec![50, 100]);
        assert!(parse_fractions("10:5:1").is_err());
        assert!(parse_fractions("x").is_err());
    }

    #[test]
    fn std_of_single_sample_is_zero() {
        assert_eq!(sample_std(&[0.3]), 0.0);
        assert!((sample_std(&[1.0, 2.0, 3.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in [Algorithm::Nihv, Algorithm::Ihvr, Algorithm::Ihvc, Algorithm::AllExact, Algorithm::AllIncr] {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
    }

    #[test]
    fn mode_mismatch_rejected() {
        let mut c = BenchConfig::new("x.csv", MutationKind::Refine);
        c.algorithms = vec![Algorithm::Ihvc];
        assert!(matches!(c.validate(), Err(BenchError::InvalidConfig(_))));
        c.algorithms = vec![Algorithm::Nihv];
        c.fractions = vec![0];
        assert!(c.validate().is_err());
    }

    #[test]
    fn csv_has_header_plus_rows() {
        let row = BenchRow {
            dataset: "d".into(),
            fraction: 100,
            algorithm: Algorithm::Nihv,
            mean_s: 0.5,
            std_s: 0.0,
            reduct_size: 2,
            pos_fraction: 1.0,
            timings: vec![0.5],
        };
        let report = BenchReport { rows: vec![row.clone(), BenchRow { algorithm: Algorithm::Ihvr, ..row }] };
        let csv = to_csv(&report);
        assert_eq!(csv.lines().count(), 3);
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
    }

    #[test]
    fn empty_report_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            emit_report(&BenchReport::default(), ReportFormat::Csv, &dir.path().join("r.csv")),
            Err(BenchError::EmptyReport)
        ));
    }

    #[test]
    fn synthetic_is_seeded() {
        let a = synthetic_table(30, 4, 3, 9);
        assert_eq!(a, synthetic_table(30, 4, 3, 9));
        assert_ne!(a, synthetic_table(30, 4, 3, 10));
        assert_eq!(a.classes().len(), 3);
    }
}
