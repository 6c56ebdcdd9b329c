//! Paired Monte-Carlo sweeps over pilot length and common-path count.
//!
//! Within one trial every estimator sees the same channel, reflection
//! pattern and noise draw, so estimator differences are paired. Trials
//! run in parallel and are reduced in trial order, which keeps the CSV
//! output independent of the thread count.

mod config;
mod metrics;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::angular::{build_dictionary, Dictionary};
use crate::channel::ChannelRealization;
use crate::estimators::{EstimationProblem, EstimatorKind, SparsityLevels};
use crate::pilot::{build_sensing, gen_reflecting, measure, MeasurementSet, SensingMatrix};
use crate::seed;
use crate::{Error, Result};

pub use config::ExperimentConfig;
pub use metrics::{nmse, support_recovery};

/// CSV header, in column order.
pub const CSV_COLUMNS: [&str; 10] = [
    "q",
    "estimator",
    "l_c",
    "snr_db",
    "nmse_mean",
    "nmse_stderr",
    "row_rec",
    "col_rec",
    "wall_time_mean",
    "n_trials",
];

/// Metrics of one estimator in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub l_c: usize,
    pub q: usize,
    pub estimator: EstimatorKind,
    pub nmse: f64,
    pub row_rate: f64,
    pub col_rate: f64,
    /// Seconds spent in the estimator.
    pub wall_time: f64,
}

/// Aggregate of all trials at one `(l_c, estimator, q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub q: usize,
    pub estimator: EstimatorKind,
    pub l_c: usize,
    pub snr_db: f64,
    pub nmse_mean: f64,
    pub nmse_stderr: f64,
    pub row_support_recovery: f64,
    pub col_support_recovery: f64,
    /// Present only when the config asks for timings.
    pub wall_time_mean: Option<f64>,
    pub n_trials: usize,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Sorted by `(l_c, estimator name, q)`.
    pub points: Vec<CurvePoint>,
    /// Every per-trial record, in trial order.
    pub trials: Vec<TrialRecord>,
}

impl SweepResult {
    pub fn point(&self, l_c: usize, estimator: EstimatorKind, q: usize) -> Option<&CurvePoint> {
        self.points
            .iter()
            .find(|p| p.l_c == l_c && p.estimator == estimator && p.q == q)
    }

    /// Per-trial NMSE of one sweep point, in trial order.
    pub fn nmse_series(&self, l_c: usize, estimator: EstimatorKind, q: usize) -> Vec<f64> {
        self.trials
            .iter()
            .filter(|t| t.l_c == l_c && t.estimator == estimator && t.q == q)
            .map(|t| t.nmse)
            .collect()
    }
}

/// Seed of the path sampling for a trial and common-path count.
pub fn channel_seed(trial_seed: u64, l_c: usize) -> u64 {
    seed::derive(trial_seed, &[seed::STREAM_CHANNEL, l_c as u64])
}

/// Seed of the reflection pattern. Shared across pilot lengths, so a
/// shorter pattern is a prefix of a longer one.
pub fn reflection_seed(trial_seed: u64) -> u64 {
    seed::derive(trial_seed, &[seed::STREAM_REFLECTION])
}

/// Seed of the receiver noise for one sweep point of a trial.
pub fn noise_seed(trial_seed: u64, l_c: usize, q: usize) -> u64 {
    seed::derive(trial_seed, &[seed::STREAM_NOISE, l_c as u64, q as u64])
}

/// Reflection pattern, sensing matrix and measurements of a trial.
pub fn simulate_pilots(
    realization: &ChannelRealization,
    q: usize,
    snr_db: f64,
    trial_seed: u64,
    ris_dict: &Dictionary,
) -> Result<(SensingMatrix, MeasurementSet)> {
    let theta = gen_reflecting(realization.geom.n(), q, reflection_seed(trial_seed))?;
    let sensing = build_sensing(&theta, ris_dict)?;
    let meas = measure(
        realization,
        &sensing,
        snr_db,
        noise_seed(trial_seed, realization.geom.l_c, q),
    )?;
    Ok((sensing, meas))
}

/// Accuracy of one estimator run against the realization it measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub estimator: EstimatorKind,
    pub nmse: f64,
    pub row_rate: f64,
    pub col_rate: f64,
    pub wall_time: f64,
}

/// Runs each estimator on the given realization and pilots.
pub fn evaluate(
    realization: &ChannelRealization,
    problem: &EstimationProblem<'_>,
    estimators: &[EstimatorKind],
) -> Result<Vec<Score>> {
    let levels = SparsityLevels::from_geometry(&realization.geom);
    estimators
        .iter()
        .map(|&kind| {
            let start = Instant::now();
            let out = kind.run(problem, &levels, Some(&realization.supports))?;
            let elapsed = start.elapsed().as_secs_f64();
            let (row_rate, col_rate) = support_recovery(&out.support, &realization.supports);
            Ok(Score {
                estimator: kind,
                nmse: nmse(&out.spatial, &realization.cascaded)?,
                row_rate,
                col_rate,
                wall_time: elapsed,
            })
        })
        .collect()
}

struct Dictionaries {
    bs: Dictionary,
    ris: Dictionary,
}

/// One trial at every `(l_c, q)` of the config.
pub fn run_trial(config: &ExperimentConfig, trial_index: usize) -> Result<Vec<TrialRecord>> {
    let dicts = Dictionaries {
        bs: build_dictionary(config.bs),
        ris: build_dictionary(config.ris),
    };
    trial_with(config, trial_index, &dicts)
}

fn trial_with(config: &ExperimentConfig, trial_index: usize, dicts: &Dictionaries) -> Result<Vec<TrialRecord>> {
    let trial_seed = seed::trial_seed(config.master_seed, trial_index as u64);
    let mut records = Vec::new();
    for &l_c in &config.l_c_values {
        let geom = config.geometry(l_c);
        let realization =
            ChannelRealization::generate(&geom, &config.gains, channel_seed(trial_seed, l_c), &dicts.bs, &dicts.ris)?;
        for &q in &config.q_values {
            let (sensing, meas) = simulate_pilots(&realization, q, config.snr_db, trial_seed, &dicts.ris)?;
            let problem = EstimationProblem {
                measurements: &meas,
                sensing: &sensing,
                bs_dict: &dicts.bs,
                ris_dict: &dicts.ris,
            };
            for score in evaluate(&realization, &problem, &config.estimators)? {
                records.push(TrialRecord {
                    trial: trial_index,
                    l_c,
                    q,
                    estimator: score.estimator,
                    nmse: score.nmse,
                    row_rate: score.row_rate,
                    col_rate: score.col_rate,
                    wall_time: score.wall_time,
                });
            }
        }
    }
    Ok(records)
}

/// Runs all trials on the current rayon pool and aggregates them.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let dicts = Dictionaries {
        bs: build_dictionary(config.bs),
        ris: build_dictionary(config.ris),
    };
    let per_trial: Vec<Result<Vec<TrialRecord>>> = (0..config.n_trials)
        .into_par_iter()
        .map(|t| trial_with(config, t, &dicts))
        .collect();
    let mut trials = Vec::new();
    for records in per_trial {
        trials.extend(records?);
    }
    let points = aggregate(config, &trials);
    Ok(SweepResult { points, trials })
}

/// [`run_sweep`] on a dedicated pool of `threads` workers.
pub fn run_sweep_with_threads(config: &ExperimentConfig, threads: usize) -> Result<SweepResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))?;
    pool.install(|| run_sweep(config))
}

/// Mean and standard error of the mean (zero for a single sample).
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn aggregate(config: &ExperimentConfig, trials: &[TrialRecord]) -> Vec<CurvePoint> {
    let mut groups: BTreeMap<(usize, &'static str, usize), Vec<&TrialRecord>> = BTreeMap::new();
    for t in trials {
        groups.entry((t.l_c, t.estimator.name(), t.q)).or_default().push(t);
    }
    groups
        .into_values()
        .map(|records| {
            let first = records[0];
            let n = records.len();
            let errors: Vec<f64> = records.iter().map(|r| r.nmse).collect();
            let (nmse_mean, nmse_stderr) = mean_and_stderr(&errors);
            let mean_of = |f: fn(&TrialRecord) -> f64| records.iter().map(|r| f(r)).sum::<f64>() / n as f64;
            CurvePoint {
                q: first.q,
                estimator: first.estimator,
                l_c: first.l_c,
                snr_db: config.snr_db,
                nmse_mean,
                nmse_stderr,
                row_support_recovery: mean_of(|r| r.row_rate),
                col_support_recovery: mean_of(|r| r.col_rate),
                wall_time_mean: config.record_wall_time.then(|| mean_of(|r| r.wall_time)),
                n_trials: n,
            }
        })
        .collect()
}

/// Renders the sweep points as CSV text. Missing timings are empty fields.
pub fn csv_string(points: &[CurvePoint]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(CSV_COLUMNS)?;
    for p in points {
        writer.write_record([
            p.q.to_string(),
            p.estimator.name().to_string(),
            p.l_c.to_string(),
            p.snr_db.to_string(),
            p.nmse_mean.to_string(),
            p.nmse_stderr.to_string(),
            p.row_support_recovery.to_string(),
            p.col_support_recovery.to_string(),
            p.wall_time_mean.map(|t| t.to_string()).unwrap_or_default(),
            p.n_trials.to_string(),
        ])?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Config(format!("CSV buffer: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV fields are UTF-8"))
}

pub fn write_csv(points: &[CurvePoint], path: &Path) -> Result<()> {
    fs::write(path, csv_string(points)?).map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    master_seed: u64,
    csv: String,
    config: &'a ExperimentConfig,
}

/// Path of the JSON manifest written beside `csv_path`.
pub fn manifest_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("manifest.json")
}

/// Writes config, crate version and master seed beside the CSV.
pub fn write_manifest(config: &ExperimentConfig, csv_path: &Path) -> Result<PathBuf> {
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        master_seed: config.master_seed,
        csv: csv_path
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default(),
        config,
    };
    let path = manifest_path(csv_path);
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
