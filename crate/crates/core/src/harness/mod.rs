//! Campaign orchestration: plan simulations over a calibrated BER grid, run
//! every configured estimator on each simulated dataset and persist the
//! results.
//!
//! Every run draws its data from a stream derived from the master seed and
//! its run id, and records are appended in run-id order, so a campaign's
//! record file does not depend on the number of workers.

pub mod records;
pub mod streams;

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimators::{run_estimators, EstimatorSet};
use crate::ground_truth::{calibrate, select_uniform, CalibratedParameterTable, CalibrationOptions, GroundTruthProfile};
use crate::scenarios::{Family, ScenarioSpec, DEFAULT_VARIANCE};

pub use records::{append_records, read_records, write_records, EstimateRecord, ReadOutcome, SCHEMA_VERSION};
pub use streams::{derive_stream, run_seed, Purpose, Stream};

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "BERBENCH_WORKERS";

pub const RECORDS_FILE: &str = "records.ndjson";
pub const FAILURES_FILE: &str = "failures.ndjson";
pub const TIMINGS_FILE: &str = "timings.ndjson";

fn default_runs() -> usize {
    2500
}

fn default_ber_range() -> [f64; 2] {
    [0.01, 0.49]
}

fn default_variance() -> f64 {
    DEFAULT_VARIANCE
}

fn default_profile() -> GroundTruthProfile {
    GroundTruthProfile::Desk
}

/// A campaign: one family, a grid of dimensions and sample sizes, and a
/// number of runs per (d, n) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub family: Family,
    pub dims: Vec<usize>,
    pub n_per_class: Vec<usize>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_ber_range")]
    pub ber_range: [f64; 2],
    pub master_seed: u64,
    #[serde(default = "EstimatorSet::all")]
    pub estimators: EstimatorSet,
    #[serde(default = "default_profile")]
    pub ground_truth: GroundTruthProfile,
    pub output_dir: PathBuf,
    /// Where calibration tables are cached; defaults to `<output_dir>/calibration`.
    #[serde(default)]
    pub calibration_dir: Option<PathBuf>,
    #[serde(default = "default_variance")]
    pub variance: f64,
    /// Replace class B by class A in every scenario (true BER 0.5).
    #[serde(default)]
    pub identical_classes: bool,
}

impl CampaignConfig {
    pub fn new(family: Family, dims: Vec<usize>, n_per_class: Vec<usize>, master_seed: u64, output_dir: PathBuf) -> Self {
        CampaignConfig {
            family,
            dims,
            n_per_class,
            runs: default_runs(),
            ber_range: default_ber_range(),
            master_seed,
            estimators: EstimatorSet::all(),
            ground_truth: default_profile(),
            output_dir,
            calibration_dir: None,
            variance: default_variance(),
            identical_classes: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return invalid("runs must be at least 1");
        }
        let [lo, hi] = self.ber_range;
        if !(lo > 0.0 && lo < hi && hi < 0.5) {
            return invalid(format!("BER range must lie in (0, 0.5), got [{lo}, {hi}]"));
        }
        if self.dims.is_empty() || self.n_per_class.is_empty() {
            return invalid("dims and n_per_class must be nonempty");
        }
        if let Some(&d) = self.dims.iter().find(|&&d| d < self.family.min_dim()) {
            return invalid(format!("{} needs d >= {}, got {d}", self.family, self.family.min_dim()));
        }
        if self.n_per_class.contains(&0) {
            return invalid("n_per_class entries must be positive");
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: CampaignConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn calibration_dir(&self) -> PathBuf {
        self.calibration_dir
            .clone()
            .unwrap_or_else(|| self.output_dir.join("calibration"))
    }

    /// First run id of the (d, n) cell.
    fn cell_base(&self, d_index: usize, n_index: usize) -> u64 {
        ((d_index * self.n_per_class.len() + n_index) * self.runs) as u64
    }
}

/// One planned simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedRun {
    pub run_id: u64,
    pub seed: u64,
    /// Index into the calibration table.
    pub entry: usize,
    pub d: usize,
    pub n_per_class: usize,
    pub target_ber: f64,
    pub true_ber: f64,
}

/// Plans every run of `config` at dimension `table.d`.
///
/// `min(runs, |table|)` entries are picked nearest to evenly spaced target
/// BERs and run `i` of each cell uses pick `i mod count`.
pub fn plan_campaign(config: &CampaignConfig, table: &CalibratedParameterTable) -> Result<Vec<PlannedRun>> {
    config.validate()?;
    if table.family != config.family {
        return invalid(format!("table is for {}, campaign is for {}", table.family, config.family));
    }
    let Some(d_index) = config.dims.iter().position(|&d| d == table.d) else {
        return invalid(format!("campaign has no cell for d = {}", table.d));
    };
    let [lo, hi] = config.ber_range;
    table.check_coverage(lo, hi)?;
    let count = config.runs.min(table.len());
    let picks = select_uniform(table, count)?;
    let targets = crate::ground_truth::uniform_targets(table.ber_lo, table.ber_hi, count);

    let mut plan = Vec::with_capacity(config.runs * config.n_per_class.len());
    for (n_index, &n) in config.n_per_class.iter().enumerate() {
        let base = config.cell_base(d_index, n_index);
        for i in 0..config.runs {
            let run_id = base + i as u64;
            let entry = picks[i % count];
            plan.push(PlannedRun {
                run_id,
                seed: run_seed(config.master_seed, run_id),
                entry,
                d: table.d,
                n_per_class: n,
                target_ber: targets[i % count],
                true_ber: if config.identical_classes { 0.5 } else { table.entries[entry].ber },
            });
        }
    }
    Ok(plan)
}

/// A record together with how long it took to produce.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedRecord {
    pub record: EstimateRecord,
    pub wall_time_s: f64,
}

/// Samples `n_per_class` points per class from `spec` using the data stream
/// of `seed`, runs every estimator in `set` on that dataset and returns the
/// record. Any estimator failure fails the whole run.
pub fn run_simulation(
    spec: &ScenarioSpec,
    true_ber: f64,
    n_per_class: usize,
    run_id: u64,
    seed: u64,
    set: &EstimatorSet,
) -> Result<TimedRecord> {
    let start = Instant::now();
    let mut rng = derive_stream(seed, 0, Purpose::Data);
    let data = spec.sample_dataset(n_per_class, &mut rng);
    let out = run_estimators(&data, set, Some(spec))?;
    Ok(TimedRecord {
        record: EstimateRecord {
            schema: SCHEMA_VERSION,
            run_id,
            scenario_id: spec.scenario_id.clone(),
            family: spec.family,
            seed,
            d: spec.d,
            n_per_class,
            true_ber,
            estimates: out.estimates,
            diagnostics: out.diagnostics,
        },
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Worker count: explicit value, then the environment override, then the
/// number of available cores.
pub fn resolve_workers(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Loads the calibration table for `(family, d)` from the cache or computes
/// and stores it.
pub fn load_or_calibrate(config: &CampaignConfig, d: usize) -> Result<CalibratedParameterTable> {
    let [lo, hi] = config.ber_range;
    let dir = config.calibration_dir();
    let key = CalibratedParameterTable::cache_key(config.family, d, lo, hi, config.master_seed, config.ground_truth);
    let path = dir.join(key);
    if path.exists() {
        let table = CalibratedParameterTable::from_json(&fs::read_to_string(&path)?)?;
        if table.variance == config.variance {
            return Ok(table);
        }
    }
    let options = CalibrationOptions {
        variance: config.variance,
        profile: config.ground_truth,
        ..CalibrationOptions::default()
    };
    let table = calibrate(config.family, d, lo, hi, options, config.master_seed)?;
    fs::create_dir_all(&dir)?;
    fs::write(&path, table.to_json()?)?;
    Ok(table)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CampaignSummary {
    pub planned: usize,
    /// Runs already present in the record file.
    pub resumed: usize,
    pub completed: usize,
    pub failed: usize,
    /// Unparseable lines found in an existing record file.
    pub corrupt_lines: usize,
}

#[derive(Serialize)]
struct FailureLine<'a> {
    run_id: u64,
    seed: u64,
    d: usize,
    n_per_class: usize,
    error: &'a str,
}

#[derive(Serialize)]
struct TimingLine {
    run_id: u64,
    wall_time_s: f64,
}

/// Runs a campaign into `config.output_dir`, skipping run ids already in
/// the record file.
pub fn run_campaign(config: &CampaignConfig, workers: Option<usize>) -> Result<CampaignSummary> {
    config.validate()?;
    fs::create_dir_all(&config.output_dir)?;
    let records_path = config.output_dir.join(RECORDS_FILE);
    let mut summary = CampaignSummary::default();

    let mut done = BTreeSet::new();
    if records_path.exists() {
        let existing = read_records(&records_path)?;
        summary.corrupt_lines = existing.skipped;
        done.extend(existing.records.iter().map(|r| r.run_id));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(resolve_workers(workers))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;

    for &d in &config.dims {
        let table = load_or_calibrate(config, d)?;
        let specs: Vec<ScenarioSpec> = table
            .entries
            .iter()
            .map(|e| {
                if config.identical_classes {
                    e.spec.with_identical_classes()
                } else {
                    e.spec.clone()
                }
            })
            .collect();
        let plan = plan_campaign(config, &table)?;
        summary.planned += plan.len();
        let pending: Vec<&PlannedRun> = plan.iter().filter(|p| !done.contains(&p.run_id)).collect();
        summary.resumed += plan.len() - pending.len();

        let chunk = (pool.current_num_threads() * 4).max(1);
        for batch in pending.chunks(chunk) {
            let results: Vec<(&PlannedRun, Result<TimedRecord>)> = pool.install(|| {
                batch
                    .par_iter()
                    .map(|p| {
                        let r = run_simulation(&specs[p.entry], p.true_ber, p.n_per_class, p.run_id, p.seed, &config.estimators);
                        (*p, r)
                    })
                    .collect()
            });
            write_batch(config, &records_path, results, &mut summary)?;
        }
    }
    Ok(summary)
}

fn write_batch(
    config: &CampaignConfig,
    records_path: &Path,
    results: Vec<(&PlannedRun, Result<TimedRecord>)>,
    summary: &mut CampaignSummary,
) -> Result<()> {
    let mut ok = Vec::new();
    let mut timings = String::new();
    let mut failures = String::new();
    for (p, r) in results {
        match r {
            Ok(t) => {
                timings.push_str(&serde_json::to_string(&TimingLine {
                    run_id: p.run_id,
                    wall_time_s: t.wall_time_s,
                })?);
                timings.push('\n');
                ok.push(t.record);
            }
            Err(e) => {
                failures.push_str(&serde_json::to_string(&FailureLine {
                    run_id: p.run_id,
                    seed: p.seed,
                    d: p.d,
                    n_per_class: p.n_per_class,
                    error: &e.to_string(),
                })?);
                failures.push('\n');
                summary.failed += 1;
            }
        }
    }
    summary.completed += ok.len();
    append_records(&ok, records_path)?;
    append_text(&config.output_dir.join(TIMINGS_FILE), &timings)?;
    append_text(&config.output_dir.join(FAILURES_FILE), &failures)?;
    Ok(())
}

fn append_text(path: &Path, text: &str) -> Result<()> {
    if text.is_empty() {
        return Ok(());
    }
    let mut f = fs::OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_from_json() {
        let c = CampaignConfig::from_json(
            r#"{"family": "GvG", "dims": [2], "n_per_class": [100], "master_seed": 1, "output_dir": "out"}"#,
        )
        .unwrap();
        assert_eq!(c.runs, 2500);
        assert_eq!(c.ber_range, [0.01, 0.49]);
        assert_eq!(c.estimators, EstimatorSet::all());
        assert_eq!(c.ground_truth, GroundTruthProfile::Desk);
        assert!(CampaignConfig::from_json(
            r#"{"family": "GvG", "dims": [2], "n_per_class": [100], "master_seed": 1, "output_dir": "o", "runs": 0}"#
        )
        .is_err());
        assert!(CampaignConfig::from_json(
            r#"{"family": "GvG", "dims": [2], "n_per_class": [100], "master_seed": 1, "output_dir": "o", "ber_range": [0.1, 0.6]}"#
        )
        .is_err());
    }

    #[test]
    fn workers_resolution() {
        assert_eq!(resolve_workers(Some(3)), 3);
        assert!(resolve_workers(None) >= 1);
    }
}
