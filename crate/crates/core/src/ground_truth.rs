//! Monte Carlo ground truth and BER calibration.
//!
//! The reference BER of a scenario is the error rate of the Bayes classifier
//! (equal priors, exact densities) on a large fresh sample. Calibration
//! searches the scenario's offset (or SvS radius) by bisection until the
//! achieved BER values cover the requested range with no gap wider than
//! `max_gap`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::error::{invalid, Error, Result};
use crate::harness::streams::{derive_stream, Purpose};
use crate::scenarios::{build_scenario, Family, ScenarioParams, ScenarioSpec, DEFAULT_VARIANCE};

/// Monte Carlo budget for ground-truth BER values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroundTruthProfile {
    /// 1000 batches of 1024 samples.
    Reference,
    /// 128 batches of 1024 samples (131,072 in total).
    Desk,
}

impl GroundTruthProfile {
    pub fn batches(self) -> usize {
        match self {
            GroundTruthProfile::Reference => 1000,
            GroundTruthProfile::Desk => 128,
        }
    }

    pub fn batch_size(self) -> usize {
        1024
    }

    pub fn samples(self) -> usize {
        self.batches() * self.batch_size()
    }
}

impl fmt::Display for GroundTruthProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroundTruthProfile::Reference => "reference",
            GroundTruthProfile::Desk => "desk",
        })
    }
}

impl FromStr for GroundTruthProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reference" => Ok(GroundTruthProfile::Reference),
            "desk" => Ok(GroundTruthProfile::Desk),
            _ => invalid(format!("unknown ground-truth profile `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthEntry {
    pub spec: ScenarioSpec,
    pub ber: f64,
    pub std_err: f64,
    pub n_mc: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibratedParameterTable {
    pub family: Family,
    pub d: usize,
    pub ber_lo: f64,
    pub ber_hi: f64,
    pub max_gap: f64,
    pub variance: f64,
    pub seed: u64,
    pub profile: GroundTruthProfile,
    /// Search procedure used to propose parameters.
    pub method: String,
    /// Sorted by strictly increasing `ber`.
    pub entries: Vec<GroundTruthEntry>,
}

impl CalibratedParameterTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest gap between consecutive BER values.
    pub fn max_observed_gap(&self) -> f64 {
        self.entries
            .windows(2)
            .map(|w| w[1].ber - w[0].ber)
            .fold(0.0, f64::max)
    }

    /// Checks that the entries cover `[lo, hi]` with gaps of at most `max_gap`.
    pub fn check_coverage(&self, lo: f64, hi: f64) -> Result<()> {
        let (Some(first), Some(last)) = (self.entries.first(), self.entries.last()) else {
            return Err(Error::Calibration("table is empty".into()));
        };
        let slack = self.max_gap;
        if first.ber > lo + slack || last.ber < hi - slack {
            return Err(Error::Calibration(format!(
                "table covers [{:.4}, {:.4}] but [{lo}, {hi}] was requested",
                first.ber, last.ber
            )));
        }
        let gap = self.max_observed_gap();
        if gap > self.max_gap + 1e-12 {
            return Err(Error::Calibration(format!(
                "table has a BER gap of {gap:.4} (> {})",
                self.max_gap
            )));
        }
        Ok(())
    }

    /// File name used by the calibration cache.
    pub fn cache_key(family: Family, d: usize, lo: f64, hi: f64, seed: u64, profile: GroundTruthProfile) -> String {
        format!("calib-{}-d{d}-{lo}-{hi}-s{seed}-{profile}.json", family.as_str().to_ascii_lowercase())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Bayes-optimal decision under equal priors; ties go to A.
pub fn bayes_classify(spec: &ScenarioSpec, x: &[f64]) -> Result<Label> {
    let a = spec.log_pdf(Label::A, x)?;
    let b = spec.log_pdf(Label::B, x)?;
    Ok(if a >= b { Label::A } else { Label::B })
}

#[inline]
fn classify_unchecked(spec: &ScenarioSpec, x: &[f64]) -> Label {
    let a = spec.log_pdf_unchecked(Label::A, x);
    let b = spec.log_pdf_unchecked(Label::B, x);
    if a >= b {
        Label::A
    } else {
        Label::B
    }
}

/// Error rate of the Bayes classifier over the rows of a labeled dataset.
pub fn bayes_classifier_error(spec: &ScenarioSpec, data: &crate::dataset::LabeledDataset) -> Result<f64> {
    if data.dim() != spec.d {
        return Err(Error::DimensionMismatch {
            expected: spec.d,
            got: data.dim(),
        });
    }
    if data.is_empty() {
        return Err(Error::InsufficientData("empty dataset".into()));
    }
    let wrong = (0..data.len())
        .filter(|&i| classify_unchecked(spec, data.row(i)) != data.label(i))
        .count();
    Ok(wrong as f64 / data.len() as f64)
}

/// Monte Carlo BER: labels drawn with probability ½ each, points from the
/// labeled class, errors counted against the Bayes classifier.
///
/// Each batch runs on its own generator seeded from `rng`, so the result does
/// not depend on how batches are scheduled.
pub fn mc_ber<R: Rng + ?Sized>(
    spec: &ScenarioSpec,
    batches: usize,
    batch_size: usize,
    rng: &mut R,
) -> Result<GroundTruthEntry> {
    if batches == 0 || batch_size == 0 {
        return invalid("mc_ber needs at least one batch of at least one sample");
    }
    let seeds: Vec<[u8; 32]> = (0..batches).map(|_| rng.gen()).collect();
    let errors: usize = seeds
        .into_par_iter()
        .map(|seed| {
            let mut r = ChaCha20Rng::from_seed(seed);
            let mut x = Vec::with_capacity(spec.d);
            let mut wrong = 0usize;
            for _ in 0..batch_size {
                let label = if r.gen::<bool>() { Label::A } else { Label::B };
                x.clear();
                spec.sample_point_into(label, &mut r, &mut x);
                if classify_unchecked(spec, &x) != label {
                    wrong += 1;
                }
            }
            wrong
        })
        .sum();
    let n = batches * batch_size;
    let p = errors as f64 / n as f64;
    Ok(GroundTruthEntry {
        spec: spec.clone(),
        ber: p,
        std_err: (p * (1.0 - p) / n as f64).sqrt(),
        n_mc: n,
    })
}

/// Knobs for [`calibrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOptions {
    pub max_gap: f64,
    /// Component variance of both classes; held fixed during the search.
    pub variance: f64,
    pub profile: GroundTruthProfile,
    /// Upper bound on Monte Carlo evaluations before giving up.
    pub max_evaluations: usize,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            max_gap: 0.01,
            variance: DEFAULT_VARIANCE,
            profile: GroundTruthProfile::Desk,
            max_evaluations: 600,
        }
    }
}

struct Calibrator {
    base: ScenarioParams,
    seed: u64,
    profile: GroundTruthProfile,
    evaluated: BTreeMap<u64, GroundTruthEntry>,
    max_evaluations: usize,
}

impl Calibrator {
    fn eval(&mut self, control: f64) -> Result<f64> {
        let key = control.to_bits();
        if let Some(e) = self.evaluated.get(&key) {
            return Ok(e.ber);
        }
        if self.evaluated.len() >= self.max_evaluations {
            return Err(Error::Calibration(format!(
                "evaluation budget of {} exhausted",
                self.max_evaluations
            )));
        }
        // Every candidate is built from the same center stream state, so
        // hypersphere directions are shared across the table.
        let mut centers = derive_stream(self.seed, 0, Purpose::Centers);
        let spec = build_scenario(self.base.with_control(control), &mut centers)?;
        let mut mc = derive_stream(self.seed, self.evaluated.len() as u64, Purpose::Data);
        let entry = mc_ber(&spec, self.profile.batches(), self.profile.batch_size(), &mut mc)?;
        let ber = entry.ber;
        self.evaluated.insert(key, entry);
        Ok(ber)
    }
}

/// Builds a calibration table for `family` in `d` dimensions covering
/// `[ber_lo, ber_hi]`.
///
/// The offset `mu` (the radius `r_a` for SvS) is grown until the BER falls to
/// `ber_lo`, shrunk until it reaches `ber_hi`, and then intervals whose
/// endpoint BERs differ by more than `max_gap` are bisected.
pub fn calibrate(
    family: Family,
    d: usize,
    ber_lo: f64,
    ber_hi: f64,
    options: CalibrationOptions,
    seed: u64,
) -> Result<CalibratedParameterTable> {
    if !(ber_lo > 0.0 && ber_lo < ber_hi && ber_hi <= 0.5) {
        return invalid(format!("BER range must satisfy 0 < lo < hi <= 0.5, got [{ber_lo}, {ber_hi}]"));
    }
    if !(options.max_gap > 0.0) {
        return invalid("max_gap must be positive");
    }
    let base = ScenarioParams::new(family, d, 1.0).with_variances(options.variance, options.variance);
    let mut cal = Calibrator {
        base,
        seed,
        profile: options.profile,
        evaluated: BTreeMap::new(),
        max_evaluations: options.max_evaluations,
    };

    const MAX_STEPS: usize = 40;
    let mut hi_ctrl = options.variance.sqrt() * 2.0;
    let mut reached = false;
    for _ in 0..MAX_STEPS {
        if cal.eval(hi_ctrl)? <= ber_lo {
            reached = true;
            break;
        }
        hi_ctrl *= 2.0;
    }
    if !reached {
        return Err(Error::Calibration(format!(
            "{family} d={d}: BER never dropped to {ber_lo} (last control {hi_ctrl})"
        )));
    }

    let mut lo_ctrl = hi_ctrl / 2.0;
    reached = false;
    for _ in 0..MAX_STEPS {
        if cal.eval(lo_ctrl)? >= ber_hi {
            reached = true;
            break;
        }
        lo_ctrl /= 2.0;
    }
    if !reached {
        return Err(Error::Calibration(format!(
            "{family} d={d}: BER never rose to {ber_hi} (last control {lo_ctrl})"
        )));
    }

    let min_step = hi_ctrl * 1e-9;
    loop {
        let points: Vec<(f64, f64)> = cal
            .evaluated
            .values()
            .map(|e| (e.spec.params().control(), e.ber))
            .filter(|(c, _)| *c >= lo_ctrl && *c <= hi_ctrl)
            .collect::<Vec<_>>();
        let mut sorted = points;
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mids: Vec<f64> = sorted
            .windows(2)
            .filter(|w| (w[1].1 - w[0].1).abs() > options.max_gap && w[1].0 - w[0].0 > min_step)
            .map(|w| 0.5 * (w[0].0 + w[1].0))
            .collect();
        if mids.is_empty() {
            break;
        }
        for m in mids {
            cal.eval(m)?;
        }
    }

    let mut entries: Vec<GroundTruthEntry> = cal
        .evaluated
        .into_values()
        .filter(|e| {
            let c = e.spec.params().control();
            c >= lo_ctrl && c <= hi_ctrl
        })
        .collect();
    // equal BERs: keep the larger control value
    entries.sort_by(|a, b| {
        a.ber
            .total_cmp(&b.ber)
            .then(b.spec.params().control().total_cmp(&a.spec.params().control()))
    });
    entries.dedup_by(|next, prev| next.ber == prev.ber);

    let start = entries.iter().rposition(|e| e.ber <= ber_lo).unwrap_or(0);
    let end = entries
        .iter()
        .position(|e| e.ber >= ber_hi)
        .unwrap_or(entries.len() - 1);
    let entries = entries[start..=end].to_vec();

    let table = CalibratedParameterTable {
        family,
        d,
        ber_lo,
        ber_hi,
        max_gap: options.max_gap,
        variance: options.variance,
        seed,
        profile: options.profile,
        method: "bisection".into(),
        entries,
    };
    table.check_coverage(ber_lo, ber_hi)?;
    Ok(table)
}

/// Evenly spaced target BERs over `[lo, hi]`, endpoints included.
pub fn uniform_targets(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Indices of table entries whose BER is nearest to `count` evenly spaced
/// targets over the table's requested range. Entries repeat when `count`
/// exceeds what the table can resolve.
pub fn select_uniform(table: &CalibratedParameterTable, count: usize) -> Result<Vec<usize>> {
    if table.is_empty() {
        return invalid("cannot select from an empty calibration table");
    }
    let bers: Vec<f64> = table.entries.iter().map(|e| e.ber).collect();
    Ok(uniform_targets(table.ber_lo, table.ber_hi, count)
        .into_iter()
        .map(|t| nearest(&bers, t))
        .collect())
}

fn nearest(sorted: &[f64], target: f64) -> usize {
    let i = sorted.partition_point(|&b| b < target);
    if i == 0 {
        return 0;
    }
    if i == sorted.len() {
        return sorted.len() - 1;
    }
    if target - sorted[i - 1] <= sorted[i] - target {
        i - 1
    } else {
        i
    }
}
