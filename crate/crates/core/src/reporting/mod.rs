//! Error summaries over simulation records: MSE, 95% percentile bounds and
//! the best estimator per (family, d, n) cell.
//!
//! Errors are in percentage points, `E = 100·BER − 100·estimate`, so a
//! positive error means the estimator underestimated.

pub mod loess;
pub mod plot;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::harness::EstimateRecord;
use crate::scenarios::Family;

pub use loess::{loess_fit, DEFAULT_SPAN};
pub use plot::{emit_plot, PlotArtifact};

/// Below this many records a summary is flagged as low confidence.
pub const MIN_CONFIDENT_RECORDS: usize = 30;

/// Width under which a bound range counts as tight (the bold cells of the
/// tables), in percentage points.
pub const TIGHT_RANGE_PP: f64 = 5.0;

/// Signed errors of `estimator` over `records`.
pub fn error_values(records: &[&EstimateRecord], estimator: &str) -> Result<Vec<f64>> {
    if records.is_empty() {
        return invalid("no records to summarize");
    }
    records
        .iter()
        .map(|r| {
            r.estimates
                .get(estimator)
                .map(|&est| 100.0 * r.true_ber - 100.0 * est)
                .ok_or_else(|| Error::InvalidParameter(format!("run {} has no `{estimator}` estimate", r.run_id)))
        })
        .collect()
}

/// Percentile by linear interpolation between order statistics at 1-based
/// rank `1 + q/100 · (n − 1)`.
pub fn percentile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return invalid("percentile of an empty list");
    }
    if !(0.0..=100.0).contains(&q) {
        return invalid(format!("percentile must lie in [0, 100], got {q}"));
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    Ok(percentile_sorted(&v, q))
}

fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub estimator: String,
    pub count: usize,
    /// Mean squared error, percentage points squared.
    pub mse: f64,
    /// 2.5th percentile of the error.
    pub bound_lo: f64,
    /// 97.5th percentile of the error.
    pub bound_hi: f64,
    pub meets_5pp: bool,
    pub low_confidence: bool,
}

pub fn summarize_errors(estimator: &str, errors: &[f64]) -> Result<ErrorSummary> {
    if errors.is_empty() {
        return invalid("no errors to summarize");
    }
    let mut sorted = errors.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    // sum in sorted order so the result does not depend on record order
    let mse = sorted.iter().map(|e| e * e).sum::<f64>() / sorted.len() as f64;
    let bound_lo = percentile_sorted(&sorted, 2.5);
    let bound_hi = percentile_sorted(&sorted, 97.5);
    Ok(ErrorSummary {
        estimator: estimator.to_string(),
        count: sorted.len(),
        mse,
        bound_lo,
        bound_hi,
        meets_5pp: bound_hi - bound_lo < TIGHT_RANGE_PP,
        low_confidence: sorted.len() < MIN_CONFIDENT_RECORDS,
    })
}

pub fn summarize(records: &[&EstimateRecord], estimator: &str) -> Result<ErrorSummary> {
    summarize_errors(estimator, &error_values(records, estimator)?)
}

/// Which record fields define a table cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupBy {
    /// (family, d, n), the layout of the published tables.
    Cell,
    Family,
    D,
    N,
}

impl FromStr for GroupBy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cell" => Ok(GroupBy::Cell),
            "family" => Ok(GroupBy::Family),
            "d" => Ok(GroupBy::D),
            "n" => Ok(GroupBy::N),
            _ => invalid(format!("unknown grouping `{s}` (expected cell, family, d or n)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub family: Option<Family>,
    pub d: Option<usize>,
    pub n_per_class: Option<usize>,
}

impl CellKey {
    fn of(r: &EstimateRecord, by: GroupBy) -> CellKey {
        let all = CellKey {
            family: Some(r.family),
            d: Some(r.d),
            n_per_class: Some(r.n_per_class),
        };
        match by {
            GroupBy::Cell => all,
            GroupBy::Family => CellKey { d: None, n_per_class: None, ..all },
            GroupBy::D => CellKey { family: None, n_per_class: None, ..all },
            GroupBy::N => CellKey { family: None, d: None, ..all },
        }
    }

    fn labels(&self) -> [String; 3] {
        let f = |v: Option<String>| v.unwrap_or_else(|| "*".into());
        [
            f(self.family.map(|x| x.to_string())),
            f(self.d.map(|x| x.to_string())),
            f(self.n_per_class.map(|x| x.to_string())),
        ]
    }
}

pub fn group_records(records: &[EstimateRecord], by: GroupBy) -> BTreeMap<CellKey, Vec<&EstimateRecord>> {
    let mut out: BTreeMap<CellKey, Vec<&EstimateRecord>> = BTreeMap::new();
    for r in records {
        out.entry(CellKey::of(r, by)).or_default().push(r);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell: CellKey,
    /// One summary per estimator, in id order.
    pub summaries: Vec<ErrorSummary>,
    /// Lowest MSE; ties go to the lexicographically smallest id.
    pub best: String,
}

impl CellSummary {
    pub fn best_summary(&self) -> &ErrorSummary {
        self.summaries
            .iter()
            .find(|s| s.estimator == self.best)
            .expect("best estimator is summarized")
    }

    pub fn get(&self, estimator: &str) -> Option<&ErrorSummary> {
        self.summaries.iter().find(|s| s.estimator == estimator)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub cells: Vec<CellSummary>,
}

/// Summaries of `estimators` (default: every id present in all records of
/// a cell) for each group, with the best estimator by MSE.
pub fn best_estimator_table(records: &[EstimateRecord], by: GroupBy, estimators: Option<&[String]>) -> Result<SummaryTable> {
    let mut cells = Vec::new();
    for (cell, rs) in group_records(records, by) {
        let ids: Vec<String> = match estimators {
            Some(ids) => {
                let mut v = ids.to_vec();
                v.sort();
                v.dedup();
                v
            }
            None => rs[0]
                .estimates
                .keys()
                .filter(|id| rs.iter().all(|r| r.estimates.contains_key(*id)))
                .cloned()
                .collect(),
        };
        if ids.is_empty() {
            return invalid("no estimator is present in every record of a cell");
        }
        let summaries = ids.iter().map(|id| summarize(&rs, id)).collect::<Result<Vec<_>>>()?;
        let best = summaries
            .iter()
            .min_by(|a, b| a.mse.total_cmp(&b.mse).then_with(|| a.estimator.cmp(&b.estimator)))
            .map(|s| s.estimator.clone())
            .expect("nonempty");
        cells.push(CellSummary { cell, summaries, best });
    }
    Ok(SummaryTable { cells })
}

impl SummaryTable {
    /// One row per (cell, estimator).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("family,d,n_per_class,estimator,count,mse,bound_lo,bound_hi,meets_5pp,best,low_confidence\n");
        for c in &self.cells {
            let [f, d, n] = c.cell.labels();
            for e in &c.summaries {
                let _ = writeln!(
                    s,
                    "{f},{d},{n},{},{},{:.6},{:.6},{:.6},{},{},{}",
                    e.estimator,
                    e.count,
                    e.mse,
                    e.bound_lo,
                    e.bound_hi,
                    e.meets_5pp,
                    e.estimator == c.best,
                    e.low_confidence
                );
            }
        }
        s
    }

    /// Best estimator per cell with its MSE and bounds; tight cells in bold.
    pub fn to_markdown(&self) -> String {
        let mut s = String::from("| Family | d | n | Best | MSE | 95% bounds |\n|---|---|---|---|---|---|\n");
        for c in &self.cells {
            let [f, d, n] = c.cell.labels();
            let b = c.best_summary();
            let body = format!("{} | {:.1} | ({:.1}, {:.1})", b.estimator, b.mse, b.bound_lo, b.bound_hi);
            let body = if b.meets_5pp {
                body.split(" | ").map(|p| format!("**{p}**")).collect::<Vec<_>>().join(" | ")
            } else {
                body
            };
            let _ = writeln!(s, "| {f} | {d} | {n} | {body} |");
        }
        s
    }

    /// Every estimator in every cell.
    pub fn to_markdown_full(&self) -> String {
        let mut s = String::from("| Family | d | n | Estimator | MSE | 95% bounds | Runs |\n|---|---|---|---|---|---|---|\n");
        for c in &self.cells {
            let [f, d, n] = c.cell.labels();
            for e in &c.summaries {
                let mark = if e.estimator == c.best { " *" } else { "" };
                let _ = writeln!(
                    s,
                    "| {f} | {d} | {n} | {}{mark} | {:.1} | ({:.1}, {:.1}) | {} |",
                    e.estimator, e.mse, e.bound_lo, e.bound_hi, e.count
                );
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: u64, ber: f64, est: f64) -> EstimateRecord {
        EstimateRecord {
            schema: 1,
            run_id: id,
            scenario_id: "s".into(),
            family: Family::GvG,
            seed: 0,
            d: 2,
            n_per_class: 10,
            true_ber: ber,
            estimates: [("x".to_string(), est)].into_iter().collect(),
            diagnostics: Default::default(),
        }
    }

    #[test]
    fn error_sign() {
        let r = [rec(0, 0.25, 0.20), rec(1, 0.10, 0.10), rec(2, 0.3, 0.4)];
        let refs: Vec<&EstimateRecord> = r.iter().collect();
        let e = error_values(&refs, "x").unwrap();
        assert!((e[0] - 5.0).abs() < 1e-12);
        assert_eq!(e[1], 0.0);
        assert!((e[2] + 10.0).abs() < 1e-12);
        assert!(error_values(&refs, "y").is_err());
        assert!(error_values(&[], "x").is_err());
    }

    #[test]
    fn percentile_examples() {
        let v: Vec<f64> = (1..=100).rev().map(|i| i as f64).collect();
        assert!((percentile(&v, 2.5).unwrap() - 3.475).abs() < 1e-12);
        assert!((percentile(&v, 97.5).unwrap() - 97.525).abs() < 1e-12);
        for q in [0.0, 30.0, 100.0] {
            assert_eq!(percentile(&[4.2], q).unwrap(), 4.2);
        }
        assert!(percentile(&[], 50.0).is_err());
    }

    #[test]
    fn summary_examples() {
        let s = summarize_errors("x", &[1.0, -2.0, 3.0]).unwrap();
        assert!((s.mse - 14.0 / 3.0).abs() < 1e-12);
        assert!(s.low_confidence);
        let s = summarize_errors("x", &[1.5; 40]).unwrap();
        assert_eq!((s.bound_lo, s.bound_hi, s.mse), (1.5, 1.5, 2.25));
        assert!(s.meets_5pp && !s.low_confidence);
        let s = summarize_errors("x", &[0.0, 5.0]).unwrap();
        assert_eq!(s.bound_hi - s.bound_lo, 4.75);
    }
}
