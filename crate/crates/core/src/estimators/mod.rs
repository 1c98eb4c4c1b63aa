//! BER estimators and the suite runner that evaluates a set of them on one
//! dataset.

pub mod ghp;
pub mod kde;
pub mod knn;
pub mod naive_bayes;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::ground_truth::bayes_classifier_error;
use crate::scenarios::ScenarioSpec;

pub use ghp::{ghp_estimate, GhpEstimate};
pub use kde::{clakde_estimate, gc_estimate, gkde_estimate, ComparativeScores, GkdeBandwidth};
pub use knn::{knn_estimate, KnnEstimate};
pub use naive_bayes::naive_bayes_error;

/// Every data-only estimator id, in report order.
pub const ESTIMATOR_IDS: [&str; 15] = [
    "knn_H",
    "knn_M",
    "knn_L",
    "ghp_L",
    "ghp_M",
    "ghp_H",
    "gkde_h0.0025",
    "gkde_h0.05",
    "gkde_h0.1",
    "gkde_h0.25",
    "gkde_h0.5",
    "gkde_silverman",
    "clakde",
    "gc",
    "nb",
];

/// Error of the Bayes classifier built from the true densities. Needs the
/// scenario, so it is only available inside the harness.
pub const BAYES_ORACLE_ID: &str = "bayes";

/// A validated, ordered set of estimator ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct EstimatorSet(Vec<String>);

impl EstimatorSet {
    pub fn all() -> Self {
        EstimatorSet(ESTIMATOR_IDS.iter().map(|s| s.to_string()).collect())
    }

    pub fn new<S: AsRef<str>>(ids: &[S]) -> Result<Self> {
        let mut out: Vec<String> = Vec::with_capacity(ids.len());
        for id in ids {
            let id = id.as_ref();
            if id != BAYES_ORACLE_ID && !ESTIMATOR_IDS.contains(&id) {
                return Err(Error::UnknownEstimator(id.to_string()));
            }
            if !out.iter().any(|s| s == id) {
                out.push(id.to_string());
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidParameter("estimator set is empty".into()));
        }
        Ok(EstimatorSet(out))
    }

    pub fn ids(&self) -> &[String] {
        &self.0
    }

    pub fn contains(&self, id: &str) -> bool {
        self.0.iter().any(|s| s == id)
    }

    fn any_prefix(&self, prefix: &str) -> bool {
        self.0.iter().any(|s| s.starts_with(prefix))
    }

    pub fn needs_scenario(&self) -> bool {
        self.contains(BAYES_ORACLE_ID)
    }
}

impl TryFrom<Vec<String>> for EstimatorSet {
    type Error = Error;
    fn try_from(v: Vec<String>) -> Result<Self> {
        EstimatorSet::new(&v)
    }
}

impl From<EstimatorSet> for Vec<String> {
    fn from(s: EstimatorSet) -> Self {
        s.0
    }
}

/// Per-dataset diagnostics logged next to the estimates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knn_k0: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ghp_r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ghp_d: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutput {
    pub estimates: BTreeMap<String, f64>,
    pub diagnostics: Diagnostics,
}

fn failed(id: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| Error::EstimatorFailed {
        id: id.to_string(),
        reason: e.to_string(),
    }
}

/// Runs every estimator in `set` on `data`. `scenario` is required only when
/// the set contains the Bayes oracle. Any failure or non-finite output fails
/// the whole call.
pub fn run_estimators(
    data: &LabeledDataset,
    set: &EstimatorSet,
    scenario: Option<&ScenarioSpec>,
) -> Result<SuiteOutput> {
    let mut est = BTreeMap::new();
    let mut diag = Diagnostics::default();

    if set.any_prefix("knn_") {
        let k = knn_estimate(data, &knn::default_k_range()).map_err(failed("knn"))?;
        est.insert("knn_H".to_string(), k.upper);
        est.insert("knn_M".to_string(), k.mid);
        est.insert("knn_L".to_string(), k.lower);
        diag.knn_k0 = Some(k.k0);
    }

    let need_clakde = set.contains("clakde") || set.contains("gc");
    let mut ghp_lower = None;
    if set.any_prefix("ghp_") || set.contains("gc") {
        let g = ghp_estimate(data).map_err(failed("ghp"))?;
        est.insert("ghp_L".to_string(), g.lower);
        est.insert("ghp_M".to_string(), g.mid);
        est.insert("ghp_H".to_string(), g.upper);
        diag.ghp_r = Some(g.cross_edges);
        diag.ghp_d = Some(g.divergence);
        ghp_lower = Some(g.lower);
    }

    let mut gkde: Vec<(String, GkdeBandwidth)> = kde::GKDE_BANDWIDTHS
        .iter()
        .map(|&h| (format!("gkde_h{h}"), GkdeBandwidth::Fixed(h)))
        .collect();
    gkde.push(("gkde_silverman".to_string(), GkdeBandwidth::Silverman));
    gkde.retain(|(id, _)| set.contains(id));
    if !gkde.is_empty() {
        let bws: Vec<GkdeBandwidth> = gkde.iter().map(|(_, b)| *b).collect();
        let values = kde::gkde_estimates(data, &bws).map_err(failed("gkde"))?;
        for ((id, _), v) in gkde.into_iter().zip(values) {
            est.insert(id, v);
        }
    }

    if need_clakde {
        let c = clakde_estimate(data).map_err(failed("clakde"))?;
        est.insert("clakde".to_string(), c);
        if let Some(lower) = ghp_lower {
            est.insert("gc".to_string(), gc_estimate(lower, c));
        }
    }

    if set.contains("nb") {
        est.insert("nb".to_string(), naive_bayes_error(data).map_err(failed("nb"))?);
    }

    if set.contains(BAYES_ORACLE_ID) {
        let spec = scenario.ok_or_else(|| Error::EstimatorFailed {
            id: BAYES_ORACLE_ID.to_string(),
            reason: "the Bayes oracle needs the scenario densities".into(),
        })?;
        let v = bayes_classifier_error(spec, data).map_err(failed(BAYES_ORACLE_ID))?;
        est.insert(BAYES_ORACLE_ID.to_string(), v);
    }

    est.retain(|id, _| set.contains(id));
    for (id, v) in &est {
        if !v.is_finite() {
            return Err(Error::EstimatorFailed {
                id: id.clone(),
                reason: format!("non-finite estimate {v}"),
            });
        }
    }
    Ok(SuiteOutput {
        estimates: est,
        diagnostics: diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_parse() {
        assert!(EstimatorSet::new(&["knn_H", "bogus"]).is_err());
        assert!(EstimatorSet::new::<&str>(&[]).is_err());
        let s = EstimatorSet::new(&["gc", "gc", "nb"]).unwrap();
        assert_eq!(s.ids(), &["gc".to_string(), "nb".to_string()]);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<EstimatorSet>(&json).unwrap(), s);
        assert!(serde_json::from_str::<EstimatorSet>("[\"x\"]").is_err());
    }

    #[test]
    fn suite_emits_exactly_the_requested_ids() {
        let a: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64 * 0.3, (i % 3) as f64]).collect();
        let b: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64 * 0.3 + 1.0, (i % 4) as f64]).collect();
        let ds = LabeledDataset::from_classes(2, &a, &b).unwrap();
        let out = run_estimators(&ds, &EstimatorSet::all(), None).unwrap();
        let keys: Vec<&str> = out.estimates.keys().map(|s| s.as_str()).collect();
        let mut expected = ESTIMATOR_IDS.to_vec();
        expected.sort();
        assert_eq!(keys, expected);

        let only = EstimatorSet::new(&["gc"]).unwrap();
        let out = run_estimators(&ds, &only, None).unwrap();
        assert_eq!(out.estimates.len(), 1);
        assert!(run_estimators(&ds, &EstimatorSet::new(&["bayes"]).unwrap(), None).is_err());
    }
}
