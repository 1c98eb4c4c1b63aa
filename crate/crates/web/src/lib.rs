//! Browser bindings: draw a scenario sample, run estimators on it and
//! estimate its true BER by Monte Carlo. Every call rebuilds the scenario
//! from `(family, d, control, seed)`, so the three operations agree on the
//! data they describe.
//!
//! Results are returned as JSON strings.

use std::collections::BTreeMap;

use berbench::estimators::{run_estimators, EstimatorSet};
use berbench::ground_truth::mc_ber;
use berbench::harness::{derive_stream, Purpose};
use berbench::{build_scenario, Family, Label, ScenarioParams, ScenarioSpec};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MC_BATCH: usize = 1024;

fn scenario(family: &str, d: usize, control: f64, seed: u32) -> Result<ScenarioSpec, String> {
    let family: Family = family.parse().map_err(|e: berbench::Error| e.to_string())?;
    let params = ScenarioParams::new(family, d, control);
    build_scenario(params, &mut derive_stream(seed as u64, 0, Purpose::Centers)).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Sample {
    d: usize,
    /// First two coordinates of each point (second is 0 when d = 1).
    points: Vec<[f64; 2]>,
    /// 0 for class A, 1 for class B.
    labels: Vec<u8>,
}

#[derive(Serialize)]
struct Estimates {
    n_per_class: usize,
    estimates: BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct Truth {
    ber: f64,
    std_err: f64,
    n_mc: usize,
}

pub fn sample_points(family: &str, d: usize, control: f64, n_per_class: usize, seed: u32) -> Result<String, String> {
    let spec = scenario(family, d, control, seed)?;
    let data = spec.sample_dataset(n_per_class, &mut derive_stream(seed as u64, 0, Purpose::Data));
    let points = (0..data.len())
        .map(|i| {
            let r = data.row(i);
            [r[0], r.get(1).copied().unwrap_or(0.0)]
        })
        .collect();
    let labels = data.labels().iter().map(|&l| u8::from(l == Label::B)).collect();
    serde_json::to_string(&Sample { d, points, labels }).map_err(|e| e.to_string())
}

/// `estimators` is a comma-separated id list; empty means every estimator.
pub fn estimate(family: &str, d: usize, control: f64, n_per_class: usize, seed: u32, estimators: &str) -> Result<String, String> {
    let spec = scenario(family, d, control, seed)?;
    let ids: Vec<&str> = estimators.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    let set = if ids.is_empty() {
        EstimatorSet::all()
    } else {
        EstimatorSet::new(&ids).map_err(|e| e.to_string())?
    };
    let data = spec.sample_dataset(n_per_class, &mut derive_stream(seed as u64, 0, Purpose::Data));
    let out = run_estimators(&data, &set, Some(&spec)).map_err(|e| e.to_string())?;
    serde_json::to_string(&Estimates {
        n_per_class,
        estimates: out.estimates,
    })
    .map_err(|e| e.to_string())
}

/// Monte Carlo BER of the scenario from `batches` batches of 1024 draws.
pub fn ground_truth(family: &str, d: usize, control: f64, seed: u32, batches: usize) -> Result<String, String> {
    let spec = scenario(family, d, control, seed)?;
    let e = mc_ber(&spec, batches, MC_BATCH, &mut derive_stream(seed as u64, 0, Purpose::Estimator)).map_err(|e| e.to_string())?;
    serde_json::to_string(&Truth {
        ber: e.ber,
        std_err: e.std_err,
        n_mc: e.n_mc,
    })
    .map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = samplePoints)]
pub fn sample_points_js(family: &str, d: usize, control: f64, n_per_class: usize, seed: u32) -> Result<String, JsError> {
    sample_points(family, d, control, n_per_class, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = estimate)]
pub fn estimate_js(family: &str, d: usize, control: f64, n_per_class: usize, seed: u32, estimators: &str) -> Result<String, JsError> {
    estimate(family, d, control, n_per_class, seed, estimators).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = groundTruth)]
pub fn ground_truth_js(family: &str, d: usize, control: f64, seed: u32, batches: usize) -> Result<String, JsError> {
    ground_truth(family, d, control, seed, batches).map_err(|e| JsError::new(&e))
}
