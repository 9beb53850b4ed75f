//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export takes plain numbers or CSV text and returns a JSON string,
//! which keeps the JavaScript side to `JSON.parse` and drawing.

use aag_core::aag::{run_aag, AagOptions};
use aag_core::ensemble::{fit_ensemble_on_split, Label, TrainingSplit};
use aag_core::eval::{f1_score, generate_planted, generate_setting1};
use aag_core::preprocess::{fit_apply, fit_preprocessor, read_csv, CsvOptions, RawTable};
use aag_core::{AttributeSet, Measures};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, JsValue> {
    serde_json::to_string(value).map_err(js_err)
}

fn parse(csv: &str) -> Result<RawTable, JsValue> {
    read_csv(csv.as_bytes(), &CsvOptions::default()).map_err(js_err)
}

#[derive(Serialize)]
struct Step {
    level: usize,
    kind: String,
    left: Vec<String>,
    right: Vec<String>,
    value: f64,
    rival: Option<f64>,
    accepted: bool,
}

#[derive(Serialize)]
struct Discovery {
    attributes: Vec<String>,
    subspaces: Vec<Vec<String>>,
    levels: Vec<Vec<Vec<String>>>,
    steps: Vec<Step>,
}

/// Runs the grouping search on CSV text and returns the merge trace.
#[wasm_bindgen]
pub fn discover(csv: &str, bins: usize, cap: usize) -> Result<String, JsValue> {
    let raw = parse(csv)?;
    let (_, table) = fit_apply(&raw, bins).map_err(js_err)?;
    let options = AagOptions {
        cap,
        ..AagOptions::default()
    };
    let out = run_aag(&table, &options).map_err(js_err)?;
    let names = table.attr_names();
    let named = |s: &AttributeSet| s.iter().map(|a| names[a].clone()).collect::<Vec<_>>();
    to_json(&Discovery {
        attributes: names.to_vec(),
        subspaces: out.subspaces.iter().map(|s| named(&s.attrs)).collect(),
        levels: out
            .levels
            .iter()
            .map(|l| l.iter().map(named).collect())
            .collect(),
        steps: out
            .merges
            .iter()
            .map(|m| Step {
                level: m.level,
                kind: format!("{:?}", m.kind).to_lowercase(),
                left: named(&m.left),
                right: named(&m.right),
                value: m.value,
                rival: m.rival,
                accepted: m.accepted,
            })
            .collect(),
    })
}

#[derive(Serialize)]
struct Matrix {
    attributes: Vec<String>,
    values: Vec<Vec<f64>>,
}

/// Pairwise normalized distances between single attributes.
#[wasm_bindgen]
pub fn distance_matrix(csv: &str, bins: usize) -> Result<String, JsValue> {
    let raw = parse(csv)?;
    let (_, table) = fit_apply(&raw, bins).map_err(js_err)?;
    let m = Measures::new(&table, 3).map_err(js_err)?;
    let p = table.n_attrs();
    let single = AttributeSet::single;
    let values = (0..p)
        .map(|i| {
            (0..p)
                .map(|j| {
                    if i == j {
                        Ok(0.0)
                    } else {
                        m.normalized_measure(&single(i), &single(j)).map_err(js_err)
                    }
                })
                .collect::<Result<Vec<f64>, JsValue>>()
        })
        .collect::<Result<Vec<_>, JsValue>>()?;
    to_json(&Matrix {
        attributes: table.attr_names().to_vec(),
        values,
    })
}

#[derive(Serialize)]
struct EnsembleRun {
    rho: f64,
    subspaces: Vec<Vec<String>>,
    weights: Vec<f64>,
    normal_scores: Vec<f64>,
    anomaly_scores: Vec<f64>,
    perturbed: Vec<String>,
    f1: f64,
    tp: usize,
    fp: usize,
    fn_: usize,
    tn: usize,
}

/// Planted correlated data, Gaussian noise on a share of the attributes,
/// then the full train and score pipeline.
#[wasm_bindgen]
pub fn ensemble_demo(
    rows: usize,
    fraction: f64,
    alpha: f64,
    bins: usize,
    seed: u32,
) -> Result<String, JsValue> {
    let seed = u64::from(seed);
    let data = generate_planted(rows, 12, &[vec![0, 1, 2, 3], vec![4, 5, 6, 7]], 0.3, seed)
        .map_err(js_err)?;
    let split = generate_setting1(&data, "class", fraction, seed).map_err(js_err)?;
    let pre = fit_preprocessor(&split.train, bins).map_err(js_err)?;
    let table = pre.apply(&split.train).map_err(js_err)?;
    let parts = TrainingSplit::new(table.n_rows(), 0.3, seed).map_err(js_err)?;
    let found = run_aag(&table.select_rows(&parts.fit), &AagOptions::default()).map_err(js_err)?;
    let model = fit_ensemble_on_split(&table, &found.attribute_sets(), &parts, alpha)
        .map_err(js_err)?
        .with_preprocess(pre);
    let results = model.classify_raw(&split.test).map_err(js_err)?;
    let predictions: Vec<Label> = results.iter().map(|r| r.1).collect();
    let report = f1_score(&split.test_labels, &predictions).map_err(js_err)?;

    let names = table.attr_names();
    let scores_for = |want: Label| {
        results
            .iter()
            .zip(&split.test_labels)
            .filter(|(_, l)| **l == want)
            .map(|(r, _)| r.0)
            .collect()
    };
    to_json(&EnsembleRun {
        rho: model.rho,
        subspaces: model
            .detectors
            .iter()
            .map(|d| d.subspace.iter().map(|a| names[a].clone()).collect())
            .collect(),
        weights: model.weights.clone(),
        normal_scores: scores_for(Label::Normal),
        anomaly_scores: scores_for(Label::Anomaly),
        perturbed: split.provenance.perturbed_attributes.clone(),
        f1: report.f1,
        tp: report.tp,
        fp: report.fp,
        fn_: report.fn_,
        tn: report.tn,
    })
}
