//! Per-subspace minimum-volume cell detectors and their weighted vote.
//!
//! Each [`SubspaceDetector`] counts joint symbol tuples of its subspace and
//! accepts the smallest set of most frequent tuples covering `1 - alpha` of
//! the training rows. An [`EnsembleModel`] weights detectors by their
//! validation acceptance rate and labels a row normal when the weighted vote
//! reaches the threshold `rho`.

use std::collections::{BTreeSet, HashMap};
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::{PreprocessModel, RawTable};
use crate::table::{AttributeSet, DiscreteTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Normal,
    Anomaly,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Normal => "normal",
            Label::Anomaly => "anomaly",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s.trim() {
            "normal" => Some(Label::Normal),
            "anomaly" => Some(Label::Anomaly),
            _ => None,
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub codes: Vec<u32>,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceDetector {
    pub subspace: AttributeSet,
    pub alpha: f64,
    /// Training cells in acceptance order: descending mass, then tuple order.
    pub cells: Vec<Cell>,
    pub accepted_cells: BTreeSet<Vec<u32>>,
}

impl SubspaceDetector {
    pub fn accepted_mass(&self) -> f64 {
        self.cells
            .iter()
            .filter(|c| self.accepted_cells.contains(&c.codes))
            .map(|c| c.mass)
            .sum()
    }

    /// 1 if the projected tuple lies in the accepted region, 0 otherwise.
    pub fn predict(&self, row: &[u32]) -> Result<u8> {
        let mut key = Vec::with_capacity(self.subspace.len());
        for a in self.subspace.iter() {
            let code = row.get(a).ok_or_else(|| {
                Error::invalid(format!(
                    "row has {} codes, attribute {a} missing",
                    row.len()
                ))
            })?;
            key.push(*code);
        }
        Ok(u8::from(self.accepted_cells.contains(&key)))
    }
}

/// Fits the empirical minimum-volume region of `subspace` on `train`.
pub fn fit_detector(
    train: &DiscreteTable,
    subspace: &AttributeSet,
    alpha: f64,
) -> Result<SubspaceDetector> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::invalid(format!(
            "alpha must lie in [0, 1), got {alpha}"
        )));
    }
    if subspace.is_empty() {
        return Err(Error::invalid("subspace is empty"));
    }
    subspace.check_bounds(train.n_attrs())?;
    let n = train.n_rows();
    if n == 0 {
        return Err(Error::invalid("training table is empty"));
    }
    let columns: Vec<&[u32]> = subspace.iter().map(|a| train.column(a)).collect();
    let mut counts: HashMap<Vec<u32>, usize> = HashMap::new();
    for r in 0..n {
        let key: Vec<u32> = columns.iter().map(|c| c[r]).collect();
        *counts.entry(key).or_default() += 1;
    }
    let mut ranked: Vec<(Vec<u32>, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let target = (1.0 - alpha) * n as f64 - 1e-9;
    let mut accepted_cells = BTreeSet::new();
    let mut covered = 0usize;
    for (codes, count) in &ranked {
        if covered as f64 >= target {
            break;
        }
        covered += count;
        accepted_cells.insert(codes.clone());
    }
    let cells = ranked
        .into_iter()
        .map(|(codes, count)| Cell {
            codes,
            mass: count as f64 / n as f64,
        })
        .collect();
    Ok(SubspaceDetector {
        subspace: subspace.clone(),
        alpha,
        cells,
        accepted_cells,
    })
}

pub fn detector_predict(detector: &SubspaceDetector, row: &[u32]) -> Result<u8> {
    detector.predict(row)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleConfig {
    pub alpha: f64,
    pub val_fraction: f64,
    pub seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            alpha: 0.05,
            val_fraction: 0.3,
            seed: 0,
        }
    }
}

/// Row indices of the fit and validation parts, each in ascending order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingSplit {
    pub fit: Vec<usize>,
    pub validation: Vec<usize>,
}

impl TrainingSplit {
    /// Seeded shuffle; the validation part gets `round(val_fraction * n)` rows.
    pub fn new(n_rows: usize, val_fraction: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&val_fraction) {
            return Err(Error::invalid(format!(
                "validation fraction must lie in [0, 1), got {val_fraction}"
            )));
        }
        let n_val = (val_fraction * n_rows as f64).round() as usize;
        if n_val == 0 {
            return Err(Error::invalid("validation split is empty"));
        }
        if n_val >= n_rows {
            return Err(Error::invalid("fit split is empty"));
        }
        let mut order: Vec<usize> = (0..n_rows).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut validation = order[..n_val].to_vec();
        let mut fit = order[n_val..].to_vec();
        validation.sort_unstable();
        fit.sort_unstable();
        Ok(TrainingSplit { fit, validation })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub alpha: f64,
    pub rho: f64,
    pub weights: Vec<f64>,
    pub detectors: Vec<SubspaceDetector>,
    /// Fraction of validation rows each detector rejected.
    pub validation_errors: Vec<f64>,
    pub validation_rows: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preprocess: Option<PreprocessModel>,
}

/// Splits `train`, fits detectors on the fit part and calibrates on the rest.
pub fn fit_ensemble(
    train: &DiscreteTable,
    subspaces: &[AttributeSet],
    config: &EnsembleConfig,
) -> Result<EnsembleModel> {
    if train.n_rows() < 10 {
        return Err(Error::invalid(format!(
            "ensemble training needs at least 10 rows, got {}",
            train.n_rows()
        )));
    }
    let split = TrainingSplit::new(train.n_rows(), config.val_fraction, config.seed)?;
    fit_ensemble_on_split(train, subspaces, &split, config.alpha)
}

pub fn fit_ensemble_on_split(
    train: &DiscreteTable,
    subspaces: &[AttributeSet],
    split: &TrainingSplit,
    alpha: f64,
) -> Result<EnsembleModel> {
    if subspaces.is_empty() {
        return Err(Error::invalid("no subspaces to build detectors on"));
    }
    if split.validation.is_empty() {
        return Err(Error::invalid("validation split is empty"));
    }
    let fit = train.select_rows(&split.fit);
    let validation = train.select_rows(&split.validation);
    let detectors = subspaces
        .iter()
        .map(|s| fit_detector(&fit, s, alpha))
        .collect::<Result<Vec<_>>>()?;

    let n_val = validation.n_rows();
    let rows: Vec<Vec<u32>> = (0..n_val).map(|r| validation.row(r)).collect();
    let mut votes = vec![vec![0u8; n_val]; detectors.len()];
    for (d, det) in detectors.iter().enumerate() {
        for (r, row) in rows.iter().enumerate() {
            votes[d][r] = det.predict(row)?;
        }
    }
    let validation_errors: Vec<f64> = votes
        .iter()
        .map(|v| v.iter().filter(|&&g| g == 0).count() as f64 / n_val as f64)
        .collect();
    let raw: Vec<f64> = validation_errors.iter().map(|e| 1.0 - e).collect();
    let total: f64 = raw.iter().sum();
    let weights = if total > 0.0 {
        raw.iter().map(|u| u / total).collect()
    } else {
        vec![1.0 / detectors.len() as f64; detectors.len()]
    };

    let mut model = EnsembleModel {
        alpha,
        rho: 0.0,
        weights,
        detectors,
        validation_errors,
        validation_rows: n_val,
        preprocess: None,
    };
    let mut scores: Vec<f64> = (0..n_val)
        .map(|r| model.weighted_vote(votes.iter().map(|v| v[r])))
        .collect();
    scores.sort_by(f64::total_cmp);
    let m = ((alpha * n_val as f64) + 1e-9).floor() as usize;
    model.rho = scores[m.min(n_val - 1)].clamp(0.0, 1.0);
    Ok(model)
}

impl EnsembleModel {
    pub fn with_preprocess(mut self, preprocess: PreprocessModel) -> Self {
        self.preprocess = Some(preprocess);
        self
    }

    fn weighted_vote(&self, votes: impl Iterator<Item = u8>) -> f64 {
        self.weights
            .iter()
            .zip(votes)
            .map(|(w, g)| w * f64::from(g))
            .sum()
    }

    pub fn score(&self, row: &[u32]) -> Result<f64> {
        let votes = self
            .detectors
            .iter()
            .map(|d| d.predict(row))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.weighted_vote(votes.into_iter()))
    }

    pub fn classify(&self, row: &[u32]) -> Result<(f64, Label)> {
        let score = self.score(row)?;
        let label = if score >= self.rho {
            Label::Normal
        } else {
            Label::Anomaly
        };
        Ok((score, label))
    }

    pub fn classify_table(&self, table: &DiscreteTable) -> Result<Vec<(f64, Label)>> {
        (0..table.n_rows())
            .map(|r| self.classify(&table.row(r)))
            .collect()
    }

    /// Runs the embedded preprocessing, then classifies every row.
    pub fn classify_raw(&self, data: &RawTable) -> Result<Vec<(f64, Label)>> {
        let pre = self
            .preprocess
            .as_ref()
            .ok_or_else(|| Error::invalid("model has no embedded preprocessing"))?;
        self.classify_table(&pre.apply(data)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let model: EnsembleModel = serde_json::from_str(s)?;
        if model.weights.len() != model.detectors.len() {
            return Err(Error::invalid("weights and detectors differ in length"));
        }
        Ok(model)
    }
}

pub fn classify(model: &EnsembleModel, row: &[u32]) -> Result<(f64, Label)> {
    model.classify(row)
}

/// Writes `row_index,score,label` rows.
pub fn write_scores_csv<W: Write>(writer: W, results: &[(f64, Label)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::io("<scores output>", std::io::Error::other(e));
    w.write_record(["row_index", "score", "label"])
        .map_err(io)?;
    for (i, (score, label)) in results.iter().enumerate() {
        w.write_record([i.to_string(), format!("{score:.6}"), label.to_string()])
            .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io("<scores output>", e))?;
    Ok(())
}
