//! End-to-end training: preprocess, split, subspace search, ensemble fit.

use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aag::{run_aag, AagOptions, SubspaceSet};
use crate::ensemble::{fit_ensemble_on_split, EnsembleModel, Label, TrainingSplit};
use crate::error::{Error, Result};
use crate::preprocess::{fit_preprocessor, RawTable};
use crate::table::AttributeSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubspaceStrategy {
    /// Subspaces found by the agglomerative search.
    Aag,
    /// One uniformly random attribute set per searched subspace, same sizes.
    RandomUniform,
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub bins: usize,
    pub cap: usize,
    pub alpha: f64,
    pub val_fraction: f64,
    pub seed: u64,
    pub include_singletons: bool,
    pub strategy: SubspaceStrategy,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            bins: 10,
            cap: 3,
            alpha: 0.05,
            val_fraction: 0.3,
            seed: 0,
            include_singletons: false,
            strategy: SubspaceStrategy::Aag,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PhaseTimings {
    pub preprocess: Duration,
    pub aag: Duration,
    pub ensemble_fit: Duration,
    pub score: Duration,
}

#[derive(Clone, Debug)]
pub struct TrainedModel {
    pub model: EnsembleModel,
    pub subspaces: SubspaceSet,
    pub split: TrainingSplit,
    pub timings: PhaseTimings,
}

/// Fits preprocessing on all of `raw`, searches subspaces on the fit split
/// and calibrates the ensemble on the validation split.
pub fn train_model(raw: &RawTable, config: &PipelineConfig) -> Result<TrainedModel> {
    let mut timings = PhaseTimings::default();
    let clock = Instant::now();
    let pre = fit_preprocessor(raw, config.bins)?;
    let table = pre.apply(raw)?;
    timings.preprocess = clock.elapsed();

    if table.n_rows() < 10 {
        return Err(Error::invalid(format!(
            "training needs at least 10 rows, got {}",
            table.n_rows()
        )));
    }
    let split = TrainingSplit::new(table.n_rows(), config.val_fraction, config.seed)?;

    let clock = Instant::now();
    let options = AagOptions {
        cap: config.cap,
        include_singletons: config.include_singletons,
        ..AagOptions::default()
    };
    let subspaces = run_aag(&table.select_rows(&split.fit), &options)?;
    timings.aag = clock.elapsed();

    let clock = Instant::now();
    let sets = match config.strategy {
        SubspaceStrategy::Aag => subspaces.attribute_sets(),
        SubspaceStrategy::RandomUniform => {
            random_like(&subspaces.attribute_sets(), table.n_attrs(), config.seed)
        }
    };
    let model = fit_ensemble_on_split(&table, &sets, &split, config.alpha)?.with_preprocess(pre);
    timings.ensemble_fit = clock.elapsed();

    Ok(TrainedModel {
        model,
        subspaces,
        split,
        timings,
    })
}

/// Uniformly random attribute sets with the same sizes as `like`.
pub fn random_like(like: &[AttributeSet], n_attrs: usize, seed: u64) -> Vec<AttributeSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5ab5);
    like.iter()
        .map(|s| AttributeSet::new(sample(&mut rng, n_attrs, s.len().min(n_attrs)).into_vec()))
        .collect()
}

/// Classifies raw rows with a trained model, timing the scoring phase.
pub fn score_raw(model: &EnsembleModel, data: &RawTable) -> Result<(Vec<(f64, Label)>, Duration)> {
    let clock = Instant::now();
    let out = model.classify_raw(data)?;
    Ok((out, clock.elapsed()))
}
