//! Benchmark split generators, F1 scoring and the subspace stability index.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::aag::{jaccard, run_aag, AagOptions, SubspaceSet};
use crate::ensemble::Label;
use crate::error::{Error, Result};
use crate::pipeline::{score_raw, train_model, PhaseTimings, PipelineConfig};
use crate::preprocess::{format_number, ColumnKind, RawColumn, RawTable};
use crate::table::{AttributeSet, DiscreteTable};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub f1: f64,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str = "tp,fp,fn,tn,f1";

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{:.6}",
            self.tp, self.fp, self.fn_, self.tn, self.f1
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Counts with anomaly as the positive class.
pub fn f1_score(labels: &[Label], predictions: &[Label]) -> Result<EvalReport> {
    if labels.len() != predictions.len() {
        return Err(Error::invalid(format!(
            "{} labels but {} predictions",
            labels.len(),
            predictions.len()
        )));
    }
    let mut r = EvalReport::default();
    for (&truth, &pred) in labels.iter().zip(predictions) {
        match (truth, pred) {
            (Label::Anomaly, Label::Anomaly) => r.tp += 1,
            (Label::Normal, Label::Anomaly) => r.fp += 1,
            (Label::Anomaly, Label::Normal) => r.fn_ += 1,
            (Label::Normal, Label::Normal) => r.tn += 1,
        }
    }
    let denom = 2 * r.tp + r.fn_ + r.fp;
    r.f1 = if denom > 0 {
        2.0 * r.tp as f64 / denom as f64
    } else {
        0.0
    };
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub setting: u8,
    pub seed: u64,
    pub class_column: String,
    pub majority_class: String,
    pub train_rows: usize,
    pub test_normal_rows: usize,
    pub test_anomaly_rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fraction_perturbed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub requested_attributes: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub perturbed_attributes: Vec<String>,
    #[serde(default)]
    pub clamped: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minority_fraction: Option<f64>,
    pub noise: String,
}

/// Training normals, a labelled test set and how they were produced.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkSplit {
    pub train: RawTable,
    pub test: RawTable,
    pub test_labels: Vec<Label>,
    pub provenance: Provenance,
}

impl BenchmarkSplit {
    /// Writes `train.csv`, `test.csv`, `labels.csv` and `provenance.json`.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let create = |name: &str| {
            let path = dir.join(name);
            std::fs::File::create(&path).map_err(|e| Error::io(path, e))
        };
        self.train.write_csv(create("train.csv")?, b',')?;
        self.test.write_csv(create("test.csv")?, b',')?;
        let mut labels = String::from("row_index,label\n");
        for (i, l) in self.test_labels.iter().enumerate() {
            labels.push_str(&format!("{i},{l}\n"));
        }
        let path = dir.join("labels.csv");
        std::fs::write(&path, labels).map_err(|e| Error::io(path, e))?;
        let path = dir.join("provenance.json");
        let json = serde_json::to_string_pretty(&self.provenance)?;
        std::fs::write(&path, json + "\n").map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

struct ClassRows {
    features: RawTable,
    majority: String,
    majority_rows: Vec<usize>,
    minority_rows: Vec<usize>,
}

/// Separates the class column and groups rows by majority membership.
/// Rows with a missing class are dropped; ties go to the first-seen class.
fn split_by_class(data: &RawTable, class_column: &str) -> Result<ClassRows> {
    let idx = data
        .column_index(class_column)
        .ok_or_else(|| Error::Generation(format!("class column `{class_column}` not found")))?;
    let (features, class) = data.remove_column(idx);
    let mut order: Vec<&str> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for c in class.cells.iter().flatten() {
        match order.iter().position(|o| o == c) {
            Some(i) => counts[i] += 1,
            None => {
                order.push(c);
                counts.push(1);
            }
        }
    }
    if order.is_empty() {
        return Err(Error::Generation("class column has no values".into()));
    }
    let best = counts
        .iter()
        .enumerate()
        .fold(0, |b, (i, &c)| if c > counts[b] { i } else { b });
    let majority = order[best].to_string();
    let mut majority_rows = Vec::new();
    let mut minority_rows = Vec::new();
    for (r, c) in class.cells.iter().enumerate() {
        match c.as_deref() {
            Some(c) if c == majority => majority_rows.push(r),
            Some(_) => minority_rows.push(r),
            None => {}
        }
    }
    Ok(ClassRows {
        features,
        majority,
        majority_rows,
        minority_rows,
    })
}

/// Shuffled majority rows split 70% train / 30% rest.
fn majority_split(rows: &[usize], rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let mut shuffled = rows.to_vec();
    shuffled.shuffle(rng);
    let n_train = (0.7 * rows.len() as f64).round() as usize;
    let rest = shuffled.split_off(n_train);
    (shuffled, rest)
}

fn sample_variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64
}

/// Normals with zero-mean Gaussian noise on a random subset of numeric attributes.
pub fn generate_setting1(
    data: &RawTable,
    class_column: &str,
    fraction_perturbed: f64,
    seed: u64,
) -> Result<BenchmarkSplit> {
    if !(fraction_perturbed > 0.0 && fraction_perturbed <= 1.0) {
        return Err(Error::invalid(format!(
            "perturbed fraction must lie in (0, 1], got {fraction_perturbed}"
        )));
    }
    let classes = split_by_class(data, class_column)?;
    if classes.majority_rows.len() < 10 {
        return Err(Error::Generation(format!(
            "majority class has {} rows, at least 10 needed",
            classes.majority_rows.len()
        )));
    }
    let features = &classes.features;
    let numeric: Vec<usize> = (0..features.n_attrs())
        .filter(|&j| features.column(j).kind == ColumnKind::Numeric)
        .collect();
    if numeric.is_empty() {
        return Err(Error::Generation("no numeric attributes to perturb".into()));
    }
    let p = features.n_attrs();
    let requested = ((fraction_perturbed * p as f64).round() as usize).max(1);
    let k = requested.min(numeric.len());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (train_rows, rest) = majority_split(&classes.majority_rows, &mut rng);
    let n_normal = rest.len() / 2;
    let (normal_rows, anomaly_rows) = rest.split_at(n_normal);
    let mut chosen: Vec<usize> = sample(&mut rng, numeric.len(), k)
        .into_iter()
        .map(|i| numeric[i])
        .collect();
    chosen.sort_unstable();

    let mut anomalies = features.select_rows(anomaly_rows);
    let mut noise_desc = Vec::new();
    for &j in &chosen {
        let values = features.column(j).values().expect("numeric column");
        let majority_values: Vec<f64> = classes
            .majority_rows
            .iter()
            .filter_map(|&r| values[r])
            .collect();
        let sd = sample_variance(&majority_values).sqrt();
        noise_desc.push(format!(
            "{}~N(0,{})",
            features.column(j).name,
            format_number(sd * sd)
        ));
        let perturbed: Vec<Option<f64>> = anomalies
            .column(j)
            .values()
            .expect("numeric column")
            .into_iter()
            .map(|v| {
                v.map(|v| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    v + sd * z
                })
            })
            .collect();
        let name = features.column(j).name.clone();
        anomalies.replace_column(j, RawColumn::numeric(name, &perturbed))?;
    }

    let normals = features.select_rows(normal_rows);
    let test = concat_rows(&normals, &anomalies)?;
    let mut test_labels = vec![Label::Normal; normals.n_rows()];
    test_labels.extend(std::iter::repeat_n(Label::Anomaly, anomalies.n_rows()));
    Ok(BenchmarkSplit {
        train: features.select_rows(&train_rows),
        test,
        test_labels,
        provenance: Provenance {
            setting: 1,
            seed,
            class_column: class_column.to_string(),
            majority_class: classes.majority,
            train_rows: train_rows.len(),
            test_normal_rows: normal_rows.len(),
            test_anomaly_rows: anomaly_rows.len(),
            fraction_perturbed: Some(fraction_perturbed),
            requested_attributes: Some(requested),
            perturbed_attributes: chosen
                .iter()
                .map(|&j| features.column(j).name.clone())
                .collect(),
            clamped: k < requested,
            minority_fraction: None,
            noise: format!("diagonal gaussian: {}", noise_desc.join("; ")),
        },
    })
}

/// Held-out majority rows plus a sample of every other class as novelties.
pub fn generate_setting3(
    data: &RawTable,
    class_column: &str,
    minority_fraction: f64,
    seed: u64,
) -> Result<BenchmarkSplit> {
    if !(0.0..=1.0).contains(&minority_fraction) {
        return Err(Error::invalid(format!(
            "minority fraction must lie in [0, 1], got {minority_fraction}"
        )));
    }
    let classes = split_by_class(data, class_column)?;
    if classes.minority_rows.is_empty() {
        return Err(Error::Generation("data has a single class".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (train_rows, normal_rows) = majority_split(&classes.majority_rows, &mut rng);
    let n_min = classes.minority_rows.len();
    let mut n_take = (minority_fraction * n_min as f64).round() as usize;
    if minority_fraction > 0.0 {
        n_take = n_take.max(1);
    }
    let mut picked: Vec<usize> = sample(&mut rng, n_min, n_take)
        .into_iter()
        .map(|i| classes.minority_rows[i])
        .collect();
    picked.sort_unstable();

    let features = &classes.features;
    let mut test_rows = normal_rows.clone();
    test_rows.extend(&picked);
    let mut test_labels = vec![Label::Normal; normal_rows.len()];
    test_labels.extend(std::iter::repeat_n(Label::Anomaly, picked.len()));
    Ok(BenchmarkSplit {
        train: features.select_rows(&train_rows),
        test: features.select_rows(&test_rows),
        test_labels,
        provenance: Provenance {
            setting: 3,
            seed,
            class_column: class_column.to_string(),
            majority_class: classes.majority,
            train_rows: train_rows.len(),
            test_normal_rows: normal_rows.len(),
            test_anomaly_rows: picked.len(),
            fraction_perturbed: None,
            requested_attributes: None,
            perturbed_attributes: Vec::new(),
            clamped: false,
            minority_fraction: Some(minority_fraction),
            noise: "none: non-majority classes are novelties".into(),
        },
    })
}

fn concat_rows(a: &RawTable, b: &RawTable) -> Result<RawTable> {
    let columns = a
        .columns()
        .iter()
        .zip(b.columns())
        .map(|(x, y)| RawColumn {
            name: x.name.clone(),
            kind: if x.kind == y.kind {
                x.kind
            } else {
                ColumnKind::Categorical
            },
            cells: x.cells.iter().chain(&y.cells).cloned().collect(),
        })
        .collect();
    RawTable::new(columns)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeGroup {
    pub size: usize,
    pub members: usize,
    pub mean_jaccard: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub run_count: usize,
    pub si: f64,
    pub groups: Vec<SizeGroup>,
    /// Sizes with a single subspace, left out of the average.
    pub excluded_sizes: Vec<usize>,
}

impl StabilityReport {
    pub const CSV_HEADER: &'static str = "run_count,groups,excluded,si";

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{:.6}",
            self.run_count,
            self.groups.len(),
            self.excluded_sizes.len(),
            self.si
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Mean pairwise Jaccard similarity within each size group, averaged over groups.
pub fn stability_index(runs: &[Vec<AttributeSet>]) -> Result<StabilityReport> {
    if runs.len() < 2 {
        return Err(Error::invalid(format!(
            "stability needs at least 2 runs, got {}",
            runs.len()
        )));
    }
    let mut by_size: BTreeMap<usize, Vec<&AttributeSet>> = BTreeMap::new();
    for s in runs.iter().flatten() {
        by_size.entry(s.len()).or_default().push(s);
    }
    let mut groups = Vec::new();
    let mut excluded_sizes = Vec::new();
    for (size, members) in by_size {
        if members.len() < 2 {
            excluded_sizes.push(size);
            continue;
        }
        let mut total = 0.0;
        let mut pairs = 0usize;
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                total += jaccard(members[i], members[j])?;
                pairs += 1;
            }
        }
        groups.push(SizeGroup {
            size,
            members: members.len(),
            mean_jaccard: total / pairs as f64,
        });
    }
    if groups.is_empty() {
        return Err(Error::UndefinedStability(
            "no subspace size occurs more than once".into(),
        ));
    }
    let si = groups.iter().map(|g| g.mean_jaccard).sum::<f64>() / groups.len() as f64;
    Ok(StabilityReport {
        run_count: runs.len(),
        si: si.clamp(0.0, 1.0),
        groups,
        excluded_sizes,
    })
}

/// Runs the search on `repeats` seeded 80% row subsamples.
pub fn resampled_runs(
    table: &DiscreteTable,
    options: &AagOptions,
    repeats: usize,
    seed: u64,
) -> Result<Vec<SubspaceSet>> {
    let n = table.n_rows();
    let keep = ((0.8 * n as f64).round() as usize).clamp(1, n.max(1));
    (0..repeats)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let mut rows = sample(&mut rng, n, keep).into_vec();
            rows.sort_unstable();
            run_aag(&table.select_rows(&rows), options)
        })
        .collect()
}

/// Gaussian data with planted groups sharing a latent factor, plus a constant
/// class column named `class` so the split generators can use it.
///
/// Attributes outside every group are independent standard normals; inside a
/// group each attribute is `z + noise_sd * e` for a shared latent `z`.
pub fn generate_planted(
    n_rows: usize,
    n_attrs: usize,
    groups: &[Vec<usize>],
    noise_sd: f64,
    seed: u64,
) -> Result<RawTable> {
    let mut owner = vec![None; n_attrs];
    for (g, members) in groups.iter().enumerate() {
        for &a in members {
            if a >= n_attrs {
                return Err(Error::invalid(format!("group attribute {a} out of range")));
            }
            if owner[a].replace(g).is_some() {
                return Err(Error::invalid(format!("attribute {a} is in two groups")));
            }
        }
    }
    let noise = Normal::new(0.0, noise_sd).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns = vec![Vec::with_capacity(n_rows); n_attrs];
    for _ in 0..n_rows {
        let latents: Vec<f64> = groups
            .iter()
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        for (a, col) in columns.iter_mut().enumerate() {
            let v = match owner[a] {
                Some(g) => latents[g] + noise.sample(&mut rng),
                None => StandardNormal.sample(&mut rng),
            };
            col.push(Some((v * 1e4).round() / 1e4));
        }
    }
    let mut out: Vec<RawColumn> = columns
        .iter()
        .enumerate()
        .map(|(a, c)| RawColumn::numeric(format!("x{}", a + 1), c))
        .collect();
    out.push(RawColumn::new(
        "class",
        vec![Some("normal".to_string()); n_rows],
    ));
    RawTable::new(out)
}

#[derive(Clone, Debug)]
pub struct BenchmarkOutcome {
    pub report: EvalReport,
    pub n_subspaces: usize,
    pub timings: PhaseTimings,
}

/// Trains on the split's normals and evaluates on its test rows.
pub fn run_benchmark(split: &BenchmarkSplit, config: &PipelineConfig) -> Result<BenchmarkOutcome> {
    let trained = train_model(&split.train, config)?;
    let (results, score_time) = score_raw(&trained.model, &split.test)?;
    let predictions: Vec<Label> = results.iter().map(|r| r.1).collect();
    let report = f1_score(&split.test_labels, &predictions)?;
    let mut timings = trained.timings;
    timings.score = score_time;
    Ok(BenchmarkOutcome {
        report,
        n_subspaces: trained.model.detectors.len(),
        timings,
    })
}
