use std::fs;
use std::path::Path;
use std::time::Instant;

use aag_core::aag::{run_aag, AagOptions, SubspaceSet};
use aag_core::ensemble::{write_scores_csv, EnsembleModel};
use aag_core::eval::{
    generate_setting1, generate_setting3, resampled_runs, run_benchmark, stability_index,
    BenchmarkSplit, EvalReport,
};
use aag_core::pipeline::{score_raw, train_model, PhaseTimings, PipelineConfig, SubspaceStrategy};
use aag_core::preprocess::{fit_apply, load_csv, CsvOptions, RawTable};
use aag_core::Error;
use log::info;
use serde::Serialize;

use crate::{
    BenchArgs, EnsembleArgs, Failure, InputArgs, ScoreArgs, SearchArgs, StabilityArgs,
    SubspacesArgs, TrainArgs,
};

type CmdResult = Result<(), Failure>;

fn csv_options(input: &InputArgs) -> Result<CsvOptions, Failure> {
    if !input.delimiter.is_ascii() {
        return Err(Failure::Usage(
            "delimiter must be a single ASCII character".into(),
        ));
    }
    let mut options = CsvOptions {
        delimiter: input.delimiter as u8,
        ..CsvOptions::default()
    };
    if !input.missing_markers.is_empty() {
        options.missing_markers = input.missing_markers.clone();
    }
    Ok(options)
}

fn load_full(input: &InputArgs) -> Result<RawTable, Failure> {
    let clock = Instant::now();
    let raw = load_csv(&input.input, &csv_options(input)?)?;
    info!(
        "loaded {} rows x {} columns from {} in {:.3?}",
        raw.n_rows(),
        raw.n_attrs(),
        input.input.display(),
        clock.elapsed()
    );
    Ok(raw)
}

/// Loads the input and drops the class column when one is named.
fn load_attributes(input: &InputArgs) -> Result<RawTable, Failure> {
    let raw = load_full(input)?;
    match &input.class_column {
        None => Ok(raw),
        Some(name) => {
            let idx = raw.column_index(name).ok_or_else(|| {
                Failure::from(Error::Schema {
                    column: name.clone(),
                    message: "class column not found".into(),
                })
            })?;
            Ok(raw.remove_column(idx).0)
        }
    }
}

fn write_text(path: &Path, text: &str) -> CmdResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::from(Error::io(dir, e)))?;
    }
    fs::write(path, text).map_err(|e| Failure::from(Error::io(path, e)))
}

fn emit(output: Option<&Path>, text: &str) -> CmdResult {
    match output {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn aag_options(search: &SearchArgs) -> AagOptions {
    AagOptions {
        cap: search.cap,
        include_singletons: search.include_singletons,
        ..AagOptions::default()
    }
}

fn pipeline_config(search: &SearchArgs, ensemble: &EnsembleArgs, seed: u64) -> PipelineConfig {
    PipelineConfig {
        bins: search.bins,
        cap: search.cap,
        alpha: ensemble.alpha,
        val_fraction: ensemble.val_fraction,
        seed,
        include_singletons: search.include_singletons,
        strategy: SubspaceStrategy::Aag,
    }
}

fn log_timings(t: &PhaseTimings) {
    info!("phase preprocess: {:.3?}", t.preprocess);
    info!("phase aag: {:.3?}", t.aag);
    info!("phase ensemble fit: {:.3?}", t.ensemble_fit);
    info!("phase score: {:.3?}", t.score);
}

#[derive(Serialize)]
struct NamedSubspaces<'a> {
    attributes: &'a [String],
    #[serde(flatten)]
    result: &'a SubspaceSet,
}

pub fn subspaces(args: &SubspacesArgs) -> CmdResult {
    let raw = load_attributes(&args.input)?;
    let clock = Instant::now();
    let (_, table) = fit_apply(&raw, args.search.bins)?;
    info!("phase preprocess: {:.3?}", clock.elapsed());
    let clock = Instant::now();
    let result = run_aag(&table, &aag_options(&args.search))?;
    info!("phase aag: {:.3?}", clock.elapsed());
    for s in &result.subspaces {
        let names: Vec<&str> = s
            .attrs
            .iter()
            .map(|a| table.attr_names()[a].as_str())
            .collect();
        info!("level {}: {{{}}}", s.level, names.join(", "));
    }
    let json = serde_json::to_string_pretty(&NamedSubspaces {
        attributes: table.attr_names(),
        result: &result,
    })
    .map_err(|e| Failure::Internal(e.to_string()))?;
    emit(args.output.as_deref(), &(json + "\n"))
}

pub fn train(args: &TrainArgs) -> CmdResult {
    let raw = load_attributes(&args.input)?;
    let config = pipeline_config(&args.search, &args.ensemble, args.ensemble.seed);
    let trained = train_model(&raw, &config)?;
    log_timings(&trained.timings);
    info!(
        "{} detectors, rho = {:.6}",
        trained.model.detectors.len(),
        trained.model.rho
    );
    write_text(&args.model, &(trained.model.to_json()? + "\n"))
}

pub fn score(args: &ScoreArgs) -> CmdResult {
    let text =
        fs::read_to_string(&args.model).map_err(|e| Failure::from(Error::io(&args.model, e)))?;
    let model = EnsembleModel::from_json(&text)?;
    let raw = load_attributes(&args.input)?;
    let (results, elapsed) = score_raw(&model, &raw)?;
    info!("phase score: {elapsed:.3?}");
    let mut buf = Vec::new();
    write_scores_csv(&mut buf, &results)?;
    let text = String::from_utf8(buf).map_err(|e| Failure::Internal(e.to_string()))?;
    emit(args.output.as_deref(), &text)
}

#[derive(Serialize)]
struct BenchRow {
    repetition: usize,
    seed: u64,
    subspaces: usize,
    #[serde(flatten)]
    report: EvalReport,
}

#[derive(Serialize)]
struct BenchSummary<'a> {
    setting: u8,
    fraction: Option<f64>,
    minority_fraction: Option<f64>,
    alpha: f64,
    bins: usize,
    cap: usize,
    val_fraction: f64,
    seed: u64,
    repeats: usize,
    runs: &'a [BenchRow],
    mean_f1: f64,
}

pub fn bench(args: &BenchArgs) -> CmdResult {
    let class_column = args
        .input
        .class_column
        .as_deref()
        .ok_or_else(|| Failure::Usage("bench needs --class-column".into()))?;
    if args.repeats == 0 {
        return Err(Failure::Usage("--repeats must be positive".into()));
    }
    let raw = load_full(&args.input)?;
    let mut rows = Vec::with_capacity(args.repeats);
    let mut totals = PhaseTimings::default();
    for repetition in 0..args.repeats {
        let seed = args.ensemble.seed.wrapping_add(repetition as u64);
        let split: BenchmarkSplit = match args.setting {
            1 => generate_setting1(&raw, class_column, args.fraction, seed)?,
            _ => generate_setting3(&raw, class_column, args.minority_fraction, seed)?,
        };
        let config = pipeline_config(&args.search, &args.ensemble, seed);
        let outcome = run_benchmark(&split, &config)?;
        totals.preprocess += outcome.timings.preprocess;
        totals.aag += outcome.timings.aag;
        totals.ensemble_fit += outcome.timings.ensemble_fit;
        totals.score += outcome.timings.score;
        info!(
            "repetition {repetition}: f1 = {:.4} with {} subspaces",
            outcome.report.f1, outcome.n_subspaces
        );
        rows.push(BenchRow {
            repetition,
            seed,
            subspaces: outcome.n_subspaces,
            report: outcome.report,
        });
    }
    log_timings(&totals);

    let n = rows.len() as f64;
    let mean = |f: &dyn Fn(&BenchRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
    let mean_f1 = mean(&|r| r.report.f1);
    let mut csv = format!("repetition,seed,subspaces,{}\n", EvalReport::CSV_HEADER);
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            r.repetition,
            r.seed,
            r.subspaces,
            r.report.csv_line()
        ));
    }
    csv.push_str(&format!(
        "mean,,{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
        mean(&|r| r.subspaces as f64),
        mean(&|r| r.report.tp as f64),
        mean(&|r| r.report.fp as f64),
        mean(&|r| r.report.fn_ as f64),
        mean(&|r| r.report.tn as f64),
        mean_f1
    ));
    let summary = BenchSummary {
        setting: args.setting,
        fraction: (args.setting == 1).then_some(args.fraction),
        minority_fraction: (args.setting == 3).then_some(args.minority_fraction),
        alpha: args.ensemble.alpha,
        bins: args.search.bins,
        cap: args.search.cap,
        val_fraction: args.ensemble.val_fraction,
        seed: args.ensemble.seed,
        repeats: args.repeats,
        runs: &rows,
        mean_f1,
    };
    let json =
        serde_json::to_string_pretty(&summary).map_err(|e| Failure::Internal(e.to_string()))?;
    write_text(&args.output.join("bench.csv"), &csv)?;
    write_text(&args.output.join("bench.json"), &(json + "\n"))?;
    info!("mean f1 over {} repetitions: {mean_f1:.4}", rows.len());
    Ok(())
}

pub fn stability(args: &StabilityArgs) -> CmdResult {
    let raw = load_attributes(&args.input)?;
    let (_, table) = fit_apply(&raw, args.search.bins)?;
    let clock = Instant::now();
    let runs = resampled_runs(&table, &aag_options(&args.search), args.repeats, args.seed)?;
    info!("phase aag ({} runs): {:.3?}", runs.len(), clock.elapsed());
    let sets: Vec<_> = runs.iter().map(SubspaceSet::attribute_sets).collect();
    let report = stability_index(&sets)?;
    println!("{}", aag_core::eval::StabilityReport::CSV_HEADER);
    println!("{}", report.csv_line());
    if let Some(path) = &args.output {
        write_text(path, &(report.to_json()? + "\n"))?;
    }
    Ok(())
}
