//! Acceptance suite: every criterion runs, prints one PASS/FAIL line, and the
//! test fails at the end if any criterion failed.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use aag_core::aag::MergeKind;
use aag_core::ensemble::Label;
use aag_core::eval::{
    generate_planted, generate_setting1, resampled_runs, run_benchmark, stability_index,
};
use aag_core::fixtures::{grouping_example, pair_example, quad_example};
use aag_core::pipeline::{train_model, PipelineConfig, SubspaceStrategy};
use aag_core::preprocess::fit_apply;
use aag_core::{run_aag, AagOptions, AttributeSet, DiscreteTable, Measures};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn s<const N: usize>(v: [usize; N]) -> AttributeSet {
    AttributeSet::from(v)
}

fn within(name: &str, got: f64, want: f64, tol: f64, misses: &mut Vec<String>) {
    if (got - want).abs() > tol {
        misses.push(format!("{name}={got:.4} (want {want})"));
    }
}

fn verdict(misses: Vec<String>, ok: String) -> Outcome {
    if misses.is_empty() {
        Ok(ok)
    } else {
        Err(misses.join("; "))
    }
}

fn pair_golden_values() -> Outcome {
    let t = pair_example();
    let clock = Instant::now();
    let m = Measures::new(&t, 3).unwrap();
    let (a1, a2) = (s([0]), s([1]));
    let values = [
        ("H(A1)", m.entropy(&a1).unwrap(), 0.971),
        ("H(A2)", m.entropy(&a2).unwrap(), 1.522),
        ("H(A1|A2)", m.conditional_entropy(&a1, &a2).unwrap(), 0.525),
        ("H(A2|A1)", m.conditional_entropy(&a2, &a1).unwrap(), 1.076),
        ("d_R", m.rokhlin_distance(&a1, &a2).unwrap(), 1.60),
    ];
    let elapsed = clock.elapsed();
    let mut misses = Vec::new();
    for (name, got, want) in values {
        within(name, got, want, 0.005, &mut misses);
    }
    if elapsed.as_secs_f64() >= 1e-3 {
        misses.push(format!("runtime {elapsed:?} >= 1ms"));
    }
    verdict(misses, format!("5 values within 0.005 in {elapsed:?}"))
}

fn quad_golden_values() -> Outcome {
    let t = quad_example();
    let m = Measures::new(&t, 3).unwrap();
    let triples = [s([0, 1, 2]), s([0, 1, 3]), s([0, 2, 3]), s([1, 2, 3])];
    let d_ma = [1.722, 1.469, 1.722, 2.771];
    let tc = [2.493, 1.093, 2.493, 2.493];
    let mut misses = Vec::new();
    for (i, tri) in triples.iter().enumerate() {
        within(
            &format!("d_MA{tri}"),
            m.multi_attribute_measure(tri).unwrap(),
            d_ma[i],
            0.005,
            &mut misses,
        );
        within(
            &format!("TC{tri}"),
            m.total_correlation(tri).unwrap(),
            tc[i],
            0.005,
            &mut misses,
        );
    }
    let argmin = triples
        .iter()
        .min_by(|a, b| {
            m.multi_attribute_measure(a)
                .unwrap()
                .total_cmp(&m.multi_attribute_measure(b).unwrap())
        })
        .unwrap();
    if argmin != &s([0, 1, 3]) {
        misses.push(format!("argmin {argmin}, want {{0,1,3}}"));
    }
    verdict(misses, "8 values within 0.005, argmin {A1,A2,A4}".into())
}

fn grouping_trace() -> Outcome {
    let t = grouping_example();
    let m = Measures::new(&t, 3).unwrap();
    let mut misses = Vec::new();
    let d = |a: AttributeSet, b: AttributeSet| m.normalized_measure(&a, &b).unwrap();
    within(
        "d~({A6,A7},{A1})",
        d(s([5, 6]), s([0])),
        0.292,
        0.005,
        &mut misses,
    );
    within(
        "d~({A1},{A3})",
        d(s([0]), s([2])),
        0.708,
        0.005,
        &mut misses,
    );
    within(
        "d~({A1,A6,A7},{A3})",
        d(s([0, 5, 6]), s([2])),
        0.051,
        0.005,
        &mut misses,
    );
    within(
        "d~({A1,A3,A6,A7},{A4})",
        d(s([0, 2, 5, 6]), s([3])),
        0.443,
        0.005,
        &mut misses,
    );

    let out = run_aag(&t, &AagOptions::default()).unwrap();
    let sequence: Vec<String> = out
        .merges
        .iter()
        .filter(|m| m.accepted)
        .map(|m| match m.kind {
            MergeKind::Absorb => format!("+{}", m.left),
            _ => format!("{}{}", m.left, m.right),
        })
        .collect();
    let want_sequence = ["{5}{6}", "+{0}", "+{2}", "{1}{3}", "+{4}"];
    if sequence.len() < want_sequence.len()
        || sequence[..want_sequence.len()] != want_sequence.map(String::from)
    {
        misses.push(format!("merge sequence {}", sequence.join(" ")));
    }
    let mut got = out.attribute_sets();
    got.sort();
    let mut want = vec![s([0, 2, 4, 5, 6]), s([1, 3]), s([0, 1, 2, 3, 4, 5, 6])];
    want.sort();
    if got != want {
        let shown: Vec<String> = got.iter().map(|x| x.to_string()).collect();
        misses.push(format!("T = [{}]", shown.join(", ")));
    }
    verdict(misses, "trace, T and intermediate values match".into())
}

fn random_table(
    rng: &mut ChaCha8Rng,
    max_rows: usize,
    max_attrs: usize,
    max_arity: u32,
) -> DiscreteTable {
    let n = rng.random_range(2..=max_rows);
    let p = rng.random_range(3..=max_attrs);
    let cols = (0..p)
        .map(|_| {
            let k = rng.random_range(1..=max_arity);
            (0..n).map(|_| rng.random_range(0..k)).collect()
        })
        .collect();
    DiscreteTable::from_columns(cols).unwrap()
}

fn subset_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut checked, mut violations) = (0, 0);
    let mut example = String::new();
    for _ in 0..200 {
        let t = random_table(&mut rng, 30, 6, 5);
        let m = Measures::new(&t, 3).unwrap();
        let sup = AttributeSet::new(sample(&mut rng, t.n_attrs(), 3).into_vec());
        let drop = sup.as_slice()[rng.random_range(0..3)];
        let sub = sup.without(drop);
        let (d_sub, d_sup) = (
            m.multi_attribute_measure(&sub).unwrap(),
            m.multi_attribute_measure(&sup).unwrap(),
        );
        checked += 1;
        if d_sub < d_sup - 1e-9 {
            violations += 1;
            if example.is_empty() {
                example = format!("e.g. d_MA{sub}={d_sub:.3} < d_MA{sup}={d_sup:.3}");
            }
        }
    }
    if violations == 0 {
        Ok(format!("{checked} nested pairs, 0 violations"))
    } else {
        Err(format!(
            "{violations}/{checked} nested pairs violate; {example}"
        ))
    }
}

fn tc_superadditivity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut violations = 0;
    for _ in 0..200 {
        let mut t;
        loop {
            t = random_table(&mut rng, 30, 8, 5);
            if t.n_attrs() >= 4 {
                break;
            }
        }
        let p = t.n_attrs();
        let picked = sample(&mut rng, p, p).into_vec();
        let size_a = rng.random_range(2..=p - 2);
        let size_b = rng.random_range(2..=p - size_a);
        let a = AttributeSet::new(picked[..size_a].to_vec());
        let b = AttributeSet::new(picked[size_a..size_a + size_b].to_vec());
        let m = Measures::new(&t, 3).unwrap();
        let tc = |x: &AttributeSet| m.total_correlation(x).unwrap();
        if tc(&a.union(&b)) < tc(&a) + tc(&b) - 1e-9 {
            violations += 1;
        }
    }
    if violations == 0 {
        Ok("200 disjoint pairs, 0 violations".into())
    } else {
        Err(format!("{violations}/200 violations"))
    }
}

fn oracle_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut track = |a: f64, b: f64| worst = worst.max((a - b).abs());
    for seed in 0..100 {
        let t = common::random_table(seed + 5000, 40, 6, 5);
        let m = Measures::new(&t, 3).unwrap();
        let p = t.n_attrs();
        for a in 0..p {
            track(m.entropy(&s([a])).unwrap(), common::h(&t, &[a]));
            for b in a + 1..p {
                let (sa, sb) = (s([a]), s([b]));
                track(m.entropy(&s([a, b])).unwrap(), common::h(&t, &[a, b]));
                track(
                    m.mutual_information(&sa, &sb).unwrap(),
                    common::mi(&t, &[a], &[b]),
                );
                track(m.symmetric_uncertainty(a, b).unwrap(), common::su(&t, a, b));
                for c in b + 1..p {
                    let sc = s([c]);
                    track(m.entropy(&s([a, b, c])).unwrap(), common::h(&t, &[a, b, c]));
                    track(
                        m.conditional_mutual_information(&sa, &sb, &sc).unwrap(),
                        common::cmi(&t, &[a], &[b], &[c]),
                    );
                    track(
                        m.interaction_information(&s([a, b, c])).unwrap(),
                        common::ii3(&t, a, b, c),
                    );
                }
            }
        }
    }
    if worst <= 1e-9 {
        Ok(format!("100 tables, max deviation {worst:.2e}"))
    } else {
        Err(format!("max deviation {worst:.2e} > 1e-9"))
    }
}

fn planted(n: usize, seed: u64) -> aag_core::RawTable {
    generate_planted(n, 12, &[vec![0, 1, 2, 3], vec![4, 5, 6, 7]], 0.3, seed).unwrap()
}

fn ensemble_guarantee() -> Outcome {
    let alpha = 0.05;
    let mut worst = String::new();
    let mut failures = 0;
    for seed in 0..20u64 {
        let raw = planted(600, 300 + seed).remove_column(12).0;
        let config = PipelineConfig {
            bins: 5,
            alpha,
            seed,
            ..PipelineConfig::default()
        };
        let trained = train_model(&raw, &config).unwrap();
        let table = trained
            .model
            .preprocess
            .as_ref()
            .unwrap()
            .apply(&raw)
            .unwrap();
        let val = &trained.split.validation;
        let rejected = val
            .iter()
            .filter(|&&r| trained.model.classify(&table.row(r)).unwrap().1 == Label::Anomaly)
            .count();
        let fpr = rejected as f64 / val.len() as f64;
        let bound = alpha + 1.0 / val.len() as f64;
        if fpr > bound {
            failures += 1;
            worst = format!("seed {seed}: fpr {fpr:.4} > {bound:.4}");
        }
    }
    if failures == 0 {
        Ok("20 datasets, validation FPR <= alpha + 1/|val|".into())
    } else {
        Err(format!("{failures} datasets exceed the bound; {worst}"))
    }
}

fn stability() -> Outcome {
    let raw = planted(400, 77).remove_column(12).0;
    let (_, table) = fit_apply(&raw, 5).unwrap();
    let options = AagOptions::default();
    let once = run_aag(&table, &options).unwrap().attribute_sets();
    let identical = vec![once; 5];
    let si_same = stability_index(&identical).unwrap().si;
    let runs = resampled_runs(&table, &options, 20, 9).unwrap();
    let sets: Vec<_> = runs.iter().map(|r| r.attribute_sets()).collect();
    let si_resampled = stability_index(&sets).unwrap().si;
    if si_same == 1.0 && (0.0..=1.0).contains(&si_resampled) {
        Ok(format!(
            "identical runs SI = 1.0; 20 resampled runs SI = {si_resampled:.4}"
        ))
    } else {
        Err(format!(
            "identical SI = {si_same}, resampled SI = {si_resampled}"
        ))
    }
}

fn desk_benchmark() -> Outcome {
    let clock = Instant::now();
    let (mut aag_f1, mut random_f1) = (0.0, 0.0);
    for seed in 0..20u64 {
        let data = planted(2000, 1000 + seed);
        let split = generate_setting1(&data, "class", 0.1, seed).unwrap();
        let mut config = PipelineConfig {
            bins: 5,
            seed,
            ..PipelineConfig::default()
        };
        aag_f1 += run_benchmark(&split, &config).unwrap().report.f1 / 20.0;
        config.strategy = SubspaceStrategy::RandomUniform;
        random_f1 += run_benchmark(&split, &config).unwrap().report.f1 / 20.0;
    }
    let elapsed = clock.elapsed();
    let summary = format!("mean F1 AAG {aag_f1:.4} vs random {random_f1:.4} in {elapsed:.1?}");
    if aag_f1 > random_f1 && elapsed.as_secs() < 120 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn aag_seconds(n: usize, p: usize) -> f64 {
    let groups: Vec<Vec<usize>> = (0..p / 4).map(|g| (4 * g..4 * g + 3).collect()).collect();
    let raw = generate_planted(n, p, &groups, 0.3, 5)
        .unwrap()
        .remove_column(p)
        .0;
    let (_, table) = fit_apply(&raw, 10).unwrap();
    (0..3)
        .map(|_| {
            let clock = Instant::now();
            std::hint::black_box(run_aag(&table, &AagOptions::default()).unwrap());
            clock.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

fn complexity() -> Outcome {
    let base = aag_seconds(1000, 16);
    let p_ratio = aag_seconds(1000, 32) / base;
    let n_ratio = aag_seconds(2000, 16) / base;
    let summary = format!("p 16->32 x{p_ratio:.2} (<= 12), N 1000->2000 x{n_ratio:.2} (<= 3)");
    if p_ratio <= 12.0 && n_ratio <= 3.0 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("planted.csv");
    planted(800, 42)
        .write_csv(fs::File::create(&input).unwrap(), b',')
        .unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_aag"))
            .args([
                "bench",
                "--input",
                input.to_str().unwrap(),
                "--class-column",
                "class",
            ])
            .args([
                "--setting",
                "1",
                "--fraction",
                "0.1",
                "--repeats",
                "20",
                "--bins",
                "5",
                "--seed",
                "3",
            ])
            .arg("--output")
            .arg(&out)
            .env("RUST_LOG", "warn")
            .status()
            .unwrap();
        assert!(status.success());
        ["bench.csv", "bench.json"].map(|f| fs::read(out.join(f)).unwrap())
    };
    if run("first") == run("second") {
        Ok("bench.csv and bench.json byte-identical across runs".into())
    } else {
        Err("bench outputs differ between identical runs".into())
    }
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 11] = [
        ("pair worked example golden values", pair_golden_values),
        (
            "four-attribute worked example golden values",
            quad_golden_values,
        ),
        ("grouping worked example trace", grouping_trace),
        ("subset monotonicity of d_MA (200 tables)", subset_monotonicity),
        (
            "TC superadditivity on disjoint unions (200 pairs)",
            tc_superadditivity,
        ),
        ("oracle equivalence (100 tables)", oracle_equivalence),
        (
            "ensemble validation guarantee (20 datasets)",
            ensemble_guarantee,
        ),
        ("stability index", stability),
        ("desk-scale benchmark vs random subspaces", desk_benchmark),
        ("complexity smoke test", complexity),
        ("bench determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| Err(format!("panicked: {:?}", e.downcast_ref::<String>())));
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                println!("FAIL  {name}: {detail}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {}", failed.join(", "));
}
