//! Brute-force reference computations shared by the integration tests.
//!
//! Everything here works from raw contingency counts over row tuples and
//! never touches the library's partition or caching code.

#![allow(dead_code)]

use std::collections::BTreeMap;

use aag_core::DiscreteTable;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_table(seed: u64, max_rows: usize, max_attrs: usize, max_arity: u32) -> DiscreteTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=max_rows);
    let p = rng.random_range(2..=max_attrs);
    let columns = (0..p)
        .map(|_| {
            let k = rng.random_range(1..=max_arity);
            (0..n).map(|_| rng.random_range(0..k)).collect()
        })
        .collect();
    DiscreteTable::from_columns(columns).unwrap()
}

pub fn counts(t: &DiscreteTable, attrs: &[usize]) -> BTreeMap<Vec<u32>, usize> {
    let mut m = BTreeMap::new();
    for r in 0..t.n_rows() {
        let key: Vec<u32> = attrs.iter().map(|&a| t.column(a)[r]).collect();
        *m.entry(key).or_insert(0) += 1;
    }
    m
}

pub fn h(t: &DiscreteTable, attrs: &[usize]) -> f64 {
    if attrs.is_empty() {
        return 0.0;
    }
    let n = t.n_rows() as f64;
    counts(t, attrs)
        .values()
        .map(|&c| {
            let q = c as f64 / n;
            -q * q.log2()
        })
        .sum()
}

fn cat(parts: &[&[usize]]) -> Vec<usize> {
    let mut v: Vec<usize> = parts.iter().flat_map(|p| p.iter().copied()).collect();
    v.sort_unstable();
    v.dedup();
    v
}

pub fn cond_h(t: &DiscreteTable, target: &[usize], given: &[usize]) -> f64 {
    h(t, &cat(&[target, given])) - h(t, given)
}

pub fn mi(t: &DiscreteTable, a: &[usize], b: &[usize]) -> f64 {
    h(t, a) + h(t, b) - h(t, &cat(&[a, b]))
}

pub fn cmi(t: &DiscreteTable, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
    h(t, &cat(&[a, c])) + h(t, &cat(&[b, c])) - h(t, &cat(&[a, b, c])) - h(t, c)
}

/// I(a;b) − I(a;b|c).
pub fn ii3(t: &DiscreteTable, a: usize, b: usize, c: usize) -> f64 {
    mi(t, &[a], &[b]) - cmi(t, &[a], &[b], &[c])
}

pub fn d_r(t: &DiscreteTable, a: &[usize], b: &[usize]) -> f64 {
    cond_h(t, a, b) + cond_h(t, b, a)
}

/// Exact multi-attribute measure for two or three attributes.
pub fn d_ma_exact(t: &DiscreteTable, attrs: &[usize]) -> f64 {
    match *attrs {
        [a, b] => d_r(t, &[a], &[b]),
        [a, b, c] => {
            cond_h(t, &[a], &[b, c])
                + cond_h(t, &[b], &[a, c])
                + cond_h(t, &[c], &[a, b])
                + ii3(t, a, b, c)
        }
        _ => panic!("exact measure only for 2 or 3 attributes"),
    }
}

pub fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if items.len() < k {
        return vec![];
    }
    let mut out = Vec::new();
    for mut rest in subsets(&items[1..], k - 1) {
        rest.insert(0, items[0]);
        out.push(rest);
    }
    out.extend(subsets(&items[1..], k));
    out
}

pub fn d_ma(t: &DiscreteTable, attrs: &[usize], cap: usize) -> f64 {
    if attrs.len() <= cap {
        return d_ma_exact(t, attrs);
    }
    subsets(attrs, cap)
        .iter()
        .map(|s| d_ma_exact(t, s))
        .fold(f64::INFINITY, f64::min)
}

/// Minimum of d_MA(S)/H(S) over every cap-subset S of the union.
pub fn normalized(t: &DiscreteTable, a: &[usize], b: &[usize], cap: usize) -> f64 {
    let u = cat(&[a, b]);
    let candidates = if u.len() <= cap {
        vec![u]
    } else {
        subsets(&u, cap)
    };
    let mut best: Option<f64> = None;
    for s in candidates {
        let hs = h(t, &s);
        if hs > 0.0 {
            let v = d_ma_exact(t, &s) / hs;
            best = Some(best.map_or(v, |b| b.min(v)));
        }
    }
    best.unwrap_or(0.0)
}

pub fn tc(t: &DiscreteTable, attrs: &[usize]) -> f64 {
    attrs.iter().map(|&a| h(t, &[a])).sum::<f64>() - h(t, attrs)
}

pub fn su(t: &DiscreteTable, a: usize, b: usize) -> f64 {
    let denom = h(t, &[a]) + h(t, &[b]);
    if denom == 0.0 {
        0.0
    } else {
        2.0 * mi(t, &[a], &[b]) / denom
    }
}

pub fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    cat(&[a, b])
}
