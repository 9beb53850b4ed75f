//! Agglomerative attribute grouping.
//!
//! Starting from single-attribute subspaces, each level greedily unifies
//! subspaces whose union has a small normalized multi-attribute measure.
//! A level is built by seeding it with the globally closest pair, then
//! sweeping the remaining subspaces: each one either joins its closest
//! subspace of the new level or is paired with its closest subspace from the
//! frozen copy of the current level, whichever is closer. Every union passes
//! through [`should_unify`], a Total-Correlation test weighted by Jaccard
//! overlaps. The output collects every level's subspaces.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::Measures;
use crate::table::{AttributeSet, DiscreteTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AagOptions {
    /// Largest attribute count evaluated exactly by the measure (2 or 3).
    pub cap: usize,
    /// Keep single-attribute subspaces in the returned set.
    pub include_singletons: bool,
    /// Memoize pairwise measure values across the search.
    pub use_pair_cache: bool,
}

impl Default for AagOptions {
    fn default() -> Self {
        AagOptions {
            cap: 3,
            include_singletons: false,
            use_pair_cache: true,
        }
    }
}

/// A subspace together with the agglomeration level that created it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subspace {
    pub attrs: AttributeSet,
    pub level: usize,
}

/// How a union came about during a level sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeKind {
    /// Globally closest pair of the current level.
    Seed,
    /// A current-level subspace joined a subspace of the next level.
    Absorb,
    /// A current-level subspace paired with its nearest frozen neighbour.
    Pair,
}

/// One step of the search, in execution order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeStep {
    pub level: usize,
    pub kind: MergeKind,
    pub left: AttributeSet,
    pub right: AttributeSet,
    /// Normalized measure of the chosen pair.
    pub value: f64,
    /// For sweep steps, the measure of the competing alternative.
    pub rival: Option<f64>,
    /// False when the union was rejected by the pruning rule.
    pub accepted: bool,
}

/// Parent/child relation between consecutive levels, for tree rendering.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub child: AttributeSet,
    pub parent: AttributeSet,
    pub level: usize,
}

/// Result of the search: level snapshots and the deduplicated subspace list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceSet {
    pub levels: Vec<Vec<AttributeSet>>,
    pub subspaces: Vec<Subspace>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tree_edges: Vec<TreeEdge>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub merges: Vec<MergeStep>,
}

impl SubspaceSet {
    pub fn attribute_sets(&self) -> Vec<AttributeSet> {
        self.subspaces.iter().map(|s| s.attrs.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.subspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subspaces.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Memoized normalized-measure values keyed by unordered subspace pairs.
#[derive(Debug, Default)]
pub struct PairCache {
    entries: HashMap<(AttributeSet, AttributeSet), f64>,
}

impl PairCache {
    fn key(a: &AttributeSet, b: &AttributeSet) -> (AttributeSet, AttributeSet) {
        if a <= b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        }
    }

    pub fn get(&self, a: &AttributeSet, b: &AttributeSet) -> Option<f64> {
        self.entries.get(&Self::key(a, b)).copied()
    }

    pub fn insert(&mut self, a: &AttributeSet, b: &AttributeSet, value: f64) {
        self.entries.insert(Self::key(a, b), value);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// |a ∩ b| / |a ∪ b|.
pub fn jaccard(a: &AttributeSet, b: &AttributeSet) -> Result<f64> {
    let union = a.union(b).len();
    if union == 0 {
        return Err(Error::invalid("Jaccard index of two empty sets"));
    }
    Ok(a.intersection_len(b) as f64 / union as f64)
}

/// Pruning rule deciding whether two subspaces may be unified at level `level`.
///
/// Always true on the first two levels. Afterwards, disjoint subspaces of at
/// least two attributes each are unified without evaluating TC; nested
/// subspaces are never unified; otherwise
/// `TC(a ∪ b) ≥ J(a, a∪b)·TC(a) + J(b, a∪b)·TC(b)` decides.
pub fn should_unify(
    table: &DiscreteTable,
    a: &AttributeSet,
    b: &AttributeSet,
    level: usize,
) -> bool {
    match Measures::new(table, 3) {
        Ok(m) => should_unify_with(&m, a, b, level),
        Err(_) => false,
    }
}

pub(crate) fn should_unify_with(
    m: &Measures<'_>,
    a: &AttributeSet,
    b: &AttributeSet,
    level: usize,
) -> bool {
    if level <= 2 {
        return true;
    }
    if a.is_disjoint(b) && a.len() >= 2 && b.len() >= 2 {
        return true;
    }
    if a.is_subset(b) || b.is_subset(a) {
        return false;
    }
    let union = a.union(b);
    let tc = |s: &AttributeSet| m.total_correlation(s).unwrap_or(0.0);
    let v_a = a.len() as f64 / union.len() as f64;
    let v_b = b.len() as f64 / union.len() as f64;
    compare_values(tc(&union), v_a * tc(a) + v_b * tc(b)) != Ordering::Less
}

struct Search<'t> {
    measures: Measures<'t>,
    cache: Option<PairCache>,
}

impl Search<'_> {
    fn distance(&mut self, a: &AttributeSet, b: &AttributeSet) -> f64 {
        if let Some(v) = self.cache.as_ref().and_then(|c| c.get(a, b)) {
            return v;
        }
        let v = self
            .measures
            .normalized_measure(a, b)
            .expect("subspaces validated against the table");
        if let Some(c) = self.cache.as_mut() {
            c.insert(a, b, v);
        }
        v
    }
}

fn ordered(a: &AttributeSet, b: &AttributeSet) -> (AttributeSet, AttributeSet) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

/// Values this close are treated as equal so that summation-order noise
/// never overrides the lexicographic tie-break.
pub const TIE_TOLERANCE: f64 = 1e-12;

pub(crate) fn compare_values(a: f64, b: f64) -> Ordering {
    let scale = 1.0_f64.max(a.abs()).max(b.abs());
    if (a - b).abs() <= TIE_TOLERANCE * scale {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

/// Smallest value first; ties by lexicographic attribute lists.
fn better(candidate: (f64, &[&AttributeSet]), best: (f64, &[&AttributeSet])) -> bool {
    match compare_values(candidate.0, best.0) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => candidate.1 < best.1,
    }
}

fn remove(list: &mut Vec<AttributeSet>, item: &AttributeSet) -> bool {
    match list.iter().position(|x| x == item) {
        Some(i) => {
            list.remove(i);
            true
        }
        None => false,
    }
}

/// Runs the agglomerative attribute grouping search over all attributes of `table`.
pub fn run_aag(table: &DiscreteTable, options: &AagOptions) -> Result<SubspaceSet> {
    let p = table.n_attrs();
    if p < 2 {
        return Err(Error::invalid(format!(
            "subspace search needs at least two attributes, got {p}"
        )));
    }
    let mut search = Search {
        measures: Measures::new(table, options.cap)?,
        cache: options.use_pair_cache.then(PairCache::default),
    };

    let mut levels: Vec<Vec<AttributeSet>> = Vec::new();
    let mut collected: Vec<Subspace> = Vec::new();
    let mut merges = Vec::new();
    let mut tree_edges = Vec::new();
    let mut current: Vec<AttributeSet> = (0..p).map(AttributeSet::single).collect();
    let mut level = 1;

    while !current.is_empty() {
        levels.push(current.clone());
        for s in &current {
            if !collected.iter().any(|c| &c.attrs == s) {
                collected.push(Subspace {
                    attrs: s.clone(),
                    level,
                });
            }
        }
        if current.len() < 2 {
            break;
        }
        let frozen = current.clone();
        let mut next: Vec<AttributeSet> = Vec::new();

        // seed the next level with the globally closest pair
        let mut seed: Option<(f64, AttributeSet, AttributeSet)> = None;
        for i in 0..current.len() {
            for j in i + 1..current.len() {
                let v = search.distance(&current[i], &current[j]);
                let (lo, hi) = ordered(&current[i], &current[j]);
                let replace = match &seed {
                    None => true,
                    Some((bv, bl, bh)) => better((v, &[&lo, &hi]), (*bv, &[bl, bh])),
                };
                if replace {
                    seed = Some((v, lo, hi));
                }
            }
        }
        let (value, a, b) = seed.expect("at least two subspaces");
        remove(&mut current, &a);
        remove(&mut current, &b);
        let accepted = should_unify_with(&search.measures, &a, &b, level);
        if accepted {
            next.push(a.union(&b));
        }
        merges.push(MergeStep {
            level,
            kind: MergeKind::Seed,
            left: a,
            right: b,
            value,
            rival: None,
            accepted,
        });
        if next.is_empty() {
            // every unification at this level would be pruned
            break;
        }

        while !current.is_empty() {
            // closest (current, next) pair
            let mut best: Option<(f64, usize, usize)> = None;
            for (i, ai) in current.iter().enumerate() {
                for (j, aj) in next.iter().enumerate() {
                    let v = search.distance(ai, aj);
                    let replace = match best {
                        None => true,
                        Some((bv, bi, bj)) => {
                            better((v, &[ai, aj]), (bv, &[&current[bi], &next[bj]]))
                        }
                    };
                    if replace {
                        best = Some((v, i, j));
                    }
                }
            }
            let (to_next, i, j) = best.expect("current and next are non-empty");
            let ai = current[i].clone();

            // nearest neighbour of ai within the frozen level
            let mut nearest: Option<(f64, usize)> = None;
            for (k, ak) in frozen.iter().enumerate() {
                if ak == &ai {
                    continue;
                }
                let v = search.distance(ak, &ai);
                let replace = match nearest {
                    None => true,
                    Some((bv, bk)) => better((v, &[ak]), (bv, &[&frozen[bk]])),
                };
                if replace {
                    nearest = Some((v, k));
                }
            }

            match nearest {
                Some((to_frozen, k)) if compare_values(to_next, to_frozen) != Ordering::Less => {
                    let ak = frozen[k].clone();
                    remove(&mut current, &ai);
                    remove(&mut current, &ak);
                    let accepted = should_unify_with(&search.measures, &ai, &ak, level);
                    if accepted {
                        next.push(ai.union(&ak));
                    }
                    merges.push(MergeStep {
                        level,
                        kind: MergeKind::Pair,
                        left: ai,
                        right: ak,
                        value: to_frozen,
                        rival: Some(to_next),
                        accepted,
                    });
                }
                _ => {
                    remove(&mut current, &ai);
                    let aj = next[j].clone();
                    let accepted = should_unify_with(&search.measures, &ai, &aj, level);
                    if accepted {
                        next[j] = ai.union(&aj);
                    }
                    merges.push(MergeStep {
                        level,
                        kind: MergeKind::Absorb,
                        left: ai,
                        right: aj,
                        value: to_next,
                        rival: nearest.map(|(v, _)| v),
                        accepted,
                    });
                }
            }
        }

        let mut deduped: Vec<AttributeSet> = Vec::with_capacity(next.len());
        for s in next {
            if !deduped.contains(&s) {
                deduped.push(s);
            }
        }
        for parent in &deduped {
            for child in frozen.iter().filter(|c| c.is_subset(parent)) {
                tree_edges.push(TreeEdge {
                    child: child.clone(),
                    parent: parent.clone(),
                    level: level + 1,
                });
            }
        }
        current = deduped;
        level += 1;
    }

    if !options.include_singletons {
        collected.retain(|s| s.attrs.len() > 1);
    }
    Ok(SubspaceSet {
        levels,
        subspaces: collected,
        tree_edges,
        merges,
    })
}
