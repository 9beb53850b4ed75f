//! Partition-based information measures: conditional entropy, Rokhlin
//! distance, interaction information, the multi-attribute measure and its
//! entropy-normalized form, Total Correlation and Symmetric Uncertainty.
//!
//! Every quantity is reduced to joint entropies of attribute sets, so a single
//! memo table keyed by [`AttributeSet`] serves all of them. [`Measures`] owns
//! that memo and is `Sync`; concurrent callers may race to fill the same key,
//! which is harmless because the value is a pure function of the key.
//!
//! For three attributes `a, b, c` the multi-attribute measure is
//!
//! ```text
//! d_MA(a,b,c) = H(a|b,c) + H(b|a,c) + H(c|a,b) + II(a;b;c)
//! II(a;b;c)   = I(a;b) - I(a;b|c)
//! ```
//!
//! and for two attributes it is the Rokhlin distance `H(a|b) + H(b|a)`.
//! Sets larger than `cap` are scored by the minimum over their `cap`-sized
//! subsets.

use std::collections::HashMap;
use std::sync::RwLock;

use crate::error::{Error, Result};
use crate::partition::{induce_partition, Bits};
use crate::table::{AttributeSet, DiscreteTable};

/// Memoized measure evaluation over one immutable table.
pub struct Measures<'t> {
    table: &'t DiscreteTable,
    cap: usize,
    entropies: RwLock<HashMap<AttributeSet, Bits>>,
    normalized_exact: RwLock<HashMap<AttributeSet, Option<f64>>>,
    best_within: RwLock<HashMap<AttributeSet, Option<f64>>>,
}

impl<'t> Measures<'t> {
    pub fn new(table: &'t DiscreteTable, cap: usize) -> Result<Self> {
        if !(2..=3).contains(&cap) {
            return Err(Error::invalid(format!("cap must be 2 or 3, got {cap}")));
        }
        Ok(Measures {
            table,
            cap,
            entropies: RwLock::new(HashMap::new()),
            normalized_exact: RwLock::new(HashMap::new()),
            best_within: RwLock::new(HashMap::new()),
        })
    }

    pub fn table(&self) -> &'t DiscreteTable {
        self.table
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Number of distinct attribute sets whose joint entropy has been computed.
    pub fn cached_entropies(&self) -> usize {
        self.entropies.read().expect("entropy cache poisoned").len()
    }

    fn check(&self, attrs: &AttributeSet) -> Result<()> {
        if attrs.is_empty() {
            return Err(Error::invalid("attribute set must be non-empty"));
        }
        attrs.check_bounds(self.table.n_attrs())
    }

    /// Joint entropy H(attrs).
    pub fn entropy(&self, attrs: &AttributeSet) -> Result<Bits> {
        self.check(attrs)?;
        Ok(self.entropy_unchecked(attrs))
    }

    fn entropy_unchecked(&self, attrs: &AttributeSet) -> Bits {
        if let Some(&h) = self
            .entropies
            .read()
            .expect("entropy cache poisoned")
            .get(attrs)
        {
            return h;
        }
        let h = induce_partition(self.table, attrs)
            .expect("attribute set validated by caller")
            .entropy();
        self.entropies
            .write()
            .expect("entropy cache poisoned")
            .insert(attrs.clone(), h);
        h
    }

    fn h(&self, attrs: &[usize]) -> Bits {
        self.entropy_unchecked(&AttributeSet::new(attrs.iter().copied()))
    }

    /// H(target | given) = H(target ∪ given) − H(given).
    pub fn conditional_entropy(&self, target: &AttributeSet, given: &AttributeSet) -> Result<Bits> {
        self.check(target)?;
        self.check(given)?;
        let joint = self.entropy_unchecked(&target.union(given));
        Ok((joint - self.entropy_unchecked(given)).max(0.0))
    }

    /// I(a; b) = H(a) + H(b) − H(a ∪ b).
    pub fn mutual_information(&self, a: &AttributeSet, b: &AttributeSet) -> Result<Bits> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.entropy_unchecked(a) + self.entropy_unchecked(b)
            - self.entropy_unchecked(&a.union(b)))
    }

    /// I(a; b | c) = H(a|c) − H(a|b,c).
    pub fn conditional_mutual_information(
        &self,
        a: &AttributeSet,
        b: &AttributeSet,
        c: &AttributeSet,
    ) -> Result<Bits> {
        self.check(a)?;
        self.check(b)?;
        self.check(c)?;
        let ac = a.union(c);
        let bc = b.union(c);
        let abc = ac.union(b);
        Ok(self.entropy_unchecked(&ac) + self.entropy_unchecked(&bc)
            - self.entropy_unchecked(&abc)
            - self.entropy_unchecked(c))
    }

    /// d_R(a, b) = H(a|b) + H(b|a).
    pub fn rokhlin_distance(&self, a: &AttributeSet, b: &AttributeSet) -> Result<Bits> {
        self.check(a)?;
        self.check(b)?;
        let joint = self.entropy_unchecked(&a.union(b));
        let d = 2.0 * joint - self.entropy_unchecked(a) - self.entropy_unchecked(b);
        Ok(d.max(0.0))
    }

    /// Interaction information over two or three attributes; zero for pairs.
    pub fn interaction_information(&self, attrs: &AttributeSet) -> Result<Bits> {
        attrs.check_bounds(self.table.n_attrs())?;
        match attrs.as_slice() {
            [_, _] => Ok(0.0),
            &[a, b, c] => Ok(self.interaction3(a, b, c)),
            other => Err(Error::UnsupportedArity(other.len())),
        }
    }

    fn interaction3(&self, a: usize, b: usize, c: usize) -> Bits {
        // I(a;b) - I(a;b|c), expanded into joint entropies
        self.h(&[a]) + self.h(&[b]) + self.h(&[c])
            - self.h(&[a, b])
            - self.h(&[a, c])
            - self.h(&[b, c])
            + self.h(&[a, b, c])
    }

    /// Exact multi-attribute measure for a set of two or three attributes.
    fn multi_attribute_exact(&self, attrs: &[usize]) -> Bits {
        match *attrs {
            [a, b] => (2.0 * self.h(&[a, b]) - self.h(&[a]) - self.h(&[b])).max(0.0),
            [a, b, c] => {
                let joint = self.h(&[a, b, c]);
                let conditional = (joint - self.h(&[b, c]))
                    + (joint - self.h(&[a, c]))
                    + (joint - self.h(&[a, b]));
                conditional + self.interaction3(a, b, c)
            }
            _ => unreachable!("exact measure only for 2 or 3 attributes"),
        }
    }

    /// Multi-attribute measure; exact up to `cap` attributes, otherwise the
    /// minimum of the exact value over all `cap`-sized subsets.
    pub fn multi_attribute_measure(&self, attrs: &AttributeSet) -> Result<Bits> {
        attrs.check_bounds(self.table.n_attrs())?;
        if attrs.len() < 2 {
            return Err(Error::invalid(
                "multi-attribute measure needs at least two attributes",
            ));
        }
        if attrs.len() <= self.cap {
            return Ok(self.multi_attribute_exact(attrs.as_slice()));
        }
        let mut best = f64::INFINITY;
        for_each_combination(attrs.as_slice(), self.cap, |s| {
            best = best.min(self.multi_attribute_exact(s));
        });
        Ok(best)
    }

    /// d_MA(S)/H(S) for |S| ≤ cap; `None` when H(S) = 0.
    fn normalized_exact(&self, attrs: &[usize]) -> Option<f64> {
        let key = AttributeSet::new(attrs.iter().copied());
        if let Some(&v) = self
            .normalized_exact
            .read()
            .expect("cache poisoned")
            .get(&key)
        {
            return v;
        }
        let h = self.entropy_unchecked(&key);
        let v = if h > 0.0 {
            Some(self.multi_attribute_exact(attrs) / h)
        } else {
            None
        };
        self.normalized_exact
            .write()
            .expect("cache poisoned")
            .insert(key, v);
        v
    }

    /// Minimum normalized value over the `cap`-subsets of a single set.
    fn best_within(&self, attrs: &AttributeSet) -> Option<f64> {
        if attrs.len() < self.cap {
            return None;
        }
        if let Some(&v) = self.best_within.read().expect("cache poisoned").get(attrs) {
            return v;
        }
        let mut best: Option<f64> = None;
        for_each_combination(attrs.as_slice(), self.cap, |s| {
            if let Some(v) = self.normalized_exact(s) {
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        });
        self.best_within
            .write()
            .expect("cache poisoned")
            .insert(attrs.clone(), best);
        best
    }

    /// Normalized measure between two attribute sets.
    ///
    /// If the union has at most `cap` attributes this is d_MA(a∪b)/H(a∪b).
    /// Otherwise every `cap`-sized subset S of the union is scored as
    /// d_MA(S)/H(S) and the minimum is returned; subsets with H(S) = 0 are
    /// skipped and an all-degenerate union scores 0.
    pub fn normalized_measure(&self, a: &AttributeSet, b: &AttributeSet) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        let union = a.union(b);
        if union.len() < 2 {
            return Err(Error::invalid(
                "normalized measure needs at least two distinct attributes",
            ));
        }
        if union.len() <= self.cap {
            return Ok(self.normalized_exact(union.as_slice()).unwrap_or(0.0));
        }

        // subsets wholly inside a or b are shared across many calls
        let mut best: Option<f64> = None;
        let mut offer = |v: Option<f64>| {
            if let Some(v) = v {
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        };
        offer(self.best_within(a));
        offer(self.best_within(b));

        let only_a: Vec<usize> = a.iter().filter(|&i| !b.contains(i)).collect();
        let only_b: Vec<usize> = b.iter().filter(|&i| !a.contains(i)).collect();
        let mut buf = Vec::with_capacity(self.cap);
        for &x in &only_a {
            for &y in &only_b {
                if self.cap == 2 {
                    buf.clear();
                    buf.extend([x.min(y), x.max(y)]);
                    offer(self.normalized_exact(&buf));
                    continue;
                }
                for z in union.iter() {
                    // visit each cross triple once: z ranges over the union,
                    // skipping triples already produced by a smaller (x, y)
                    if z == x || z == y {
                        continue;
                    }
                    if (only_a.contains(&z) && z < x) || (only_b.contains(&z) && z < y) {
                        continue;
                    }
                    buf.clear();
                    buf.extend([x, y, z]);
                    buf.sort_unstable();
                    offer(self.normalized_exact(&buf));
                }
            }
        }
        Ok(best.unwrap_or(0.0))
    }

    /// TC(attrs) = Σ H(a_i) − H(attrs).
    pub fn total_correlation(&self, attrs: &AttributeSet) -> Result<Bits> {
        self.check(attrs)?;
        if attrs.len() == 1 {
            return Ok(0.0);
        }
        let marginals: f64 = attrs.iter().map(|i| self.h(&[i])).sum();
        Ok((marginals - self.entropy_unchecked(attrs)).max(0.0))
    }

    /// SU(a, b) = 2·I(a;b)/(H(a)+H(b)); zero when both attributes are constant.
    pub fn symmetric_uncertainty(&self, a: usize, b: usize) -> Result<f64> {
        let (sa, sb) = (AttributeSet::single(a), AttributeSet::single(b));
        self.check(&sa)?;
        self.check(&sb)?;
        let denom = self.h(&[a]) + self.h(&[b]);
        if denom <= 0.0 {
            return Ok(0.0);
        }
        let mi = self.mutual_information(&sa, &sb)?;
        Ok((2.0 * mi / denom).clamp(0.0, 1.0))
    }
}

/// Calls `f` with every `k`-combination of `items`, in lexicographic order.
pub(crate) fn for_each_combination(items: &[usize], k: usize, mut f: impl FnMut(&[usize])) {
    let n = items.len();
    if k == 0 || k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf: Vec<usize> = idx.iter().map(|&i| items[i]).collect();
    loop {
        f(&buf);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
        for j in i..k {
            buf[j] = items[idx[j]];
        }
    }
}

fn with_measures<T>(
    table: &DiscreteTable,
    cap: usize,
    f: impl FnOnce(&Measures<'_>) -> Result<T>,
) -> Result<T> {
    f(&Measures::new(table, cap)?)
}

pub fn conditional_entropy(
    table: &DiscreteTable,
    target: &AttributeSet,
    given: &AttributeSet,
) -> Result<Bits> {
    with_measures(table, 3, |m| m.conditional_entropy(target, given))
}

pub fn rokhlin_distance(table: &DiscreteTable, a: &AttributeSet, b: &AttributeSet) -> Result<Bits> {
    with_measures(table, 3, |m| m.rokhlin_distance(a, b))
}

pub fn interaction_information(table: &DiscreteTable, attrs: &AttributeSet) -> Result<Bits> {
    with_measures(table, 3, |m| m.interaction_information(attrs))
}

pub fn multi_attribute_measure(
    table: &DiscreteTable,
    attrs: &AttributeSet,
    cap: usize,
) -> Result<Bits> {
    with_measures(table, cap, |m| m.multi_attribute_measure(attrs))
}

pub fn normalized_measure(
    table: &DiscreteTable,
    a: &AttributeSet,
    b: &AttributeSet,
    cap: usize,
) -> Result<f64> {
    with_measures(table, cap, |m| m.normalized_measure(a, b))
}

pub fn total_correlation(table: &DiscreteTable, attrs: &AttributeSet) -> Result<Bits> {
    with_measures(table, 3, |m| m.total_correlation(attrs))
}

pub fn symmetric_uncertainty(table: &DiscreteTable, a: usize, b: usize) -> Result<f64> {
    with_measures(table, 3, |m| m.symmetric_uncertainty(a, b))
}
