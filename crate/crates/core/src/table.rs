//! Discrete tables and attribute sets, the substrate for all partition math.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sorted, duplicate-free set of attribute (column) indices.
///
/// Ordering is lexicographic over the sorted index lists, which is the
/// tie-break order used throughout the subspace search.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AttributeSet(Vec<usize>);

impl AttributeSet {
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        AttributeSet(v)
    }

    pub fn single(index: usize) -> Self {
        AttributeSet(vec![index])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn union(&self, other: &AttributeSet) -> AttributeSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.0, &other.0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        AttributeSet(out)
    }

    pub fn intersection_len(&self, other: &AttributeSet) -> usize {
        self.iter().filter(|&i| other.contains(i)).count()
    }

    pub fn is_disjoint(&self, other: &AttributeSet) -> bool {
        self.intersection_len(other) == 0
    }

    pub fn is_subset(&self, other: &AttributeSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    /// The set with `index` removed.
    pub fn without(&self, index: usize) -> AttributeSet {
        AttributeSet(self.iter().filter(|&i| i != index).collect())
    }

    pub(crate) fn check_bounds(&self, n_attrs: usize) -> Result<()> {
        match self.0.last() {
            Some(&max) if max >= n_attrs => Err(Error::invalid(format!(
                "attribute index {max} out of range for table with {n_attrs} attributes"
            ))),
            _ => Ok(()),
        }
    }
}

impl From<Vec<usize>> for AttributeSet {
    fn from(v: Vec<usize>) -> Self {
        AttributeSet::new(v)
    }
}

impl<const N: usize> From<[usize; N]> for AttributeSet {
    fn from(v: [usize; N]) -> Self {
        AttributeSet::new(v)
    }
}

impl FromIterator<usize> for AttributeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        AttributeSet::new(iter)
    }
}

impl fmt::Display for AttributeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// N rows by p attributes of integer symbol codes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteTable {
    n_rows: usize,
    attr_names: Vec<String>,
    codes: Vec<Vec<u32>>,
    symbol_names: Vec<Vec<String>>,
}

impl DiscreteTable {
    /// Builds a table from per-attribute code columns. Symbol names default
    /// to the decimal rendering of each code.
    pub fn from_columns(codes: Vec<Vec<u32>>) -> Result<Self> {
        let symbol_names = codes
            .iter()
            .map(|col| {
                let arity = col.iter().max().map_or(0, |&m| m as usize + 1);
                (0..arity).map(|c| c.to_string()).collect()
            })
            .collect();
        let attr_names = (0..codes.len()).map(|i| format!("A{}", i + 1)).collect();
        Self::with_names(attr_names, codes, symbol_names)
    }

    pub fn with_names(
        attr_names: Vec<String>,
        codes: Vec<Vec<u32>>,
        symbol_names: Vec<Vec<String>>,
    ) -> Result<Self> {
        if codes.is_empty() {
            return Err(Error::invalid("table needs at least one attribute"));
        }
        if attr_names.len() != codes.len() || symbol_names.len() != codes.len() {
            return Err(Error::invalid(
                "attribute names, code columns and symbol lists differ in length",
            ));
        }
        let n_rows = codes[0].len();
        if let Some(i) = codes.iter().position(|c| c.len() != n_rows) {
            return Err(Error::invalid(format!(
                "column {i} has {} rows, expected {n_rows}",
                codes[i].len()
            )));
        }
        Ok(DiscreteTable {
            n_rows,
            attr_names,
            codes,
            symbol_names,
        })
    }

    /// Builds a table from textual columns, coding symbols in first-occurrence order.
    pub fn from_symbols<S: AsRef<str>>(columns: &[(&str, Vec<S>)]) -> Result<Self> {
        let mut names = Vec::with_capacity(columns.len());
        let mut codes = Vec::with_capacity(columns.len());
        let mut symbols = Vec::with_capacity(columns.len());
        for (name, values) in columns {
            let mut dict: HashMap<&str, u32> = HashMap::new();
            let mut syms = Vec::new();
            let col = values
                .iter()
                .map(|v| {
                    let v = v.as_ref();
                    *dict.entry(v).or_insert_with(|| {
                        syms.push(v.to_string());
                        (syms.len() - 1) as u32
                    })
                })
                .collect();
            names.push(name.to_string());
            codes.push(col);
            symbols.push(syms);
        }
        Self::with_names(names, codes, symbols)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_attrs(&self) -> usize {
        self.codes.len()
    }

    pub fn column(&self, attr: usize) -> &[u32] {
        &self.codes[attr]
    }

    pub fn attr_names(&self) -> &[String] {
        &self.attr_names
    }

    pub fn symbol_names(&self, attr: usize) -> &[String] {
        &self.symbol_names[attr]
    }

    /// Number of distinct code slots used by `attr` (max code + 1).
    pub fn arity(&self, attr: usize) -> usize {
        self.codes[attr].iter().max().map_or(0, |&m| m as usize + 1)
    }

    pub fn all_attributes(&self) -> AttributeSet {
        AttributeSet::new(0..self.n_attrs())
    }

    pub fn row(&self, r: usize) -> Vec<u32> {
        self.codes.iter().map(|c| c[r]).collect()
    }

    /// A new table holding the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> DiscreteTable {
        DiscreteTable {
            n_rows: rows.len(),
            attr_names: self.attr_names.clone(),
            codes: self
                .codes
                .iter()
                .map(|c| rows.iter().map(|&r| c[r]).collect())
                .collect(),
            symbol_names: self.symbol_names.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attribute_set_is_sorted_and_deduplicated() {
        let s = AttributeSet::new([3, 1, 3, 0]);
        assert_eq!(s.as_slice(), &[0, 1, 3]);
        assert_eq!(s.to_string(), "{0,1,3}");
    }

    #[test]
    fn set_algebra() {
        let a = AttributeSet::from([0, 2, 4]);
        let b = AttributeSet::from([1, 2]);
        assert_eq!(a.union(&b).as_slice(), &[0, 1, 2, 4]);
        assert_eq!(a.intersection_len(&b), 1);
        assert!(!a.is_disjoint(&b));
        assert!(AttributeSet::from([2]).is_subset(&a));
        assert_eq!(a.without(2).as_slice(), &[0, 4]);
    }

    #[test]
    fn ragged_columns_rejected() {
        let err = DiscreteTable::from_columns(vec![vec![0, 1], vec![0]]).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn symbols_coded_in_first_occurrence_order() {
        let t = DiscreteTable::from_symbols(&[("c", vec!["R", "G", "R", "B"])]).unwrap();
        assert_eq!(t.column(0), &[0, 1, 0, 2]);
        assert_eq!(t.symbol_names(0), &["R", "G", "B"]);
        assert_eq!(t.arity(0), 3);
    }
}
