//! Partitions of the row index set induced by attribute values.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::table::{AttributeSet, DiscreteTable};

/// Information quantities in bits (base-2 logarithm).
pub type Bits = f64;

/// A partition of `0..n_rows` into disjoint, exhaustive blocks.
///
/// Block ids are dense and assigned in first-occurrence row order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    block_of: Vec<u32>,
    block_sizes: Vec<usize>,
}

impl Partition {
    /// The partition generated by a single code column.
    pub fn from_codes(codes: &[u32]) -> Self {
        let mut p = Partition {
            block_of: vec![0; codes.len()],
            block_sizes: if codes.is_empty() {
                vec![]
            } else {
                vec![codes.len()]
            },
        };
        p = p.refine(codes);
        p
    }

    /// Common refinement of this partition with the partition of `codes`.
    pub fn refine(&self, codes: &[u32]) -> Partition {
        debug_assert_eq!(codes.len(), self.block_of.len());
        let n = codes.len();
        let arity = codes.iter().max().map_or(0, |&m| m as usize + 1);
        let slots = self.block_sizes.len().saturating_mul(arity);
        let mut block_of = Vec::with_capacity(n);
        let mut block_sizes = Vec::new();

        // dense lookup when the key space is comparable to the row count
        if slots <= 4 * n + 1024 {
            let mut lookup = vec![u32::MAX; slots];
            for (r, &code) in codes.iter().enumerate() {
                let key = self.block_of[r] as usize * arity + code as usize;
                let id = match lookup[key] {
                    u32::MAX => {
                        let id = block_sizes.len() as u32;
                        lookup[key] = id;
                        block_sizes.push(0);
                        id
                    }
                    id => id,
                };
                block_sizes[id as usize] += 1;
                block_of.push(id);
            }
        } else {
            let mut lookup: HashMap<(u32, u32), u32> = HashMap::new();
            for (r, &code) in codes.iter().enumerate() {
                let next = block_sizes.len() as u32;
                let id = *lookup.entry((self.block_of[r], code)).or_insert(next);
                if id == next {
                    block_sizes.push(0);
                }
                block_sizes[id as usize] += 1;
                block_of.push(id);
            }
        }
        Partition {
            block_of,
            block_sizes,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.block_of.len()
    }

    pub fn n_blocks(&self) -> usize {
        self.block_sizes.len()
    }

    pub fn block_of(&self, row: usize) -> u32 {
        self.block_of[row]
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    /// Row indices grouped per block, in block-id order.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_blocks()];
        for (r, &b) in self.block_of.iter().enumerate() {
            out[b as usize].push(r);
        }
        out
    }

    /// Shannon entropy of the block-size distribution.
    pub fn entropy(&self) -> Bits {
        entropy_of_counts(&self.block_sizes, self.n_rows())
    }
}

pub(crate) fn entropy_of_counts(counts: &[usize], total: usize) -> Bits {
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    h.max(0.0)
}

/// Joint partition of the rows over every attribute in `attrs`.
pub fn induce_partition(table: &DiscreteTable, attrs: &AttributeSet) -> Result<Partition> {
    if attrs.is_empty() {
        return Err(Error::invalid(
            "cannot induce a partition from an empty attribute set",
        ));
    }
    attrs.check_bounds(table.n_attrs())?;
    let mut iter = attrs.iter();
    let first = iter.next().expect("non-empty");
    let mut p = Partition::from_codes(table.column(first));
    for a in iter {
        p = p.refine(table.column(a));
    }
    Ok(p)
}

/// Entropy of a partition; provided as a free function for symmetry with the other measures.
pub fn entropy(partition: &Partition) -> Bits {
    partition.entropy()
}
