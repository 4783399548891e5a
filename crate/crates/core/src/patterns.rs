//! Closed frequent conjunctions of literals.
//!
//! A combined variable is a conjunction of `(column, value)` literals taken
//! from distinct attributes, frequent enough to estimate effects on. Mining is
//! level-wise (Apriori joins with subset pruning) and keeps only closed
//! patterns: a pattern is dropped when adding one more literal, within the
//! length bound, leaves its support unchanged.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::dataset::{BinaryDataset, Literal};
use crate::error::{Error, Result};

pub const DEFAULT_MIN_SUPPORT: f64 = 0.05;
pub const DEFAULT_MAX_LEN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiningParams {
    /// Minimum support as a fraction of rows; patterns need strictly more.
    pub min_support: f64,
    pub max_len: usize,
    pub exclude_same_group: bool,
}

impl Default for MiningParams {
    fn default() -> Self {
        MiningParams {
            min_support: DEFAULT_MIN_SUPPORT,
            max_len: DEFAULT_MAX_LEN,
            exclude_same_group: true,
        }
    }
}

impl MiningParams {
    pub fn new(min_support: f64, max_len: usize) -> Result<Self> {
        let p = MiningParams {
            min_support,
            max_len,
            exclude_same_group: true,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_support > 0.0 && self.min_support < 1.0) {
            return Err(Error::Argument(format!(
                "minimum support must lie in (0, 1), got {}",
                self.min_support
            )));
        }
        if self.max_len < 2 {
            return Err(Error::Argument(format!(
                "maximum pattern length must be at least 2, got {}",
                self.max_len
            )));
        }
        Ok(())
    }

    pub fn is_frequent(&self, support: usize, n_rows: usize) -> bool {
        support as f64 / n_rows as f64 > self.min_support
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct CombinedVariable {
    /// Sorted by `(column, value)`.
    pub literals: Vec<Literal>,
    pub support: usize,
    pub bits: Bits,
}

impl CombinedVariable {
    pub fn columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.literals.iter().map(|l| l.column)
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }
}

impl std::fmt::Debug for CombinedVariable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CombinedVariable")
            .field("literals", &self.literals)
            .field("support", &self.support)
            .finish()
    }
}

/// Frequent literals in `(column, value)` order. Value 0 is a candidate only
/// for symmetric columns.
pub fn enumerate_literals(ds: &BinaryDataset, params: &MiningParams) -> Vec<Literal> {
    let n = ds.n_rows();
    let mut out = Vec::new();
    for col in ds.features() {
        let c = ds.column(col);
        let ones = c.bits.count_ones();
        if c.symmetric && params.is_frequent(n - ones, n) {
            out.push(Literal::zero(col));
        }
        if params.is_frequent(ones, n) {
            out.push(Literal::one(col));
        }
    }
    out
}

/// Row-wise AND of the literals' indicator columns.
pub fn materialize(ds: &BinaryDataset, literals: &[Literal]) -> Result<Bits> {
    for (i, a) in literals.iter().enumerate() {
        if literals[i + 1..].iter().any(|b| b.column == a.column) {
            return Err(Error::Argument(format!(
                "column {} appears twice in a combined variable",
                a.column
            )));
        }
    }
    let mut acc = Bits::ones(ds.n_rows());
    for &lit in literals {
        if lit.value {
            acc.and_assign(ds.bits(lit.column));
        } else {
            acc.and_assign(&ds.bits(lit.column).not());
        }
    }
    Ok(acc)
}

fn compatible(ds: &BinaryDataset, params: &MiningParams, a: Literal, b: Literal) -> bool {
    if a.column == b.column {
        return false;
    }
    !(params.exclude_same_group && ds.column(a.column).group == ds.column(b.column).group)
}

struct Level {
    patterns: Vec<(Vec<Literal>, Bits, usize)>,
}

pub fn mine_closed_patterns(ds: &BinaryDataset, params: &MiningParams) -> Vec<CombinedVariable> {
    let n = ds.n_rows();
    let items = enumerate_literals(ds, params);
    let item_bits: HashMap<Literal, Bits> =
        items.iter().map(|&l| (l, ds.literal_bits(l))).collect();

    let mut levels: Vec<Level> = vec![Level {
        patterns: items
            .iter()
            .map(|&l| {
                let b = item_bits[&l].clone();
                let s = b.count_ones();
                (vec![l], b, s)
            })
            .collect(),
    }];

    while levels.len() < params.max_len {
        let prev = levels.last().expect("at least one level");
        let prev_index: HashMap<&[Literal], usize> = prev
            .patterns
            .iter()
            .map(|(p, _, s)| (p.as_slice(), *s))
            .collect();

        let mut candidates: Vec<(usize, Literal)> = Vec::new();
        for (i, (p, _, _)) in prev.patterns.iter().enumerate() {
            let last = *p.last().expect("non-empty pattern");
            for &item in items.iter().filter(|&&it| it > last) {
                if !p.iter().all(|&q| compatible(ds, params, q, item)) {
                    continue;
                }
                let mut joined = p.clone();
                joined.push(item);
                // every subset one shorter must be frequent
                let pruned = (0..joined.len() - 1).any(|skip| {
                    let sub: Vec<Literal> = joined
                        .iter()
                        .enumerate()
                        .filter_map(|(j, &l)| (j != skip).then_some(l))
                        .collect();
                    !prev_index.contains_key(sub.as_slice())
                });
                if !pruned {
                    candidates.push((i, item));
                }
            }
        }

        let next: Vec<(Vec<Literal>, Bits, usize)> = candidates
            .par_iter()
            .filter_map(|&(i, item)| {
                let (p, b, _) = &prev.patterns[i];
                let bits = b.and(&item_bits[&item]);
                let support = bits.count_ones();
                params.is_frequent(support, n).then(|| {
                    let mut lits = p.clone();
                    lits.push(item);
                    (lits, bits, support)
                })
            })
            .collect();
        if next.is_empty() {
            break;
        }
        levels.push(Level { patterns: next });
    }

    let mut out = Vec::new();
    for size in 2..=levels.len() {
        let supersets = levels.get(size);
        for (lits, bits, support) in &levels[size - 1].patterns {
            let absorbed = supersets.is_some_and(|lv| {
                lv.patterns.iter().any(|(q, _, qs)| {
                    qs == support && lits.iter().all(|l| q.binary_search(l).is_ok())
                })
            });
            if !absorbed {
                out.push(CombinedVariable {
                    literals: lits.clone(),
                    support: *support,
                    bits: bits.clone(),
                });
            }
        }
    }
    out.sort_by(|a, b| {
        a.literals
            .len()
            .cmp(&b.literals.len())
            .then_with(|| a.literals.cmp(&b.literals))
    });
    out
}
