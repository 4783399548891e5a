//! Local discovery of the outcome's parents.
//!
//! The outcome is a model prediction and has no descendants, so its
//! parents-and-children set is its parent set. The search is PC-style:
//! screen features by marginal dependence, then drop any candidate that some
//! subset of the remaining candidates renders independent of the outcome.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::dataset::BinaryDataset;
use crate::independence::g2_test_bits;

pub const DEFAULT_P_THRESHOLD: f64 = 0.01;
pub const DEFAULT_MAX_ORDER: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParentSet {
    /// Column indices, ascending.
    pub parents: Vec<usize>,
    pub p_threshold: f64,
    pub max_order: usize,
}

impl ParentSet {
    /// A parent set chosen by hand (tests, externally supplied structure).
    pub fn from_columns(mut parents: Vec<usize>) -> Self {
        parents.sort_unstable();
        parents.dedup();
        ParentSet {
            parents,
            p_threshold: DEFAULT_P_THRESHOLD,
            max_order: DEFAULT_MAX_ORDER,
        }
    }

    pub fn contains(&self, column: usize) -> bool {
        self.parents.binary_search(&column).is_ok()
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.parents.iter().copied()
    }
}

/// Calls `f` on every `size`-subset of `items` in lexicographic order until it returns true.
fn any_subset(items: &[usize], size: usize, mut f: impl FnMut(&[usize]) -> bool) -> bool {
    if size > items.len() {
        return false;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    let mut buf = vec![0; size];
    loop {
        for (slot, &i) in buf.iter_mut().zip(&idx) {
            *slot = items[i];
        }
        if f(&buf) {
            return true;
        }
        // advance to the next combination
        let mut pos = size;
        loop {
            if pos == 0 {
                return false;
            }
            pos -= 1;
            if idx[pos] != pos + items.len() - size {
                break;
            }
            if pos == 0 {
                return false;
            }
        }
        idx[pos] += 1;
        for later in pos + 1..size {
            idx[later] = idx[later - 1] + 1;
        }
    }
}

pub fn discover_parents(ds: &BinaryDataset, p_threshold: f64, max_order: usize) -> ParentSet {
    let y = ds.outcome_bits();
    let mut candidates: Vec<usize> = ds
        .features()
        .collect::<Vec<_>>()
        .into_par_iter()
        .filter(|&x| !g2_test_bits(ds.bits(x), y, &[]).independent_at(p_threshold))
        .collect();

    for order in 1..=max_order {
        if candidates.len() <= order {
            break;
        }
        // Removals found at this order apply only from the next order on.
        let snapshot = candidates.clone();
        let keep: Vec<bool> = snapshot
            .par_iter()
            .map(|&x| {
                let others: Vec<usize> = snapshot.iter().copied().filter(|&c| c != x).collect();
                let separated = any_subset(&others, order, |subset| {
                    let cond: Vec<&Bits> = subset.iter().map(|&c| ds.bits(c)).collect();
                    g2_test_bits(ds.bits(x), y, &cond).independent_at(p_threshold)
                });
                !separated
            })
            .collect();
        candidates = snapshot
            .into_iter()
            .zip(keep)
            .filter_map(|(c, k)| k.then_some(c))
            .collect();
    }

    candidates.sort_unstable();
    ParentSet {
        parents: candidates,
        p_threshold,
        max_order,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_in_lexicographic_order() {
        let mut seen = Vec::new();
        any_subset(&[3, 5, 7, 9], 2, |s| {
            seen.push(s.to_vec());
            false
        });
        assert_eq!(
            seen,
            vec![vec![3, 5], vec![3, 7], vec![3, 9], vec![5, 7], vec![5, 9], vec![7, 9]]
        );
        let mut count = 0;
        any_subset(&[1, 2, 3], 3, |_| {
            count += 1;
            false
        });
        assert_eq!(count, 1);
        assert!(!any_subset(&[1, 2], 3, |_| true));
        let mut first = Vec::new();
        assert!(any_subset(&[1, 2, 3], 1, |s| {
            first.push(s[0]);
            s[0] == 2
        }));
        assert_eq!(first, vec![1, 2]);
    }

    #[test]
    fn copy_of_outcome_survives() {
        let rows: Vec<Vec<u8>> = (0..400u32)
            .map(|i| {
                let a = (i % 2) as u8;
                let b = ((i / 2) % 2) as u8;
                let y = ((i * 7 / 3) % 2) as u8;
                vec![a, y, b, y]
            })
            .collect();
        let ds = BinaryDataset::from_rows(&["a", "copy", "b", "y"], &rows, "y").unwrap();
        let pa = discover_parents(&ds, 0.01, 3);
        assert!(pa.contains(1));
    }
}
