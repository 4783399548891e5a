//! Stratified 2×2 tables.
//!
//! Both the independence tests and the effect estimators reduce to the same
//! count: for every observed configuration of a list of conditioning columns,
//! a 2×2 table of two further binary columns. Strata are keyed with the first
//! conditioning column as the most significant bit, so iterating keys in
//! increasing order is lexicographic over the conditioning values.

use std::collections::BTreeMap;

use crate::bits::Bits;

/// Largest conditioning set that fits the `u64` stratum key.
pub const MAX_CONDITIONING: usize = 63;

const DENSE_LIMIT: usize = 16;

/// Counts indexed by `2·a + b`.
pub type Cells = [u64; 4];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stratum {
    pub key: u64,
    pub cells: Cells,
}

impl Stratum {
    pub fn total(&self) -> u64 {
        self.cells.iter().sum()
    }

    /// Value of conditioning column `j` (of `k`) in this stratum.
    pub fn value(&self, j: usize, k: usize) -> bool {
        (self.key >> (k - 1 - j)) & 1 == 1
    }
}

/// Per-row stratum keys for `cond`.
pub fn stratum_keys(n: usize, cond: &[&Bits]) -> Vec<u64> {
    assert!(
        cond.len() <= MAX_CONDITIONING,
        "at most {MAX_CONDITIONING} conditioning columns are supported"
    );
    let k = cond.len();
    let mut keys = vec![0u64; n];
    for (j, c) in cond.iter().enumerate() {
        let bit = 1u64 << (k - 1 - j);
        for i in c.ones_iter() {
            keys[i] |= bit;
        }
    }
    keys
}

/// Non-empty strata of `cond` with the 2×2 table of `(a, b)` in each, in key order.
pub fn stratified_tables(a: &Bits, b: &Bits, cond: &[&Bits]) -> Vec<Stratum> {
    let n = a.len();
    debug_assert_eq!(n, b.len());
    if cond.is_empty() {
        let n11 = a.and_count(b) as u64;
        let n1_ = a.count_ones() as u64;
        let n_1 = b.count_ones() as u64;
        let n10 = n1_ - n11;
        let n01 = n_1 - n11;
        let n00 = n as u64 - n11 - n10 - n01;
        return vec![Stratum {
            key: 0,
            cells: [n00, n01, n10, n11],
        }];
    }
    let keys = stratum_keys(n, cond);
    let mut cell_of = vec![0u8; n];
    for i in a.ones_iter() {
        cell_of[i] |= 2;
    }
    for i in b.ones_iter() {
        cell_of[i] |= 1;
    }
    if cond.len() <= DENSE_LIMIT {
        let mut dense = vec![[0u64; 4]; 1 << cond.len()];
        for (key, cell) in keys.iter().zip(&cell_of) {
            dense[*key as usize][*cell as usize] += 1;
        }
        dense
            .into_iter()
            .enumerate()
            .filter(|(_, c)| c.iter().any(|&x| x > 0))
            .map(|(key, cells)| Stratum {
                key: key as u64,
                cells,
            })
            .collect()
    } else {
        let mut sparse: BTreeMap<u64, Cells> = BTreeMap::new();
        for (key, cell) in keys.iter().zip(&cell_of) {
            sparse.entry(*key).or_default()[*cell as usize] += 1;
        }
        sparse
            .into_iter()
            .map(|(key, cells)| Stratum { key, cells })
            .collect()
    }
}
