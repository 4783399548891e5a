//! G² (likelihood-ratio) conditional independence tests on binary columns.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::bits::Bits;
use crate::contingency::{stratified_tables, Cells};
use crate::dataset::BinaryDataset;
use crate::error::{Error, Result};

/// Minimum rows per table cell before a test is run.
pub const MIN_ROWS_PER_CELL: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiTestResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// False when the sample was too small for the table; the result then
    /// carries `statistic = 0`, `p_value = 0` and reads as "dependent".
    pub performed: bool,
}

impl CiTestResult {
    fn skipped() -> Self {
        CiTestResult {
            statistic: 0.0,
            dof: 0,
            p_value: 0.0,
            performed: false,
        }
    }

    /// Independence is accepted only for a performed test with `p ≥ threshold`.
    pub fn independent_at(&self, p_threshold: f64) -> bool {
        self.performed && self.p_value >= p_threshold
    }
}

/// `2·Σ O·ln(O/E)` over one 2×2 table; empty cells contribute nothing.
pub fn g2_table(cells: &Cells) -> f64 {
    let total = cells.iter().sum::<u64>() as f64;
    if total == 0.0 {
        return 0.0;
    }
    let [n00, n01, n10, n11] = cells.map(|c| c as f64);
    let rows = [n00 + n01, n10 + n11];
    let cols = [n00 + n10, n01 + n11];
    let term = |o: f64, r: f64, c: f64| {
        if o == 0.0 {
            0.0
        } else {
            o * (o / (r * c / total)).ln()
        }
    };
    // Grouped so that transposing the table leaves the result bit-identical.
    let diag = term(n00, rows[0], cols[0]) + term(n11, rows[1], cols[1]);
    let off = term(n01, rows[0], cols[1]) + term(n10, rows[1], cols[0]);
    2.0 * (diag + off)
}

/// Upper tail of the chi-squared distribution.
pub fn chi2_sf(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    if statistic <= 0.0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("dof > 0");
    dist.sf(statistic).clamp(0.0, 1.0)
}

fn too_small(n_rows: usize, n_cond: usize) -> bool {
    let cells = 1usize
        .checked_shl(n_cond as u32)
        .and_then(|s| s.checked_mul(4 * MIN_ROWS_PER_CELL));
    match cells {
        Some(needed) => n_rows < needed,
        None => true,
    }
}

/// G² test of `a ⫫ b | cond` over raw columns.
pub fn g2_test_bits(a: &Bits, b: &Bits, cond: &[&Bits]) -> CiTestResult {
    if too_small(a.len(), cond.len()) {
        return CiTestResult::skipped();
    }
    let mut statistic = 0.0;
    let mut dof = 0;
    for stratum in stratified_tables(a, b, cond) {
        statistic += g2_table(&stratum.cells);
        dof += 1;
    }
    let statistic = statistic.max(0.0);
    CiTestResult {
        statistic,
        dof,
        p_value: chi2_sf(statistic, dof),
        performed: true,
    }
}

/// G² test of `a ⫫ b | cond` over dataset columns.
pub fn g2_test(ds: &BinaryDataset, a: usize, b: usize, cond: &[usize]) -> Result<CiTestResult> {
    if a == b {
        return Err(Error::Argument(format!("g2_test needs two distinct columns, got {a} twice")));
    }
    if cond.contains(&a) || cond.contains(&b) {
        return Err(Error::Argument(
            "conditioning set must not contain the tested columns".into(),
        ));
    }
    let cond_bits: Vec<&Bits> = cond.iter().map(|&c| ds.bits(c)).collect();
    Ok(g2_test_bits(ds.bits(a), ds.bits(b), &cond_bits))
}

/// Marginal G² statistic; larger means more strongly associated.
pub fn association_strength_bits(a: &Bits, b: &Bits) -> f64 {
    g2_test_bits(a, b, &[]).statistic
}

pub fn association_strength(ds: &BinaryDataset, a: usize, b: usize) -> f64 {
    association_strength_bits(ds.bits(a), ds.bits(b))
}

pub fn is_associated_bits(a: &Bits, b: &Bits, p_threshold: f64) -> bool {
    let t = g2_test_bits(a, b, &[]);
    t.performed && t.p_value < p_threshold
}

pub fn is_associated(ds: &BinaryDataset, a: usize, b: usize, p_threshold: f64) -> bool {
    is_associated_bits(ds.bits(a), ds.bits(b), p_threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Columns `a`, `b` realizing the table `[n00, n01, n10, n11]`.
    fn from_table(cells: [usize; 4]) -> (Bits, Bits) {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (idx, &count) in cells.iter().enumerate() {
            for _ in 0..count {
                a.push(idx >= 2);
                b.push(idx % 2 == 1);
            }
        }
        (Bits::from_bools(a), Bits::from_bools(b))
    }

    #[test]
    fn perfect_independence() {
        let (a, b) = from_table([25, 25, 25, 25]);
        let t = g2_test_bits(&a, &b, &[]);
        assert!(t.performed);
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.p_value, 1.0);
        assert_eq!(t.dof, 1);
    }

    #[test]
    fn copy_is_dependent() {
        let (a, _) = from_table([250, 250, 250, 250]);
        let t = g2_test_bits(&a, &a, &[]);
        assert!(t.p_value < 1e-12);
        // 2·n·ln 2 for a balanced copy
        let expect = 2.0 * 1000.0 * std::f64::consts::LN_2;
        assert!((t.statistic - expect).abs() < 1e-9, "{}", t.statistic);
    }

    #[test]
    fn hand_computed_table() {
        // 50-digit evaluation of 2·Σ O·ln(O/E) and the chi-squared(1) tail.
        let (a, b) = from_table([30, 10, 10, 30]);
        let t = g2_test_bits(&a, &b, &[]);
        assert!((t.statistic - 20.929_925_750_581_913).abs() < 1e-9);
        assert!((t.p_value - 4.763_938_479_565_466e-6).abs() < 1e-12);

        let (a, b) = from_table([200, 90, 85, 150]);
        let t = g2_test_bits(&a, &b, &[]);
        assert!((t.statistic - 57.140_521_898_355_07).abs() < 1e-9);
        assert!((t.p_value / 4.057_586_156_858_46e-14 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn strata_sum_statistic_and_dof() {
        let (a1, b1) = from_table([30, 10, 10, 30]);
        let (a2, b2) = from_table([20, 20, 15, 25]);
        let a = Bits::from_bools(a1.iter().chain(a2.iter()));
        let b = Bits::from_bools(b1.iter().chain(b2.iter()));
        let c = Bits::from_bools((0..160).map(|i| i >= 80));
        // 160 rows < 10·4·2 would be skipped; pad by repeating the data.
        let rep = |x: &Bits| Bits::from_bools((0..3).flat_map(|_| x.iter()).collect::<Vec<_>>());
        let t = g2_test_bits(&a, &b, &[&c]);
        assert!(t.performed);
        assert_eq!(t.dof, 2);
        assert!((t.statistic - 22.203_365_417_381_046).abs() < 1e-9);
        assert!((t.p_value - 1.508_691_556_457_065_5e-5).abs() < 1e-12);
        let t3 = g2_test_bits(&rep(&a), &rep(&b), &[&rep(&c)]);
        assert!((t3.statistic - 3.0 * t.statistic).abs() < 1e-9);
    }

    #[test]
    fn small_samples_are_skipped_and_read_dependent() {
        let (a, b) = from_table([10, 10, 10, 9]);
        let t = g2_test_bits(&a, &b, &[]);
        assert!(!t.performed);
        assert!(!t.independent_at(0.01));
        assert!(!is_associated_bits(&a, &b, 0.05));
    }

    #[test]
    fn borderline_association() {
        // Oracle p-values: 0.04735 and 0.08930.
        let (a, b) = from_table([57, 43, 43, 57]);
        assert!(is_associated_bits(&a, &b, 0.05));
        let (a, b) = from_table([56, 44, 44, 56]);
        assert!(!is_associated_bits(&a, &b, 0.05));
        let (a, b) = from_table([25, 25, 25, 25]);
        assert!(!is_associated_bits(&a, &b, 0.05));
        assert!(is_associated_bits(&a, &a, 0.05));
    }

    #[test]
    fn argument_errors() {
        let ds = BinaryDataset::from_rows(&["a", "b", "y"], &[vec![0, 1, 0]], "y").unwrap();
        assert!(g2_test(&ds, 0, 0, &[]).is_err());
        assert!(g2_test(&ds, 0, 2, &[0]).is_err());
        assert!(g2_test(&ds, 0, 2, &[1]).is_ok());
    }
}
