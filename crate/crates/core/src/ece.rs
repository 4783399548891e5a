//! Explanatory causal effect estimators.
//!
//! With the outcome's parents known, the effect of toggling a parent while
//! every other variable is held fixed reduces to a difference of two plug-in
//! conditionals given the remaining parents. Averaging that difference over
//! the observed configurations of the conditioning set, weighted by their
//! frequency, gives the average effect used for global ranking. Features
//! outside the parent set have effect exactly zero.
//!
//! Combined variables extend the parent set: conjunctions of non-parents that
//! still move the outcome given all parents (combined causes), and
//! conjunctions containing a parent whose effect beats that parent's own
//! (interactions). Every estimate conditions on at most `cond_subset_size`
//! variables, chosen by strongest marginal association with the treatment.

use std::cmp::Ordering;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::contingency::{stratified_tables, Stratum};
use crate::dataset::{cond_prob_y, BinaryDataset, Literal};
use crate::error::{Error, Result};
use crate::independence::{association_strength_bits, g2_test_bits, is_associated_bits};
use crate::patterns::CombinedVariable;
use crate::structure::ParentSet;

pub const DEFAULT_EPSILON: f64 = 0.01;
pub const DEFAULT_COND_SUBSET_SIZE: usize = 5;
pub const DEFAULT_ASSOC_P_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EceParams {
    /// Minimum absolute effect, and minimum improvement for interactions.
    pub epsilon: f64,
    pub cond_subset_size: usize,
    pub assoc_p_threshold: f64,
}

impl Default for EceParams {
    fn default() -> Self {
        EceParams {
            epsilon: DEFAULT_EPSILON,
            cond_subset_size: DEFAULT_COND_SUBSET_SIZE,
            assoc_p_threshold: DEFAULT_ASSOC_P_THRESHOLD,
        }
    }
}

impl EceParams {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::Argument(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if self.cond_subset_size == 0 {
            return Err(Error::Argument("conditioning subset size must be ≥ 1".into()));
        }
        if !(self.assoc_p_threshold > 0.0 && self.assoc_p_threshold <= 1.0) {
            return Err(Error::Argument(format!(
                "association p threshold must lie in (0, 1], got {}",
                self.assoc_p_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumDetail {
    /// Values of the conditioning variables, in conditioning order.
    pub values: Vec<bool>,
    pub weight: f64,
    pub arm1: Option<f64>,
    pub arm0: Option<f64>,
    pub contributing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EceEstimate {
    /// `None` when no stratum has support in both arms.
    pub value: Option<f64>,
    pub strata: Vec<StratumDetail>,
    pub skipped_weight: f64,
    /// Literal sets of the conditioning variables, in conditioning order.
    pub conditioning: Vec<Vec<Literal>>,
}

impl EceEstimate {
    pub fn magnitude(&self) -> f64 {
        self.value.map_or(0.0, f64::abs)
    }

    pub fn conditions_on_column(&self, column: usize) -> bool {
        self.conditioning
            .iter()
            .any(|set| set.iter().any(|l| l.column == column))
    }
}

fn stratum_detail(s: &Stratum, k: usize, n: f64) -> (StratumDetail, Option<f64>) {
    let [t0y0, t0y1, t1y0, t1y1] = s.cells;
    let arm0_n = t0y0 + t0y1;
    let arm1_n = t1y0 + t1y1;
    let arm1 = (arm1_n > 0).then(|| t1y1 as f64 / arm1_n as f64);
    let arm0 = (arm0_n > 0).then(|| t0y1 as f64 / arm0_n as f64);
    let diff = match (arm1, arm0) {
        (Some(a), Some(b)) => Some(a - b),
        _ => None,
    };
    (
        StratumDetail {
            values: (0..k).map(|j| s.value(j, k)).collect(),
            weight: s.total() as f64 / n,
            arm1,
            arm0,
            contributing: diff.is_some(),
        },
        diff,
    )
}

/// Frequency-weighted average of per-stratum arm differences. Strata missing an
/// arm are skipped and the remaining weights renormalized.
pub fn stratified_effect(treatment: &Bits, outcome: &Bits, cond: &[&Bits]) -> EceEstimate {
    let n = treatment.len() as f64;
    let k = cond.len();
    let mut num = 0.0;
    let mut den = 0.0;
    let mut skipped = 0.0;
    let mut strata = Vec::new();
    for s in stratified_tables(treatment, outcome, cond) {
        let (detail, diff) = stratum_detail(&s, k, n);
        match diff {
            Some(d) => {
                num += detail.weight * d;
                den += detail.weight;
            }
            None => skipped += detail.weight,
        }
        strata.push(detail);
    }
    EceEstimate {
        value: (den > 0.0).then(|| num / den),
        strata,
        skipped_weight: skipped,
        conditioning: Vec::new(),
    }
}

/// `P(y | xi=1, p') − P(y | xi=0, p')`; `None` when either arm is unsupported.
pub fn stratum_ece(ds: &BinaryDataset, xi: usize, p_prime: &[Literal]) -> Result<Option<f64>> {
    if p_prime.iter().any(|l| l.column == xi) {
        return Err(Error::Argument(format!(
            "treatment column {xi} also appears in the stratum"
        )));
    }
    let mut lits = Vec::with_capacity(p_prime.len() + 1);
    lits.extend_from_slice(p_prime);
    lits.push(Literal::one(xi));
    let p1 = cond_prob_y(ds, &lits);
    *lits.last_mut().expect("pushed above") = Literal::zero(xi);
    let p0 = cond_prob_y(ds, &lits);
    Ok(match (p1, p0) {
        (Some(a), Some(b)) => Some(a - b),
        _ => None,
    })
}

/// Indices of the `size` eligible columns most associated with `target`, in
/// ascending index order. Ties favour the lower index.
pub fn select_conditioning_subset(target: &Bits, eligible: &[&Bits], size: usize) -> Vec<usize> {
    if eligible.len() <= size {
        return (0..eligible.len()).collect();
    }
    let strengths: Vec<f64> = eligible
        .iter()
        .map(|b| association_strength_bits(target, b))
        .collect();
    let mut order: Vec<usize> = (0..eligible.len()).collect();
    order.sort_by(|&a, &b| {
        strengths[b]
            .partial_cmp(&strengths[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut picked: Vec<usize> = order.into_iter().take(size).collect();
    picked.sort_unstable();
    picked
}

fn estimate_with(
    treatment: &Bits,
    outcome: &Bits,
    candidates: &[(Vec<Literal>, &Bits)],
    size: usize,
) -> EceEstimate {
    let bits: Vec<&Bits> = candidates.iter().map(|(_, b)| *b).collect();
    let chosen = select_conditioning_subset(treatment, &bits, size);
    let cond: Vec<&Bits> = chosen.iter().map(|&i| bits[i]).collect();
    let mut est = stratified_effect(treatment, outcome, &cond);
    est.conditioning = chosen.iter().map(|&i| candidates[i].0.clone()).collect();
    est
}

/// Average effect of parent `xi`, conditioning on the other parents.
pub fn avg_ece(
    ds: &BinaryDataset,
    xi: usize,
    parents: &ParentSet,
    cond_subset_size: usize,
) -> Result<EceEstimate> {
    if !parents.contains(xi) {
        return Err(Error::Argument(format!(
            "column {xi} is not in the parent set; its effect is zero by construction"
        )));
    }
    let others: Vec<(Vec<Literal>, &Bits)> = parents
        .iter()
        .filter(|&p| p != xi)
        .map(|p| (vec![Literal::one(p)], ds.bits(p)))
        .collect();
    Ok(estimate_with(ds.bits(xi), ds.outcome_bits(), &others, cond_subset_size))
}

/// Average effects of every feature, indexed by column: parents are estimated,
/// everything else is exactly zero. The outcome's own slot is `None`.
pub fn feature_effects(
    ds: &BinaryDataset,
    parents: &ParentSet,
    cond_subset_size: usize,
) -> Vec<Option<f64>> {
    let mut out = vec![Some(0.0); ds.n_columns()];
    out[ds.outcome()] = None;
    let estimated: Vec<(usize, Option<f64>)> = parents
        .parents
        .par_iter()
        .map(|&p| {
            let est = avg_ece(ds, p, parents, cond_subset_size).expect("p is a parent");
            (p, est.value)
        })
        .collect();
    for (p, v) in estimated {
        out[p] = v;
    }
    out
}

/// Parents whose average effect magnitude reaches `epsilon`.
pub fn classify_explanatory_causes(estimates: &[(usize, f64)], epsilon: f64) -> Vec<usize> {
    estimates
        .iter()
        .filter(|(_, v)| v.abs() >= epsilon)
        .map(|(c, _)| *c)
        .collect()
}

/// Effect of a combination of non-parents given all parents.
///
/// The flag is set when the magnitude reaches `epsilon` and the combination
/// stays dependent on the outcome given the same conditioning set. The
/// dependence test runs at the parent set's significance level divided by
/// `n_candidates`, the number of combinations screened alongside this one.
pub fn avg_ece_combined_cause(
    ds: &BinaryDataset,
    w: &CombinedVariable,
    parents: &ParentSet,
    params: &EceParams,
    n_candidates: usize,
) -> Result<(EceEstimate, bool)> {
    if let Some(c) = w.columns().find(|&c| parents.contains(c)) {
        return Err(Error::Argument(format!(
            "combined cause candidates must avoid parents; column {c} is a parent"
        )));
    }
    let cands: Vec<(Vec<Literal>, &Bits)> = parents
        .iter()
        .map(|p| (vec![Literal::one(p)], ds.bits(p)))
        .collect();
    let est = estimate_with(&w.bits, ds.outcome_bits(), &cands, params.cond_subset_size);
    let big_enough = est.magnitude() >= params.epsilon && est.value.is_some();
    let accepted = big_enough && {
        let cond: Vec<&Bits> = est
            .conditioning
            .iter()
            .map(|set| ds.bits(set[0].column))
            .collect();
        let alpha = parents.p_threshold / n_candidates.max(1) as f64;
        !g2_test_bits(&w.bits, ds.outcome_bits(), &cond).independent_at(alpha)
    };
    Ok((est, accepted))
}

/// Effect of a combination containing at least one parent, conditioning on the
/// parents it does not contain. It is an interaction when its magnitude beats
/// its strongest component parent's by more than `epsilon`.
///
/// `parent_effect` returns the average effect of a parent column.
pub fn classify_interaction(
    ds: &BinaryDataset,
    w: &CombinedVariable,
    parents: &ParentSet,
    parent_effect: impl Fn(usize) -> Option<f64>,
    params: &EceParams,
) -> Result<(EceEstimate, bool)> {
    let strongest = w
        .columns()
        .filter(|&c| parents.contains(c))
        .map(|c| parent_effect(c).map_or(0.0, f64::abs))
        .fold(None, |acc: Option<f64>, m| Some(acc.map_or(m, |a| a.max(m))));
    let Some(strongest) = strongest else {
        return Err(Error::Argument(
            "interaction candidates must contain at least one parent".into(),
        ));
    };
    let cands: Vec<(Vec<Literal>, &Bits)> = parents
        .iter()
        .filter(|&p| !w.columns().any(|c| c == p))
        .map(|p| (vec![Literal::one(p)], ds.bits(p)))
        .collect();
    let est = estimate_with(&w.bits, ds.outcome_bits(), &cands, params.cond_subset_size);
    let accepted = est.value.is_some() && est.magnitude() > strongest + params.epsilon;
    Ok((est, accepted))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemberKind {
    Parent,
    CombinedCause,
    Interaction,
}

impl MemberKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MemberKind::Parent => "parent",
            MemberKind::CombinedCause => "combined_cause",
            MemberKind::Interaction => "interaction",
        }
    }
}

/// One member of the extended parent set.
#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub kind: MemberKind,
    /// A parent is the single literal `column = 1`.
    pub literals: Vec<Literal>,
    pub support: usize,
    pub bits: Bits,
    pub avg_eece: Option<EceEstimate>,
}

impl Member {
    pub fn parent(ds: &BinaryDataset, column: usize) -> Self {
        let bits = ds.bits(column).clone();
        Member {
            kind: MemberKind::Parent,
            literals: vec![Literal::one(column)],
            support: bits.count_ones(),
            bits,
            avg_eece: None,
        }
    }

    pub fn combined(w: &CombinedVariable, kind: MemberKind) -> Self {
        Member {
            kind,
            literals: w.literals.clone(),
            support: w.support,
            bits: w.bits.clone(),
            avg_eece: None,
        }
    }

    pub fn columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.literals.iter().map(|l| l.column)
    }

    /// Shares a column with `other`, regardless of the values.
    pub fn overlaps(&self, other: &Member) -> bool {
        self.columns().any(|c| other.columns().any(|d| d == c))
    }

    /// The member's indicator value on a full row of column values.
    pub fn value_on(&self, row: &[bool]) -> bool {
        self.literals.iter().all(|l| row[l.column] == l.value)
    }

    pub fn effect(&self) -> Option<f64> {
        self.avg_eece.as_ref().and_then(|e| e.value)
    }

    pub fn describe(&self, ds: &BinaryDataset) -> String {
        if self.kind == MemberKind::Parent {
            return ds.column(self.literals[0].column).name.clone();
        }
        let names: Vec<&str> = self
            .columns()
            .map(|c| ds.column(c).name.as_str())
            .collect();
        let values: Vec<&str> = self
            .literals
            .iter()
            .map(|l| if l.value { "1" } else { "0" })
            .collect();
        let mut s = String::new();
        let _ = write!(s, "{{{}}} = {{{}}}", names.join(", "), values.join(", "));
        s
    }

    fn canonical_cmp(&self, other: &Member) -> Ordering {
        self.literals
            .len()
            .cmp(&other.literals.len())
            .then_with(|| self.literals.cmp(&other.literals))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExtendedParentSet {
    /// Canonical order: shorter literal sets first, then lexicographic.
    pub members: Vec<Member>,
}

impl ExtendedParentSet {
    pub fn new(mut members: Vec<Member>) -> Self {
        members.sort_by(Member::canonical_cmp);
        ExtendedParentSet { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Member indices ranked by descending `|score|`, ties in canonical order.
    pub fn ranked_by(&self, score: impl Fn(usize) -> Option<f64>) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.members.len()).collect();
        let mag = |i: usize| score(i).map_or(-1.0, f64::abs);
        order.sort_by(|&a, &b| mag(b).partial_cmp(&mag(a)).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
        order
    }
}

/// Classification of one mined pattern against the parent set.
#[derive(Debug, Clone)]
pub struct PatternVerdict {
    pub pattern: CombinedVariable,
    pub kind: MemberKind,
    pub estimate: EceEstimate,
    pub accepted: bool,
}

/// Sorts every pattern into combined-cause or interaction candidates and tests it.
pub fn classify_patterns(
    ds: &BinaryDataset,
    patterns: &[CombinedVariable],
    parents: &ParentSet,
    parent_effects: &[Option<f64>],
    params: &EceParams,
) -> Vec<PatternVerdict> {
    let n_candidates = patterns
        .iter()
        .filter(|w| !w.columns().any(|c| parents.contains(c)))
        .count();
    patterns
        .par_iter()
        .map(|w| {
            let has_parent = w.columns().any(|c| parents.contains(c));
            let (kind, (estimate, accepted)) = if has_parent {
                (
                    MemberKind::Interaction,
                    classify_interaction(ds, w, parents, |c| parent_effects[c], params)
                        .expect("pattern contains a parent"),
                )
            } else {
                (
                    MemberKind::CombinedCause,
                    avg_ece_combined_cause(ds, w, parents, params, n_candidates)
                        .expect("pattern avoids parents"),
                )
            };
            PatternVerdict {
                pattern: w.clone(),
                kind,
                estimate,
                accepted,
            }
        })
        .collect()
}

/// Parents plus every accepted combined cause and interaction.
pub fn assemble_epa(
    ds: &BinaryDataset,
    parents: &ParentSet,
    verdicts: &[PatternVerdict],
) -> ExtendedParentSet {
    let mut members: Vec<Member> = parents.iter().map(|p| Member::parent(ds, p)).collect();
    members.extend(
        verdicts
            .iter()
            .filter(|v| v.accepted)
            .map(|v| Member::combined(&v.pattern, v.kind)),
    );
    ExtendedParentSet::new(members)
}

fn conditioning_candidates(
    epa: &ExtendedParentSet,
    member: usize,
    associated_only: Option<f64>,
) -> Vec<(usize, &Member)> {
    let target = &epa.members[member];
    epa.members
        .iter()
        .enumerate()
        .filter(|&(j, m)| j != member && !m.overlaps(target))
        .filter(|(_, m)| associated_only.is_none_or(|p| is_associated_bits(&target.bits, &m.bits, p)))
        .collect()
}

/// Global extended effect of `epa.members[member]`: conditions on the members
/// associated with it that share none of its columns.
pub fn avg_eece(
    ds: &BinaryDataset,
    member: usize,
    epa: &ExtendedParentSet,
    params: &EceParams,
) -> EceEstimate {
    let target = &epa.members[member];
    let cands: Vec<(Vec<Literal>, &Bits)> =
        conditioning_candidates(epa, member, Some(params.assoc_p_threshold))
            .into_iter()
            .map(|(_, m)| (m.literals.clone(), &m.bits))
            .collect();
    estimate_with(&target.bits, ds.outcome_bits(), &cands, params.cond_subset_size)
}

/// Fills in `avg_eece` for every member.
pub fn compute_avg_eece(ds: &BinaryDataset, epa: &mut ExtendedParentSet, params: &EceParams) {
    let estimates: Vec<EceEstimate> = (0..epa.members.len())
        .into_par_iter()
        .map(|i| avg_eece(ds, i, epa, params))
        .collect();
    for (m, e) in epa.members.iter_mut().zip(estimates) {
        m.avg_eece = Some(e);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalEffect {
    /// `P(y | member=1, p') − P(y | member=0, p')` at the instance's stratum.
    pub value: Option<f64>,
    /// The member's own value on the instance.
    pub member_value: bool,
    pub conditioning: Vec<Vec<Literal>>,
    pub stratum_values: Vec<bool>,
}

/// Local extended effect at one instance. `instance` holds a value for every
/// column (the outcome slot is ignored).
pub fn eece_local(
    ds: &BinaryDataset,
    member: usize,
    epa: &ExtendedParentSet,
    instance: &[bool],
    params: &EceParams,
) -> LocalEffect {
    let target = &epa.members[member];
    let cands = conditioning_candidates(epa, member, None);
    let bits: Vec<&Bits> = cands.iter().map(|(_, m)| &m.bits).collect();
    let chosen = select_conditioning_subset(&target.bits, &bits, params.cond_subset_size);

    let mut mask = Bits::ones(ds.n_rows());
    let mut stratum_values = Vec::with_capacity(chosen.len());
    for &i in &chosen {
        let m = cands[i].1;
        let v = m.value_on(instance);
        stratum_values.push(v);
        if v {
            mask.and_assign(&m.bits);
        } else {
            mask.and_assign(&m.bits.not());
        }
    }
    let y = ds.outcome_bits();
    let arm1 = mask.and(&target.bits);
    let arm0 = mask.and(&target.bits.not());
    let p = |arm: &Bits| {
        let n = arm.count_ones();
        (n > 0).then(|| arm.and_count(y) as f64 / n as f64)
    };
    let value = match (p(&arm1), p(&arm0)) {
        (Some(a), Some(b)) => Some(a - b),
        _ => None,
    };
    LocalEffect {
        value,
        member_value: target.value_on(instance),
        conditioning: chosen.iter().map(|&i| cands[i].1.literals.clone()).collect(),
        stratum_values,
    }
}

/// Drops combined members that are redundant with a component literal, then
/// keeps one member per base column set: the one with the largest `|avg_eece|`.
pub fn dedupe_members(ds: &BinaryDataset, epa: ExtendedParentSet) -> ExtendedParentSet {
    let n = ds.n_rows();
    let literal_support = |l: &Literal| {
        let ones = ds.bits(l.column).count_ones();
        if l.value {
            ones
        } else {
            n - ones
        }
    };
    let kept: Vec<Member> = epa
        .members
        .into_iter()
        .filter(|m| {
            m.kind == MemberKind::Parent || !m.literals.iter().any(|l| literal_support(l) == m.support)
        })
        .collect();

    let mut out: Vec<Member> = Vec::with_capacity(kept.len());
    for m in kept {
        if m.kind == MemberKind::Parent {
            out.push(m);
            continue;
        }
        let base: Vec<usize> = m.columns().collect();
        let rival = out
            .iter()
            .position(|o| o.kind != MemberKind::Parent && o.columns().eq(base.iter().copied()));
        match rival {
            None => out.push(m),
            Some(i) => {
                let mag = |x: &Member| x.effect().map_or(-1.0, f64::abs);
                // canonical order is preserved by the input; only a strict
                // improvement replaces the earlier member
                if mag(&m) > mag(&out[i]) {
                    out[i] = m;
                }
            }
        }
    }
    ExtendedParentSet::new(out)
}
