//! Ground-truth oracles: binary structural causal models with known
//! conditional probability tables, exact joint enumeration, d-separation and a
//! naive stratified estimator that shares no code with [`crate::ece`].

use std::collections::{BTreeMap, VecDeque};

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::dataset::{BinaryDataset, Column};
use crate::error::{Error, Result};

/// Exact joint enumeration is limited to this many variables.
pub const MAX_EXACT_VARIABLES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dag {
    parents: Vec<Vec<usize>>,
}

impl Dag {
    pub fn new(n: usize) -> Self {
        Dag {
            parents: vec![Vec::new(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn add_edge(&mut self, from: usize, to: usize) {
        if !self.parents[to].contains(&from) {
            self.parents[to].push(from);
            self.parents[to].sort_unstable();
        }
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        (0..self.len()).filter(|&c| self.parents[c].contains(&v)).collect()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.parents[to].contains(&from)
    }

    /// Kahn order; `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.len();
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let children: Vec<Vec<usize>> = (0..n).map(|v| self.children(v)).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &c in &children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// `v` and everything reachable from it along directed edges.
    pub fn descendants(&self, v: usize) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            if seen[u] {
                continue;
            }
            seen[u] = true;
            stack.extend(self.children(u));
        }
        seen
    }
}

/// Bayes-ball reachability: true iff every path between `a` and `b` is blocked by `s`.
pub fn d_separated(dag: &Dag, a: usize, b: usize, s: &[usize]) -> bool {
    let n = dag.len();
    let mut in_s = vec![false; n];
    for &v in s {
        in_s[v] = true;
    }
    // ancestors of S, S included
    let mut anc_s = vec![false; n];
    let mut stack: Vec<usize> = s.to_vec();
    while let Some(v) = stack.pop() {
        if anc_s[v] {
            continue;
        }
        anc_s[v] = true;
        stack.extend_from_slice(dag.parents(v));
    }
    let children: Vec<Vec<usize>> = (0..n).map(|v| dag.children(v)).collect();

    // (node, arrived_from_child)
    let mut visited = vec![[false; 2]; n];
    let mut queue = VecDeque::from([(a, true)]);
    while let Some((v, up)) = queue.pop_front() {
        if visited[v][up as usize] {
            continue;
        }
        visited[v][up as usize] = true;
        if v == b && !in_s[v] {
            return false;
        }
        if up {
            if !in_s[v] {
                for &p in dag.parents(v) {
                    queue.push_back((p, true));
                }
                for &c in &children[v] {
                    queue.push_back((c, false));
                }
            }
        } else {
            if !in_s[v] {
                for &c in &children[v] {
                    queue.push_back((c, false));
                }
            }
            if anc_s[v] {
                for &p in dag.parents(v) {
                    queue.push_back((p, true));
                }
            }
        }
    }
    true
}

/// d-separation by listing every simple path of the skeleton and checking each
/// middle node: a non-collider in `s` blocks, and so does a collider with
/// neither itself nor a descendant in `s`.
pub fn d_separated_by_paths(dag: &Dag, a: usize, b: usize, s: &[usize]) -> bool {
    let n = dag.len();
    let desc: Vec<Vec<bool>> = (0..n).map(|v| dag.descendants(v)).collect();
    let neighbours: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            let mut nb: Vec<usize> = dag.parents(v).to_vec();
            nb.extend(dag.children(v));
            nb
        })
        .collect();
    let blocked = |path: &[usize]| {
        path.windows(3).any(|w| {
            let (prev, mid, next) = (w[0], w[1], w[2]);
            let collider = dag.has_edge(prev, mid) && dag.has_edge(next, mid);
            if collider {
                !s.iter().any(|&z| desc[mid][z])
            } else {
                s.contains(&mid)
            }
        })
    };
    let mut path = vec![a];
    let mut on_path = vec![false; n];
    on_path[a] = true;
    fn walk(
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        b: usize,
        nb: &[Vec<usize>],
        blocked: &dyn Fn(&[usize]) -> bool,
    ) -> bool {
        let v = *path.last().expect("non-empty path");
        if v == b {
            return !blocked(path);
        }
        for &u in &nb[v] {
            if on_path[u] {
                continue;
            }
            path.push(u);
            on_path[u] = true;
            let open = walk(path, on_path, b, nb, blocked);
            on_path[u] = false;
            path.pop();
            if open {
                return true;
            }
        }
        false
    }
    !walk(&mut path, &mut on_path, b, &neighbours, &blocked)
}

/// Parents-and-children of `target` from d-separation alone: variables that no
/// subset of the remaining variables separates from it.
pub fn pc_set_oracle(dag: &Dag, target: usize) -> Vec<usize> {
    let n = dag.len();
    (0..n)
        .filter(|&x| x != target)
        .filter(|&x| {
            let rest: Vec<usize> = (0..n).filter(|&v| v != x && v != target).collect();
            (0u64..1 << rest.len()).all(|mask| {
                let s: Vec<usize> = rest
                    .iter()
                    .enumerate()
                    .filter_map(|(j, &v)| ((mask >> j) & 1 == 1).then_some(v))
                    .collect();
                !d_separated(dag, x, target, &s)
            })
        })
        .collect()
}

/// A binary SCM. `cpts[v][cfg]` is `P(v = 1 | parents)` where bit `j` of
/// `cfg` is the value of `dag.parents(v)[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticScm {
    pub names: Vec<String>,
    pub dag: Dag,
    pub cpts: Vec<Vec<f64>>,
    pub outcome: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomScmConfig {
    /// Total variable count, outcome included.
    pub nodes: usize,
    pub outcome_parents: usize,
    pub p_edge: f64,
    pub cpt_bounds: (f64, f64),
    /// Generated models where some parent's true average effect is weaker are rejected.
    pub min_parent_effect: f64,
    pub seed: u64,
}

impl RandomScmConfig {
    pub fn new(nodes: usize, outcome_parents: usize, seed: u64) -> Self {
        RandomScmConfig {
            nodes,
            outcome_parents,
            p_edge: 0.25,
            cpt_bounds: (0.1, 0.9),
            min_parent_effect: 0.05,
            seed,
        }
    }
}

fn cfg_of(parents: &[usize], values: &[bool]) -> usize {
    parents
        .iter()
        .enumerate()
        .fold(0, |acc, (j, &p)| acc | ((values[p] as usize) << j))
}

impl SyntheticScm {
    pub fn new(names: Vec<String>, dag: Dag, cpts: Vec<Vec<f64>>, outcome: usize, seed: u64) -> Result<Self> {
        if names.len() != dag.len() || cpts.len() != dag.len() {
            return Err(Error::Argument("names, dag and cpts disagree on variable count".into()));
        }
        if dag.topological_order().is_none() {
            return Err(Error::Argument("graph has a cycle".into()));
        }
        if !dag.children(outcome).is_empty() {
            return Err(Error::Argument("the outcome must have no children".into()));
        }
        for (v, cpt) in cpts.iter().enumerate() {
            if cpt.len() != 1 << dag.parents(v).len() {
                return Err(Error::Argument(format!("cpt of variable {v} has the wrong size")));
            }
            if cpt.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::Argument(format!("cpt of variable {v} leaves [0, 1]")));
            }
        }
        Ok(SyntheticScm {
            names,
            dag,
            cpts,
            outcome,
            seed,
        })
    }

    pub fn random(config: &RandomScmConfig) -> Result<Self> {
        let RandomScmConfig {
            nodes,
            outcome_parents,
            p_edge,
            cpt_bounds: (lo, hi),
            min_parent_effect,
            seed,
        } = *config;
        if nodes < 2 || outcome_parents > nodes - 1 {
            return Err(Error::Argument(format!(
                "cannot give the outcome {outcome_parents} parents among {} features",
                nodes.saturating_sub(1)
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let outcome = nodes - 1;
        let mut names: Vec<String> = (1..nodes).map(|i| format!("X{i}")).collect();
        names.push("Y".into());
        for _ in 0..1000 {
            let mut dag = Dag::new(nodes);
            for to in 0..outcome {
                for from in 0..to {
                    if rng.random_bool(p_edge) {
                        dag.add_edge(from, to);
                    }
                }
            }
            for p in sample_indices(&mut rng, outcome, outcome_parents) {
                dag.add_edge(p, outcome);
            }
            let cpts = (0..nodes)
                .map(|v| {
                    (0..1usize << dag.parents(v).len())
                        .map(|_| rng.random_range(lo..=hi))
                        .collect()
                })
                .collect();
            let scm = SyntheticScm::new(names.clone(), dag, cpts, outcome, seed)?;
            let weak = scm
                .outcome_parents()
                .iter()
                .any(|&p| scm.true_avg_ece(p).map_or(true, |v| v.abs() < min_parent_effect));
            if !weak {
                return Ok(scm);
            }
        }
        Err(Error::Argument(
            "no model with sufficiently strong parents after 1000 draws".into(),
        ))
    }

    pub fn outcome_parents(&self) -> &[usize] {
        self.dag.parents(self.outcome)
    }

    pub fn n_vars(&self) -> usize {
        self.names.len()
    }

    fn p_one(&self, v: usize, values: &[bool]) -> f64 {
        self.cpts[v][cfg_of(self.dag.parents(v), values)]
    }

    /// Ancestral sampling seeded by the model's own seed.
    pub fn sample(&self, n: usize) -> BinaryDataset {
        self.sample_with_seed(n, self.seed)
    }

    pub fn sample_with_seed(&self, n: usize, seed: u64) -> BinaryDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let order = self.dag.topological_order().expect("validated acyclic");
        let mut cols = vec![Vec::with_capacity(n); self.n_vars()];
        let mut values = vec![false; self.n_vars()];
        for _ in 0..n {
            for &v in &order {
                let p = self.p_one(v, &values);
                values[v] = rng.random::<f64>() < p;
            }
            for (c, &v) in cols.iter_mut().zip(&values) {
                c.push(v);
            }
        }
        self.to_dataset(cols)
    }

    fn to_dataset(&self, cols: Vec<Vec<bool>>) -> BinaryDataset {
        let columns = cols
            .into_iter()
            .zip(&self.names)
            .map(|(c, name)| Column::new(name.clone(), Bits::from_bools(c)))
            .collect();
        BinaryDataset::new(columns, self.outcome).expect("consistent columns")
    }

    /// Probability of every configuration; bit `v` of the index is variable `v`.
    pub fn exact_joint(&self) -> Result<Vec<f64>> {
        let m = self.n_vars();
        if m > MAX_EXACT_VARIABLES {
            return Err(Error::Capacity(format!(
                "exact enumeration supports at most {MAX_EXACT_VARIABLES} variables, model has {m}"
            )));
        }
        let mut values = vec![false; m];
        Ok((0..1usize << m)
            .map(|cfg| {
                for (v, slot) in values.iter_mut().enumerate() {
                    *slot = (cfg >> v) & 1 == 1;
                }
                (0..m)
                    .map(|v| {
                        let p = self.p_one(v, &values);
                        if values[v] {
                            p
                        } else {
                            1.0 - p
                        }
                    })
                    .product()
            })
            .collect())
    }

    /// Rows in exact proportion to the joint: each configuration appears
    /// `P(cfg)·scale` times. Fails unless every such count is an integer.
    pub fn exact_dataset(&self, scale: usize) -> Result<BinaryDataset> {
        let joint = self.exact_joint()?;
        let m = self.n_vars();
        let mut cols = vec![Vec::new(); m];
        for (cfg, p) in joint.iter().enumerate() {
            let count = p * scale as f64;
            let rounded = count.round();
            if (count - rounded).abs() > 1e-6 {
                return Err(Error::Argument(format!(
                    "configuration {cfg} has probability {p}, not a multiple of 1/{scale}"
                )));
            }
            for _ in 0..rounded as usize {
                for (v, c) in cols.iter_mut().enumerate() {
                    c.push((cfg >> v) & 1 == 1);
                }
            }
        }
        Ok(self.to_dataset(cols))
    }

    /// Effect on the outcome of setting `xi` to 1 versus 0 with every other
    /// variable set as in `x_prime`. Zero unless `xi` is a parent of the outcome.
    pub fn true_ece(&self, xi: usize, x_prime: &[bool]) -> f64 {
        if !self.outcome_parents().contains(&xi) {
            return 0.0;
        }
        let mut values = x_prime.to_vec();
        values[xi] = true;
        let p1 = self.p_one(self.outcome, &values);
        values[xi] = false;
        let p0 = self.p_one(self.outcome, &values);
        p1 - p0
    }

    /// Average of [`Self::true_ece`] over the other parents' true joint marginal.
    pub fn true_avg_ece(&self, xi: usize) -> Result<f64> {
        if !self.outcome_parents().contains(&xi) {
            return Ok(0.0);
        }
        let others: Vec<usize> = self
            .outcome_parents()
            .iter()
            .copied()
            .filter(|&p| p != xi)
            .collect();
        let joint = self.exact_joint()?;
        let mut marginal: BTreeMap<usize, f64> = BTreeMap::new();
        for (cfg, p) in joint.iter().enumerate() {
            let key = others
                .iter()
                .enumerate()
                .fold(0, |acc, (j, &v)| acc | (((cfg >> v) & 1) << j));
            *marginal.entry(key).or_default() += p;
        }
        let mut values = vec![false; self.n_vars()];
        let mut total = 0.0;
        for (key, weight) in marginal {
            for (j, &v) in others.iter().enumerate() {
                values[v] = (key >> j) & 1 == 1;
            }
            total += weight * self.true_ece(xi, &values);
        }
        Ok(total)
    }
}

/// Naive stratified estimate: for every configuration of `cond_vars` (first
/// variable most significant) scan all rows, skip configurations missing an
/// arm, and renormalize. `None` when nothing contributes.
pub fn brute_force_avg_ece(ds: &BinaryDataset, xi: usize, cond_vars: &[usize]) -> Option<f64> {
    let n = ds.n_rows();
    let k = cond_vars.len();
    let y = ds.outcome();
    let mut num = 0.0;
    let mut den = 0.0;
    for cfg in 0u64..1 << k {
        let (mut total, mut t1, mut t1y, mut t0, mut t0y) = (0u64, 0u64, 0u64, 0u64, 0u64);
        for row in 0..n {
            let matches = cond_vars
                .iter()
                .enumerate()
                .all(|(j, &c)| ds.value(row, c) == ((cfg >> (k - 1 - j)) & 1 == 1));
            if !matches {
                continue;
            }
            total += 1;
            let yv = ds.value(row, y) as u64;
            if ds.value(row, xi) {
                t1 += 1;
                t1y += yv;
            } else {
                t0 += 1;
                t0y += yv;
            }
        }
        if total == 0 || t1 == 0 || t0 == 0 {
            continue;
        }
        let weight = total as f64 / n as f64;
        let diff = t1y as f64 / t1 as f64 - t0y as f64 / t0 as f64;
        num += weight * diff;
        den += weight;
    }
    (den > 0.0).then(|| num / den)
}

/// Ground truth written by the `simulate` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTruth {
    pub parents: Vec<String>,
    pub true_avg_ece: BTreeMap<String, f64>,
}

impl SimulationTruth {
    pub fn of(scm: &SyntheticScm) -> Result<Self> {
        let mut true_avg_ece = BTreeMap::new();
        for &p in scm.outcome_parents() {
            true_avg_ece.insert(scm.names[p].clone(), scm.true_avg_ece(p)?);
        }
        Ok(SimulationTruth {
            parents: scm.outcome_parents().iter().map(|&p| scm.names[p].clone()).collect(),
            true_avg_ece,
        })
    }
}
