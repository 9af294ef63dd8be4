//! Bipartite pairwise Markov random fields.
//!
//! A model splits its `n = n1 + n2` variables into two partitions. Variables
//! `0..n1` form `V1` and `n1..n` form `V2`; pairwise factors may only join the
//! two partitions, which is what makes every variable of one side
//! conditionally independent of its own side given the other.
//!
//! The Gibbs weight of a configuration is `exp(H)` where
//! `H = sum_e f_e(s_u, s_v) + sum_v g_v(s_v)`, or zero when a hard
//! constraint is violated.

mod schema;

pub use schema::{EdgeSpec, ModelSpec};

use std::collections::BTreeSet;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest `|H|` for which `exp(H)` is evaluated.
pub const HAMILTONIAN_LIMIT: f64 = 700.0;

/// A full assignment of values to variables, `V1` first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration(Vec<u8>);

impl Configuration {
    pub fn new(values: Vec<u8>) -> Self {
        Configuration(values)
    }

    pub fn zeros(n: usize) -> Self {
        Configuration(vec![0; n])
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, x: usize) -> u8 {
        self.0[x]
    }

    /// The configuration that agrees with `self` except at `x`, which is `s`.
    pub fn with(&self, x: usize, s: u8) -> Configuration {
        let mut next = self.0.clone();
        next[x] = s;
        Configuration(next)
    }
}

/// A pairwise factor. `table[a * |S| + b]` is `f(σ(u) = a, σ(v) = b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub table: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum HardConstraint {
    /// No listed pair may have both endpoints occupied (nonzero).
    Hardcore { pairs: Vec<(usize, usize)> },
}

impl HardConstraint {
    fn satisfied(&self, config: &Configuration) -> bool {
        match self {
            HardConstraint::Hardcore { pairs } => pairs
                .iter()
                .all(|&(a, b)| config.get(a) == 0 || config.get(b) == 0),
        }
    }

    fn pairs(&self) -> &[(usize, usize)] {
        match self {
            HardConstraint::Hardcore { pairs } => pairs,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteModel {
    n1: usize,
    n2: usize,
    domain_size: usize,
    edges: Vec<Edge>,
    unaries: Vec<Vec<f64>>,
    constraint: Option<HardConstraint>,
    incidence: Vec<Vec<usize>>,
}

impl BipartiteModel {
    /// Checks shapes and finiteness. Bipartiteness is checked separately by
    /// [`BipartiteModel::validate_bipartite`] so malformed models can still be
    /// inspected.
    pub fn new(
        n1: usize,
        n2: usize,
        domain_size: usize,
        edges: Vec<Edge>,
        unaries: Vec<Vec<f64>>,
        constraint: Option<HardConstraint>,
    ) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::InvalidModel(format!(
                "both partitions must be nonempty (n1 = {n1}, n2 = {n2})"
            )));
        }
        if !(2..=255).contains(&domain_size) {
            return Err(Error::InvalidModel(format!(
                "domain size {domain_size} outside 2..=255"
            )));
        }
        let n = n1 + n2;
        if unaries.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} unary tables for {n} variables",
                unaries.len()
            )));
        }
        for (v, g) in unaries.iter().enumerate() {
            if g.len() != domain_size {
                return Err(Error::DimensionMismatch(format!(
                    "unary table of variable {v} has {} entries, expected {domain_size}",
                    g.len()
                )));
            }
            if g.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidModel(format!("non-finite unary factor at {v}")));
            }
        }
        let mut incidence = vec![Vec::new(); n];
        for (k, e) in edges.iter().enumerate() {
            if e.u >= n || e.v >= n || e.u == e.v {
                return Err(Error::InvalidModel(format!("bad edge ({}, {})", e.u, e.v)));
            }
            if e.table.len() != domain_size * domain_size {
                return Err(Error::DimensionMismatch(format!(
                    "edge ({}, {}) table has {} entries, expected {}",
                    e.u,
                    e.v,
                    e.table.len(),
                    domain_size * domain_size
                )));
            }
            if e.table.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidModel(format!(
                    "non-finite factor on edge ({}, {})",
                    e.u, e.v
                )));
            }
            incidence[e.u].push(k);
            incidence[e.v].push(k);
        }
        if let Some(c) = &constraint {
            if c.pairs().iter().any(|&(a, b)| a >= n || b >= n || a == b) {
                return Err(Error::InvalidModel("bad hard-constraint pair".into()));
            }
        }
        Ok(BipartiteModel {
            n1,
            n2,
            domain_size,
            edges,
            unaries,
            constraint,
            incidence,
        })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn num_variables(&self) -> usize {
        self.n1 + self.n2
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn unaries(&self) -> &[Vec<f64>] {
        &self.unaries
    }

    pub fn constraint(&self) -> Option<&HardConstraint> {
        self.constraint.as_ref()
    }

    /// Edge indices touching variable `x`.
    pub fn incident_edges(&self, x: usize) -> &[usize] {
        &self.incidence[x]
    }

    /// Partition of variable `x`: 0 for `V1`, 1 for `V2`.
    pub fn partition_of(&self, x: usize) -> usize {
        usize::from(x >= self.n1)
    }

    /// Variables of `V1` followed by those of `V2`, each ascending.
    pub fn scan_order(&self) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        (0..self.n1, self.n1..self.n1 + self.n2)
    }

    pub fn is_valid_configuration(&self, config: &Configuration) -> bool {
        config.len() == self.num_variables()
            && config
                .as_slice()
                .iter()
                .all(|&s| (s as usize) < self.domain_size)
    }

    pub fn satisfies_constraints(&self, config: &Configuration) -> bool {
        self.constraint.as_ref().is_none_or(|c| c.satisfied(config))
    }

    fn factor(&self, e: &Edge, a: u8, b: u8) -> f64 {
        e.table[a as usize * self.domain_size + b as usize]
    }

    /// Soft part of the log-weight; hard constraints are not included.
    pub fn hamiltonian(&self, config: &Configuration) -> f64 {
        debug_assert!(self.is_valid_configuration(config));
        let pair: f64 = self
            .edges
            .iter()
            .map(|e| self.factor(e, config.get(e.u), config.get(e.v)))
            .sum();
        let unary: f64 = self
            .unaries
            .iter()
            .enumerate()
            .map(|(v, g)| g[config.get(v) as usize])
            .sum();
        pair + unary
    }

    pub fn unnormalized_weight(&self, config: &Configuration) -> Result<f64> {
        if !self.satisfies_constraints(config) {
            return Ok(0.0);
        }
        let h = self.hamiltonian(config);
        if h.abs() > HAMILTONIAN_LIMIT {
            return Err(Error::HamiltonianOutOfRange(h.abs()));
        }
        Ok(h.exp())
    }

    /// Terms of `H` that depend on the value `s` at `x`, for each `s`.
    pub fn local_energies(&self, config: &Configuration, x: usize) -> Vec<f64> {
        (0..self.domain_size as u8)
            .map(|s| {
                let mut h = self.unaries[x][s as usize];
                for &k in &self.incidence[x] {
                    let e = &self.edges[k];
                    h += if e.u == x {
                        self.factor(e, s, config.get(e.v))
                    } else {
                        self.factor(e, config.get(e.u), s)
                    };
                }
                h
            })
            .collect()
    }

    /// Conditional law of variable `x` given every other variable.
    ///
    /// Entry `s` is `w(σ^{x,s}) / Σ_t w(σ^{x,t})`, evaluated from the local
    /// energies with the maximum subtracted.
    pub fn conditional_distribution(&self, config: &Configuration, x: usize) -> Result<Vec<f64>> {
        if x >= self.num_variables() {
            return Err(Error::InvalidArgument(format!("variable {x} out of range")));
        }
        let energies = self.local_energies(config, x);
        let allowed: Vec<bool> = (0..self.domain_size as u8)
            .map(|s| self.satisfies_constraints(&config.with(x, s)))
            .collect();
        let top = energies
            .iter()
            .zip(&allowed)
            .filter(|(_, &ok)| ok)
            .map(|(&h, _)| h)
            .fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return Err(Error::AllConditionalWeightsZero(x));
        }
        let mut probs: Vec<f64> = energies
            .iter()
            .zip(&allowed)
            .map(|(&h, &ok)| if ok { (h - top).exp() } else { 0.0 })
            .collect();
        let total: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total;
        }
        Ok(probs)
    }

    /// Ok iff no factor or hard constraint joins two variables of the same
    /// partition; otherwise lists the offending pairs.
    pub fn validate_bipartite(&self) -> Result<()> {
        let same_side = |a: usize, b: usize| self.partition_of(a) == self.partition_of(b);
        let mut bad: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter(|e| same_side(e.u, e.v))
            .map(|e| (e.u, e.v))
            .collect();
        if let Some(c) = &self.constraint {
            bad.extend(c.pairs().iter().copied().filter(|&(a, b)| same_side(a, b)));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::NotBipartite(bad))
        }
    }
}

fn rbm_table(w: f64) -> Vec<f64> {
    vec![0.0, 0.0, 0.0, w]
}

/// Boolean RBM: factor `[0,0,0,W_uv]` on every `V1 x V2` pair and unary
/// `[0, W_v]` on every variable.
pub fn build_rbm(weights: &[Vec<f64>], bias1: &[f64], bias2: &[f64]) -> Result<BipartiteModel> {
    let n1 = weights.len();
    let n2 = weights.first().map_or(0, Vec::len);
    if weights.iter().any(|row| row.len() != n2) {
        return Err(Error::DimensionMismatch("ragged weight matrix".into()));
    }
    if bias1.len() != n1 || bias2.len() != n2 {
        return Err(Error::DimensionMismatch(format!(
            "weights are {n1}x{n2} but biases have lengths {} and {}",
            bias1.len(),
            bias2.len()
        )));
    }
    let mut edges = Vec::with_capacity(n1 * n2);
    for (i, row) in weights.iter().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            edges.push(Edge {
                u: i,
                v: n1 + j,
                table: rbm_table(w),
            });
        }
    }
    let unaries = bias1.iter().chain(bias2).map(|&b| vec![0.0, b]).collect();
    BipartiteModel::new(n1, n2, 2, edges, unaries, None)
}

/// Deep Boltzmann machine. `weights[k]` is the `layer_sizes[k] x
/// layer_sizes[k+1]` matrix between consecutive layers and `biases[k]` the
/// bias vector of layer `k`. Layers `0, 2, 4, …` form `V1` (scanned first),
/// layers `1, 3, …` form `V2`.
pub fn build_dbm(
    layer_sizes: &[usize],
    weights: &[Vec<Vec<f64>>],
    biases: &[Vec<f64>],
) -> Result<BipartiteModel> {
    let depth = layer_sizes.len();
    if depth < 2 {
        return Err(Error::DimensionMismatch(format!("{depth} layers, need at least 2")));
    }
    if weights.len() != depth - 1 || biases.len() != depth {
        return Err(Error::DimensionMismatch(format!(
            "{depth} layers need {} weight matrices and {depth} bias vectors, got {} and {}",
            depth - 1,
            weights.len(),
            biases.len()
        )));
    }
    // Internal index of every (layer, unit).
    let mut offset = vec![0usize; depth];
    let mut next = 0;
    for side in 0..2 {
        for k in (side..depth).step_by(2) {
            offset[k] = next;
            next += layer_sizes[k];
        }
    }
    let n1: usize = layer_sizes.iter().step_by(2).sum();
    let n2: usize = layer_sizes.iter().skip(1).step_by(2).sum();

    let mut unaries = vec![Vec::new(); n1 + n2];
    for (k, b) in biases.iter().enumerate() {
        if b.len() != layer_sizes[k] {
            return Err(Error::DimensionMismatch(format!(
                "bias of layer {k} has length {}, expected {}",
                b.len(),
                layer_sizes[k]
            )));
        }
        for (i, &bias) in b.iter().enumerate() {
            unaries[offset[k] + i] = vec![0.0, bias];
        }
    }
    let mut edges = Vec::new();
    for (k, w) in weights.iter().enumerate() {
        if w.len() != layer_sizes[k] || w.iter().any(|r| r.len() != layer_sizes[k + 1]) {
            return Err(Error::DimensionMismatch(format!(
                "weights between layers {k} and {} must be {}x{}",
                k + 1,
                layer_sizes[k],
                layer_sizes[k + 1]
            )));
        }
        for (i, row) in w.iter().enumerate() {
            for (j, &wij) in row.iter().enumerate() {
                let (a, b) = (offset[k] + i, offset[k + 1] + j);
                let (u, v) = if k % 2 == 0 { (a, b) } else { (b, a) };
                edges.push(Edge {
                    u,
                    v,
                    table: rbm_table(wij),
                });
            }
        }
    }
    BipartiteModel::new(n1, n2, 2, edges, unaries, None)
}

/// Uniform distribution over independent sets of the complete bipartite
/// graph `K_{n,n}`.
pub fn build_hardcore_complete_bipartite(n: usize) -> Result<BipartiteModel> {
    if n == 0 {
        return Err(Error::InvalidArgument("hardcore K_{n,n} needs n >= 1".into()));
    }
    let pairs = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, n + j)))
        .collect();
    BipartiteModel::new(
        n,
        n,
        2,
        Vec::new(),
        vec![vec![0.0, 0.0]; 2 * n],
        Some(HardConstraint::Hardcore { pairs }),
    )
}

/// `m` distinct `V1 x V2` pairs drawn without replacement, each carrying an
/// RBM factor with weight uniform in `[weight_low, weight_high]`. Biases are
/// zero. Deterministic in `seed`.
pub fn random_bipartite_model(
    n1: usize,
    n2: usize,
    m: usize,
    weight_low: f64,
    weight_high: f64,
    seed: u64,
) -> Result<BipartiteModel> {
    let available = n1 * n2;
    if m > available {
        return Err(Error::TooManyEdges {
            requested: m,
            available,
        });
    }
    if !(weight_low.is_finite() && weight_high.is_finite()) || weight_low > weight_high {
        return Err(Error::InvalidArgument(format!(
            "weight range [{weight_low}, {weight_high}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = index::sample(&mut rng, available, m).into_vec();
    picked.sort_unstable();
    let edges = picked
        .into_iter()
        .map(|p| Edge {
            u: p / n2,
            v: n1 + p % n2,
            table: rbm_table(rng.random_range(weight_low..=weight_high)),
        })
        .collect();
    BipartiteModel::new(n1, n2, 2, edges, vec![vec![0.0, 0.0]; n1 + n2], None)
}

/// Distinct `(u, v)` pairs carried by factors, for diagnostics.
pub fn edge_pairs(model: &BipartiteModel) -> BTreeSet<(usize, usize)> {
    model.edges().iter().map(|e| (e.u, e.v)).collect()
}
