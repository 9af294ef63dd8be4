//! Exact transition kernels of the Gibbs samplers.
//!
//! Everything here is dense over an enumerated state space `Ω` (the
//! configurations of positive weight). The single-site kernels `T_x` are
//! the building blocks:
//!
//! * random update: `P_RU = I/2 + (1/2n) Σ_x T_x`, or `(1/n) Σ_x T_x` non-lazy
//! * alternating scan: `P_AS = P_AS1 · P_AS2` with `P_AS1 = Π_{x∈V1} T_x`
//!   and `P_AS2 = Π_{y∈V2} T_y`, each product taken in ascending index order
//! * half-scan random updates `P_GS1`, `P_GS2`
//!
//! Kernel rows are renormalized after every product when the drift is at
//! most [`ROW_SUM_TOLERANCE`]; larger drift is reported as an error.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{BipartiteModel, Configuration, HAMILTONIAN_LIMIT};

pub const DEFAULT_STATE_CAP: usize = 4096;
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;
pub const NEGATIVE_CLAMP: f64 = 1e-15;
pub const STATIONARITY_TOLERANCE: f64 = 1e-10;

/// Enumerated support of a model together with its normalized Gibbs law.
#[derive(Clone, Debug)]
pub struct StateSpace {
    configs: Vec<Configuration>,
    index: HashMap<Configuration, usize>,
    pi: Vec<f64>,
}

impl StateSpace {
    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn configs(&self) -> &[Configuration] {
        &self.configs
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn pi_min(&self) -> f64 {
        self.pi.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn index_of(&self, config: &Configuration) -> Option<usize> {
        self.index.get(config).copied()
    }

    /// `S_π`, the kernel whose every row is `π`.
    pub fn stationary_projector(&self) -> Matrix {
        Matrix::repeated_row(&self.pi, self.len())
    }
}

/// All configurations of positive weight, in lexicographic order.
pub fn enumerate_state_space(model: &BipartiteModel, cap: usize) -> Result<StateSpace> {
    let n = model.num_variables();
    let q = model.domain_size() as u8;
    let mut current = vec![0u8; n];
    let mut configs = Vec::new();
    let mut energies = Vec::new();
    loop {
        let config = Configuration::new(current.clone());
        if model.satisfies_constraints(&config) {
            let h = model.hamiltonian(&config);
            if h.abs() > HAMILTONIAN_LIMIT {
                return Err(Error::HamiltonianOutOfRange(h.abs()));
            }
            if configs.len() == cap {
                return Err(Error::StateSpaceExceedsCap {
                    cap,
                    reached: cap + 1,
                });
            }
            configs.push(config);
            energies.push(h);
        }
        // Odometer with the last variable fastest gives lexicographic order.
        let mut pos = n;
        loop {
            if pos == 0 {
                return finish_space(configs, &energies);
            }
            pos -= 1;
            current[pos] += 1;
            if current[pos] < q {
                break;
            }
            current[pos] = 0;
        }
    }
}

fn finish_space(configs: Vec<Configuration>, energies: &[f64]) -> Result<StateSpace> {
    if configs.is_empty() {
        return Err(Error::InvalidModel("no configuration has positive weight".into()));
    }
    let top = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = energies.iter().map(|h| (h - top).exp()).collect();
    let z: f64 = weights.iter().sum();
    let pi = weights.iter().map(|w| w / z).collect();
    let index = configs
        .iter()
        .enumerate()
        .map(|(i, c)| (c.clone(), i))
        .collect();
    Ok(StateSpace { configs, index, pi })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepUnit {
    VariableUpdate,
    Epoch,
    HalfEpoch,
    Composite,
}

impl fmt::Display for StepUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepUnit::VariableUpdate => "variable_update",
            StepUnit::Epoch => "epoch",
            StepUnit::HalfEpoch => "half_epoch",
            StepUnit::Composite => "composite",
        })
    }
}

/// Row-stochastic matrix tagged with the unit of one step.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    matrix: Matrix,
    unit: StepUnit,
    label: String,
}

impl Kernel {
    /// Clamps tiny negatives and renormalizes rows; fails if a row is
    /// further than [`ROW_SUM_TOLERANCE`] from stochastic.
    pub fn new(mut matrix: Matrix, unit: StepUnit, label: impl Into<String>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "kernel must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        renormalize_rows(&mut matrix)?;
        Ok(Kernel {
            matrix,
            unit,
            label: label.into(),
        })
    }

    pub fn identity(n: usize) -> Self {
        Kernel {
            matrix: Matrix::identity(n),
            unit: StepUnit::Composite,
            label: "I".into(),
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn unit(&self) -> StepUnit {
        self.unit
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    /// `self · other`, run first `self` then `other`.
    pub fn then(&self, other: &Kernel, unit: StepUnit, label: impl Into<String>) -> Result<Kernel> {
        Kernel::new(self.matrix.matmul(&other.matrix), unit, label)
    }

    pub fn relabel(mut self, unit: StepUnit, label: impl Into<String>) -> Kernel {
        self.unit = unit;
        self.label = label.into();
        self
    }
}

/// Clamps entries in `[-NEGATIVE_CLAMP, 0)` to zero and rescales each row to
/// sum to one.
pub fn renormalize_rows(matrix: &mut Matrix) -> Result<()> {
    for i in 0..matrix.rows() {
        let row = matrix.row_mut(i);
        for (j, x) in row.iter_mut().enumerate() {
            if *x < 0.0 {
                if *x < -NEGATIVE_CLAMP {
                    return Err(Error::NegativeEntry {
                        row: i,
                        col: j,
                        value: *x,
                    });
                }
                *x = 0.0;
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::RowSum { row: i, sum });
        }
        if sum != 1.0 {
            for x in row.iter_mut() {
                *x /= sum;
            }
        }
    }
    Ok(())
}

/// Transition matrix of resampling variable `x` from its conditional law.
pub fn single_site_kernel(model: &BipartiteModel, space: &StateSpace, x: usize) -> Result<Kernel> {
    if x >= model.num_variables() {
        return Err(Error::InvalidArgument(format!("variable {x} out of range")));
    }
    let mut m = Matrix::zeros(space.len(), space.len());
    for (i, sigma) in space.configs().iter().enumerate() {
        let cond = model.conditional_distribution(sigma, x)?;
        for (s, &p) in cond.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let j = space.index_of(&sigma.with(x, s as u8)).ok_or_else(|| {
                Error::InvalidModel("conditional moves outside the state space".into())
            })?;
            m[(i, j)] += p;
        }
    }
    Kernel::new(m, StepUnit::VariableUpdate, format!("T_{x}"))
}

/// Single-site kernels `T_x` for every variable, built once and reused.
#[derive(Clone, Debug)]
pub struct SiteKernels {
    n1: usize,
    sites: Vec<Kernel>,
}

/// The alternating-scan kernel together with its factors.
#[derive(Clone, Debug)]
pub struct ScanKernels {
    pub full: Kernel,
    pub first: Kernel,
    pub second: Kernel,
    pub gs1: Kernel,
    pub gs2: Kernel,
}

impl SiteKernels {
    pub fn build(model: &BipartiteModel, space: &StateSpace) -> Result<Self> {
        let sites = (0..model.num_variables())
            .map(|x| single_site_kernel(model, space, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(SiteKernels {
            n1: model.n1(),
            sites,
        })
    }

    pub fn get(&self, x: usize) -> &Kernel {
        &self.sites[x]
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    fn dim(&self) -> usize {
        self.sites[0].size()
    }

    /// `lazy_weight · I + (1 - lazy_weight)/|xs| Σ_{x∈xs} T_x`
    fn average(&self, xs: std::ops::Range<usize>, lazy_weight: f64) -> Matrix {
        let count = xs.len() as f64;
        let mut m = Matrix::identity(self.dim()).scale(lazy_weight);
        for x in xs {
            m.axpy((1.0 - lazy_weight) / count, self.sites[x].matrix());
        }
        m
    }

    pub fn random_update(&self, lazy: bool) -> Result<Kernel> {
        let lazy_weight = if lazy { 0.5 } else { 0.0 };
        let label = if lazy { "P_RU" } else { "P_RU_nonlazy" };
        Kernel::new(
            self.average(0..self.sites.len(), lazy_weight),
            StepUnit::VariableUpdate,
            label,
        )
    }

    fn product(&self, xs: std::ops::Range<usize>, label: &str) -> Result<Kernel> {
        let mut xs = xs;
        let first = xs.next().expect("partition is nonempty");
        let mut acc = self.sites[first].clone();
        for x in xs {
            acc = acc.then(&self.sites[x], StepUnit::HalfEpoch, label)?;
        }
        Ok(acc.relabel(StepUnit::HalfEpoch, label))
    }

    pub fn scan(&self) -> Result<ScanKernels> {
        let n = self.sites.len();
        let first = self.product(0..self.n1, "P_AS1")?;
        let second = self.product(self.n1..n, "P_AS2")?;
        let full = first.then(&second, StepUnit::Epoch, "P_AS")?;
        let gs1 = Kernel::new(self.average(0..self.n1, 0.5), StepUnit::HalfEpoch, "P_GS1")?;
        let gs2 = Kernel::new(self.average(self.n1..n, 0.5), StepUnit::HalfEpoch, "P_GS2")?;
        Ok(ScanKernels {
            full,
            first,
            second,
            gs1,
            gs2,
        })
    }
}

pub fn random_update_kernel(model: &BipartiteModel, space: &StateSpace, lazy: bool) -> Result<Kernel> {
    SiteKernels::build(model, space)?.random_update(lazy)
}

pub fn scan_kernels(model: &BipartiteModel, space: &StateSpace) -> Result<ScanKernels> {
    model.validate_bipartite()?;
    SiteKernels::build(model, space)?.scan()
}

/// `‖π P − π‖_∞`
pub fn stationarity_residual(kernel: &Kernel, pi: &[f64]) -> f64 {
    kernel
        .matrix()
        .left_mul_vec(pi)
        .iter()
        .zip(pi)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// `max_{σ,τ} |π(σ)P(σ,τ) − π(τ)P(τ,σ)|`
pub fn detailed_balance_residual(kernel: &Kernel, pi: &[f64]) -> f64 {
    let m = kernel.matrix();
    let mut worst: f64 = 0.0;
    for i in 0..m.rows() {
        for j in (i + 1)..m.cols() {
            worst = worst.max((pi[i] * m[(i, j)] - pi[j] * m[(j, i)]).abs());
        }
    }
    worst
}

pub fn is_reversible(kernel: &Kernel, pi: &[f64], tolerance: f64) -> bool {
    detailed_balance_residual(kernel, pi) <= tolerance
}

fn check_stationary(kernel: &Kernel, pi: &[f64]) -> Result<()> {
    if pi.len() != kernel.size() {
        return Err(Error::DimensionMismatch(format!(
            "distribution of length {} for a {}-state kernel",
            pi.len(),
            kernel.size()
        )));
    }
    let r = stationarity_residual(kernel, pi);
    if r > STATIONARITY_TOLERANCE {
        return Err(Error::NotStationary(r));
    }
    Ok(())
}

/// Time reversal `P*(σ,τ) = π(τ) P(τ,σ) / π(σ)`.
pub fn adjoint(kernel: &Kernel, pi: &[f64]) -> Result<Kernel> {
    check_stationary(kernel, pi)?;
    let m = kernel.matrix();
    let adj = Matrix::from_fn(m.rows(), m.cols(), |s, t| pi[t] * m[(t, s)] / pi[s]);
    Kernel::new(adj, kernel.unit(), format!("{}*", kernel.label()))
}

/// Multiplicative reversibilization `R(P) = P P*`.
pub fn reversibilization(kernel: &Kernel, pi: &[f64]) -> Result<Kernel> {
    let adj = adjoint(kernel, pi)?;
    kernel.then(&adj, StepUnit::Composite, format!("R({})", kernel.label()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Ergodicity {
    pub irreducible: bool,
    pub aperiodic: bool,
}

impl Ergodicity {
    pub fn is_ergodic(&self) -> bool {
        self.irreducible && self.aperiodic
    }
}

/// Irreducibility from strong connectivity of the support digraph.
/// Aperiodicity is declared from a positive diagonal entry or, for
/// irreducible kernels, from a period of one computed by BFS levels.
pub fn ergodicity_check(kernel: &Kernel) -> Ergodicity {
    let m = kernel.matrix();
    let n = m.rows();
    let mut out = vec![Vec::new(); n];
    let mut inc = vec![Vec::new(); n];
    for i in 0..n {
        for (j, &p) in m.row(i).iter().enumerate() {
            if p > 0.0 {
                out[i].push(j);
                inc[j].push(i);
            }
        }
    }
    let forward = bfs_levels(&out);
    let backward = bfs_levels(&inc);
    let irreducible = forward.iter().all(Option::is_some) && backward.iter().all(Option::is_some);
    let self_loop = (0..n).any(|i| m[(i, i)] > 0.0);
    let aperiodic = self_loop || (irreducible && period(&out, &forward) == 1);
    Ergodicity {
        irreducible,
        aperiodic,
    }
}

fn bfs_levels(adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    if adj.is_empty() {
        return level;
    }
    level[0] = Some(0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        let next = level[u].map(|l| l + 1);
        for &v in &adj[u] {
            if level[v].is_none() {
                level[v] = next;
                queue.push_back(v);
            }
        }
    }
    level
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn period(adj: &[Vec<usize>], level: &[Option<usize>]) -> usize {
    let mut g = 0;
    for (u, targets) in adj.iter().enumerate() {
        let lu = level[u].expect("irreducible");
        for &v in targets {
            let lv = level[v].expect("irreducible");
            g = gcd(g, (lu + 1).abs_diff(lv));
        }
    }
    g
}

/// Writes `row,col,value` for every entry above `1e-15`.
pub fn write_kernel_csv<W: Write>(kernel: &Kernel, mut out: W) -> io::Result<()> {
    writeln!(out, "row,col,value")?;
    let m = kernel.matrix();
    for i in 0..m.rows() {
        for (j, &p) in m.row(i).iter().enumerate() {
            if p > NEGATIVE_CLAMP {
                writeln!(out, "{i},{j},{p}")?;
            }
        }
    }
    Ok(())
}
