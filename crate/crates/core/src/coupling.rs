//! Grand coupling of the top and bottom chains for monotone Boolean models.
//!
//! Both chains update the same site with the same uniform `u` and set it
//! to 1 iff `u` is below their own conditional probability of 1. When every
//! factor is attractive that probability is monotone in the configuration,
//! so the top chain stays above the bottom one and every other start is
//! sandwiched between them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::BipartiteModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    RandomUpdate,
    AlternatingScan,
}

impl Sampler {
    pub const ALL: [Sampler; 2] = [Sampler::RandomUpdate, Sampler::AlternatingScan];

    pub fn as_str(self) -> &'static str {
        match self {
            Sampler::RandomUpdate => "random_update",
            Sampler::AlternatingScan => "alternating_scan",
        }
    }
}

impl std::fmt::Display for Sampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random_update" | "ru" => Ok(Sampler::RandomUpdate),
            "alternating_scan" | "as" => Ok(Sampler::AlternatingScan),
            other => Err(Error::InvalidArgument(format!("unknown sampler {other:?}"))),
        }
    }
}

/// Ok iff the model is Boolean, unconstrained and every factor satisfies
/// `f(0,0) + f(1,1) ≥ f(0,1) + f(1,0)`. For RBM factors this is a
/// nonnegative weight.
pub fn monotonicity_precondition(model: &BipartiteModel) -> Result<()> {
    if model.domain_size() != 2 {
        return Err(Error::NotMonotone(format!(
            "domain of size {} is not Boolean",
            model.domain_size()
        )));
    }
    if model.constraint().is_some() {
        return Err(Error::NotMonotone("hard constraints are not attractive".into()));
    }
    let bad: Vec<String> = model
        .edges()
        .iter()
        .filter(|e| interaction(&e.table) < 0.0)
        .map(|e| format!("({}, {}) with interaction {}", e.u, e.v, interaction(&e.table)))
        .collect();
    if !bad.is_empty() {
        return Err(Error::NotMonotone(format!("repulsive factors: {}", bad.join(", "))));
    }
    Ok(())
}

fn interaction(t: &[f64]) -> f64 {
    t[0] + t[3] - t[1] - t[2]
}

/// Per site: unary log-odds and `(neighbour, log-odds shift when the
/// neighbour is 0, when it is 1)` for each incident factor.
struct LocalField {
    bias: Vec<f64>,
    terms: Vec<Vec<(usize, [f64; 2])>>,
}

impl LocalField {
    fn new(model: &BipartiteModel) -> Self {
        let n = model.num_variables();
        let bias = model.unaries().iter().map(|g| g[1] - g[0]).collect();
        let mut terms = vec![Vec::new(); n];
        for e in model.edges() {
            let t = &e.table;
            terms[e.u].push((e.v, [t[2] - t[0], t[3] - t[1]]));
            terms[e.v].push((e.u, [t[1] - t[0], t[3] - t[2]]));
        }
        LocalField { bias, terms }
    }

    fn prob_one(&self, state: &[u8], x: usize) -> f64 {
        let h = self.terms[x]
            .iter()
            .fold(self.bias[x], |acc, &(y, d)| acc + d[state[y] as usize]);
        1.0 / (1.0 + (-h).exp())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ReplicateOutcome {
    pub replicate: u64,
    /// Variable updates until the chains agreed, or the update budget when
    /// truncated.
    pub updates: u64,
    pub truncated: bool,
    pub sandwich_violations: u64,
}

struct Pair<'a> {
    field: &'a LocalField,
    top: Vec<u8>,
    bottom: Vec<u8>,
    differing: usize,
    violations: u64,
}

impl<'a> Pair<'a> {
    fn new(field: &'a LocalField, top: Vec<u8>, bottom: Vec<u8>) -> Self {
        let differing = top.iter().zip(&bottom).filter(|(a, b)| a != b).count();
        Pair {
            field,
            top,
            bottom,
            differing,
            violations: 0,
        }
    }

    fn update(&mut self, x: usize, u: f64) {
        let before = self.top[x] != self.bottom[x];
        let t = u8::from(u < self.field.prob_one(&self.top, x));
        let b = u8::from(u < self.field.prob_one(&self.bottom, x));
        self.top[x] = t;
        self.bottom[x] = b;
        if t < b {
            self.violations += 1;
        }
        let after = t != b;
        match (before, after) {
            (true, false) => self.differing -= 1,
            (false, true) => self.differing += 1,
            _ => {}
        }
    }
}

/// Runs one coupled pair from the given starts. RNG draws: random update
/// takes a site index, then (if lazy) a hold coin, then the update uniform;
/// alternating scan takes one uniform per site in scan order.
pub fn coalescence_time(
    model: &BipartiteModel,
    sampler: Sampler,
    top: Vec<u8>,
    bottom: Vec<u8>,
    rng: &mut ChaCha8Rng,
    max_updates: u64,
    lazy: bool,
) -> Result<ReplicateOutcome> {
    monotonicity_precondition(model)?;
    let n = model.num_variables();
    if top.len() != n || bottom.len() != n {
        return Err(Error::DimensionMismatch(format!("starts must have {n} entries")));
    }
    let field = LocalField::new(model);
    Ok(run_pair(&field, sampler, top, bottom, rng, max_updates, lazy))
}

fn run_pair(
    field: &LocalField,
    sampler: Sampler,
    top: Vec<u8>,
    bottom: Vec<u8>,
    rng: &mut ChaCha8Rng,
    max_updates: u64,
    lazy: bool,
) -> ReplicateOutcome {
    let n = top.len();
    let mut pair = Pair::new(field, top, bottom);
    let mut updates = 0u64;
    let mut coalesced = pair.differing == 0;
    while !coalesced && updates < max_updates {
        match sampler {
            Sampler::RandomUpdate => {
                let x = rng.random_range(0..n);
                let hold = lazy && rng.random::<f64>() < 0.5;
                if !hold {
                    pair.update(x, rng.random::<f64>());
                }
                updates += 1;
            }
            Sampler::AlternatingScan => {
                if updates + n as u64 > max_updates {
                    break;
                }
                for x in 0..n {
                    pair.update(x, rng.random::<f64>());
                }
                updates += n as u64;
            }
        }
        coalesced = pair.differing == 0;
    }
    if coalesced {
        // Coalesced chains receive identical updates; spot-check one epoch.
        for x in 0..n {
            pair.update(x, rng.random::<f64>());
        }
        if pair.differing != 0 {
            pair.violations += 1;
        }
    }
    ReplicateOutcome {
        replicate: 0,
        updates: if coalesced { updates } else { max_updates },
        truncated: !coalesced,
        sandwich_violations: pair.violations,
    }
}

/// Independent stream for each replicate of a seeded experiment.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingReport {
    pub sampler: Sampler,
    /// Coalescence times of the replicates that finished, in replicate order.
    pub samples: Vec<u64>,
    pub replicates: u64,
    /// Summary statistics over `samples`; NaN when every replicate was
    /// truncated.
    pub mean: f64,
    pub median: f64,
    pub q90: f64,
    pub truncated_count: u64,
    pub sandwich_violations: u64,
    pub outcomes: Vec<ReplicateOutcome>,
}

/// Linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        len => {
            let pos = q.clamp(0.0, 1.0) * (len - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(len - 1);
            sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

/// Coalescence of the all-ones and all-zeros chains, `replicates` times.
/// Replicates run in parallel on independent streams and are reported in
/// order, so the result depends only on the arguments.
pub fn grand_coupling_time(
    model: &BipartiteModel,
    sampler: Sampler,
    seed: u64,
    replicates: u64,
    max_updates: u64,
    lazy: bool,
) -> Result<CouplingReport> {
    monotonicity_precondition(model)?;
    if replicates == 0 {
        return Err(Error::InvalidArgument("replicates must be positive".into()));
    }
    let n = model.num_variables();
    let field = LocalField::new(model);
    let outcomes: Vec<ReplicateOutcome> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r);
            let mut o = run_pair(&field, sampler, vec![1; n], vec![0; n], &mut rng, max_updates, lazy);
            o.replicate = r;
            o
        })
        .collect();
    Ok(summarize(sampler, outcomes))
}

fn summarize(sampler: Sampler, outcomes: Vec<ReplicateOutcome>) -> CouplingReport {
    let samples: Vec<u64> = outcomes.iter().filter(|o| !o.truncated).map(|o| o.updates).collect();
    let mut sorted: Vec<f64> = samples.iter().map(|&s| s as f64).collect();
    sorted.sort_by(f64::total_cmp);
    let mean = if sorted.is_empty() {
        f64::NAN
    } else {
        sorted.iter().sum::<f64>() / sorted.len() as f64
    };
    CouplingReport {
        sampler,
        replicates: outcomes.len() as u64,
        mean,
        median: quantile(&sorted, 0.5),
        q90: quantile(&sorted, 0.9),
        truncated_count: outcomes.iter().filter(|o| o.truncated).count() as u64,
        sandwich_violations: outcomes.iter().map(|o| o.sandwich_violations).sum(),
        samples,
        outcomes,
    }
}
