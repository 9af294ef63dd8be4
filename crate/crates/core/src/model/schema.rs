//! JSON model files.
//!
//! ```json
//! {"kind": "hardcore_knn", "n": 3}
//! {"kind": "rbm", "weights": [[0.5, -1.0]], "bias1": [0.0], "bias2": [0.1, 0.2]}
//! {"kind": "mrf", "partition": [0, 1], "edges": [{"u": 0, "v": 1, "table": [1, 0, 0, 1]}],
//!  "unary": [[0, 0], [0, 0.5]]}
//! ```

use serde::{Deserialize, Serialize};

use super::{
    build_dbm, build_hardcore_complete_bipartite, build_rbm, random_bipartite_model,
    BipartiteModel, Edge,
};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub u: usize,
    pub v: usize,
    pub table: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Rbm {
        weights: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bias1: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bias2: Option<Vec<f64>>,
    },
    Dbm {
        layer_sizes: Vec<usize>,
        weights: Vec<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        biases: Option<Vec<Vec<f64>>>,
    },
    Mrf {
        partition: Vec<u8>,
        edges: Vec<EdgeSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        unary: Option<Vec<Vec<f64>>>,
        #[serde(default = "boolean_domain")]
        domain_size: usize,
    },
    HardcoreKnn {
        n: usize,
    },
    RandomRbm {
        n1: usize,
        n2: usize,
        m: usize,
        weight_low: f64,
        weight_high: f64,
        seed: u64,
    },
}

fn boolean_domain() -> usize {
    2
}

impl ModelSpec {
    pub fn build(&self) -> Result<BipartiteModel> {
        match self {
            ModelSpec::Rbm { weights, bias1, bias2 } => {
                let n1 = weights.len();
                let n2 = weights.first().map_or(0, Vec::len);
                build_rbm(
                    weights,
                    bias1.as_deref().unwrap_or(&vec![0.0; n1]),
                    bias2.as_deref().unwrap_or(&vec![0.0; n2]),
                )
            }
            ModelSpec::Dbm { layer_sizes, weights, biases } => {
                let zeros: Vec<Vec<f64>> = layer_sizes.iter().map(|&l| vec![0.0; l]).collect();
                build_dbm(layer_sizes, weights, biases.as_deref().unwrap_or(&zeros))
            }
            ModelSpec::Mrf { partition, edges, unary, domain_size } => {
                build_mrf(partition, edges, unary.as_deref(), *domain_size)
            }
            ModelSpec::HardcoreKnn { n } => build_hardcore_complete_bipartite(*n),
            ModelSpec::RandomRbm { n1, n2, m, weight_low, weight_high, seed } => {
                random_bipartite_model(*n1, *n2, *m, *weight_low, *weight_high, *seed)
            }
        }
    }

    /// Short identifier used in CSV output.
    pub fn model_id(&self) -> String {
        match self {
            ModelSpec::Rbm { weights, .. } => {
                format!("rbm:{}x{}", weights.len(), weights.first().map_or(0, Vec::len))
            }
            ModelSpec::Dbm { layer_sizes, .. } => {
                let sizes: Vec<String> = layer_sizes.iter().map(usize::to_string).collect();
                format!("dbm:{}", sizes.join("-"))
            }
            ModelSpec::Mrf { partition, edges, .. } => {
                format!("mrf:{}v{}e", partition.len(), edges.len())
            }
            ModelSpec::HardcoreKnn { n } => format!("hardcore_knn:{n}"),
            ModelSpec::RandomRbm { n1, n2, m, seed, .. } => {
                format!("random_rbm:{n1}x{n2}m{m}s{seed}")
            }
        }
    }
}

/// Variables keep their relative order within each side; `V1` (label 0)
/// precedes `V2` (label 1) internally.
fn build_mrf(
    partition: &[u8],
    edges: &[EdgeSpec],
    unary: Option<&[Vec<f64>]>,
    domain_size: usize,
) -> Result<BipartiteModel> {
    if let Some(bad) = partition.iter().find(|&&p| p > 1) {
        return Err(Error::InvalidModel(format!("partition label {bad} is not 0 or 1")));
    }
    let n = partition.len();
    let n1 = partition.iter().filter(|&&p| p == 0).count();
    let mut internal = vec![0usize; n];
    let (mut next1, mut next2) = (0, n1);
    for (v, &p) in partition.iter().enumerate() {
        if p == 0 {
            internal[v] = next1;
            next1 += 1;
        } else {
            internal[v] = next2;
            next2 += 1;
        }
    }
    let mut unaries = vec![vec![0.0; domain_size]; n];
    if let Some(tables) = unary {
        if tables.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} unary tables for {n} variables",
                tables.len()
            )));
        }
        for (v, g) in tables.iter().enumerate() {
            unaries[internal[v]] = g.clone();
        }
    }
    let mut mapped = Vec::with_capacity(edges.len());
    for e in edges {
        if e.u >= n || e.v >= n {
            return Err(Error::InvalidModel(format!("edge ({}, {}) out of range", e.u, e.v)));
        }
        mapped.push(Edge {
            u: internal[e.u],
            v: internal[e.v],
            table: e.table.clone(),
        });
    }
    BipartiteModel::new(n1, n - n1, domain_size, mapped, unaries, None)
}
