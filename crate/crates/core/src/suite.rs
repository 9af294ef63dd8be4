//! Seeded families of benchmark instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::{build_dbm, build_hardcore_complete_bipartite, build_rbm, BipartiteModel};

#[derive(Clone, Debug)]
pub struct Instance {
    pub id: String,
    pub model: BipartiteModel,
}

pub const RBM_WEIGHT_RANGE: f64 = 2.0;

fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, half_width: f64) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(-half_width..=half_width)).collect())
        .collect()
}

/// `count` fully connected RBMs with `1 ≤ n1, n2 ≤ max_side`; weights and
/// biases uniform in `[-2, 2]`.
pub fn random_rbms(count: usize, max_side: usize, seed: u64) -> Result<Vec<Instance>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n1 = rng.random_range(1..=max_side);
            let n2 = rng.random_range(1..=max_side);
            let w = uniform_matrix(&mut rng, n1, n2, RBM_WEIGHT_RANGE);
            let b1 = uniform_matrix(&mut rng, 1, n1, RBM_WEIGHT_RANGE).remove(0);
            let b2 = uniform_matrix(&mut rng, 1, n2, RBM_WEIGHT_RANGE).remove(0);
            Ok(Instance {
                id: format!("rbm_suite:{seed}:{i}:{n1}x{n2}"),
                model: build_rbm(&w, &b1, &b2)?,
            })
        })
        .collect()
}

/// Hardcore model on `K_{n,n}` for `n = 1..=max_n`.
pub fn hardcore_family(max_n: usize) -> Result<Vec<Instance>> {
    (1..=max_n)
        .map(|n| {
            Ok(Instance {
                id: format!("hardcore_knn:{n}"),
                model: build_hardcore_complete_bipartite(n)?,
            })
        })
        .collect()
}

/// Deep Boltzmann machine with the given layer sizes, weights and biases
/// uniform in `[-2, 2]`.
pub fn random_dbm(layer_sizes: &[usize], seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<Vec<Vec<f64>>> = layer_sizes
        .windows(2)
        .map(|w| uniform_matrix(&mut rng, w[0], w[1], RBM_WEIGHT_RANGE))
        .collect();
    let biases: Vec<Vec<f64>> = layer_sizes
        .iter()
        .map(|&l| uniform_matrix(&mut rng, 1, l, RBM_WEIGHT_RANGE).remove(0))
        .collect();
    let sizes: Vec<String> = layer_sizes.iter().map(usize::to_string).collect();
    Ok(Instance {
        id: format!("dbm:{}:s{seed}", sizes.join("-")),
        model: build_dbm(layer_sizes, &weights, &biases)?,
    })
}

/// RBM with `n` variables (`⌈n/2⌉` on the first side) and every weight and
/// bias zero.
pub fn zero_weight_rbm(n: usize) -> Result<Instance> {
    let n1 = n.div_ceil(2);
    let n2 = n - n1;
    Ok(Instance {
        id: format!("rbm_zero:{n1}x{n2}"),
        model: build_rbm(&vec![vec![0.0; n2]; n1], &vec![0.0; n1], &vec![0.0; n2])?,
    })
}

/// Number of joint states, saturating.
pub fn state_count(model: &BipartiteModel) -> usize {
    (0..model.num_variables()).fold(1usize, |acc, _| acc.saturating_mul(model.domain_size()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_are_seeded() {
        let a = random_rbms(20, 5, 3).unwrap();
        let b = random_rbms(20, 5, 3).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.id == y.id && x.model == y.model));
        assert!(a.iter().all(|i| i.model.n1() <= 5 && i.model.n2() <= 5));
        let c = random_rbms(20, 5, 4).unwrap();
        assert!(a.iter().zip(&c).any(|(x, y)| x.model != y.model));
    }

    #[test]
    fn family_shapes() {
        assert_eq!(hardcore_family(6).unwrap().len(), 6);
        let dbm = random_dbm(&[3, 3, 3, 3], 1).unwrap();
        assert_eq!(state_count(&dbm.model), 4096);
        assert!(dbm.model.validate_bipartite().is_ok());
        let z = zero_weight_rbm(5).unwrap();
        assert_eq!((z.model.n1(), z.model.n2()), (3, 2));
    }
}
