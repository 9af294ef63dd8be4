//! Exact quotient chains for the hardcore model on `K_{n,n}`.
//!
//! Independent sets of `K_{n,n}` are subsets of one side only, and both
//! samplers commute with permutations inside a side, so the chain lumps
//! onto `(side, k)` with `k` occupied vertices. The empty set is shared by
//! both sides and stored once as `(L, 0)`, giving `2n + 1` states indexed
//!
//! * `0`: the empty set,
//! * `1..=n`: `(L, k)`,
//! * `n+1..=2n`: `(R, k)`.

use serde::Serialize;

use crate::chain::{Kernel, StateSpace, StepUnit};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const MAX_LUMPED_N: usize = 512;
pub const LUMP_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    L,
    R,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LumpedState {
    pub side: Side,
    pub k: usize,
}

impl LumpedState {
    pub const EMPTY: LumpedState = LumpedState { side: Side::L, k: 0 };

    pub fn index(self, n: usize) -> usize {
        match self.side {
            _ if self.k == 0 => 0,
            Side::L => self.k,
            Side::R => n + self.k,
        }
    }

    pub fn from_index(n: usize, i: usize) -> LumpedState {
        match i {
            0 => LumpedState::EMPTY,
            i if i <= n => LumpedState { side: Side::L, k: i },
            i => LumpedState { side: Side::R, k: i - n },
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_LUMPED_N {
        return Err(Error::InvalidArgument(format!(
            "lumped chains need 1 <= n <= {MAX_LUMPED_N}, got {n}"
        )));
    }
    Ok(())
}

fn ln_binomials(n: usize) -> Vec<f64> {
    let mut ln_fact = vec![0.0; n + 1];
    for i in 1..=n {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    (0..=n).map(|k| ln_fact[n] - ln_fact[k] - ln_fact[n - k]).collect()
}

/// `C(n, j) 2^{-n}` for `j = 0..=n`.
fn binomial_half(n: usize) -> Vec<f64> {
    let ln2 = std::f64::consts::LN_2;
    ln_binomials(n).into_iter().map(|l| (l - n as f64 * ln2).exp()).collect()
}

/// Stationary law of the quotient: `C(n,k) / (2^{n+1} − 1)`, the empty
/// state counted once.
pub fn lumped_pi(n: usize) -> Result<Vec<f64>> {
    check_n(n)?;
    let ln2 = std::f64::consts::LN_2;
    // ln(2^{n+1} − 1) without overflow.
    let ln_z = (n + 1) as f64 * ln2 + (-(-((n + 1) as f64) * ln2).exp()).ln_1p();
    let lb = ln_binomials(n);
    let mut pi = vec![0.0; 2 * n + 1];
    pi[0] = (-ln_z).exp();
    for k in 1..=n {
        let p = (lb[k] - ln_z).exp();
        pi[k] = p;
        pi[n + k] = p;
    }
    Ok(pi)
}

/// Random-update kernel on the quotient, in variable updates.
pub fn lumped_ru_kernel(n: usize, lazy: bool) -> Result<Kernel> {
    check_n(n)?;
    // Off-diagonal mass of the non-lazy chain, halved when lazy.
    let move_weight = if lazy { 0.5 } else { 1.0 };
    let nf = n as f64;
    let size = 2 * n + 1;
    let mut m = Matrix::zeros(size, size);
    // A chosen vertex on the free side flips with probability 1/2.
    let flip = move_weight / (4.0 * nf);
    m[(0, 1)] = nf * flip;
    m[(0, n + 1)] = nf * flip;
    for side in [Side::L, Side::R] {
        for k in 1..=n {
            let i = LumpedState { side, k }.index(n);
            let down = LumpedState { side, k: k - 1 }.index(n);
            m[(i, down)] += k as f64 * flip;
            if k < n {
                m[(i, LumpedState { side, k: k + 1 }.index(n))] += (n - k) as f64 * flip;
            }
        }
    }
    for i in 0..size {
        let off: f64 = m.row(i).iter().sum();
        m[(i, i)] = 1.0 - off;
    }
    let label = if lazy { "P_RU_lumped" } else { "P_RU_nonlazy_lumped" };
    Kernel::new(m, StepUnit::VariableUpdate, label)
}

/// One alternating-scan epoch (left side first) on the quotient.
pub fn lumped_as_kernel(n: usize) -> Result<Kernel> {
    check_n(n)?;
    let b = binomial_half(n);
    let size = 2 * n + 1;
    let mut m = Matrix::zeros(size, size);
    for i in 0..size {
        let from = LumpedState::from_index(n, i);
        if from.side == Side::L || from.k == 0 {
            // Left side resampled freely; right side free only if left ends empty.
            for j in 1..=n {
                m[(i, j)] = b[j];
                m[(i, n + j)] = b[0] * b[j];
            }
            m[(i, 0)] = b[0] * b[0];
        } else {
            // Left side forced empty; right side resampled freely.
            for j in 1..=n {
                m[(i, n + j)] = b[j];
            }
            m[(i, 0)] = b[0];
        }
    }
    Kernel::new(m, StepUnit::Epoch, "P_AS_lumped")
}

/// Lump index of every state of the full `K_{n,n}` hardcore chain, whose
/// first `n` variables form the left side.
pub fn hardcore_lump_map(space: &StateSpace, n: usize) -> Result<Vec<usize>> {
    space
        .configs()
        .iter()
        .map(|c| {
            if c.len() != 2 * n {
                return Err(Error::DimensionMismatch(format!(
                    "configuration of length {} for K_{{{n},{n}}}",
                    c.len()
                )));
            }
            let s = c.as_slice();
            let kl = s[..n].iter().filter(|&&x| x == 1).count();
            let kr = s[n..].iter().filter(|&&x| x == 1).count();
            if kl > 0 && kr > 0 {
                return Err(Error::InvalidArgument("not an independent set".into()));
            }
            Ok(if kl > 0 {
                kl
            } else if kr > 0 {
                n + kr
            } else {
                0
            })
        })
        .collect()
}

fn block_sums(full: &Kernel, map: &[usize], blocks: usize, row: usize) -> Vec<f64> {
    let mut sums = vec![0.0; blocks];
    for (j, &p) in full.matrix().row(row).iter().enumerate() {
        sums[map[j]] += p;
    }
    sums
}

fn check_map(full: &Kernel, map: &[usize], blocks: usize) -> Result<()> {
    if map.len() != full.size() {
        return Err(Error::DimensionMismatch(format!(
            "lump map of length {} for a {}-state kernel",
            map.len(),
            full.size()
        )));
    }
    if let Some(&b) = map.iter().find(|&&b| b >= blocks) {
        return Err(Error::InvalidArgument(format!("block {b} out of range")));
    }
    Ok(())
}

/// True iff the probability of jumping into each block depends only on the
/// block of the current state, within `1e-12`.
pub fn lumpability_check(full: &Kernel, map: &[usize], blocks: usize) -> Result<bool> {
    check_map(full, map, blocks)?;
    let mut reference: Vec<Option<Vec<f64>>> = vec![None; blocks];
    for (i, &b) in map.iter().enumerate() {
        let sums = block_sums(full, map, blocks, i);
        match &reference[b] {
            None => reference[b] = Some(sums),
            Some(r) => {
                if r.iter().zip(&sums).any(|(x, y)| (x - y).abs() > LUMP_TOLERANCE) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Quotient kernel from the first representative of each block. Only
/// meaningful when [`lumpability_check`] holds.
pub fn quotient_kernel(full: &Kernel, map: &[usize], blocks: usize) -> Result<Kernel> {
    check_map(full, map, blocks)?;
    let mut m = Matrix::zeros(blocks, blocks);
    let mut seen = vec![false; blocks];
    for (i, &b) in map.iter().enumerate() {
        if !seen[b] {
            seen[b] = true;
            m.row_mut(b).copy_from_slice(&block_sums(full, map, blocks, i));
        }
    }
    if let Some(b) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidArgument(format!("block {b} is empty")));
    }
    Kernel::new(m, full.unit(), format!("{}_quotient", full.label()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{enumerate_state_space, stationarity_residual, SiteKernels};
    use crate::model::build_hardcore_complete_bipartite;

    fn full_chains(n: usize, lazy: bool) -> (Kernel, Kernel, StateSpace) {
        let model = build_hardcore_complete_bipartite(n).unwrap();
        let space = enumerate_state_space(&model, 4096).unwrap();
        let sites = SiteKernels::build(&model, &space).unwrap();
        let ru = sites.random_update(lazy).unwrap();
        let full = sites.scan().unwrap().full;
        (ru, full, space)
    }

    #[test]
    fn index_round_trip() {
        for n in 1..5 {
            for i in 0..=2 * n {
                assert_eq!(LumpedState::from_index(n, i).index(n), i);
            }
        }
        assert_eq!(LumpedState { side: Side::R, k: 0 }.index(3), 0);
    }

    #[test]
    fn pi_is_stationary() {
        for n in [1, 2, 5, 22, 50] {
            let pi = lumped_pi(n).unwrap();
            assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for lazy in [true, false] {
                assert!(stationarity_residual(&lumped_ru_kernel(n, lazy).unwrap(), &pi) < 1e-12);
            }
            assert!(stationarity_residual(&lumped_as_kernel(n).unwrap(), &pi) < 1e-12);
        }
    }

    #[test]
    fn central_binomial_at_fifty() {
        let b = binomial_half(50);
        // C(50,25) / 2^50
        assert!((b[25] - 126_410_606_437_752.0 / 1_125_899_906_842_624.0).abs() < 1e-12);
    }

    #[test]
    fn cross_side_probabilities() {
        let n = 4;
        let k = lumped_as_kernel(n).unwrap();
        let half_n = 0.5f64.powi(n as i32);
        for from in 1..=n {
            let to_r: f64 = (n + 1..=2 * n).map(|j| k.matrix()[(from, j)]).sum();
            assert!((to_r - half_n * (1.0 - half_n)).abs() < 1e-15);
        }
        for from in n + 1..=2 * n {
            let to_l: f64 = (1..=n).map(|j| k.matrix()[(from, j)]).sum();
            assert_eq!(to_l, 0.0);
            assert!((k.matrix()[(from, 0)] - half_n).abs() < 1e-15);
        }
    }

    #[test]
    fn lumps_of_full_chains_match() {
        for n in 1..=3 {
            for lazy in [true, false] {
                let (ru, full, space) = full_chains(n, lazy);
                let map = hardcore_lump_map(&space, n).unwrap();
                let blocks = 2 * n + 1;
                assert!(lumpability_check(&ru, &map, blocks).unwrap());
                assert!(lumpability_check(&full, &map, blocks).unwrap());
                let q_ru = quotient_kernel(&ru, &map, blocks).unwrap();
                let q_as = quotient_kernel(&full, &map, blocks).unwrap();
                assert!(q_ru.matrix().max_abs_diff(lumped_ru_kernel(n, lazy).unwrap().matrix()) < 1e-12);
                assert!(q_as.matrix().max_abs_diff(lumped_as_kernel(n).unwrap().matrix()) < 1e-12);
            }
        }
    }

    #[test]
    fn coarse_map_is_not_lumpable() {
        let (ru, _, space) = full_chains(2, true);
        let map: Vec<usize> = (0..space.len()).map(|i| usize::from(i % 3 == 0)).collect();
        assert!(!lumpability_check(&ru, &map, 2).unwrap());
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(lumped_ru_kernel(0, true).is_err());
        assert!(lumped_pi(MAX_LUMPED_N + 1).is_err());
    }
}
