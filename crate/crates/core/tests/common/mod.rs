//! Reference implementations that share no code with the library: a
//! cyclic Jacobi eigensolver, exact rational hardcore chains and power
//! iteration.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations,
/// sorted ascending. Sweeps until the off-diagonal Frobenius mass drops
/// below `1e-12`.
pub fn jacobi_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum::<f64>()
            .sqrt();
        if off < 1e-12 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Largest `|ξ|` over eigenvalues `ξ ≠ 1` of a `π`-reversible kernel given
/// as nested rows, via Jacobi on `D^{1/2} P D^{-1/2}` with the top
/// eigenvalue removed by subtracting `sqrt(π) sqrt(π)ᵀ`.
pub fn oracle_second_modulus(p: &[Vec<f64>], pi: &[f64]) -> f64 {
    let n = p.len();
    let a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let x = (pi[i] / pi[j]).sqrt() * p[i][j];
                    let y = (pi[j] / pi[i]).sqrt() * p[j][i];
                    0.5 * (x + y) - (pi[i] * pi[j]).sqrt()
                })
                .collect()
        })
        .collect();
    jacobi_eigenvalues(&a).iter().map(|x| x.abs()).fold(0.0, f64::max)
}

pub fn rows(m: &scanorder::linalg::Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

pub type Q = BigRational;

pub fn q(num: i64, den: i64) -> Q {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Independent sets of `K_{n,n}` as bit masks (left side bits `0..n`).
pub fn hardcore_states(n: usize) -> Vec<u32> {
    let left = (1u32 << n) - 1;
    (0..1u32 << (2 * n))
        .filter(|s| s & left == 0 || s >> n == 0)
        .collect()
}

/// Exact single-site heat-bath kernel of the hardcore model on `K_{n,n}`:
/// vertex `x` is emptied if any opposite vertex is occupied, otherwise it
/// is occupied with probability 1/2.
pub fn hardcore_site_kernel(n: usize, states: &[u32], x: usize) -> Vec<Vec<Q>> {
    let size = states.len();
    let mut k = vec![vec![Q::zero(); size]; size];
    let opposite: u32 = if x < n { ((1u32 << n) - 1) << n } else { (1u32 << n) - 1 };
    for (i, &s) in states.iter().enumerate() {
        let off = s & !(1 << x);
        let j_off = states.iter().position(|&t| t == off).unwrap();
        if s & opposite != 0 {
            k[i][j_off] += Q::one();
        } else {
            let j_on = states.iter().position(|&t| t == off | (1 << x)).unwrap();
            k[i][j_off] += q(1, 2);
            k[i][j_on] += q(1, 2);
        }
    }
    k
}

pub fn q_matmul(a: &[Vec<Q>], b: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(Q::zero(), |acc, k| acc + &a[i][k] * &b[k][j]))
                .collect()
        })
        .collect()
}

/// Lazy random-update kernel of hardcore `K_{n,n}` in exact arithmetic.
pub fn hardcore_lazy_ru(n: usize) -> Vec<Vec<Q>> {
    let states = hardcore_states(n);
    let size = states.len();
    let weight = q(1, 2 * (2 * n as i64));
    let mut p: Vec<Vec<Q>> = (0..size)
        .map(|i| (0..size).map(|j| if i == j { q(1, 2) } else { Q::zero() }).collect())
        .collect();
    for x in 0..2 * n {
        let k = hardcore_site_kernel(n, &states, x);
        for i in 0..size {
            for j in 0..size {
                p[i][j] += &weight * &k[i][j];
            }
        }
    }
    p
}

/// One alternating-scan epoch of hardcore `K_{n,n}` in exact arithmetic.
pub fn hardcore_scan(n: usize) -> Vec<Vec<Q>> {
    let states = hardcore_states(n);
    let mut p = hardcore_site_kernel(n, &states, 0);
    for x in 1..2 * n {
        p = q_matmul(&p, &hardcore_site_kernel(n, &states, x));
    }
    p
}

/// First `t ≥ 1` with exact worst-start distance to the uniform law at
/// most `threshold`.
pub fn exact_uniform_mixing_time(p: &[Vec<Q>], threshold: &Q, t_max: u64) -> Option<u64> {
    let size = p.len();
    let pi = q(1, size as i64);
    let mut power = p.to_vec();
    for t in 1..=t_max {
        let worst = power
            .iter()
            .map(|row| row.iter().fold(Q::zero(), |acc, x| acc + (x - &pi).abs()) * q(1, 2))
            .max()
            .unwrap();
        if &worst <= threshold {
            return Some(t);
        }
        power = q_matmul(&power, p);
    }
    None
}

/// `μ P^steps` from the uniform start.
pub fn power_iteration(p: &[Vec<f64>], steps: usize) -> Vec<f64> {
    let n = p.len();
    let mut mu = vec![1.0 / n as f64; n];
    for _ in 0..steps {
        let mut next = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                next[j] += mu[i] * p[i][j];
            }
        }
        mu = next;
    }
    mu
}
