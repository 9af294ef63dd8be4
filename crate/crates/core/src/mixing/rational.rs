//! Exact-arithmetic powering for tiny chains.
//!
//! Every `f64` is a dyadic rational, so converting the kernel and `π`
//! entry by entry loses nothing; the powers and distances below are then
//! computed without rounding. Used to cross-check floating-point powering.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::chain::Kernel;
use crate::error::{Error, Result};

pub const MAX_STATES: usize = 16;

fn exact(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::InvalidArgument(format!("{x} is not finite")))
}

type RationalMatrix = Vec<Vec<BigRational>>;

fn multiply(a: &RationalMatrix, b: &RationalMatrix) -> RationalMatrix {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut acc = BigRational::zero();
                    for k in 0..n {
                        if !a[i][k].is_zero() && !b[k][j].is_zero() {
                            acc += &a[i][k] * &b[k][j];
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

fn worst_start_tv(q: &RationalMatrix, pi: &[BigRational]) -> BigRational {
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    q.iter()
        .map(|row| {
            let mut s = BigRational::zero();
            for (a, b) in row.iter().zip(pi) {
                s += (a - b).abs();
            }
            s * &half
        })
        .max()
        .unwrap_or_else(BigRational::zero)
}

/// First `t ≥ 1` with exact worst-start distance at most `threshold`, or
/// `None` if it exceeds `t_max`.
pub fn rational_mixing_time(kernel: &Kernel, pi: &[f64], threshold: f64, t_max: u64) -> Result<Option<u64>> {
    let n = kernel.size();
    if n > MAX_STATES {
        return Err(Error::InvalidArgument(format!(
            "exact powering limited to {MAX_STATES} states, got {n}"
        )));
    }
    if pi.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "distribution of length {} for a {n}-state kernel",
            pi.len()
        )));
    }
    let p: RationalMatrix = (0..n)
        .map(|i| kernel.matrix().row(i).iter().map(|&x| exact(x)).collect())
        .collect::<Result<_>>()?;
    let pi: Vec<BigRational> = pi.iter().map(|&x| exact(x)).collect::<Result<_>>()?;
    let threshold = exact(threshold)?;
    let mut q = p.clone();
    for t in 1..=t_max {
        if worst_start_tv(&q, &pi) <= threshold {
            return Ok(Some(t));
        }
        q = multiply(&q, &p);
    }
    Ok(None)
}
