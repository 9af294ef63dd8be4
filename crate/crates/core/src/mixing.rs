//! Exact total-variation mixing times and the bounds relating them to
//! relaxation times.
//!
//! The worst-start distance `d(t) = max_σ ‖P^t(σ,·) − π‖_TV` is
//! non-increasing in `t` for every kernel, so besides step-by-step powering
//! [`mixing_time_by_doubling`] finds the same first crossing with
//! `O(log t)` products by repeated squaring and binary lifting.

use serde::Serialize;

use crate::chain::{
    enumerate_state_space, ergodicity_check, reversibilization, Kernel, SiteKernels, StepUnit,
};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::BipartiteModel;
use crate::spectral::{deviation_norm, relaxation_time};

pub mod rational;

/// `1/(2e)`
pub const DEFAULT_THRESHOLD: f64 = 0.183_939_720_585_721_16;
pub const DEFAULT_T_MAX: u64 = 1_000_000;
const NORMALIZATION_TOLERANCE: f64 = 1e-9;
pub const FILL_SLACK: f64 = 1e-10;

/// Half the L1 distance between two distributions.
pub fn tv_distance(mu: &[f64], nu: &[f64]) -> Result<f64> {
    if mu.len() != nu.len() {
        return Err(Error::DimensionMismatch(format!(
            "distributions of length {} and {}",
            mu.len(),
            nu.len()
        )));
    }
    for d in [mu, nu] {
        let s: f64 = d.iter().sum();
        if (s - 1.0).abs() > NORMALIZATION_TOLERANCE || d.iter().any(|&x| x < 0.0) {
            return Err(Error::InvalidDistribution(format!("sums to {s}")));
        }
    }
    Ok(half_l1(mu, nu).min(1.0))
}

fn half_l1(mu: &[f64], nu: &[f64]) -> f64 {
    0.5 * mu.iter().zip(nu).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// `max_σ ‖Q(σ,·) − π‖_TV`
pub fn worst_start_tv(q: &Matrix, pi: &[f64]) -> f64 {
    (0..q.rows()).map(|i| half_l1(q.row(i), pi)).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixingReport {
    /// First `t ≥ 1` with worst-start distance at most `threshold`; equal to
    /// `t_max` when truncated.
    pub mixing_time: u64,
    pub threshold: f64,
    pub unit: StepUnit,
    /// `(t, d(t))`, starting at `t = 0`. Only the evaluated points are
    /// listed when the doubling search is used.
    pub tv_curve: Vec<(u64, f64)>,
    pub truncated: bool,
}

fn check_inputs(kernel: &Kernel, pi: &[f64], t_max: u64) -> Result<()> {
    if pi.len() != kernel.size() {
        return Err(Error::DimensionMismatch(format!(
            "distribution of length {} for a {}-state kernel",
            pi.len(),
            kernel.size()
        )));
    }
    if t_max == 0 {
        return Err(Error::InvalidArgument("t_max must be at least 1".into()));
    }
    let erg = ergodicity_check(kernel);
    if !erg.is_ergodic() {
        return Err(Error::NotErgodic {
            irreducible: erg.irreducible,
            aperiodic: erg.aperiodic,
        });
    }
    Ok(())
}

fn initial_distance(pi: &[f64]) -> f64 {
    1.0 - pi.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Powers `Q ← Q·P` one step at a time, recording `d(t)` at every step.
pub fn exact_mixing_time(kernel: &Kernel, pi: &[f64], threshold: f64, t_max: u64) -> Result<MixingReport> {
    check_inputs(kernel, pi, t_max)?;
    let p = kernel.matrix();
    let mut curve = vec![(0, initial_distance(pi))];
    let mut q = p.clone();
    let mut t = 1;
    loop {
        let d = worst_start_tv(&q, pi);
        curve.push((t, d));
        if d <= threshold || t == t_max {
            return Ok(MixingReport {
                mixing_time: t,
                threshold,
                unit: kernel.unit(),
                tv_curve: curve,
                truncated: d > threshold,
            });
        }
        q = q.matmul(p);
        t += 1;
    }
}

/// Same answer as [`exact_mixing_time`], by squaring and binary lifting.
pub fn mixing_time_by_doubling(
    kernel: &Kernel,
    pi: &[f64],
    threshold: f64,
    t_max: u64,
) -> Result<MixingReport> {
    check_inputs(kernel, pi, t_max)?;
    let mut curve = vec![(0, initial_distance(pi))];
    let report = |mixing_time, curve: Vec<(u64, f64)>, truncated| MixingReport {
        mixing_time,
        threshold,
        unit: kernel.unit(),
        tv_curve: curve,
        truncated,
    };

    // powers[k] = P^(2^k); stop at the first power that crosses.
    let mut powers = vec![kernel.matrix().clone()];
    loop {
        let k = powers.len() - 1;
        let t = 1u64 << k;
        let d = worst_start_tv(&powers[k], pi);
        curve.push((t, d));
        if d <= threshold {
            break;
        }
        if t >= t_max {
            return Ok(report(t_max, curve, true));
        }
        let sq = powers[k].matmul(&powers[k]);
        powers.push(sq);
    }

    let top = powers.len() - 1;
    if top == 0 {
        return Ok(report(1, curve, false));
    }
    // Largest t < 2^top with d(t) > threshold, built bit by bit from 2^(top-1).
    let mut t = 1u64 << (top - 1);
    let mut q = powers[top - 1].clone();
    for k in (0..top - 1).rev() {
        let candidate = q.matmul(&powers[k]);
        let tc = t + (1u64 << k);
        let d = worst_start_tv(&candidate, pi);
        curve.push((tc, d));
        if d > threshold {
            t = tc;
            q = candidate;
        }
    }
    curve.sort_by_key(|&(t, _)| t);
    let answer = t + 1;
    if answer > t_max {
        return Ok(report(t_max, curve, true));
    }
    Ok(report(answer, curve, false))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixingBoundsReport {
    pub states: usize,
    pub pi_min: f64,
    pub t_rel_ru: f64,
    pub t_rel_as: f64,
    pub t_mix_ru: u64,
    pub t_mix_as: u64,
    pub truncated: bool,
    /// `T_rel(RU) − 1 ≤ T_mix(RU)`
    pub ru_lower_holds: bool,
    /// `T_mix(RU) ≤ T_rel(RU) · ln(2e/π_min)`
    pub ru_upper_holds: bool,
    /// `T_mix(AS) ≤ ln(4e²/π_min) · T_rel(AS)`
    pub as_upper_holds: bool,
    /// `T_mix(AS) ≤ ln(4e²/π_min) · (T_mix(RU) + 1)`
    pub as_vs_ru_holds: bool,
}

impl MixingBoundsReport {
    pub fn all_hold(&self) -> bool {
        !self.truncated
            && self.ru_lower_holds
            && self.ru_upper_holds
            && self.as_upper_holds
            && self.as_vs_ru_holds
    }
}

/// Checks the mixing/relaxation sandwich for random update, the
/// relaxation bound for alternating scan and the resulting comparison of
/// the two mixing times, all at the default threshold.
pub fn verify_mixing_bounds(
    model: &BipartiteModel,
    cap: usize,
    lazy: bool,
    t_max: u64,
) -> Result<MixingBoundsReport> {
    model.validate_bipartite()?;
    let space = enumerate_state_space(model, cap)?;
    let sites = SiteKernels::build(model, &space)?;
    let ru = sites.random_update(lazy)?;
    let scan = sites.scan()?;
    mixing_bounds_for(&ru, &scan.full, space.pi(), t_max)
}

pub fn mixing_bounds_for(ru: &Kernel, full_scan: &Kernel, pi: &[f64], t_max: u64) -> Result<MixingBoundsReport> {
    let pi_min = pi.iter().copied().fold(f64::INFINITY, f64::min);
    let t_rel_ru = relaxation_time(ru, pi)?.relaxation_time;
    let t_rel_as = relaxation_time(full_scan, pi)?.relaxation_time;
    let mix_ru = mixing_time_by_doubling(ru, pi, DEFAULT_THRESHOLD, t_max)?;
    let mix_as = mixing_time_by_doubling(full_scan, pi, DEFAULT_THRESHOLD, t_max)?;
    let (t_mix_ru, t_mix_as) = (mix_ru.mixing_time as f64, mix_as.mixing_time as f64);
    let e = std::f64::consts::E;
    let log_as = (4.0 * e * e / pi_min).ln();
    Ok(MixingBoundsReport {
        states: pi.len(),
        pi_min,
        t_rel_ru,
        t_rel_as,
        t_mix_ru: mix_ru.mixing_time,
        t_mix_as: mix_as.mixing_time,
        truncated: mix_ru.truncated || mix_as.truncated,
        ru_lower_holds: t_rel_ru - 1.0 <= t_mix_ru,
        ru_upper_holds: t_mix_ru <= t_rel_ru * (2.0 * e / pi_min).ln(),
        as_upper_holds: t_mix_as <= log_as * t_rel_as,
        as_vs_ru_holds: t_mix_as <= log_as * (t_mix_ru + 1.0),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FillPoint {
    pub t: u64,
    /// `min_σ [(1 − λ(R(P)))^t / π(σ) − d_σ(t)²]`
    pub min_slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FillReport {
    pub gap_reversibilized: f64,
    pub points: Vec<FillPoint>,
    pub holds: bool,
}

/// `‖P^t(σ,·) − π‖_TV² ≤ (1 − λ(R(P)))^t / π(σ)` at each sampled `t`, for
/// every start `σ`.
pub fn verify_fill_inequality(kernel: &Kernel, pi: &[f64], t_samples: &[u64]) -> Result<FillReport> {
    let r = reversibilization(kernel, pi)?;
    let gap = (1.0 - deviation_norm(&r, pi)?).clamp(0.0, 1.0);
    let mut samples = t_samples.to_vec();
    samples.sort_unstable();
    samples.dedup();

    let p = kernel.matrix();
    let mut q = Matrix::identity(p.rows());
    let mut at = 0u64;
    let mut points = Vec::with_capacity(samples.len());
    for t in samples {
        q = advance(q, p, t - at);
        at = t;
        let factor = (1.0 - gap).powf(t as f64);
        let min_slack = (0..q.rows())
            .map(|i| factor / pi[i] - half_l1(q.row(i), pi).powi(2))
            .fold(f64::INFINITY, f64::min);
        points.push(FillPoint { t, min_slack });
    }
    let holds = points.iter().all(|p| p.min_slack >= -FILL_SLACK);
    Ok(FillReport {
        gap_reversibilized: gap,
        points,
        holds,
    })
}

/// `q · p^steps` by binary powering of `p`.
fn advance(mut q: Matrix, p: &Matrix, mut steps: u64) -> Matrix {
    let mut base = p.clone();
    while steps > 0 {
        if steps & 1 == 1 {
            q = q.matmul(&base);
        }
        steps >>= 1;
        if steps > 0 {
            base = base.matmul(&base);
        }
    }
    q
}

/// `P^t` by repeated squaring.
pub fn kernel_power(kernel: &Kernel, t: u64) -> Matrix {
    advance(Matrix::identity(kernel.size()), kernel.matrix(), t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_hardcore_complete_bipartite, build_rbm};

    fn hardcore(n: usize, lazy: bool) -> (Kernel, Kernel, Vec<f64>) {
        let model = build_hardcore_complete_bipartite(n).unwrap();
        let space = enumerate_state_space(&model, 4096).unwrap();
        let sites = SiteKernels::build(&model, &space).unwrap();
        (sites.random_update(lazy).unwrap(), sites.scan().unwrap().full, space.pi().to_vec())
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv_distance(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_eq!(tv_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(tv_distance(&[0.5, 0.5], &[0.25, 0.75]).unwrap(), 0.25);
        assert!(tv_distance(&[0.5, 0.5], &[1.0]).is_err());
        assert!(tv_distance(&[0.5, 0.6], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn stationary_projector_mixes_in_one_step() {
        let pi = [0.2, 0.3, 0.5];
        let s = Kernel::new(Matrix::repeated_row(&pi, 3), StepUnit::Composite, "S").unwrap();
        let rep = exact_mixing_time(&s, &pi, DEFAULT_THRESHOLD, 10).unwrap();
        assert_eq!(rep.mixing_time, 1);
        assert!(!rep.truncated);
        assert!((rep.tv_curve[0].1 - 0.8).abs() < 1e-15);
    }

    #[test]
    fn zero_weight_scan_mixes_in_one_epoch() {
        let model = build_rbm(&vec![vec![0.0; 2]; 2], &[0.0; 2], &[0.0; 2]).unwrap();
        let space = enumerate_state_space(&model, 4096).unwrap();
        let scan = SiteKernels::build(&model, &space).unwrap().scan().unwrap();
        let rep = exact_mixing_time(&scan.full, space.pi(), DEFAULT_THRESHOLD, 10).unwrap();
        assert_eq!((rep.mixing_time, rep.unit), (1, StepUnit::Epoch));
    }

    #[test]
    fn doubling_agrees_with_stepping() {
        for n in 1..=3 {
            for lazy in [true, false] {
                let (ru, full, pi) = hardcore(n, lazy);
                for k in [&ru, &full] {
                    for th in [0.5, DEFAULT_THRESHOLD, 0.01, 1e-4] {
                        let a = exact_mixing_time(k, &pi, th, 100_000).unwrap();
                        let b = mixing_time_by_doubling(k, &pi, th, 100_000).unwrap();
                        assert_eq!(a.mixing_time, b.mixing_time, "n={n} lazy={lazy} th={th}");
                    }
                }
            }
        }
    }

    #[test]
    fn truncation_is_flagged() {
        let (ru, _, pi) = hardcore(3, true);
        let a = exact_mixing_time(&ru, &pi, 1e-9, 5).unwrap();
        let b = mixing_time_by_doubling(&ru, &pi, 1e-9, 5).unwrap();
        assert!(a.truncated && b.truncated);
        assert_eq!((a.mixing_time, b.mixing_time), (5, 5));
    }

    #[test]
    fn squaring_matches_iteration() {
        let (ru, full, _) = hardcore(2, true);
        for k in [&ru, &full] {
            let mut q = k.matrix().clone();
            for t in 2..=64u64 {
                q = q.matmul(k.matrix());
                if t.is_power_of_two() {
                    assert!(kernel_power(k, t).max_abs_diff(&q) < 1e-9);
                }
            }
        }
    }

    #[test]
    fn bounds_hold_on_small_hardcore() {
        for n in 1..=3 {
            let model = build_hardcore_complete_bipartite(n).unwrap();
            let rep = verify_mixing_bounds(&model, 4096, true, DEFAULT_T_MAX).unwrap();
            assert!(rep.all_hold(), "{rep:?}");
        }
    }

    #[test]
    fn fill_inequality_on_hardcore() {
        let (ru, full, pi) = hardcore(3, true);
        for k in [&ru, &full] {
            let rep = verify_fill_inequality(k, &pi, &[0, 1, 2, 4, 8, 16]).unwrap();
            assert!(rep.holds, "{rep:?}");
            assert!(rep.points[0].min_slack >= 0.0);
        }
    }

    #[test]
    fn non_ergodic_rejected() {
        let id = Kernel::identity(2);
        assert!(matches!(
            exact_mixing_time(&id, &[0.5, 0.5], DEFAULT_THRESHOLD, 10),
            Err(Error::NotErgodic { .. })
        ));
    }
}
