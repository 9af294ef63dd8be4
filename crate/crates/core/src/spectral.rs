//! Operator norms on `L2(π)`, spectral gaps and relaxation times.
//!
//! Every quantity goes through the similarity `A = D^{1/2} M D^{-1/2}` with
//! `D = diag(π)`. For a `π`-reversible kernel `A` is symmetric and
//! `‖M‖_π` is the spectral norm of `A`, so one symmetric eigensolver covers
//! reversible kernels and multiplicative reversibilizations alike.
//!
//! For a non-reversible `P` the relaxation time is
//! `1 / (1 - sqrt(1 - λ(R(P))))` with `R(P) = P P*`; for a reversible one it
//! is `1 / λ(P)`, and the two agree when both apply.

use serde::Serialize;

use crate::chain::{
    enumerate_state_space, ergodicity_check, is_reversible, reversibilization, Kernel, SiteKernels,
};
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigenvalues, Matrix};
use crate::model::BipartiteModel;

pub const SYMMETRY_TOLERANCE: f64 = 1e-9;
pub const REVERSIBILITY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralReport {
    /// `λ(P)` for reversible kernels, `λ(R(P))` otherwise.
    pub gap: f64,
    /// `‖P − S_π‖_π`, or `‖R(P) − S_π‖_π` for non-reversible kernels.
    pub second_largest_modulus: f64,
    pub relaxation_time: f64,
    pub reversible: bool,
    pub method: String,
}

/// `D^{1/2} M D^{-1/2}`
pub fn conjugate(m: &Matrix, pi: &[f64]) -> Matrix {
    let root: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();
    Matrix::from_fn(m.rows(), m.cols(), |i, j| root[i] * m[(i, j)] / root[j])
}

fn check_len(n: usize, pi: &[f64]) -> Result<()> {
    if n != pi.len() {
        return Err(Error::DimensionMismatch(format!(
            "distribution of length {} for a {n}-state operator",
            pi.len()
        )));
    }
    Ok(())
}

fn max_abs_eigenvalue(symmetric: &Matrix) -> Result<f64> {
    let ev = symmetric_eigenvalues(symmetric)?;
    Ok(ev.iter().map(|x| x.abs()).fold(0.0, f64::max))
}

fn symmetrize(a: &mut Matrix) {
    for i in 0..a.rows() {
        for j in (i + 1)..a.cols() {
            let mean = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = mean;
            a[(j, i)] = mean;
        }
    }
}

/// `‖P − S_π‖_π` for a kernel that is symmetric under conjugation
/// (reversible kernels and reversibilizations).
pub fn deviation_norm(kernel: &Kernel, pi: &[f64]) -> Result<f64> {
    check_len(kernel.size(), pi)?;
    let root: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();
    let m = kernel.matrix();
    // Conjugated S_π is the rank-one matrix sqrt(π_i π_j).
    let mut a = Matrix::from_fn(m.rows(), m.cols(), |i, j| {
        root[i] * m[(i, j)] / root[j] - root[i] * root[j]
    });
    let asym = a.max_asymmetry();
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::NotSymmetric(asym));
    }
    symmetrize(&mut a);
    max_abs_eigenvalue(&a)
}

/// `‖M‖_π` for an arbitrary square operator: the largest singular value of
/// the conjugated matrix, from the eigenvalues of `AᵀA`.
pub fn general_operator_norm(m: &Matrix, pi: &[f64]) -> Result<f64> {
    check_len(m.rows(), pi)?;
    let a = conjugate(m, pi);
    let mut gram = a.transpose().matmul(&a);
    symmetrize(&mut gram);
    let top = symmetric_eigenvalues(&gram)?
        .last()
        .copied()
        .unwrap_or(0.0);
    Ok(top.max(0.0).sqrt())
}

/// Relaxation time from `‖R(P) − S_π‖_π`.
pub fn relaxation_from_reversibilized_norm(norm: f64) -> f64 {
    1.0 / (1.0 - norm.clamp(0.0, 1.0).sqrt())
}

fn require_irreducible(kernel: &Kernel) -> Result<()> {
    let erg = ergodicity_check(kernel);
    if !erg.irreducible {
        return Err(Error::NotErgodic {
            irreducible: erg.irreducible,
            aperiodic: erg.aperiodic,
        });
    }
    Ok(())
}

fn gap_from_norm(norm: f64) -> Result<f64> {
    let gap = (1.0 - norm).clamp(0.0, 1.0);
    if gap <= 0.0 {
        return Err(Error::NoSpectralGap);
    }
    Ok(gap)
}

/// Relaxation time through the reversibilization, regardless of whether
/// `kernel` is reversible.
pub fn relaxation_time_reversibilized(kernel: &Kernel, pi: &[f64]) -> Result<SpectralReport> {
    require_irreducible(kernel)?;
    let r = reversibilization(kernel, pi)?;
    let norm = deviation_norm(&r, pi)?;
    let gap = gap_from_norm(norm)?;
    Ok(SpectralReport {
        gap,
        second_largest_modulus: norm,
        relaxation_time: relaxation_from_reversibilized_norm(norm),
        reversible: is_reversible(kernel, pi, REVERSIBILITY_TOLERANCE),
        method: "reversibilization".into(),
    })
}

/// `1/λ(P)` when `P` satisfies detailed balance, otherwise
/// `1/(1 − sqrt(1 − λ(R(P))))`.
pub fn relaxation_time(kernel: &Kernel, pi: &[f64]) -> Result<SpectralReport> {
    check_len(kernel.size(), pi)?;
    if !is_reversible(kernel, pi, REVERSIBILITY_TOLERANCE) {
        return relaxation_time_reversibilized(kernel, pi);
    }
    require_irreducible(kernel)?;
    let norm = deviation_norm(kernel, pi)?;
    let gap = gap_from_norm(norm)?;
    Ok(SpectralReport {
        gap,
        second_largest_modulus: norm,
        relaxation_time: 1.0 / gap,
        reversible: true,
        method: "reversible".into(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem1Report {
    pub states: usize,
    pub t_rel_as: f64,
    pub t_rel_ru: f64,
    pub holds: bool,
    /// `‖R(P_AS) − S_π‖_π`
    pub lemma9_lhs: f64,
    /// `‖P_RU − S_π‖_π²`
    pub lemma9_rhs: f64,
    pub lemma9_holds: bool,
    pub as_ergodic: bool,
}

pub const THEOREM1_SLACK: f64 = 1e-9;
pub const LEMMA9_SLACK: f64 = 1e-10;

/// Compares the alternating-scan relaxation time (epochs) with the
/// random-update one (variable updates) on the exact kernels of `model`.
pub fn verify_theorem1(model: &BipartiteModel, cap: usize, lazy: bool) -> Result<Theorem1Report> {
    model.validate_bipartite()?;
    let space = enumerate_state_space(model, cap)?;
    let sites = SiteKernels::build(model, &space)?;
    verify_theorem1_with(&sites, space.pi(), lazy)
}

pub fn verify_theorem1_with(sites: &SiteKernels, pi: &[f64], lazy: bool) -> Result<Theorem1Report> {
    let ru = sites.random_update(lazy)?;
    let erg = ergodicity_check(&ru);
    if !erg.is_ergodic() {
        return Err(Error::NotErgodic {
            irreducible: erg.irreducible,
            aperiodic: erg.aperiodic,
        });
    }
    let scan = sites.scan()?;
    let as_ergodic = ergodicity_check(&scan.full).is_ergodic();

    let ru_norm = deviation_norm(&ru, pi)?;
    let t_rel_ru = 1.0 / gap_from_norm(ru_norm)?;

    let r = reversibilization(&scan.full, pi)?;
    let lhs = deviation_norm(&r, pi)?;
    gap_from_norm(lhs)?;
    let t_rel_as = relaxation_from_reversibilized_norm(lhs);
    let rhs = ru_norm * ru_norm;
    Ok(Theorem1Report {
        states: pi.len(),
        t_rel_as,
        t_rel_ru,
        holds: t_rel_as <= t_rel_ru + THEOREM1_SLACK,
        lemma9_lhs: lhs,
        lemma9_rhs: rhs,
        lemma9_holds: lhs <= rhs + LEMMA9_SLACK,
        as_ergodic,
    })
}
