//! Entrywise checks of the algebraic identities between site kernels,
//! scan kernels and the random-update kernel.

use serde::Serialize;

use crate::chain::{adjoint, enumerate_state_space, detailed_balance_residual, SiteKernels};
use crate::error::Result;
use crate::linalg::Matrix;
use crate::model::BipartiteModel;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub max_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub states: usize,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn worst(&self) -> f64 {
        self.checks.iter().map(|c| c.max_deviation).fold(0.0, f64::max)
    }
}

pub fn operator_identities(model: &BipartiteModel, cap: usize) -> Result<IdentityReport> {
    model.validate_bipartite()?;
    let space = enumerate_state_space(model, cap)?;
    let sites = SiteKernels::build(model, &space)?;
    let pi = space.pi();
    let n = sites.len();
    let n1 = model.n1();
    let mut checks = Vec::new();
    let mut push = |name, max_deviation| checks.push(IdentityCheck { name, max_deviation });

    let mut idempotent: f64 = 0.0;
    let mut self_adjoint: f64 = 0.0;
    for x in 0..n {
        let t = sites.get(x).matrix();
        idempotent = idempotent.max(t.matmul(t).max_abs_diff(t));
        self_adjoint = self_adjoint.max(detailed_balance_residual(sites.get(x), pi));
    }
    push("site_idempotent", idempotent);
    push("site_self_adjoint", self_adjoint);

    let mut commute: f64 = 0.0;
    for side in [0..n1, n1..n] {
        for x in side.clone() {
            for y in side.clone().filter(|&y| y > x) {
                let (a, b) = (sites.get(x).matrix(), sites.get(y).matrix());
                commute = commute.max(a.matmul(b).max_abs_diff(&b.matmul(a)));
            }
        }
    }
    push("same_side_commute", commute);

    let lazy = sites.random_update(true)?;
    let eager = sites.random_update(false)?;
    let id = Matrix::identity(space.len());
    push(
        "nonlazy_is_twice_lazy_minus_identity",
        eager.matrix().max_abs_diff(&lazy.matrix().scale(2.0).sub(&id)),
    );

    let scan = sites.scan()?;
    let (p_as, as1, as2) = (scan.full.matrix(), scan.first.matrix(), scan.second.matrix());
    let mixture = scan
        .gs1
        .matrix()
        .scale(n1 as f64 / n as f64)
        .add(&scan.gs2.matrix().scale((n - n1) as f64 / n as f64));
    push("random_update_is_half_scan_mixture", lazy.matrix().max_abs_diff(&mixture));
    push("first_half_absorbs_gs1", as1.matmul(scan.gs1.matrix()).max_abs_diff(as1));
    push("gs2_absorbed_by_second_half", scan.gs2.matrix().matmul(as2).max_abs_diff(as2));

    let mut reversed = sites.get(n1 - 1).matrix().clone();
    for x in (0..n1 - 1).rev() {
        reversed = reversed.matmul(sites.get(x).matrix());
    }
    push("scan_order_within_side", reversed.max_abs_diff(as1));

    let star = adjoint(&scan.full, pi)?;
    push("adjoint_factorization", star.matrix().max_abs_diff(&as2.matmul(as1)));

    let s = space.stationary_projector();
    let sandwich = as1.matmul(&lazy.matrix().sub(&s)).matmul(as2);
    push("centered_scan_sandwich", sandwich.max_abs_diff(&p_as.sub(&s)));
    let centered = p_as.sub(&s).matmul(&star.matrix().sub(&s));
    push(
        "centered_reversibilization",
        centered.max_abs_diff(&p_as.matmul(star.matrix()).sub(&s)),
    );

    Ok(IdentityReport {
        states: space.len(),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_hardcore_complete_bipartite, random_bipartite_model};

    #[test]
    fn identities_hold_on_small_models() {
        let models = [
            build_hardcore_complete_bipartite(2).unwrap(),
            random_bipartite_model(3, 3, 7, -2.0, 2.0, 5).unwrap(),
        ];
        for m in &models {
            let rep = operator_identities(m, 4096).unwrap();
            assert_eq!(rep.checks.len(), 11);
            assert!(rep.worst() <= 1e-12, "{rep:?}");
        }
    }
}
