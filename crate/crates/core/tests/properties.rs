use proptest::prelude::*;

use scanorder::chain::{
    adjoint, enumerate_state_space, ergodicity_check, is_reversible, stationarity_residual,
    SiteKernels, StateSpace,
};
use scanorder::coupling::{grand_coupling_time, Sampler};
use scanorder::mixing::{exact_mixing_time, mixing_time_by_doubling};
use scanorder::model::{build_rbm, random_bipartite_model, BipartiteModel};
use scanorder::spectral::{relaxation_time, verify_theorem1_with};

fn small_rbm() -> impl Strategy<Value = BipartiteModel> {
    (1usize..=3, 1usize..=3)
        .prop_flat_map(|(n1, n2)| {
            (
                prop::collection::vec(prop::collection::vec(-2.0f64..2.0, n2), n1),
                prop::collection::vec(-2.0f64..2.0, n1),
                prop::collection::vec(-2.0f64..2.0, n2),
            )
        })
        .prop_map(|(w, b1, b2)| build_rbm(&w, &b1, &b2).unwrap())
}

fn chains(model: &BipartiteModel) -> (StateSpace, SiteKernels) {
    let space = enumerate_state_space(model, 4096).unwrap();
    let sites = SiteKernels::build(model, &space).unwrap();
    (space, sites)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernels_are_stochastic_and_stationary(model in small_rbm()) {
        let (space, sites) = chains(&model);
        let scan = sites.scan().unwrap();
        let all = [
            sites.random_update(true).unwrap(),
            sites.random_update(false).unwrap(),
            scan.full, scan.first, scan.second, scan.gs1, scan.gs2,
        ];
        for k in &all {
            let m = k.matrix();
            for i in 0..m.rows() {
                let s: f64 = m.row(i).iter().sum();
                prop_assert!((s - 1.0).abs() <= 1e-12);
                prop_assert!(m.row(i).iter().all(|&v| v >= 0.0));
            }
            prop_assert!(stationarity_residual(k, space.pi()) <= 1e-10);
        }
    }

    #[test]
    fn site_kernels_are_idempotent_projections(model in small_rbm()) {
        let (space, sites) = chains(&model);
        for x in 0..sites.len() {
            let t = sites.get(x);
            let sq = t.matrix().matmul(t.matrix());
            prop_assert!(sq.max_abs_diff(t.matrix()) <= 1e-12);
            let adj = adjoint(t, space.pi()).unwrap();
            prop_assert!(adj.matrix().max_abs_diff(t.matrix()) <= 1e-12);
        }
    }

    #[test]
    fn random_update_is_reversible(model in small_rbm()) {
        let (space, sites) = chains(&model);
        prop_assert!(is_reversible(&sites.random_update(true).unwrap(), space.pi(), 1e-10));
        prop_assert!(is_reversible(&sites.random_update(false).unwrap(), space.pi(), 1e-10));
    }

    #[test]
    fn scan_never_relaxes_slower(model in small_rbm()) {
        let (space, sites) = chains(&model);
        let r = verify_theorem1_with(&sites, space.pi(), true).unwrap();
        prop_assert!(r.holds, "{r:?}");
        prop_assert!(r.lemma9_holds, "{r:?}");
        prop_assert!(r.t_rel_as <= r.t_rel_ru + 1e-9);
        prop_assert!(r.lemma9_lhs <= r.lemma9_rhs + 1e-10);
    }

    #[test]
    fn gap_lies_in_unit_interval(model in small_rbm()) {
        let (space, sites) = chains(&model);
        let rep = relaxation_time(&sites.random_update(true).unwrap(), space.pi()).unwrap();
        prop_assert!(rep.gap > 0.0 && rep.gap <= 1.0);
        prop_assert!(rep.relaxation_time >= 1.0);
    }

    #[test]
    fn tv_curve_is_non_increasing(model in small_rbm()) {
        let (space, sites) = chains(&model);
        for k in [sites.random_update(true).unwrap(), sites.scan().unwrap().full] {
            let rep = exact_mixing_time(&k, space.pi(), 0.01, 100_000).unwrap();
            for w in rep.tv_curve.windows(2) {
                prop_assert!(w[1].1 <= w[0].1 + 1e-12);
            }
        }
    }

    #[test]
    fn mixing_time_is_monotone_in_threshold(model in small_rbm(), a in 0.01f64..0.4, b in 0.01f64..0.4) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (space, sites) = chains(&model);
        let k = sites.random_update(true).unwrap();
        let t_lo = exact_mixing_time(&k, space.pi(), lo, 100_000).unwrap().mixing_time;
        let t_hi = exact_mixing_time(&k, space.pi(), hi, 100_000).unwrap().mixing_time;
        prop_assert!(t_hi <= t_lo);
    }

    #[test]
    fn doubling_agrees_with_iteration(model in small_rbm(), eps in 0.01f64..0.4) {
        let (space, sites) = chains(&model);
        for k in [sites.random_update(true).unwrap(), sites.scan().unwrap().full] {
            prop_assert!(ergodicity_check(&k).is_ergodic());
            let a = exact_mixing_time(&k, space.pi(), eps, 100_000).unwrap();
            let b = mixing_time_by_doubling(&k, space.pi(), eps, 100_000).unwrap();
            prop_assert_eq!(a.mixing_time, b.mixing_time);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn coupling_is_deterministic_and_sandwiched(seed in 0u64..1000, n in 3usize..12) {
        let model = random_bipartite_model(n, n, 2 * n, 0.0, 0.5, seed).unwrap();
        for sampler in Sampler::ALL {
            let a = grand_coupling_time(&model, sampler, seed, 4, 1_000_000, false).unwrap();
            let b = grand_coupling_time(&model, sampler, seed, 4, 1_000_000, false).unwrap();
            prop_assert_eq!(&a.outcomes, &b.outcomes);
            prop_assert_eq!(a.sandwich_violations, 0);
        }
    }
}
