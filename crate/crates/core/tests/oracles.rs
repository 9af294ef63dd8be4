mod common;

use num_rational::BigRational;
use scanorder::chain::{enumerate_state_space, SiteKernels};
use scanorder::lumped::{lumped_as_kernel, lumped_pi, lumped_ru_kernel};
use scanorder::mixing::{exact_mixing_time, rational::rational_mixing_time, DEFAULT_THRESHOLD};
use scanorder::model::{build_hardcore_complete_bipartite, build_rbm};
use scanorder::spectral::{deviation_norm, relaxation_time};
use scanorder::suite::random_rbms;

#[test]
fn jacobi_matches_library_second_modulus() {
    for inst in random_rbms(15, 3, 11).unwrap() {
        let space = enumerate_state_space(&inst.model, 4096).unwrap();
        let sites = SiteKernels::build(&inst.model, &space).unwrap();
        let pi = space.pi();
        for k in [sites.random_update(true).unwrap(), sites.random_update(false).unwrap()] {
            let oracle = common::oracle_second_modulus(&common::rows(k.matrix()), pi);
            let lib = deviation_norm(&k, pi).unwrap();
            assert!((oracle - lib).abs() < 1e-10, "{}: {oracle} vs {lib}", inst.id);
        }
    }
}

#[test]
fn two_spin_rbm_gap_matches_jacobi() {
    // One visible and one hidden unit, any sign of coupling.
    for &w in &[0.0, 0.5, -1.3, 2.0] {
        let model = build_rbm(&[vec![w]], &[0.0], &[0.0]).unwrap();
        let space = enumerate_state_space(&model, 16).unwrap();
        let sites = SiteKernels::build(&model, &space).unwrap();
        let ru = sites.random_update(true).unwrap();
        let rows = common::rows(ru.matrix());
        let oracle = common::oracle_second_modulus(&rows, space.pi());
        let lib = relaxation_time(&ru, space.pi()).unwrap();
        assert!((1.0 - oracle - lib.gap).abs() < 1e-12);
    }
}

#[test]
fn rational_oracle_mixing_times_on_small_hardcore() {
    let threshold = BigRational::from_float(DEFAULT_THRESHOLD).unwrap();
    for n in 1..=2 {
        let model = build_hardcore_complete_bipartite(n).unwrap();
        let space = enumerate_state_space(&model, 64).unwrap();
        let sites = SiteKernels::build(&model, &space).unwrap();
        let pairs = [
            (sites.random_update(true).unwrap(), common::hardcore_lazy_ru(n)),
            (sites.scan().unwrap().full, common::hardcore_scan(n)),
        ];
        for (k, exact) in &pairs {
            let oracle = common::exact_uniform_mixing_time(exact, &threshold, 5000);
            let float = exact_mixing_time(k, space.pi(), DEFAULT_THRESHOLD, 5000).unwrap();
            let lib = rational_mixing_time(k, space.pi(), DEFAULT_THRESHOLD, 5000).unwrap();
            assert_eq!(oracle, Some(float.mixing_time), "n={n} {}", k.label());
            assert_eq!(lib, oracle);
        }
    }
}

#[test]
fn exact_kernels_match_library_entries() {
    let n = 2;
    let model = build_hardcore_complete_bipartite(n).unwrap();
    let space = enumerate_state_space(&model, 64).unwrap();
    let sites = SiteKernels::build(&model, &space).unwrap();
    let states = common::hardcore_states(n);
    // Map oracle bit masks onto library state indices.
    let index: Vec<usize> = states
        .iter()
        .map(|&s| {
            let cfg: Vec<u8> = (0..2 * n).map(|b| ((s >> b) & 1) as u8).collect();
            space.index_of(&scanorder::model::Configuration::new(cfg)).unwrap()
        })
        .collect();
    let exact = common::hardcore_scan(n);
    let lib = sites.scan().unwrap().full;
    for (i, row) in exact.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let f: f64 = num_traits::ToPrimitive::to_f64(v).unwrap();
            assert!((lib.matrix()[(index[i], index[j])] - f).abs() < 1e-15);
        }
    }
}

#[test]
fn lumped_stationary_law_matches_power_iteration() {
    for n in [3, 6, 9] {
        let pi = lumped_pi(n).unwrap();
        let ru = lumped_ru_kernel(n, true).unwrap();
        let mu = common::power_iteration(&common::rows(ru.matrix()), 400_000);
        for (a, b) in pi.iter().zip(&mu) {
            assert!((a - b).abs() < 1e-9, "n={n}: {a} vs {b}");
        }
        let scan = lumped_as_kernel(n).unwrap();
        let mu = common::power_iteration(&common::rows(scan.matrix()), 50_000);
        for (a, b) in pi.iter().zip(&mu) {
            assert!((a - b).abs() < 1e-9, "n={n}: {a} vs {b}");
        }
    }
}

#[test]
fn lumped_empty_state_weight_closed_form() {
    // pi(empty) = 1 / (2^{n+1} - 1) for the uniform law on independent sets.
    for n in 1..=20 {
        let pi = lumped_pi(n).unwrap();
        let expected = 1.0 / ((1u64 << (n + 1)) - 1) as f64;
        assert!((pi[0] - expected).abs() <= 1e-15 * expected.max(1.0));
    }
}
