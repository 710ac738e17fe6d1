mod common;

use common::*;
use prefixtomo::analysis::HardPair;
use prefixtomo::family::hard_pair_trace_distance;
use prefixtomo::oracle::{born_probability, build_projector, build_state, hermitian_eig, trace_distance as lib_trace_distance};
use prefixtomo::{BasisString, CoefficientProfile, FamilyInstance, Outcome, PauliAxis};
use proptest::prelude::*;

#[test]
fn closed_form_law_matches_independent_dense_state() {
    let mut r = rng(101);
    for n in 1..=3 {
        for _ in 0..10 {
            let inst = random_instance(&mut r, n);
            let rho = dense_state(inst.profile(), inst.hidden());
            for b in BasisString::enumerate(n).unwrap() {
                let law = inst.outcome_distribution(&b).unwrap();
                let dense = dense_law(&rho, &b);
                for (p, q) in law.iter().zip(&dense) {
                    assert!((p - q).abs() <= 1e-12, "n={n} b={b}: {p} vs {q}");
                }
            }
        }
    }
}

#[test]
fn library_dense_oracle_matches_independent_construction() {
    let mut r = rng(102);
    for n in 1..=4 {
        let inst = random_instance(&mut r, n);
        let lib = build_state(&inst).unwrap();
        let ours = dense_state(inst.profile(), inst.hidden());
        for i in 0..1 << n {
            for j in 0..1 << n {
                assert!((lib.get(i, j) - ours[(i, j)]).norm() <= 1e-14);
            }
        }
        let b = random_basis(&mut r, n);
        let o = Outcome::from_rank(n, 1).unwrap();
        let p_lib = born_probability(&lib, &build_projector(&b, &o).unwrap()).unwrap();
        assert!((p_lib - born(&ours, &projector(&b, &o))).abs() <= 1e-13);
    }
}

#[test]
fn spectra_agree_across_eigensolvers() {
    let mut r = rng(103);
    for n in 1..=4 {
        for _ in 0..5 {
            let inst = random_instance(&mut r, n);
            let closed = inst.state_eigenvalues().unwrap();
            let jacobi = {
                let mut v = hermitian_eig(&build_state(&inst).unwrap()).unwrap().eigenvalues;
                v.sort_by(f64::total_cmp);
                v
            };
            let reference = eigenvalues(&dense_state(inst.profile(), inst.hidden()));
            for ((a, b), c) in closed.iter().zip(&jacobi).zip(&reference) {
                assert!((a - c).abs() <= 1e-10 && (b - c).abs() <= 1e-10);
            }
            assert!(reference[0] >= -1e-12, "physical profile has negative eigenvalue");
        }
    }
}

#[test]
fn hard_pair_trace_distance_matches_dense() {
    for n in 2..=4 {
        let profile = CoefficientProfile::corollary(n, 0.5).unwrap();
        let pair = HardPair::new(profile.clone(), &vec![PauliAxis::Z; n - 1]).unwrap();
        let d0 = dense_state(&profile, pair.instance0().hidden());
        let d1 = dense_state(&profile, pair.instance1().hidden());
        let dense = trace_distance(&d0, &d1);
        assert!((dense - hard_pair_trace_distance(0.125)).abs() <= 1e-10);
        assert!((hard_pair_trace_distance(0.125) - 0.088_388_347_648_318_44).abs() <= 1e-15);
        let lib = lib_trace_distance(&build_state(pair.instance0()).unwrap(), &build_state(pair.instance1()).unwrap()).unwrap();
        assert!((lib - dense).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn law_is_normalized_and_matches_dense(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, n);
        let b = random_basis(&mut r, n);
        let law = inst.outcome_distribution(&b).unwrap();
        prop_assert!((law.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let dense = dense_law(&dense_state(inst.profile(), inst.hidden()), &b);
        for (p, q) in law.iter().zip(&dense) {
            prop_assert!((p - q).abs() <= 1e-12);
        }
    }

    #[test]
    fn prefix_expectation_matches_dense(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, n);
        let b = random_basis(&mut r, n);
        let rho = dense_state(inst.profile(), inst.hidden());
        for k in 1..=n {
            let dense = (&rho * prefix_pauli(n, b.axes(), k)).trace().re;
            prop_assert!((inst.prefix_expectation(&b, k).unwrap() - dense).abs() <= 1e-12);
        }
    }

    #[test]
    fn trace_distance_respects_closed_bounds(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let p = physical_profile(&mut r, n);
        let b = random_basis(&mut r, n);
        let b2 = random_basis(&mut r, n);
        prop_assume!(b != b2);
        let (lo, hi) = prefixtomo::family::trace_distance_bounds(&p, &b, &b2).unwrap();
        let d = trace_distance(&dense_state(&p, &b), &dense_state(&p, &b2));
        prop_assert!(lo <= d + 1e-12 && d <= hi + 1e-12, "{lo} <= {d} <= {hi}");
        let i = FamilyInstance::new(p, b).unwrap();
        prop_assert_eq!(i.hidden().len(), n);
    }
}
