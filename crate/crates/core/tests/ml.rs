mod common;

use common::*;
use prefixtomo::protocols::{max_likelihood_estimate, run_nonadaptive_uniform};
use prefixtomo::{BasisString, CoefficientProfile, FamilyInstance, ShotStream};
use proptest::prelude::*;

fn sampled_histograms(inst: &FamilyInstance, seed: u64, shots: u64) -> Vec<(BasisString, Vec<u64>)> {
    let mut s = ShotStream::new(inst.clone(), seed);
    BasisString::enumerate(inst.n())
        .unwrap()
        .map(|b| {
            let h = s.draw_histogram(&b, shots).unwrap();
            (b, h)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cylinder_ml_equals_brute_force(seed in any::<u64>(), n in 1usize..=3, shots in 1u64..40) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, n);
        let h = sampled_histograms(&inst, seed ^ 0x55, shots);
        let fast = max_likelihood_estimate(inst.profile(), &h).unwrap();
        prop_assert_eq!(fast, naive_ml(inst.profile(), &h));
    }

    #[test]
    fn ml_equals_brute_force_on_partial_designs(seed in any::<u64>(), keep in 1usize..27) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, 3);
        let mut h = sampled_histograms(&inst, seed, 7);
        h.truncate(keep);
        let fast = max_likelihood_estimate(inst.profile(), &h).unwrap();
        prop_assert_eq!(fast, naive_ml(inst.profile(), &h));
    }
}

#[test]
fn ml_with_unit_alpha_handles_zero_probabilities() {
    // |α| = 1 makes some outcomes impossible, so log-likelihoods hit −∞.
    let p = CoefficientProfile::new(1.0, vec![0.0, 0.0]).unwrap();
    let inst = FamilyInstance::new(p.clone(), "YZX".parse().unwrap()).unwrap();
    let h = sampled_histograms(&inst, 9, 5);
    let fast = max_likelihood_estimate(&p, &h).unwrap();
    assert_eq!(fast, naive_ml(&p, &h));
    assert_eq!(&fast, inst.hidden());
}

#[test]
fn ties_resolve_to_lexicographic_minimum() {
    let p = CoefficientProfile::new(0.3, vec![0.2]).unwrap();
    let empty: Vec<(BasisString, Vec<u64>)> = Vec::new();
    assert_eq!(max_likelihood_estimate(&p, &empty).unwrap().to_string(), "XX");
    assert_eq!(naive_ml(&p, &empty).to_string(), "XX");
}

#[test]
fn recorded_and_aggregated_paths_agree_with_brute_force() {
    let mut r = rng(44);
    for record in [true, false] {
        for trial in 0..6 {
            let inst = random_instance(&mut r, 2);
            let mut s = ShotStream::for_trial(inst.clone(), 3, trial);
            let res = run_nonadaptive_uniform(&mut s, 90, record).unwrap();
            assert_eq!(res.transcript.is_some(), record);
            if let Some(t) = &res.transcript {
                let h = t.histograms().unwrap();
                assert_eq!(res.estimate, naive_ml(inst.profile(), &h));
            }
            assert_eq!(res.correct, &res.estimate == inst.hidden());
        }
    }
}
