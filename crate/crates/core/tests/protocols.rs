mod common;

use common::*;
use prefixtomo::analysis::{one_shot_kl, Allocation, HardPair};
use prefixtomo::protocols::{
    round_robin_counts, run_adaptive, run_nonadaptive_uniform, transcript_log_likelihood, two_point_test,
    AdaptiveConfig, StageBudgets, StageRule,
};
use prefixtomo::rng::derive_key;
use prefixtomo::stats::{wilson_interval, Z_95};
use prefixtomo::{BasisString, CoefficientProfile, FamilyInstance, PauliAxis, ShotStream};

#[test]
fn nonadaptive_basis_sequence_ignores_the_state() {
    let mut r = rng(5);
    let total = 200;
    let mut reference: Option<Vec<BasisString>> = None;
    for trial in 0..8 {
        let inst = random_instance(&mut r, 3);
        let mut s = ShotStream::for_trial(inst, 99, trial);
        let res = run_nonadaptive_uniform(&mut s, total, true).unwrap();
        let seq: Vec<BasisString> = res.transcript.unwrap().basis_sequence().cloned().collect();
        assert_eq!(seq.len() as u64, total);
        for (t, b) in seq.iter().enumerate() {
            assert_eq!(b.index(), t as u64 % 27);
        }
        match &reference {
            Some(prev) => assert_eq!(prev, &seq),
            None => reference = Some(seq),
        }
    }
    let counts = round_robin_counts(3, total).unwrap();
    assert_eq!(counts.iter().sum::<u64>(), total);
    assert_eq!(counts[..11], [8; 11]);
    assert_eq!(counts[11..], [7; 16]);
}

#[test]
fn adaptive_spends_exactly_three_m_per_stage() {
    let inst = FamilyInstance::new(
        CoefficientProfile::corollary(4, 0.5).unwrap(),
        "ZXYZ".parse().unwrap(),
    )
    .unwrap();
    let cfg = AdaptiveConfig {
        rule: StageRule::Llr,
        budgets: StageBudgets::Explicit(vec![5, 6, 7, 8]),
        record: true,
    };
    let res = run_adaptive(&mut ShotStream::new(inst, 1), &cfg).unwrap();
    assert_eq!(res.total_shots, 3 * 26);
    assert_eq!(res.transcript.unwrap().total_shots(), 3 * 26);
}

/// One stage (`n = 1`): three candidates with `m` shots each. The stage
/// error probability is at most `6 exp(−mμ²/8)`.
#[test]
fn single_stage_error_within_bound() {
    let trials = 10_000u64;
    let mu = 0.3;
    let profile = CoefficientProfile::new(mu, vec![]).unwrap();
    for rule in [StageRule::Llr, StageRule::ArgMaxAbs] {
        for m in [50u64, 150, 300] {
            let mut errors = 0u64;
            for t in 0..trials {
                let hidden = BasisString::new(vec![PauliAxis::ALL[(t % 3) as usize]]).unwrap();
                let inst = FamilyInstance::new(profile.clone(), hidden).unwrap();
                let mut s = ShotStream::new(inst, derive_key(&[m, t, 1]));
                let cfg = AdaptiveConfig {
                    rule,
                    budgets: StageBudgets::Equal(m),
                    record: false,
                };
                errors += u64::from(!run_adaptive(&mut s, &cfg).unwrap().correct);
            }
            let bound = 6.0 * (-(m as f64) * mu * mu / 8.0).exp();
            let (lo, _) = wilson_interval(errors, trials, Z_95);
            assert!(lo <= bound, "{rule:?} m={m}: {errors}/{trials} errors vs bound {bound}");
        }
    }
}

#[test]
fn per_stage_budgets_reach_target_confidence_at_n4() {
    let n = 4;
    let eta = 0.1;
    let profile = CoefficientProfile::corollary(n, 0.5).unwrap();
    let mut r = rng(2024);
    let trials = 500u64;
    let mut ok = 0u64;
    for t in 0..trials {
        let inst = FamilyInstance::new(profile.clone(), random_basis(&mut r, n)).unwrap();
        let mut s = ShotStream::for_trial(inst, 8, t);
        let cfg = AdaptiveConfig {
            rule: StageRule::Llr,
            budgets: StageBudgets::Theorem1 { eta },
            record: false,
        };
        ok += u64::from(run_adaptive(&mut s, &cfg).unwrap().correct);
    }
    let rate = ok as f64 / trials as f64;
    assert!(rate >= 1.0 - eta, "success {rate}");
}

/// Under `ρ⁽⁰⁾` the mean transcript log-likelihood ratio is the chain-rule
/// KL `Σ_t D(p₀(·|b_t) ‖ p₁(·|b_t))`.
#[test]
fn transcript_llr_mean_matches_chain_rule_kl() {
    let n = 3;
    let profile = CoefficientProfile::new(0.45, vec![0.2, -0.15]).unwrap();
    let pair = HardPair::new(profile, &[PauliAxis::Y, PauliAxis::Z]).unwrap();
    let shots = 81u64;
    let trials = 10_000u64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for t in 0..trials {
        let mut s = ShotStream::for_trial(pair.instance0().clone(), 31, t);
        let tr = run_nonadaptive_uniform(&mut s, shots, true).unwrap().transcript.unwrap();
        let llr = transcript_log_likelihood(&tr, pair.instance0()).unwrap()
            - transcript_log_likelihood(&tr, pair.instance1()).unwrap();
        sum += llr;
        sum_sq += llr * llr;
    }
    let mean = sum / trials as f64;
    let se = ((sum_sq / trials as f64 - mean * mean) / trials as f64).sqrt();

    let mut exact = 0.0;
    for (i, &c) in round_robin_counts(n, shots).unwrap().iter().enumerate() {
        let b = BasisString::from_index(n, i as u64).unwrap();
        let p0 = dense_law(&dense_state(pair.profile(), pair.instance0().hidden()), &b);
        let p1 = dense_law(&dense_state(pair.profile(), pair.instance1().hidden()), &b);
        exact += c as f64 * dense_kl(&p0, &p1);
    }
    let alloc = Allocation::from_counts(n, &round_robin_counts(n, shots).unwrap()).unwrap();
    let lib = prefixtomo::analysis::transcript_kl_bound(&alloc, shots, &pair).unwrap().exact;
    assert!((lib - exact).abs() <= 1e-12, "{lib} vs {exact}");
    assert!((mean - exact).abs() <= 4.0 * se, "mean {mean} vs {exact} (se {se})");
}

#[test]
fn one_shot_kl_matches_dense_per_basis() {
    let profile = CoefficientProfile::new(-0.3, vec![0.25, 0.1]).unwrap();
    let pair = HardPair::new(profile, &[PauliAxis::X, PauliAxis::Z]).unwrap();
    let d0 = dense_state(pair.profile(), pair.instance0().hidden());
    let d1 = dense_state(pair.profile(), pair.instance1().hidden());
    for b in BasisString::enumerate(3).unwrap() {
        let dense = dense_kl(&dense_law(&d0, &b), &dense_law(&d1, &b));
        let lib = one_shot_kl(pair.instance0(), pair.instance1(), &b).unwrap();
        assert!((lib - dense).abs() <= 1e-15, "{b}: {lib} vs {dense}");
    }
}

#[test]
fn two_point_test_prefers_the_sampling_instance() {
    let profile = CoefficientProfile::new(0.5, vec![0.3]).unwrap();
    let pair = HardPair::new(profile, &[PauliAxis::Z]).unwrap();
    let mut s = ShotStream::new(pair.instance1().clone(), 4);
    let tr = run_nonadaptive_uniform(&mut s, 4500, true).unwrap().transcript.unwrap();
    assert_eq!(
        two_point_test(&tr, pair.instance0(), pair.instance1()).unwrap(),
        prefixtomo::protocols::TwoPointChoice::Second
    );
}
