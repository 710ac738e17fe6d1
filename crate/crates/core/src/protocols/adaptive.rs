//! Stagewise prefix recovery.
//!
//! Stage `k` fixes the first `k−1` estimated symbols, measures the three
//! candidates `(b̂_{<k}, a, X, …, X)` for `a ∈ {X, Y, Z}` with `m_k` fresh
//! shots each, and keeps the candidate whose depth-`k` prefix statistic
//! carries signal.

use serde::{Deserialize, Serialize};

use super::{ProtocolResult, StageRule, Transcript};
use crate::error::{Error, Result};
use crate::family::CoefficientProfile;
use crate::pauli::{BasisString, PauliAxis};
use crate::sampler::ShotStream;

/// `m_k = ⌈(8/μ_k²) ln(6n/η)⌉` with `μ_k = β_k` (`k < n`) or `α` (`k = n`).
pub fn theorem1_stage_budget(profile: &CoefficientProfile, k: usize, eta: f64) -> Result<u64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "eta",
            value: eta,
            reason: "must lie in (0, 1)",
        });
    }
    let mu = profile.coefficient(k)?;
    if mu == 0.0 {
        return Err(Error::ZeroCoefficient { depth: k });
    }
    let n = profile.n() as f64;
    Ok((8.0 / (mu * mu) * (6.0 * n / eta).ln()).ceil() as u64)
}

/// How many shots each candidate gets at each stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageBudgets {
    /// The same `m` at every stage (total `3nm`).
    Equal(u64),
    /// The per-stage bound `m_k` for confidence `η`.
    Theorem1 { eta: f64 },
    /// Explicit `m_1, …, m_n`.
    Explicit(Vec<u64>),
}

impl StageBudgets {
    pub fn resolve(&self, profile: &CoefficientProfile) -> Result<Vec<u64>> {
        let n = profile.n();
        let m = match self {
            StageBudgets::Equal(m) => vec![*m; n],
            StageBudgets::Theorem1 { eta } => (1..=n)
                .map(|k| theorem1_stage_budget(profile, k, *eta))
                .collect::<Result<_>>()?,
            StageBudgets::Explicit(v) => {
                if v.len() != n {
                    return Err(Error::LengthMismatch {
                        expected: n,
                        actual: v.len(),
                    });
                }
                v.clone()
            }
        };
        if m.contains(&0) {
            return Err(Error::ZeroBudget);
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveConfig {
    pub rule: StageRule,
    pub budgets: StageBudgets,
    /// Keep every `(basis, outcome)` pair; otherwise only counts are drawn.
    pub record: bool,
}

/// Binomial log-likelihood ratio of `m(1+|ŝ|)/2` agreeing signs under
/// `P = (1+|μ|)/2` against `P = ½`.
pub fn stage_llr(s_hat: f64, mu: f64, m: u64) -> f64 {
    let p = 0.5 * (1.0 + mu.abs());
    if p == 0.5 {
        return 0.0;
    }
    let agree = 0.5 * m as f64 * (1.0 + s_hat.abs());
    let disagree = m as f64 - agree;
    let mut llr = agree * (2.0 * p).ln();
    if disagree > 0.0 {
        llr += disagree * (2.0 * (1.0 - p)).ln();
    }
    llr
}

pub fn run_adaptive(stream: &mut ShotStream, config: &AdaptiveConfig) -> Result<ProtocolResult> {
    let profile = stream.instance().profile().clone();
    let n = profile.n();
    let budgets = config.budgets.resolve(&profile)?;
    let mut transcript = config.record.then(Transcript::new);
    let mut prefix: Vec<PauliAxis> = Vec::with_capacity(n);
    let mut total = 0u64;

    for (k, &m) in (1..=n).zip(&budgets) {
        let mut scores = [0.0f64; 3];
        for (slot, a) in PauliAxis::ALL.into_iter().enumerate() {
            let b = BasisString::padded(&prefix, a, n)?;
            let s_hat = match transcript.as_mut() {
                Some(t) => {
                    let mut sum = 0i64;
                    for _ in 0..m {
                        let o = stream.draw_outcome(&b)?;
                        sum += i64::from(o.prefix_sign(k));
                        t.push(&b, o);
                    }
                    sum as f64 / m as f64
                }
                None => {
                    let plus = stream.prefix_statistic_count(&b, k, m)?;
                    2.0 * plus as f64 / m as f64 - 1.0
                }
            };
            scores[slot] = match config.rule {
                StageRule::ArgMaxAbs => s_hat.abs(),
                StageRule::Llr => stage_llr(s_hat, profile.coeff(k), m),
            };
            total += m;
        }
        // Strict comparison keeps the first maximizer, so ties go X < Y < Z.
        let mut best = 0;
        for slot in 1..3 {
            if scores[slot] > scores[best] {
                best = slot;
            }
        }
        prefix.push(PauliAxis::ALL[best]);
    }

    let estimate = BasisString::new(prefix)?;
    Ok(ProtocolResult {
        correct: &estimate == stream.instance().hidden(),
        estimate,
        transcript,
        per_stage_shots: Some(budgets),
        total_shots: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::FamilyInstance;

    #[test]
    fn theorem1_budget_examples() {
        let p = CoefficientProfile::corollary(2, 0.5).unwrap();
        // 512 ln 120 = 2451.196…
        assert_eq!(theorem1_stage_budget(&p, 1, 0.1).unwrap(), 2452);
        assert_eq!(theorem1_stage_budget(&p, 2, 0.1).unwrap(), 2452);
        assert!(theorem1_stage_budget(&p, 3, 0.1).is_err());
        assert!(theorem1_stage_budget(&p, 1, 1.0).is_err());
        let z = CoefficientProfile::new(0.1, vec![0.0]).unwrap();
        assert!(matches!(
            theorem1_stage_budget(&z, 1, 0.1),
            Err(Error::ZeroCoefficient { depth: 1 })
        ));
    }

    #[test]
    fn doubling_mu_quarters_the_budget() {
        let a = CoefficientProfile::new(0.1, vec![0.1, 0.1]).unwrap();
        let b = CoefficientProfile::new(0.2, vec![0.2, 0.2]).unwrap();
        let ma = theorem1_stage_budget(&a, 1, 0.05).unwrap() as f64;
        let mb = theorem1_stage_budget(&b, 1, 0.05).unwrap() as f64;
        assert!((ma / 4.0 - mb).abs() <= 1.0);
    }

    #[test]
    fn llr_is_monotone_in_abs_signal() {
        let xs = [-0.9, -0.3, 0.0, 0.1, 0.4, 1.0];
        let mut pairs: Vec<(f64, f64)> = xs.iter().map(|&s| (s, stage_llr(s, -0.25, 400))).collect();
        pairs.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()));
        assert!(pairs.windows(2).all(|w| w[0].1 <= w[1].1));
        assert_eq!(stage_llr(0.7, 0.0, 100), 0.0);
    }

    #[test]
    fn deterministic_regime_recovers_hidden_string() {
        let i = FamilyInstance::new(
            CoefficientProfile::new(0.25, vec![0.25, 0.25, 0.25]).unwrap(),
            "ZYXZ".parse().unwrap(),
        )
        .unwrap();
        for rule in [StageRule::ArgMaxAbs, StageRule::Llr] {
            for record in [false, true] {
                let mut s = ShotStream::new(i.clone(), 17);
                let cfg = AdaptiveConfig {
                    rule,
                    budgets: StageBudgets::Equal(20_000),
                    record,
                };
                let r = run_adaptive(&mut s, &cfg).unwrap();
                assert!(r.correct);
                assert_eq!(r.total_shots, 3 * 4 * 20_000);
                assert_eq!(s.counter(), r.total_shots);
                if record {
                    assert_eq!(r.transcript.unwrap().total_shots(), r.total_shots);
                }
            }
        }
    }

    #[test]
    fn budgets_resolve_and_validate() {
        let p = CoefficientProfile::corollary(3, 0.5).unwrap();
        assert_eq!(StageBudgets::Equal(5).resolve(&p).unwrap(), vec![5, 5, 5]);
        assert!(StageBudgets::Equal(0).resolve(&p).is_err());
        assert!(StageBudgets::Explicit(vec![1, 2]).resolve(&p).is_err());
        let t = StageBudgets::Theorem1 { eta: 0.1 }.resolve(&p).unwrap();
        assert_eq!(t.len(), 3);
        assert!(t[0] > t[2]);
    }
}
