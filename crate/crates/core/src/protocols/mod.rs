//! Measurement strategies run against a [`ShotStream`](crate::sampler::ShotStream).

mod adaptive;
mod nonadaptive;
mod transcript;

pub use adaptive::{run_adaptive, stage_llr, theorem1_stage_budget, AdaptiveConfig, StageBudgets};
pub use nonadaptive::{
    max_likelihood_estimate, round_robin_counts, run_nonadaptive_uniform, NONADAPTIVE_MAX_QUBITS,
};
pub use transcript::{transcript_log_likelihood, Transcript};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::FamilyInstance;
use crate::pauli::BasisString;

/// Per-stage selection among the three candidate symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageRule {
    /// Largest `|ŝ_{k,a}|`.
    ArgMaxAbs,
    /// Largest binomial log-likelihood ratio of the agreeing-sign count,
    /// signal `(1+|μ_k|)/2` against null `½`.
    Llr,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolResult {
    pub estimate: BasisString,
    /// Present only when the run was asked to record shots.
    pub transcript: Option<Transcript>,
    /// Adaptive runs: shots per candidate at each stage.
    pub per_stage_shots: Option<Vec<u64>>,
    pub total_shots: u64,
    /// `estimate == b⋆` for the instance the stream was drawing from.
    pub correct: bool,
}

/// Which hypothesis a two-point test picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TwoPointChoice {
    First,
    Second,
}

/// Transcript log-likelihood ratio test between two members of one family:
/// picks `h1` iff `Σ_t ln[p(o_t|b_t,ρ₁)/p(o_t|b_t,ρ₀)] > 0`.
pub fn two_point_test(
    t: &Transcript,
    h0: &FamilyInstance,
    h1: &FamilyInstance,
) -> Result<TwoPointChoice> {
    if h0.profile() != h1.profile() {
        return Err(Error::ProfileMismatch);
    }
    let mut llr = 0.0;
    for (b, o) in t.iter() {
        let p0 = h0.outcome_probability(b, &o)?;
        let p1 = h1.outcome_probability(b, &o)?;
        if p0 != p1 {
            llr += p1.ln() - p0.ln();
        }
    }
    Ok(if llr > 0.0 {
        TwoPointChoice::Second
    } else {
        TwoPointChoice::First
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::CoefficientProfile;
    use crate::pauli::PauliAxis;
    use crate::sampler::ShotStream;

    fn pair(n: usize, alpha: f64) -> (FamilyInstance, FamilyInstance) {
        let p = CoefficientProfile::new(alpha, vec![0.2; n - 1]).unwrap();
        let u = BasisString::uniform(n - 1, PauliAxis::Z).unwrap();
        let b0 = BasisString::padded(u.axes(), PauliAxis::X, n).unwrap();
        let b1 = BasisString::padded(u.axes(), PauliAxis::Y, n).unwrap();
        (
            FamilyInstance::new(p.clone(), b0).unwrap(),
            FamilyInstance::new(p, b1).unwrap(),
        )
    }

    #[test]
    fn empty_transcript_picks_first() {
        let (h0, h1) = pair(3, 0.1);
        assert_eq!(
            two_point_test(&Transcript::new(), &h0, &h1).unwrap(),
            TwoPointChoice::First
        );
    }

    #[test]
    fn shots_outside_cylinder_carry_no_evidence() {
        let (h0, h1) = pair(3, 0.3);
        let mut s = ShotStream::new(h0.clone(), 4);
        let mut t = Transcript::new();
        for b in ["XXX", "ZZZ", "YZX", "ZYY"] {
            let b: BasisString = b.parse().unwrap();
            for _ in 0..500 {
                t.push(&b, s.draw_outcome(&b).unwrap());
            }
        }
        assert_eq!(two_point_test(&t, &h0, &h1).unwrap(), TwoPointChoice::First);
        assert_eq!(two_point_test(&t, &h1, &h0).unwrap(), TwoPointChoice::First);
    }

    #[test]
    fn concentrated_budget_separates_the_pair() {
        let (h0, h1) = pair(3, 0.5);
        let mut wrong = 0;
        for trial in 0..200 {
            let mut s = ShotStream::for_trial(h1.clone(), 8, trial);
            let mut t = Transcript::new();
            for _ in 0..200 {
                let b = h0.hidden().clone();
                t.push(&b, s.draw_outcome(&b).unwrap());
            }
            if two_point_test(&t, &h0, &h1).unwrap() != TwoPointChoice::Second {
                wrong += 1;
            }
        }
        assert!(wrong <= 4, "{wrong} errors");
    }

    #[test]
    fn profiles_must_match() {
        let (h0, _) = pair(3, 0.1);
        let (_, h1) = pair(3, 0.2);
        assert!(matches!(
            two_point_test(&Transcript::new(), &h0, &h1),
            Err(Error::ProfileMismatch)
        ));
    }
}
