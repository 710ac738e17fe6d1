//! Closed-form divergences and budget formulas behind the non-adaptive
//! lower bound and the adaptive upper bound.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::{law_weight, CoefficientProfile, FamilyInstance};
use crate::pauli::{check_qubits, BasisString, PauliAxis};

/// Cap on `n` for enumerating `3^n` bases.
pub const ANALYSIS_MAX_QUBITS: usize = 12;

/// Cap on `n` for enumerating `2^n` outcomes in exact KL sums.
pub const KL_MAX_QUBITS: usize = 16;

/// Allocations must sum to one within this tolerance.
pub const ALLOCATION_TOLERANCE: f64 = 1e-12;

/// `r_max = |α|/δ` above this value is flagged.
pub const R_MAX_FLAG: f64 = 0.5;

fn check_analysis_n(n: usize) -> Result<()> {
    check_qubits(n)?;
    if n > ANALYSIS_MAX_QUBITS {
        return Err(Error::EnumerationCap {
            n,
            cap: ANALYSIS_MAX_QUBITS,
        });
    }
    Ok(())
}

/// Fraction of the budget spent on each basis, indexed lexicographically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Allocation {
    n: usize,
    weights: Vec<f64>,
}

impl Allocation {
    pub fn new(n: usize, weights: Vec<f64>) -> Result<Self> {
        check_analysis_n(n)?;
        let expected = 3usize.pow(n as u32);
        if weights.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: weights.len(),
            });
        }
        if let Some(&w) = weights.iter().find(|w| !(**w >= 0.0)) {
            return Err(Error::InvalidAllocation(format!("negative or NaN weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > ALLOCATION_TOLERANCE {
            return Err(Error::InvalidAllocation(format!("weights sum to {total}")));
        }
        Ok(Self { n, weights })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        check_analysis_n(n)?;
        let d = 3usize.pow(n as u32);
        Self::new(n, vec![1.0 / d as f64; d])
    }

    /// Normalizes nonnegative raw weights.
    pub fn from_unnormalized(n: usize, raw: Vec<f64>) -> Result<Self> {
        let total: f64 = raw.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidAllocation(format!("total weight {total}")));
        }
        Self::new(n, raw.into_iter().map(|w| w / total).collect())
    }

    /// Empirical allocation of a deterministic design with these shot counts.
    pub fn from_counts(n: usize, counts: &[u64]) -> Result<Self> {
        Self::from_unnormalized(n, counts.iter().map(|&c| c as f64).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, b: &BasisString) -> Result<f64> {
        if b.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: b.len(),
            });
        }
        Ok(self.weights[b.index() as usize])
    }

    /// `μ(B_u)` for a prefix `u` of length `n − 1`.
    pub fn cylinder_mass(&self, prefix: &[PauliAxis]) -> Result<f64> {
        if prefix.len() + 1 != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n - 1,
                actual: prefix.len(),
            });
        }
        let base = 3 * prefix.iter().fold(0usize, |acc, a| 3 * acc + a.index());
        Ok(self.weights[base..base + 3].iter().sum())
    }
}

/// The least-sampled prefix cylinder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RareCylinder {
    /// `u⋆`, of length `n − 1` (empty for `n = 1`).
    pub prefix: Vec<PauliAxis>,
    pub mass: f64,
}

/// Minimizes `μ(B_u)` over all `3^{n−1}` prefixes; ties go to the
/// lexicographically smallest `u`.
pub fn rare_cylinder(alloc: &Allocation) -> RareCylinder {
    let (best, mass) = alloc
        .weights
        .chunks_exact(3)
        .map(|c| c.iter().sum::<f64>())
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, m)| if m < acc.1 { (i, m) } else { acc });
    let mut prefix = vec![PauliAxis::X; alloc.n - 1];
    let mut i = best;
    for slot in prefix.iter_mut().rev() {
        *slot = PauliAxis::ALL[i % 3];
        i /= 3;
    }
    RareCylinder { prefix, mass }
}

/// Two members `(u⋆, X)` and `(u⋆, Y)` of one family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardPair {
    prefix: Vec<PauliAxis>,
    instance0: FamilyInstance,
    instance1: FamilyInstance,
}

impl HardPair {
    pub fn new(profile: CoefficientProfile, prefix: &[PauliAxis]) -> Result<Self> {
        let n = profile.n();
        if prefix.len() + 1 != n {
            return Err(Error::LengthMismatch {
                expected: n - 1,
                actual: prefix.len(),
            });
        }
        let b0 = BasisString::padded(prefix, PauliAxis::X, n)?;
        let b1 = BasisString::padded(prefix, PauliAxis::Y, n)?;
        Ok(Self {
            prefix: prefix.to_vec(),
            instance0: FamilyInstance::new(profile.clone(), b0)?,
            instance1: FamilyInstance::new(profile, b1)?,
        })
    }

    pub fn prefix(&self) -> &[PauliAxis] {
        &self.prefix
    }

    pub fn instance0(&self) -> &FamilyInstance {
        &self.instance0
    }

    pub fn instance1(&self) -> &FamilyInstance {
        &self.instance1
    }

    pub fn profile(&self) -> &CoefficientProfile {
        self.instance0.profile()
    }

    /// `δ = 1 − Σ|β_k|`.
    pub fn delta(&self) -> f64 {
        1.0 - self.profile().beta_abs_sum()
    }

    /// `|α|/δ`, the largest relative tilt the alternative puts on the baseline law.
    pub fn r_max(&self) -> f64 {
        self.profile().alpha().abs() / self.delta()
    }

    /// Set when `r_max` exceeds the small-tilt regime the KL estimate assumes.
    pub fn r_max_flagged(&self) -> bool {
        self.r_max() > R_MAX_FLAG
    }

    /// The shared baseline: same prefix coefficients, no depth-`n` term,
    /// hidden string `(u⋆, X)`.
    pub fn baseline(&self) -> FamilyInstance {
        FamilyInstance::new(
            self.profile().without_alpha(),
            self.instance0.hidden().clone(),
        )
        .expect("same length as instance0")
    }

    /// `2^n · min_o p(o | b, ρ_pref)`.
    pub fn baseline_floor(&self, b: &BasisString) -> Result<f64> {
        let base = self.baseline();
        let n = base.n();
        if n > KL_MAX_QUBITS {
            return Err(Error::EnumerationCap {
                n,
                cap: KL_MAX_QUBITS,
            });
        }
        let matched = base.matched_depth(b)?;
        Ok((0..1u64 << n)
            .map(|r| law_weight(base.profile(), matched, r))
            .fold(f64::INFINITY, f64::min))
    }
}

/// `kl(α) = (1+α)/2 ln(1+α) + (1−α)/2 ln(1−α)`.
pub fn kl_alpha(alpha: f64) -> Result<f64> {
    if !(alpha.abs() < 1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "|alpha| must be below 1",
        });
    }
    Ok(0.5 * (1.0 + alpha) * alpha.ln_1p() + 0.5 * (1.0 - alpha) * (-alpha).ln_1p())
}

/// `D(Ber(p) ‖ Ber(q))` with `0 ln 0 = 0`.
pub fn bernoulli_kl(p: f64, q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter {
            name: "p",
            value: p,
            reason: "must lie in [0, 1]",
        });
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter {
            name: "q",
            value: q,
            reason: "must lie in [0, 1]",
        });
    }
    let term = |a: f64, b: f64| -> Result<f64> {
        if a == 0.0 {
            Ok(0.0)
        } else if b == 0.0 {
            Err(Error::SupportMismatch {
                outcome: 0,
                p0: a,
            })
        } else {
            Ok(a * (a / b).ln())
        }
    };
    Ok(term(p, q)? + term(1.0 - p, 1.0 - q)?)
}

/// Exact `D(p₀(·|b) ‖ p₁(·|b))` for two members of one family. Exactly 0
/// when both hidden strings agree with `b` to the same depth, since the
/// laws are then identical.
pub fn one_shot_kl(i0: &FamilyInstance, i1: &FamilyInstance, b: &BasisString) -> Result<f64> {
    if i0.profile() != i1.profile() {
        return Err(Error::ProfileMismatch);
    }
    let m0 = i0.matched_depth(b)?;
    let m1 = i1.matched_depth(b)?;
    if m0 == m1 {
        return Ok(0.0);
    }
    let n = i0.n();
    if n > KL_MAX_QUBITS {
        return Err(Error::EnumerationCap {
            n,
            cap: KL_MAX_QUBITS,
        });
    }
    let profile = i0.profile();
    let mut kl = 0.0;
    for rank in 0..1u64 << n {
        let w0 = law_weight(profile, m0, rank);
        let w1 = law_weight(profile, m1, rank);
        if w0 <= 0.0 {
            continue;
        }
        if w1 <= 0.0 {
            return Err(Error::SupportMismatch {
                outcome: rank,
                p0: w0 * 0.5f64.powi(n as i32),
            });
        }
        kl += w0 * (w0 / w1).ln();
    }
    Ok(kl * 0.5f64.powi(n as i32))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TranscriptKl {
    /// `M Σ_b μ(b) D(p₀(·|b) ‖ p₁(·|b))`.
    pub exact: f64,
    /// `M μ(B_{u⋆}) α²/δ`.
    pub cylinder_bound: f64,
    /// `M (μ(b⁽⁰⁾) + μ(b⁽¹⁾)) α²/δ`.
    pub two_basis_bound: f64,
}

/// Transcript KL of a non-adaptive design (chain rule) and its
/// cylinder-mass bounds.
pub fn transcript_kl_bound(alloc: &Allocation, shots: u64, pair: &HardPair) -> Result<TranscriptKl> {
    let n = pair.profile().n();
    if alloc.n() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: alloc.n(),
        });
    }
    let m = shots as f64;
    let mut exact = 0.0;
    for (i, &w) in alloc.weights().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let b = BasisString::from_index(n, i as u64)?;
        exact += w * one_shot_kl(pair.instance0(), pair.instance1(), &b)?;
    }
    let per_shot = pair.profile().alpha().powi(2) / pair.delta();
    let mu0 = alloc.weight(pair.instance0().hidden())?;
    let mu1 = alloc.weight(pair.instance1().hidden())?;
    Ok(TranscriptKl {
        exact: m * exact,
        cylinder_bound: m * alloc.cylinder_mass(pair.prefix())? * per_shot,
        two_basis_bound: m * (mu0 + mu1) * per_shot,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudgetFormulas {
    /// `24 ln(6n/η)(Σ_k β_k^{−2} + α^{−2})`.
    pub adaptive_upper: f64,
    /// `3^{n−1} ln(1/η) / kl(α)`, the lower bound without its constant.
    pub nonadaptive_lower_shape: f64,
}

pub fn budget_formulas(profile: &CoefficientProfile, eta: f64) -> Result<BudgetFormulas> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "eta",
            value: eta,
            reason: "must lie in (0, 1)",
        });
    }
    profile.require_nonzero()?;
    let n = profile.n();
    let inv_sq: f64 = profile.betas().iter().map(|b| b.powi(-2)).sum::<f64>() + profile.alpha().powi(-2);
    Ok(BudgetFormulas {
        adaptive_upper: 24.0 * (6.0 * n as f64 / eta).ln() * inv_sq,
        nonadaptive_lower_shape: 3f64.powi(n as i32 - 1) * (1.0 / eta).ln() / kl_alpha(profile.alpha())?,
    })
}

/// Constant-free shapes of the concrete separation for the standard profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationShapes {
    /// `n³ ε^{−2} ln(n/η)`.
    pub adaptive: f64,
    /// `3^{n−1} ε^{−2} ln(1/η)`.
    pub nonadaptive: f64,
}

pub fn separation_shapes(n: usize, epsilon: f64, eta: f64) -> Result<SeparationShapes> {
    check_qubits(n)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: epsilon,
            reason: "must lie in (0, 1)",
        });
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "eta",
            value: eta,
            reason: "must lie in (0, 1)",
        });
    }
    let nf = n as f64;
    let e2 = epsilon.powi(-2);
    Ok(SeparationShapes {
        adaptive: nf.powi(3) * e2 * (nf / eta).ln(),
        nonadaptive: 3f64.powi(n as i32 - 1) * e2 * (1.0 / eta).ln(),
    })
}
