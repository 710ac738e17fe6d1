//! The prefix/tree family in closed form.
//!
//! A member is `ρ = (I + Σ_{k<n} β_k P^{(k)} + α P^{(n)}) / 2^n`, where
//! `P^{(k)}` applies the first `k` Paulis of the hidden string and identity
//! elsewhere. Nothing here builds a matrix: outcome laws, expectations and
//! spectra all follow from which prefixes of the measured basis agree with
//! the hidden string.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{check_qubits, common_prefix, BasisString, Outcome};

/// Default cap on `n` for operations that enumerate `2^n` values.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

/// Negative probabilities above this magnitude are treated as bugs rather
/// than rounding noise.
pub const NEGATIVE_PROBABILITY_TOLERANCE: f64 = 1e-12;

/// Coefficients `(α, β_1, …, β_{n-1})` shared by every member of one family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientProfile {
    n: usize,
    alpha: f64,
    betas: Vec<f64>,
}

/// Result of the `|α| + Σ|β_k| ≤ 1` check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Physicality {
    pub passed: bool,
    /// `1 - (|α| + Σ|β_k|)`; negative when the check fails.
    pub margin: f64,
}

impl CoefficientProfile {
    pub fn new(alpha: f64, betas: Vec<f64>) -> Result<Self> {
        let n = betas.len() + 1;
        check_qubits(n)?;
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "must be finite",
            });
        }
        if let Some(&b) = betas.iter().find(|b| !b.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: b,
                reason: "must be finite",
            });
        }
        Ok(Self { n, alpha, betas })
    }

    /// `α = ε/4`, `β_k = ε/(4(n-1))`.
    pub fn corollary(n: usize, epsilon: f64) -> Result<Self> {
        check_qubits(n)?;
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: epsilon,
                reason: "must lie in (0, 1)",
            });
        }
        let alpha = epsilon / 4.0;
        let betas = if n == 1 {
            Vec::new()
        } else {
            vec![epsilon / (4.0 * (n - 1) as f64); n - 1]
        };
        Self::new(alpha, betas)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// `c_k`: `β_k` for `k < n`, `α` for `k = n` (1-based).
    pub fn coefficient(&self, depth: usize) -> Result<f64> {
        if depth == 0 || depth > self.n {
            return Err(Error::DepthOutOfRange { depth, n: self.n });
        }
        Ok(self.coeff(depth))
    }

    #[inline]
    pub(crate) fn coeff(&self, depth: usize) -> f64 {
        if depth == self.n {
            self.alpha
        } else {
            self.betas[depth - 1]
        }
    }

    pub fn abs_sum(&self) -> f64 {
        self.alpha.abs() + self.beta_abs_sum()
    }

    pub fn beta_abs_sum(&self) -> f64 {
        self.betas.iter().map(|b| b.abs()).sum()
    }

    pub fn check_physicality(&self) -> Physicality {
        let margin = 1.0 - self.abs_sum();
        Physicality {
            passed: margin >= 0.0,
            margin,
        }
    }

    /// Fails with the first zero coefficient; the adaptive guarantee needs all nonzero.
    pub fn require_nonzero(&self) -> Result<()> {
        match (1..=self.n).find(|&k| self.coeff(k) == 0.0) {
            Some(depth) => Err(Error::ZeroCoefficient { depth }),
            None => Ok(()),
        }
    }

    /// Same prefix coefficients with the full-depth term removed.
    pub fn without_alpha(&self) -> Self {
        Self {
            n: self.n,
            alpha: 0.0,
            betas: self.betas.clone(),
        }
    }

    /// Spectrum `(1 + Σ_{k<n} β_k s_k + α s_n) / 2^n` over all sign patterns
    /// `t ∈ {±1}^n` with `s_k = Π_{i≤k} t_i`, sorted ascending. Independent of
    /// the hidden string.
    pub fn state_eigenvalues(&self) -> Result<Vec<f64>> {
        self.state_eigenvalues_capped(DEFAULT_ENUMERATION_CAP)
    }

    pub fn state_eigenvalues_capped(&self, cap: usize) -> Result<Vec<f64>> {
        if self.n > cap {
            return Err(Error::EnumerationCap { n: self.n, cap });
        }
        let scale = 0.5f64.powi(self.n as i32);
        let mut values: Vec<f64> = (0..1u64 << self.n)
            .map(|t| {
                let mut s = 1.0;
                let mut x = 1.0;
                for k in 1..=self.n {
                    // bit set = t_k = -1
                    if (t >> (self.n - k)) & 1 == 1 {
                        s = -s;
                    }
                    x += self.coeff(k) * s;
                }
                x * scale
            })
            .collect();
        values.sort_by(f64::total_cmp);
        Ok(values)
    }
}

/// Random profile with `|α| + Σ|β_k| = abs_sum` exactly and `α ≠ 0`.
pub fn random_profile<R: Rng + ?Sized>(rng: &mut R, n: usize, abs_sum: f64) -> Result<CoefficientProfile> {
    check_qubits(n)?;
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let alpha_raw = if raw[n - 1] == 0.0 { 0.5 } else { raw[n - 1] };
    let total: f64 = raw[..n - 1].iter().map(|x| x.abs()).sum::<f64>() + alpha_raw.abs();
    let scale = abs_sum / total;
    CoefficientProfile::new(
        alpha_raw * scale,
        raw[..n - 1].iter().map(|x| x * scale).collect(),
    )
}

/// One member `ρ_{b⋆}` of a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyInstance {
    profile: CoefficientProfile,
    hidden: BasisString,
}

impl FamilyInstance {
    pub fn new(profile: CoefficientProfile, hidden: BasisString) -> Result<Self> {
        if hidden.len() != profile.n() {
            return Err(Error::LengthMismatch {
                expected: profile.n(),
                actual: hidden.len(),
            });
        }
        Ok(Self { profile, hidden })
    }

    pub fn profile(&self) -> &CoefficientProfile {
        &self.profile
    }

    pub fn hidden(&self) -> &BasisString {
        &self.hidden
    }

    pub fn n(&self) -> usize {
        self.profile.n()
    }

    pub fn state_eigenvalues(&self) -> Result<Vec<f64>> {
        self.profile.state_eigenvalues()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                actual: len,
            });
        }
        Ok(())
    }

    /// Number of leading depths at which `b` agrees with the hidden string.
    /// Depth `k` contributes to the outcome law iff `k ≤ matched_depth(b)`.
    pub fn matched_depth(&self, b: &BasisString) -> Result<usize> {
        self.check_len(b.len())?;
        Ok(common_prefix(b.axes(), self.hidden.axes()))
    }

    /// `Tr(P_b^{(k)} ρ)`: `c_k` when `b` matches the hidden string through depth `k`, else 0.
    pub fn prefix_expectation(&self, b: &BasisString, depth: usize) -> Result<f64> {
        self.check_len(b.len())?;
        if depth == 0 || depth > self.n() {
            return Err(Error::DepthOutOfRange {
                depth,
                n: self.n(),
            });
        }
        let matched = common_prefix(b.axes(), self.hidden.axes());
        Ok(if depth <= matched {
            self.profile.coeff(depth)
        } else {
            0.0
        })
    }

    /// Born probability `p(o | b, ρ)`, clamped to `[0, 1]` after checking that
    /// any negativity is rounding noise.
    pub fn outcome_probability(&self, b: &BasisString, o: &Outcome) -> Result<f64> {
        self.check_len(b.len())?;
        self.check_len(o.len())?;
        let matched = common_prefix(b.axes(), self.hidden.axes());
        clamp_probability(self.raw_probability(matched, o.rank()))
    }

    /// Unclamped closed form for an outcome rank at a given matched depth.
    #[inline]
    pub(crate) fn raw_probability(&self, matched: usize, rank: u64) -> f64 {
        law_weight(&self.profile, matched, rank) * 0.5f64.powi(self.n() as i32)
    }

    /// Full outcome law over all `2^n` outcomes in lexicographic order.
    pub fn outcome_distribution(&self, b: &BasisString) -> Result<Vec<f64>> {
        self.check_len(b.len())?;
        if self.n() > DEFAULT_ENUMERATION_CAP {
            return Err(Error::EnumerationCap {
                n: self.n(),
                cap: DEFAULT_ENUMERATION_CAP,
            });
        }
        let matched = common_prefix(b.axes(), self.hidden.axes());
        (0..1u64 << self.n())
            .map(|rank| clamp_probability(self.raw_probability(matched, rank)))
            .collect()
    }
}

/// `1 + Σ_{k ≤ matched} c_k S_k(o)` for the outcome with the given rank.
#[inline]
pub(crate) fn law_weight(profile: &CoefficientProfile, matched: usize, rank: u64) -> f64 {
    let n = profile.n();
    let mut weight = 1.0;
    let mut sign = 1.0;
    for k in 1..=matched {
        if (rank >> (n - k)) & 1 == 1 {
            sign = -sign;
        }
        weight += profile.coeff(k) * sign;
    }
    weight
}

pub(crate) fn clamp_probability(p: f64) -> Result<f64> {
    if p < -NEGATIVE_PROBABILITY_TOLERANCE {
        return Err(Error::NegativeProbability { value: p });
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Length of the longest common prefix of two equal-length strings.
pub fn longest_common_prefix(b: &BasisString, b2: &BasisString) -> Result<usize> {
    b.common_prefix_len(b2)
}

/// Bounds on `½‖ρ_b − ρ_{b2}‖₁` from the first mismatch `r`:
/// `|c_r|/2 ≤ D ≤ Σ_{k=r}^{n-1} |β_k| + |α|`.
pub fn trace_distance_bounds(
    profile: &CoefficientProfile,
    b: &BasisString,
    b2: &BasisString,
) -> Result<(f64, f64)> {
    for s in [b, b2] {
        if s.len() != profile.n() {
            return Err(Error::LengthMismatch {
                expected: profile.n(),
                actual: s.len(),
            });
        }
    }
    let lcp = b.common_prefix_len(b2)?;
    if lcp == profile.n() {
        return Err(Error::IdenticalStrings);
    }
    let r = lcp + 1;
    let lower = profile.coeff(r).abs() / 2.0;
    let upper = profile.betas()[r - 1..].iter().map(|b| b.abs()).sum::<f64>() + profile.alpha().abs();
    Ok((lower, upper))
}

/// `½‖ρ^{(0)} − ρ^{(1)}‖₁ = |α|/√2` for two members differing only in the last symbol.
pub fn hard_pair_trace_distance(alpha: f64) -> f64 {
    alpha.abs() * std::f64::consts::FRAC_1_SQRT_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn inst(alpha: f64, betas: Vec<f64>, hidden: &str) -> FamilyInstance {
        FamilyInstance::new(
            CoefficientProfile::new(alpha, betas).unwrap(),
            hidden.parse().unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn corollary_profile_examples() {
        let p = CoefficientProfile::corollary(2, 0.5).unwrap();
        assert_eq!(p.alpha(), 0.125);
        assert_eq!(p.betas(), &[0.125]);

        let p = CoefficientProfile::corollary(1, 0.5).unwrap();
        assert_eq!(p.alpha(), 0.125);
        assert!(p.betas().is_empty());

        let p = CoefficientProfile::corollary(5, 0.5).unwrap();
        assert_eq!(p.betas(), &[0.03125; 4]);
        assert_abs_diff_eq!(p.abs_sum(), 0.25, epsilon = 1e-15);
        let phys = p.check_physicality();
        assert!(phys.passed);
        assert_abs_diff_eq!(phys.margin, 0.75, epsilon = 1e-15);

        for eps in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(CoefficientProfile::corollary(3, eps).is_err());
        }
        assert!(CoefficientProfile::corollary(0, 0.5).is_err());
    }

    #[test]
    fn physicality_examples() {
        let boundary = CoefficientProfile::new(0.5, vec![0.3, 0.2]).unwrap();
        let phys = boundary.check_physicality();
        assert!(phys.passed);
        assert_abs_diff_eq!(phys.margin, 0.0, epsilon = 1e-15);

        let bad = CoefficientProfile::new(0.9, vec![0.2]).unwrap();
        assert!(!bad.check_physicality().passed);
    }

    #[test]
    fn eigenvalue_examples() {
        let p = CoefficientProfile::new(0.5, vec![]).unwrap();
        assert_eq!(p.state_eigenvalues().unwrap(), vec![0.25, 0.75]);

        // s1 = t1, s2 = t1 t2: (1 ± 0.3 ± 0.2)/4 with correlated signs
        let p = CoefficientProfile::new(0.2, vec![0.3]).unwrap();
        let ev = p.state_eigenvalues().unwrap();
        let expected = [0.125, 0.225, 0.275, 0.375];
        for (a, b) in ev.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }

        let big = CoefficientProfile::corollary(21, 0.5).unwrap();
        assert!(matches!(
            big.state_eigenvalues(),
            Err(Error::EnumerationCap { .. })
        ));
    }

    #[test]
    fn prefix_expectation_pattern() {
        let i = inst(0.2, vec![0.3, -0.1], "XYZ");
        let e = |b: &str, k| i.prefix_expectation(&b.parse().unwrap(), k).unwrap();
        assert_eq!(e("XZZ", 1), 0.3);
        assert_eq!(e("XYX", 2), -0.1);
        assert_eq!(e("XYX", 3), 0.0);
        assert_eq!(e("XYZ", 3), 0.2);
        assert_eq!(e("YYZ", 1), 0.0);
        assert_eq!(e("YYZ", 2), 0.0);
        assert!(i.prefix_expectation(&"XYZ".parse().unwrap(), 0).is_err());
        assert!(i.prefix_expectation(&"XYZ".parse().unwrap(), 4).is_err());
    }

    #[test]
    fn probability_examples() {
        let mixed = inst(0.0, vec![0.0, 0.0], "ZZZ");
        for o in Outcome::enumerate(3).unwrap() {
            assert_eq!(
                mixed.outcome_probability(&"XYZ".parse().unwrap(), &o).unwrap(),
                0.125
            );
        }

        let one = inst(0.3, vec![], "Y");
        let zero = Outcome::from_bits(&[0]).unwrap();
        assert_abs_diff_eq!(
            one.outcome_probability(&"Y".parse().unwrap(), &zero).unwrap(),
            0.65,
            epsilon = 1e-15
        );

        let i = inst(0.2, vec![0.3], "XY");
        let short: BasisString = "X".parse().unwrap();
        assert!(matches!(
            i.outcome_probability(&short, &Outcome::from_bits(&[0, 0]).unwrap()),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn unphysical_probability_is_rejected() {
        let i = inst(0.9, vec![0.9], "XX");
        // o = 10: S_1 = S_2 = -1, weight 1 - 0.9 - 0.9 < 0
        let o = Outcome::from_bits(&[1, 0]).unwrap();
        assert!(matches!(
            i.outcome_probability(&"XX".parse().unwrap(), &o),
            Err(Error::NegativeProbability { .. })
        ));
    }

    #[test]
    fn spike_limit_only_full_match_is_informative() {
        let i = inst(0.4, vec![0.0, 0.0, 0.0], "XYZX");
        for b in BasisString::enumerate(4).unwrap() {
            let dist = i.outcome_distribution(&b).unwrap();
            let uniform = dist.iter().all(|&p| p == 1.0 / 16.0);
            assert_eq!(uniform, &b != i.hidden(), "basis {b}");
        }
    }

    #[test]
    fn trace_bounds_examples() {
        let p = CoefficientProfile::new(0.2, vec![0.3, -0.1]).unwrap();
        let b: BasisString = "XYZ".parse().unwrap();
        let (lo, hi) = trace_distance_bounds(&p, &b, &"XYX".parse().unwrap()).unwrap();
        assert_abs_diff_eq!(lo, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(hi, 0.2, epsilon = 1e-15);
        let (lo, hi) = trace_distance_bounds(&p, &b, &"ZYZ".parse().unwrap()).unwrap();
        assert_abs_diff_eq!(lo, 0.15, epsilon = 1e-15);
        assert_abs_diff_eq!(hi, 0.6, epsilon = 1e-15);
        assert!(matches!(
            trace_distance_bounds(&p, &b, &b),
            Err(Error::IdenticalStrings)
        ));
    }

    #[test]
    fn hard_pair_distance_values() {
        assert_eq!(hard_pair_trace_distance(0.0), 0.0);
        assert_abs_diff_eq!(
            hard_pair_trace_distance(0.125),
            0.088_388_347_648_318_44,
            epsilon = 1e-15
        );
        assert_eq!(hard_pair_trace_distance(-0.125), hard_pair_trace_distance(0.125));
    }

    fn physical_instance(max_n: usize) -> impl Strategy<Value = FamilyInstance> {
        (1..=max_n)
            .prop_flat_map(|n| {
                (
                    proptest::collection::vec(-1.0f64..1.0, n),
                    0.0f64..=1.0,
                    proptest::collection::vec(0usize..3, n),
                )
            })
            .prop_map(|(raw, total, hidden)| {
                let s: f64 = raw.iter().map(|x| x.abs()).sum::<f64>().max(1e-12);
                let c: Vec<f64> = raw.iter().map(|x| x * total / s).collect();
                let (alpha, betas) = c.split_last().unwrap();
                let hidden = BasisString::new(
                    hidden.into_iter().map(|i| crate::pauli::PauliAxis::ALL[i]).collect(),
                )
                .unwrap();
                FamilyInstance::new(CoefficientProfile::new(*alpha, betas.to_vec()).unwrap(), hidden)
                    .unwrap()
            })
    }

    proptest! {
        #[test]
        fn distribution_normalized_and_nonnegative(i in physical_instance(6), bi in 0u64..729) {
            let n = i.n();
            let b = BasisString::from_index(n, bi % 3u64.pow(n as u32)).unwrap();
            let dist = i.outcome_distribution(&b).unwrap();
            let total: f64 = dist.iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
            prop_assert!(dist.iter().all(|&p| p >= 0.0));
        }

        #[test]
        fn expectation_consistency(i in physical_instance(6), bi in 0u64..729) {
            let n = i.n();
            let b = BasisString::from_index(n, bi % 3u64.pow(n as u32)).unwrap();
            let dist = i.outcome_distribution(&b).unwrap();
            for k in 1..=n {
                let mean: f64 = Outcome::enumerate(n).unwrap()
                    .map(|o| dist[o.rank() as usize] * o.prefix_sign(k) as f64)
                    .sum();
                prop_assert!((mean - i.prefix_expectation(&b, k).unwrap()).abs() <= 1e-12);
            }
        }

        #[test]
        fn spectrum_sums_to_one(i in physical_instance(8)) {
            let ev = i.state_eigenvalues().unwrap();
            prop_assert!((ev.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(ev[0] >= -1e-15);
        }

        #[test]
        fn bounds_are_ordered(i in physical_instance(6), bi in 0u64..729) {
            let n = i.n();
            let b = BasisString::from_index(n, bi % 3u64.pow(n as u32)).unwrap();
            if &b != i.hidden() {
                let (lo, hi) = trace_distance_bounds(i.profile(), i.hidden(), &b).unwrap();
                prop_assert!(lo <= hi);
            }
        }
    }
}
