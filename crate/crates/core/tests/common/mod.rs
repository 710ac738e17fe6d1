//! Test-side oracles built from scratch with nalgebra, sharing no code with
//! the library's closed forms, dense oracle or eigensolver.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use prefixtomo::family::random_profile;
use prefixtomo::rng::CounterRng;
use prefixtomo::{BasisString, CoefficientProfile, FamilyInstance, Outcome, PauliAxis};

pub type CMat = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn sigma(a: PauliAxis) -> CMat {
    let z = c(0.0, 0.0);
    match a {
        PauliAxis::X => CMat::from_row_slice(2, 2, &[z, c(1.0, 0.0), c(1.0, 0.0), z]),
        PauliAxis::Y => CMat::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
        PauliAxis::Z => CMat::from_row_slice(2, 2, &[c(1.0, 0.0), z, z, c(-1.0, 0.0)]),
    }
}

pub fn kron_all(factors: &[CMat]) -> CMat {
    factors
        .iter()
        .fold(CMat::identity(1, 1), |acc, f| acc.kronecker(f))
}

/// `σ_{a_1} ⊗ … ⊗ σ_{a_k} ⊗ I ⊗ … ⊗ I`.
pub fn prefix_pauli(n: usize, axes: &[PauliAxis], k: usize) -> CMat {
    let factors: Vec<CMat> = (0..n)
        .map(|j| if j < k { sigma(axes[j]) } else { CMat::identity(2, 2) })
        .collect();
    kron_all(&factors)
}

/// `2^{−n}(I + Σ_{k<n} β_k P_{≤k} + α P_{≤n})`.
pub fn dense_state(profile: &CoefficientProfile, hidden: &BasisString) -> CMat {
    let n = profile.n();
    let dim = 1 << n;
    let mut rho = CMat::identity(dim, dim);
    for (k, &beta) in profile.betas().iter().enumerate() {
        rho += prefix_pauli(n, hidden.axes(), k + 1) * c(beta, 0.0);
    }
    rho += prefix_pauli(n, hidden.axes(), n) * c(profile.alpha(), 0.0);
    rho * c(0.5f64.powi(n as i32), 0.0)
}

/// `⊗_j (I + s_j σ_{b_j})/2` with bit 0 meaning `s = +1`.
pub fn projector(b: &BasisString, o: &Outcome) -> CMat {
    let factors: Vec<CMat> = (0..b.len())
        .map(|j| {
            let s = if o.bit(j) == 0 { 1.0 } else { -1.0 };
            (CMat::identity(2, 2) + sigma(b.axis(j)) * c(s, 0.0)) * c(0.5, 0.0)
        })
        .collect();
    kron_all(&factors)
}

pub fn born(rho: &CMat, proj: &CMat) -> f64 {
    (rho * proj).trace().re
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigenvalues(m: &CMat) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn trace_distance(a: &CMat, b: &CMat) -> f64 {
    0.5 * eigenvalues(&(a - b)).iter().map(|x| x.abs()).sum::<f64>()
}

/// Full Born law over outcome ranks from the dense state.
pub fn dense_law(rho: &CMat, b: &BasisString) -> Vec<f64> {
    let n = b.len();
    (0..1u64 << n)
        .map(|r| born(rho, &projector(b, &Outcome::from_rank(n, r).unwrap())))
        .collect()
}

pub fn dense_kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| a * (a / b).ln())
        .sum()
}

pub fn rng(seed: u64) -> CounterRng {
    CounterRng::new(seed)
}

pub fn physical_profile(rng: &mut CounterRng, n: usize) -> CoefficientProfile {
    use rand::Rng;
    let s = rng.random_range(0.05..0.95);
    random_profile(rng, n, s).unwrap()
}

pub fn random_basis(rng: &mut CounterRng, n: usize) -> BasisString {
    use rand::Rng;
    BasisString::from_index(n, rng.random_range(0..3u64.pow(n as u32))).unwrap()
}

pub fn random_instance(rng: &mut CounterRng, n: usize) -> FamilyInstance {
    let p = physical_profile(rng, n);
    FamilyInstance::new(p, random_basis(rng, n)).unwrap()
}

/// Brute-force log-likelihood of every hypothesis, in lexicographic order.
pub fn naive_scores(profile: &CoefficientProfile, histograms: &[(BasisString, Vec<u64>)]) -> Vec<(BasisString, f64)> {
    let n = profile.n();
    BasisString::enumerate(n)
        .unwrap()
        .map(|h| {
            let inst = FamilyInstance::new(profile.clone(), h.clone()).unwrap();
            let mut ll = 0.0;
            for (b, counts) in histograms {
                for (r, &cnt) in counts.iter().enumerate() {
                    if cnt == 0 {
                        continue;
                    }
                    let p = inst
                        .outcome_probability(b, &Outcome::from_rank(n, r as u64).unwrap())
                        .unwrap();
                    ll += cnt as f64 * if p > 0.0 { p.ln() } else { f64::NEG_INFINITY };
                }
            }
            (h, ll)
        })
        .collect()
}

/// Brute-force maximum likelihood. Scores within a relative `1e-9` of the
/// best count as tied, since the brute-force sum rounds differently from
/// any other summation order; ties go to the lexicographic minimum.
pub fn naive_ml(profile: &CoefficientProfile, histograms: &[(BasisString, Vec<u64>)]) -> BasisString {
    let scores = naive_scores(profile, histograms);
    let best = scores.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-9 * best.abs().max(1.0);
    scores
        .into_iter()
        .find(|(_, ll)| *ll >= best - tol || best == f64::NEG_INFINITY)
        .unwrap()
        .0
}
