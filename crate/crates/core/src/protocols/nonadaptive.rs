//! Uniform non-adaptive design with full-family maximum likelihood.
//!
//! Shots cycle through the `3^n` bases in lexicographic order, so the
//! schedule depends only on `(n, M)`. The estimate maximizes
//! `LL(h) = Σ_b A_b[lcp(b, h)]` over all `3^n` hypotheses, where
//! `A_b[L] = Σ_o N_b(o) ln(1 + Σ_{k≤L} c_k S_k(o))` depends on `h` only
//! through the common-prefix length. Grouping bases by prefix cylinder makes
//! the scan `O(3^n n)` after an `O(3^n 2^n n)` table build.

use super::{ProtocolResult, Transcript};
use crate::error::{Error, Result};
use crate::family::CoefficientProfile;
use crate::pauli::BasisString;
use crate::sampler::ShotStream;

/// Largest `n` for which the `3^n`-way scan is attempted.
pub const NONADAPTIVE_MAX_QUBITS: usize = 9;

fn check_n(n: usize) -> Result<()> {
    if n > NONADAPTIVE_MAX_QUBITS {
        return Err(Error::EnumerationCap {
            n,
            cap: NONADAPTIVE_MAX_QUBITS,
        });
    }
    Ok(())
}

/// Shots per basis (lexicographic): the first `M mod 3^n` bases get one extra.
pub fn round_robin_counts(n: usize, total: u64) -> Result<Vec<u64>> {
    check_n(n)?;
    let d = 3u64.pow(n as u32);
    let (base, extra) = (total / d, total % d);
    Ok((0..d).map(|i| base + u64::from(i < extra)).collect())
}

/// Runs `total` shots; shot `t` is measured in basis `t mod 3^n`.
pub fn run_nonadaptive_uniform(
    stream: &mut ShotStream,
    total: u64,
    record: bool,
) -> Result<ProtocolResult> {
    let n = stream.instance().n();
    check_n(n)?;
    if total == 0 {
        return Err(Error::ZeroBudget);
    }
    let bases: Vec<BasisString> = BasisString::enumerate(n)?.collect();
    let mut transcript = None;
    let histograms: Vec<(BasisString, Vec<u64>)> = if record {
        let mut t = Transcript::new();
        for shot in 0..total {
            let b = &bases[(shot % bases.len() as u64) as usize];
            t.push(b, stream.draw_outcome(b)?);
        }
        let h = t.histograms()?;
        transcript = Some(t);
        h
    } else {
        let counts = round_robin_counts(n, total)?;
        let mut h = Vec::with_capacity(bases.len());
        for (b, &c) in bases.iter().zip(&counts) {
            if c > 0 {
                h.push((b.clone(), stream.draw_histogram(b, c)?));
            }
        }
        h
    };

    let estimate = max_likelihood_estimate(stream.instance().profile(), &histograms)?;
    Ok(ProtocolResult {
        correct: &estimate == stream.instance().hidden(),
        estimate,
        transcript,
        per_stage_shots: None,
        total_shots: total,
    })
}

/// `A_b[L]` for `L = 0..=n` from one basis' outcome counts.
fn depth_loglik(profile: &CoefficientProfile, counts: &[u64]) -> Vec<f64> {
    let n = profile.n();
    let mut a = vec![0.0; n + 1];
    for (rank, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let c = c as f64;
        let mut w = 1.0;
        let mut sign = 1.0;
        for k in 1..=n {
            if (rank >> (n - k)) & 1 == 1 {
                sign = -sign;
            }
            w += profile.coeff(k) * sign;
            a[k] += if w > 0.0 { c * w.ln() } else { f64::NEG_INFINITY };
        }
    }
    a
}

/// Maximum-likelihood hidden string given per-basis outcome counts; ties go
/// to the lexicographically smallest hypothesis.
pub fn max_likelihood_estimate(
    profile: &CoefficientProfile,
    histograms: &[(BasisString, Vec<u64>)],
) -> Result<BasisString> {
    let n = profile.n();
    check_n(n)?;
    let pow3: Vec<usize> = (0..=n).map(|e| 3usize.pow(e as u32)).collect();

    // cyl[l][v] = Σ over bases b with length-l prefix v of A_b[l − 1]: the
    // contribution of those bases to any hypothesis whose prefix agrees with
    // v on l − 1 symbols and differs at symbol l.
    let mut cyl: Vec<Vec<f64>> = (0..=n).map(|l| vec![0.0; pow3[l]]).collect();
    let mut full = vec![0.0; pow3[n]];
    for (b, counts) in histograms {
        if b.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: b.len(),
            });
        }
        if counts.len() != 1 << n {
            return Err(Error::LengthMismatch {
                expected: 1 << n,
                actual: counts.len(),
            });
        }
        let a = depth_loglik(profile, counts);
        let idx = b.index() as usize;
        for l in 1..=n {
            cyl[l][idx / pow3[n - l]] += a[l - 1];
        }
        full[idx] += a[n];
    }

    // Depth-first scan over hypotheses in lexicographic order, carrying the
    // sum of off-path sibling cylinders.
    let mut best = (f64::NEG_INFINITY, 0usize);
    let mut found = false;
    let mut stack = vec![(0usize, 0usize, 0.0f64)];
    while let Some((l, v, acc)) = stack.pop() {
        if l == n {
            let ll = acc + full[v];
            if !found || ll > best.0 {
                best = (ll, v);
                found = true;
            }
            continue;
        }
        let children = [3 * v, 3 * v + 1, 3 * v + 2];
        let s: [f64; 3] = children.map(|c| cyl[l + 1][c]);
        for j in (0..3).rev() {
            let off = s.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, x)| x).sum::<f64>();
            stack.push((l + 1, children[j], acc + off));
        }
    }
    BasisString::from_index(n, best.1 as u64)
}
