//! Cyclic complex Jacobi eigensolver for small Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary and then applies a real Givens rotation, so `A ← U^H A U` with
//! `U = D R` zeroes `a_pq` exactly. Cost is `O(d³)` per sweep.

use num_complex::Complex64;

use super::DenseHermitian;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_SWEEPS: usize = 100;

/// Largest dimension accepted (`n = 8`).
pub const MAX_EIGEN_DIM: usize = 256;

/// Convergence target: off-diagonal Frobenius norm relative to `‖A‖_F`.
const RELATIVE_OFF_DIAGONAL_TOL: f64 = 1e-12;

/// Hermiticity is checked on entry.
const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[j]` belongs to `eigenvalues[j]`.
    pub eigenvectors: Vec<Vec<Complex64>>,
    pub sweeps: usize,
}

impl SpectralDecomposition {
    /// `V Λ V†`.
    pub fn reconstruct(&self) -> DenseHermitian {
        let d = self.eigenvalues.len();
        let mut m = DenseHermitian::zeros(d);
        for (lambda, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            for i in 0..d {
                let vi = v[i] * *lambda;
                for j in 0..d {
                    let cur = m.get(i, j);
                    m.set(i, j, cur + vi * v[j].conj());
                }
            }
        }
        m
    }

    /// `max_ij |(V†V − I)_ij|`.
    pub fn orthonormality_error(&self) -> f64 {
        let d = self.eigenvectors.len();
        let mut worst = 0.0f64;
        for a in 0..d {
            for b in a..d {
                let ip: Complex64 = self.eigenvectors[a]
                    .iter()
                    .zip(&self.eigenvectors[b])
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((ip - target).norm());
            }
        }
        worst
    }
}

fn off_diagonal_norm(a: &DenseHermitian) -> f64 {
    let d = a.dim();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                s += a.get(i, j).norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Full eigendecomposition with the default sweep budget.
pub fn hermitian_eig(a: &DenseHermitian) -> Result<SpectralDecomposition> {
    hermitian_eig_with_budget(a, DEFAULT_MAX_SWEEPS)
}

pub fn hermitian_eig_with_budget(a: &DenseHermitian, max_sweeps: usize) -> Result<SpectralDecomposition> {
    let d = a.dim();
    if d > MAX_EIGEN_DIM {
        return Err(Error::EnumerationCap {
            n: d,
            cap: MAX_EIGEN_DIM,
        });
    }
    let deviation = a.hermiticity_error();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }

    let mut w = a.clone();
    let mut v = DenseHermitian::identity(d);
    let target = RELATIVE_OFF_DIAGONAL_TOL * a.frobenius_norm();
    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&w);
        if off <= target || off == 0.0 {
            break;
        }
        if sweeps == max_sweeps {
            return Err(Error::NonConvergence {
                sweeps,
                off_norm: off,
            });
        }
        for p in 0..d {
            for q in p + 1..d {
                rotate(&mut w, &mut v, p, q);
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| w.get(i, i).re.total_cmp(&w.get(j, j).re));
    let eigenvalues = order.iter().map(|&i| w.get(i, i).re).collect();
    let eigenvectors = order
        .iter()
        .map(|&j| (0..d).map(|i| v.get(i, j)).collect())
        .collect();
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        sweeps,
    })
}

fn rotate(w: &mut DenseHermitian, v: &mut DenseHermitian, p: usize, q: usize) {
    let apq = w.get(p, q);
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = w.get(p, p).re;
    let aqq = w.get(q, q).re;
    // Skip pivots already negligible against the diagonal.
    if mag <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        w.set(p, q, Complex64::new(0.0, 0.0));
        w.set(q, p, Complex64::new(0.0, 0.0));
        return;
    }
    let phase = apq / mag; // e^{iφ}
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let phase_conj = phase.conj();
    let d = w.dim();

    // A ← A U with U_pp = c, U_pq = s, U_qp = −s e^{−iφ}, U_qq = c e^{−iφ}
    for r in 0..d {
        let arp = w.get(r, p);
        let arq = w.get(r, q);
        w.set(r, p, arp * c - arq * phase_conj * s);
        w.set(r, q, arp * s + arq * phase_conj * c);
    }
    // A ← U^H A
    for r in 0..d {
        let apr = w.get(p, r);
        let aqr = w.get(q, r);
        w.set(p, r, apr * c - aqr * phase * s);
        w.set(q, r, apr * s + aqr * phase * c);
    }
    w.set(p, q, Complex64::new(0.0, 0.0));
    w.set(q, p, Complex64::new(0.0, 0.0));
    w.set(p, p, Complex64::new(w.get(p, p).re, 0.0));
    w.set(q, q, Complex64::new(w.get(q, q).re, 0.0));

    // V ← V U
    for r in 0..d {
        let vrp = v.get(r, p);
        let vrq = v.get(r, q);
        v.set(r, p, vrp * c - vrq * phase_conj * s);
        v.set(r, q, vrp * s + vrq * phase_conj * c);
    }
}

/// `½ Σ |λ_i(A − B)|`.
pub fn trace_distance(a: &DenseHermitian, b: &DenseHermitian) -> Result<f64> {
    let diff = a.sub(b)?;
    let eig = hermitian_eig(&diff)?;
    Ok(0.5 * eig.eigenvalues.iter().map(|x| x.abs()).sum::<f64>())
}
