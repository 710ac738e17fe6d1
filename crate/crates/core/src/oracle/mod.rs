//! Dense reference implementation.
//!
//! Builds `2^n × 2^n` matrices for states, prefix Pauli operators and product
//! projectors, and evaluates Born probabilities and trace distances the slow
//! way. Used only to cross-check the closed forms; capped at `n ≤ 8`.

mod eigen;

pub use eigen::{hermitian_eig, trace_distance, SpectralDecomposition, DEFAULT_MAX_SWEEPS};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::family::FamilyInstance;
use crate::pauli::{BasisString, Outcome, PauliAxis};

/// Largest qubit count the oracle will materialize.
pub const ORACLE_MAX_QUBITS: usize = 8;

/// Imaginary parts of Born probabilities above this are reported as errors.
pub const IMAGINARY_TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense square complex matrix, row-major. Every constructor in this module
/// produces a Hermitian matrix; [`DenseHermitian::hermiticity_error`] reports
/// how far an arbitrary one is from that.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHermitian {
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseHermitian {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = Complex64::new(d, 0.0);
        }
        m
    }

    pub fn pauli(axis: PauliAxis) -> Self {
        let rows = match axis {
            PauliAxis::X => [[ZERO, ONE], [ONE, ZERO]],
            PauliAxis::Y => [[ZERO, -I], [I, ZERO]],
            PauliAxis::Z => [[ONE, ZERO], [ZERO, -ONE]],
        };
        Self {
            dim: 2,
            data: rows.concat(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn kron(&self, other: &Self) -> Self {
        let d = self.dim * other.dim;
        let mut out = Self::zeros(d);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let a = self.get(i, j);
                if a == ZERO {
                    continue;
                }
                for k in 0..other.dim {
                    for l in 0..other.dim {
                        out.data[(i * other.dim + k) * d + j * other.dim + l] = a * other.get(k, l);
                    }
                }
            }
        }
        out
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * other.data[k * d + j];
                }
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<Complex64> {
        self.check_dims(other)?;
        let d = self.dim;
        let mut acc = ZERO;
        for i in 0..d {
            for j in 0..d {
                acc += self.data[i * d + j] * other.data[j * d + i];
            }
        }
        Ok(acc)
    }

    /// `max_ij |A_ij − B_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_dims(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `max_ij |A_ij − conj(A_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn check_cap(n: usize) -> Result<()> {
    if n == 0 || n > ORACLE_MAX_QUBITS {
        return Err(Error::EnumerationCap {
            n,
            cap: ORACLE_MAX_QUBITS,
        });
    }
    Ok(())
}

/// `(σ_{b_1} ⊗ … ⊗ σ_{b_k}) ⊗ I^{⊗(n−k)}`; `k = 0` gives the identity.
pub fn build_pauli_prefix(n: usize, b: &BasisString, depth: usize) -> Result<DenseHermitian> {
    check_cap(n)?;
    if b.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: b.len(),
        });
    }
    if depth > n {
        return Err(Error::DepthOutOfRange { depth, n });
    }
    let id2 = DenseHermitian::identity(2);
    let mut m = DenseHermitian::identity(1);
    for i in 0..n {
        let factor = if i < depth {
            DenseHermitian::pauli(b.axis(i))
        } else {
            id2.clone()
        };
        m = m.kron(&factor);
    }
    Ok(m)
}

/// Dense `ρ = (I + Σ β_k P^{(k)} + α P^{(n)}) / 2^n`.
pub fn build_state(instance: &FamilyInstance) -> Result<DenseHermitian> {
    let n = instance.n();
    check_cap(n)?;
    let profile = instance.profile();
    let mut rho = DenseHermitian::identity(1 << n);
    for k in 1..=n {
        let c = profile.coefficient(k)?;
        if c == 0.0 {
            continue;
        }
        let p = build_pauli_prefix(n, instance.hidden(), k)?;
        rho = rho.add(&p.scale(c))?;
    }
    Ok(rho.scale(1.0 / (1u64 << n) as f64))
}

/// `⊗_i ½(I + (−1)^{o_i} σ_{b_i})`.
pub fn build_projector(b: &BasisString, o: &Outcome) -> Result<DenseHermitian> {
    let n = b.len();
    check_cap(n)?;
    if o.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: o.len(),
        });
    }
    let id2 = DenseHermitian::identity(2);
    let mut m = DenseHermitian::identity(1);
    for i in 0..n {
        let sign = o.sign(i) as f64;
        let local = id2
            .add(&DenseHermitian::pauli(b.axis(i)).scale(sign))?
            .scale(0.5);
        m = m.kron(&local);
    }
    Ok(m)
}

/// `Re Tr(Π ρ)`, rejecting results with a non-negligible imaginary part.
pub fn born_probability(state: &DenseHermitian, projector: &DenseHermitian) -> Result<f64> {
    let t = projector.trace_product(state)?;
    if t.im.abs() > IMAGINARY_TOLERANCE {
        return Err(Error::ComplexProbability { imag: t.im });
    }
    Ok(t.re)
}
