//! Measurement settings and outcomes.
//!
//! A setting is a string over `{X, Y, Z}` of length `n`; an outcome is one
//! bit per qubit. Both enumerate lexicographically (`X < Y < Z`, `0 < 1`,
//! first qubit most significant) so that dense indices, CSV rows and test
//! fixtures all agree on one order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest qubit count representable by [`Outcome`] (bits are packed in a `u64`).
pub const MAX_QUBITS: usize = 63;

/// Single-qubit Pauli observable. The derived order is the tie-breaking order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn symbol(self) -> char {
        match self {
            PauliAxis::X => 'X',
            PauliAxis::Y => 'Y',
            PauliAxis::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'X' => Some(PauliAxis::X),
            'Y' => Some(PauliAxis::Y),
            'Z' => Some(PauliAxis::Z),
            _ => None,
        }
    }
}

impl fmt::Display for PauliAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// A product-Pauli measurement setting, or a hidden index of the family.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisString {
    axes: Vec<PauliAxis>,
}

pub(crate) fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::QubitCount { n, max: MAX_QUBITS });
    }
    Ok(())
}

impl BasisString {
    pub fn new(axes: Vec<PauliAxis>) -> Result<Self> {
        check_qubits(axes.len())?;
        Ok(Self { axes })
    }

    /// The constant string `a^n`.
    pub fn uniform(n: usize, a: PauliAxis) -> Result<Self> {
        Self::new(vec![a; n])
    }

    /// Builds `(prefix, candidate, X, ..., X)` of total length `n`.
    pub fn padded(prefix: &[PauliAxis], candidate: PauliAxis, n: usize) -> Result<Self> {
        if prefix.len() >= n {
            return Err(Error::LengthMismatch {
                expected: n - 1,
                actual: prefix.len(),
            });
        }
        let mut axes = Vec::with_capacity(n);
        axes.extend_from_slice(prefix);
        axes.push(candidate);
        axes.resize(n, PauliAxis::X);
        Self::new(axes)
    }

    /// The string with lexicographic rank `index` among all `3^n` strings.
    pub fn from_index(n: usize, mut index: u64) -> Result<Self> {
        check_qubits(n)?;
        let mut axes = vec![PauliAxis::X; n];
        for slot in axes.iter_mut().rev() {
            *slot = PauliAxis::ALL[(index % 3) as usize];
            index /= 3;
        }
        Ok(Self { axes })
    }

    /// Lexicographic rank; only meaningful while `3^n` fits in a `u64` (n ≤ 40).
    pub fn index(&self) -> u64 {
        self.axes
            .iter()
            .fold(0u64, |acc, a| acc.wrapping_mul(3).wrapping_add(a.index() as u64))
    }

    /// All `3^n` strings in lexicographic order.
    pub fn enumerate(n: usize) -> Result<impl Iterator<Item = BasisString>> {
        check_qubits(n)?;
        if n > 40 {
            return Err(Error::EnumerationCap { n, cap: 40 });
        }
        let count = 3u64.pow(n as u32);
        Ok((0..count).map(move |i| BasisString::from_index(n, i).expect("checked length")))
    }

    pub fn len(&self) -> usize {
        self.axes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axes.is_empty()
    }

    pub fn axes(&self) -> &[PauliAxis] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> PauliAxis {
        self.axes[i]
    }

    /// Largest `j` with `self[..j] == other[..j]`.
    pub fn common_prefix_len(&self, other: &BasisString) -> Result<usize> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(common_prefix(&self.axes, &other.axes))
    }

    /// Replaces the last symbol.
    pub fn with_last(&self, a: PauliAxis) -> BasisString {
        let mut axes = self.axes.clone();
        *axes.last_mut().expect("non-empty") = a;
        BasisString { axes }
    }
}

#[inline]
pub(crate) fn common_prefix(a: &[PauliAxis], b: &[PauliAxis]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

impl fmt::Display for BasisString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.axes {
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl FromStr for BasisString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let axes = s
            .trim()
            .chars()
            .map(|c| {
                PauliAxis::from_symbol(c)
                    .ok_or_else(|| Error::Config(format!("invalid Pauli symbol {c:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        BasisString::new(axes)
    }
}

impl Serialize for PauliAxis {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_char(self.symbol())
    }
}

impl Serialize for BasisString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BasisString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Measurement outcome `o ∈ {0,1}^n`, packed so that the integer value is the
/// lexicographic rank (qubit 1 is the most significant bit).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Outcome {
    rank: u64,
    n: u32,
}

impl Outcome {
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        check_qubits(bits.len())?;
        let mut rank = 0u64;
        for &b in bits {
            if b > 1 {
                return Err(Error::Config(format!("outcome bit must be 0 or 1, got {b}")));
            }
            rank = (rank << 1) | b as u64;
        }
        Ok(Self {
            rank,
            n: bits.len() as u32,
        })
    }

    pub fn from_rank(n: usize, rank: u64) -> Result<Self> {
        check_qubits(n)?;
        if rank >> n != 0 {
            return Err(Error::Config(format!("outcome rank {rank} needs more than {n} bits")));
        }
        Ok(Self { rank, n: n as u32 })
    }

    /// Built by the sampler, which guarantees `rank < 2^n`.
    pub(crate) fn from_rank_unchecked(n: usize, rank: u64) -> Self {
        Self { rank, n: n as u32 }
    }

    pub fn len(&self) -> usize {
        self.n as usize
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn rank(&self) -> u64 {
        self.rank
    }

    /// Bit of qubit `i` (0-based).
    pub fn bit(&self, i: usize) -> u8 {
        ((self.rank >> (self.n as usize - 1 - i)) & 1) as u8
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.len()).map(|i| self.bit(i)).collect()
    }

    /// Eigenvalue `(-1)^{o_i}` of qubit `i`.
    pub fn sign(&self, i: usize) -> i8 {
        1 - 2 * self.bit(i) as i8
    }

    /// Prefix statistic `Π_{i≤k} (-1)^{o_i}`; `k = 0` gives the empty product 1.
    pub fn prefix_sign(&self, k: usize) -> i8 {
        prefix_sign_of_rank(self.rank, self.n as usize, k)
    }

    /// All `2^n` outcomes in lexicographic order.
    pub fn enumerate(n: usize) -> Result<impl Iterator<Item = Outcome>> {
        check_qubits(n)?;
        Ok((0..(1u64 << n)).map(move |rank| Outcome {
            rank,
            n: n as u32,
        }))
    }
}

#[inline]
pub(crate) fn prefix_sign_of_rank(rank: u64, n: usize, k: usize) -> i8 {
    if k == 0 {
        return 1;
    }
    let top = rank >> (n - k);
    if top.count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            write!(f, "{}", self.bit(i))?;
        }
        Ok(())
    }
}
