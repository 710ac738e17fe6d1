use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::{FamilyInstance, DEFAULT_ENUMERATION_CAP};
use crate::pauli::{BasisString, Outcome};

/// Append-only record of `(basis, outcome)` pairs in shot order.
///
/// Bases are interned: protocols measure long runs in the same basis, so
/// each record stores an index into a small basis table.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Transcript {
    bases: Vec<BasisString>,
    records: Vec<(u32, u64)>,
    #[serde(skip)]
    lookup: HashMap<BasisString, u32>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, b: &BasisString, o: Outcome) {
        let next = self.bases.len() as u32;
        let idx = *self.lookup.entry(b.clone()).or_insert(next);
        if idx == next {
            self.bases.push(b.clone());
        }
        self.records.push((idx, o.rank()));
    }

    /// `M`, the number of shots recorded.
    pub fn total_shots(&self) -> u64 {
        self.records.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisString, Outcome)> + '_ {
        self.records.iter().map(move |&(i, rank)| {
            let b = &self.bases[i as usize];
            (b, Outcome::from_rank_unchecked(b.len(), rank))
        })
    }

    /// Basis of every shot, in order.
    pub fn basis_sequence(&self) -> impl Iterator<Item = &BasisString> + '_ {
        self.records.iter().map(move |&(i, _)| &self.bases[i as usize])
    }

    /// Outcome counts per distinct basis, bases in lexicographic order.
    pub fn histograms(&self) -> Result<Vec<(BasisString, Vec<u64>)>> {
        let mut out: Vec<(BasisString, Vec<u64>)> = Vec::with_capacity(self.bases.len());
        for b in &self.bases {
            if b.len() > DEFAULT_ENUMERATION_CAP {
                return Err(Error::EnumerationCap {
                    n: b.len(),
                    cap: DEFAULT_ENUMERATION_CAP,
                });
            }
            out.push((b.clone(), vec![0; 1 << b.len()]));
        }
        for &(i, rank) in &self.records {
            out[i as usize].1[rank as usize] += 1;
        }
        out.sort_by(|x, y| x.0.cmp(&y.0));
        Ok(out)
    }
}

/// `Σ_t ln p(o_t | b_t, ρ)` with the closed-form law; `-∞` if any recorded
/// outcome has zero probability.
pub fn transcript_log_likelihood(t: &Transcript, instance: &FamilyInstance) -> Result<f64> {
    let mut ll = 0.0;
    for (b, o) in t.iter() {
        ll += instance.outcome_probability(b, &o)?.ln();
    }
    Ok(ll)
}
