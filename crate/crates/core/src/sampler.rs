//! Reproducible shot generation.
//!
//! Outcomes are drawn sign by sign. With `π_j = Π_{i≤j} t_i` and running
//! weight `h_j = 1 + Σ_{k≤min(j,L)} c_k π_k` (`L` the matched depth), the
//! conditional law is `P(t_j = +1 | t_<j) = ½(1 + g_j π_{j−1} / h_{j−1})` with
//! `g_j = c_j` for `j ≤ L` and 0 beyond. Past depth `L` the remaining bits
//! are fair and come from a single 64-bit block.
//!
//! The aggregated draws (`prefix_statistic_count`, `draw_histogram`) sample
//! the same joint law in one step through exact binomials, so simulations
//! that only need counts avoid the per-shot loop. They consume the same
//! range of shot indices as the per-shot path would, but different random
//! numbers.

use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::family::{FamilyInstance, DEFAULT_ENUMERATION_CAP};
use crate::pauli::{BasisString, Outcome};
use crate::rng::{block, derive_key, unit_f64, CounterRng};

/// Domain separator for the aggregated draws.
const AGGREGATE_DOMAIN: u64 = 0xA5A5_5A5A_0F0F_F0F0;

/// A single-owner stream of fresh copies of one state.
#[derive(Debug, Clone)]
pub struct ShotStream {
    instance: FamilyInstance,
    seed: u64,
    counter: u64,
}

impl ShotStream {
    pub fn new(instance: FamilyInstance, seed: u64) -> Self {
        Self {
            instance,
            seed,
            counter: 0,
        }
    }

    /// Stream for trial `trial` of an experiment seeded with `seed`.
    pub fn for_trial(instance: FamilyInstance, seed: u64, trial: u64) -> Self {
        Self::new(instance, derive_key(&[seed, trial]))
    }

    pub fn instance(&self) -> &FamilyInstance {
        &self.instance
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Shots consumed so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    fn check_basis(&self, b: &BasisString) -> Result<usize> {
        self.instance.matched_depth(b)
    }

    /// One fresh outcome in basis `b`.
    pub fn draw_outcome(&mut self, b: &BasisString) -> Result<Outcome> {
        let matched = self.check_basis(b)?;
        let n = self.instance.n();
        let shot_key = block(self.seed, self.counter);
        self.counter += 1;

        let profile = self.instance.profile();
        let mut rank = 0u64;
        let mut h = 1.0;
        let mut pi = 1.0;
        for j in 1..=matched {
            if h <= 0.0 {
                return Err(Error::DegenerateConditional {
                    qubit: j,
                    weight: h,
                });
            }
            let g = profile.coeff(j);
            let p_plus = (0.5 * (1.0 + g * pi / h)).clamp(0.0, 1.0);
            let u = unit_f64(block(shot_key, j as u64));
            let t = if u < p_plus { 1.0 } else { -1.0 };
            rank = (rank << 1) | u64::from(t < 0.0);
            pi *= t;
            h += g * pi;
        }
        let tail = n - matched;
        if tail > 0 {
            let bits = block(shot_key, 0) >> (64 - tail);
            rank = (rank << tail) | bits;
        }
        Ok(Outcome::from_rank_unchecked(n, rank))
    }

    /// Empirical mean of `S_k = Π_{i≤k} λ_i` over `shots` fresh outcomes.
    pub fn prefix_statistic_mean(&mut self, b: &BasisString, k: usize, shots: u64) -> Result<f64> {
        self.check_depth(k)?;
        if shots == 0 {
            return Err(Error::ZeroBudget);
        }
        let mut sum = 0i64;
        for _ in 0..shots {
            sum += i64::from(self.draw_outcome(b)?.prefix_sign(k));
        }
        Ok(sum as f64 / shots as f64)
    }

    /// Number of `S_k = +1` results among `shots` fresh outcomes, drawn
    /// directly from `Binomial(shots, (1 + Tr(P_b^{(k)} ρ))/2)`.
    pub fn prefix_statistic_count(&mut self, b: &BasisString, k: usize, shots: u64) -> Result<u64> {
        self.check_depth(k)?;
        let mean = self.instance.prefix_expectation(b, k)?;
        let mut rng = self.aggregate_rng(shots);
        Ok(binomial(&mut rng, shots, 0.5 * (1.0 + mean)))
    }

    /// Outcome counts over all `2^n` outcomes (lexicographic) for `shots`
    /// fresh copies measured in `b`.
    pub fn draw_histogram(&mut self, b: &BasisString, shots: u64) -> Result<Vec<u64>> {
        let matched = self.check_basis(b)?;
        let n = self.instance.n();
        if n > DEFAULT_ENUMERATION_CAP {
            return Err(Error::EnumerationCap {
                n,
                cap: DEFAULT_ENUMERATION_CAP,
            });
        }
        let mut hist = vec![0u64; 1 << n];
        let mut rng = self.aggregate_rng(shots);
        let profile = self.instance.profile();

        // (bits decided, rank prefix, count, h, π)
        let mut stack = vec![(0usize, 0u64, shots, 1.0f64, 1.0f64)];
        while let Some((j, rank, count, h, pi)) = stack.pop() {
            if count == 0 {
                continue;
            }
            if j == n {
                hist[rank as usize] += count;
                continue;
            }
            let g = if j < matched { profile.coeff(j + 1) } else { 0.0 };
            if g != 0.0 && h <= 0.0 {
                return Err(Error::DegenerateConditional {
                    qubit: j + 1,
                    weight: h,
                });
            }
            let p_plus = if g == 0.0 {
                0.5
            } else {
                (0.5 * (1.0 + g * pi / h)).clamp(0.0, 1.0)
            };
            let plus = binomial(&mut rng, count, p_plus);
            stack.push((j + 1, rank << 1 | 1, count - plus, h - g * pi, -pi));
            stack.push((j + 1, rank << 1, plus, h + g * pi, pi));
        }
        Ok(hist)
    }

    fn check_depth(&self, k: usize) -> Result<()> {
        let n = self.instance.n();
        if k == 0 || k > n {
            return Err(Error::DepthOutOfRange { depth: k, n });
        }
        Ok(())
    }

    /// RNG for an aggregated draw standing in for the next `shots` shots.
    fn aggregate_rng(&mut self, shots: u64) -> CounterRng {
        let rng = CounterRng::new(block(self.seed ^ AGGREGATE_DOMAIN, self.counter));
        self.counter += shots;
        rng
    }
}

/// `Binomial(n, p)` with the degenerate cases short-circuited.
pub(crate) fn binomial(rng: &mut CounterRng, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p)
        .expect("p checked to lie in (0, 1)")
        .sample(rng)
}
