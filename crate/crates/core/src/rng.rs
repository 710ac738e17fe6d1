//! Counter-based random numbers.
//!
//! Every draw is a pure function of a 64-bit key and a 64-bit counter, so a
//! trial's randomness is addressed by `(seed, trial, shot, qubit)` and does
//! not depend on thread scheduling. The mixing function is the SplitMix64
//! finalizer; `block(key, ctr) = mix(key ^ mix((ctr + 1) · γ))` with the
//! golden-ratio increment `γ`.

use rand::RngCore;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function (a bijection on `u64`).
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn block(key: u64, counter: u64) -> u64 {
    mix64(key ^ mix64(counter.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Folds coordinates such as `(seed, n, trial)` into one stream key.
pub fn derive_key(parts: &[u64]) -> u64 {
    parts
        .iter()
        .enumerate()
        .fold(0x6A09_E667_F3BC_C908, |acc, (i, &p)| {
            mix64(acc ^ block(p, i as u64))
        })
}

/// Uniform in `[0, 1)` with 53 bits of precision.
#[inline]
pub fn unit_f64(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Sequential view of one keyed stream, usable wherever `rand` expects an RNG.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(key: u64) -> Self {
        Self { key, counter: 0 }
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        unit_f64(self.next_u64())
    }
}

impl RngCore for CounterRng {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        let x = block(self.key, self.counter);
        self.counter = self.counter.wrapping_add(1);
        x
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}
