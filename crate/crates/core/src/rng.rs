//! Counter-based random streams.
//!
//! Every draw is a pure function of a 64-bit key and a counter, so a
//! simulation can regenerate the loss of arm `i` at round `t` (or the
//! sampling uniform of a given run and round) without carrying mutable RNG
//! state around. The mixer is the SplitMix64 finalizer.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A keyed stream; `split` derives independent child streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Stream {
    key: u64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self {
            key: mix64(seed.wrapping_add(GOLDEN)),
        }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// Child stream identified by `id`.
    pub fn split(&self, id: u64) -> Self {
        Self {
            key: mix64(self.key ^ mix64(id.wrapping_mul(GOLDEN).wrapping_add(0x632B_E59B_D9B4_E019))),
        }
    }

    #[inline]
    pub fn u64_at(&self, counter: u64) -> u64 {
        mix64(self.key.wrapping_add(mix64(counter.wrapping_add(1).wrapping_mul(GOLDEN))))
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn uniform_at(&self, counter: u64) -> f64 {
        (self.u64_at(counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Sequential reader over a [`Stream`], for call sites that just need
/// "the next number".
#[derive(Debug, Clone)]
pub struct StreamRng {
    stream: Stream,
    counter: u64,
}

impl StreamRng {
    pub fn new(stream: Stream) -> Self {
        Self { stream, counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = self.stream.u64_at(self.counter);
        self.counter += 1;
        v
    }

    pub fn next_f64(&mut self) -> f64 {
        let v = self.stream.uniform_at(self.counter);
        self.counter += 1;
        v
    }

    /// Uniform index in `0..n` (`n > 0`).
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }
}

/// Inverse-CDF draw from a probability vector. Falls back to the last
/// index carrying positive mass when rounding leaves `u` above the total.
pub fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
        }
        acc += p;
        if u < acc {
            return i;
        }
    }
    last_positive
}
