//! Counter-based pseudo-random streams for reproducible parallel sampling.
//!
//! Each trajectory (or optimizer start) derives its own stream from a
//! `(seed, stream index)` pair, so results are bitwise identical no matter
//! how work is scheduled across threads.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 generator seeded from a base seed and a stream counter.
#[derive(Clone, Debug)]
pub struct Stream {
    state: u64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self::from_parts(seed, 0)
    }

    /// Stream `index` derived from `seed`; distinct indices give
    /// statistically independent sequences.
    pub fn from_parts(seed: u64, index: u64) -> Self {
        // Pre-mix both words so nearby (seed, index) pairs decorrelate.
        let mut s = Self { state: mix(seed).wrapping_add(mix(index ^ GOLDEN)) };
        s.next_u64();
        s
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix(self.state)
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in [0, n).
    pub fn next_index(&mut self, n: usize) -> usize {
        // Modulo bias is negligible for the small n used here.
        (self.next_u64() % n as u64) as usize
    }
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
