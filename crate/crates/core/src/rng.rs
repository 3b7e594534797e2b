//! Deterministic random numbers (SplitMix64).
//!
//! Everything randomized — fuzz verification, test-input literals — draws
//! from this generator so that a seed fully determines all outputs across
//! platforms. Per-pattern streams are split off the user seed with
//! [`derive`], so adding a pattern to a file does not change the inputs
//! generated for the others.

/// SplitMix64: tiny, fast, and passes BigCrush. Not cryptographic.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    pub fn next_i64(&mut self) -> i64 {
        self.next_u64() as i64
    }

    /// Uniform draw from `[0, n)`. Uses rejection to avoid modulo bias.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }
}

/// Derives a child seed from `seed` and a textual tag (FNV-1a over the tag,
/// mixed with the seed through one SplitMix64 step).
pub fn derive(seed: u64, tag: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in tag.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    SplitMix64::new(seed ^ h).next_u64()
}
