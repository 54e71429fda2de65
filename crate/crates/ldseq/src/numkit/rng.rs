//! Deterministic random number generation.
//!
//! The whole toolkit draws randomness from this one generator so that training
//! runs are bit-identical given a seed, independent of platform and of any
//! third-party crate's stream changes. xoshiro256** seeded through splitmix64.

/// Deterministic PRNG. Identical seeds produce identical draw sequences.
///
/// The generator is single-owner; to use randomness from several places,
/// derive independent generators with [`Rng::split`] or [`Rng::stream`].
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    state: [u64; 4],
}

fn splitmix64(x: &mut u64) -> u64 {
    *x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let mut x = seed;
        let state = [
            splitmix64(&mut x),
            splitmix64(&mut x),
            splitmix64(&mut x),
            splitmix64(&mut x),
        ];
        Rng { seed, state }
    }

    /// Derives a generator for a named substream of `seed` (epoch shuffles,
    /// dropout, initialization) without consuming draws from any other stream.
    pub fn stream(seed: u64, stream: u64) -> Self {
        let mut x = seed;
        let a = splitmix64(&mut x);
        Rng::new(a ^ stream.wrapping_mul(0xD1342543DE82EF95))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[1]
            .wrapping_mul(5)
            .rotate_left(7)
            .wrapping_mul(9);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `[0, n)` via the multiply-shift reduction.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below: empty range");
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Splits off an independent generator, advancing this one.
    pub fn split(&mut self) -> Rng {
        Rng::new(self.next_u64())
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i + 1);
            xs.swap(i, j);
        }
    }
}
