//! Deterministic random number generation.
//!
//! The generator is xoshiro256++ (Blackman & Vigna), seeded by expanding a
//! `u64` through SplitMix64. Both algorithms are implemented here so the
//! stream is identical on every platform and toolchain; nothing about it
//! depends on `std` or the system RNG. Normal variates come from the
//! Box-Muller transform evaluated with `libm`, which is also bit-stable
//! across platforms.

use alloc::vec::Vec;

use crate::numerics::array::Array;

/// SplitMix64 step: advances `state` and returns the next output.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// FNV-1a over a byte string; used to fold labels into seed material.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Derives a child seed from a base seed and a list of context words.
///
/// Each part is absorbed through one SplitMix64 step, so
/// `mix_seed(s, &[a, b])` differs from `mix_seed(s, &[b, a])` and adding a
/// new context word never perturbs the stream of an existing one.
pub fn mix_seed(base: u64, parts: &[u64]) -> u64 {
    let mut state = base;
    let mut out = splitmix64(&mut state);
    for &p in parts {
        state ^= p;
        out = splitmix64(&mut state);
    }
    out
}

/// xoshiro256++ stream.
#[derive(Clone, Debug)]
pub struct Rng {
    s: [u64; 4],
    /// Spare normal variate from the last Box-Muller pair.
    spare_normal: Option<f32>,
}

impl Rng {
    /// Seeds the four state words from SplitMix64, per the xoshiro authors'
    /// recommendation.
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Self {
            s,
            spare_normal: None,
        }
    }

    /// Independent child stream for a named purpose.
    pub fn fork(&self, label: &str) -> Rng {
        // Children are derived from the seed material, not by advancing this
        // stream, so forking is order-insensitive.
        let h = fnv1a64(label.as_bytes());
        Rng::new(mix_seed(self.s[0] ^ self.s[2], &[h]))
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[0]
            .wrapping_add(s[3])
            .rotate_left(23)
            .wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform in [0, 1) with 24 bits of precision.
    pub fn next_f32(&mut self) -> f32 {
        ((self.next_u64() >> 40) as f32) * (1.0 / (1u64 << 24) as f32)
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, n) by rejection, free of modulo bias.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let threshold = n.wrapping_neg() % n;
        loop {
            let r = self.next_u64();
            if r >= threshold {
                return r % n;
            }
        }
    }

    /// Standard normal via Box-Muller; pairs are generated together and the
    /// second value is cached.
    pub fn next_normal(&mut self) -> f32 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // u1 in (0, 1] so the log argument is never zero.
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        let z0 = (r * libm::cos(theta)) as f32;
        let z1 = (r * libm::sin(theta)) as f32;
        self.spare_normal = Some(z1);
        z0
    }

    pub fn normal(&mut self, mean: f32, std: f32) -> f32 {
        mean + std * self.next_normal()
    }

    /// Array of normal(mean, std) samples.
    pub fn normal_array(&mut self, shape: &[usize], mean: f32, std: f32) -> Array {
        let n: usize = shape.iter().product();
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            data.push(self.normal(mean, std));
        }
        Array::from_vec(shape, data).expect("shape/product mismatch is impossible here")
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            xs.swap(i, j);
        }
    }

    /// `k` distinct values from [0, n), in random order.
    ///
    /// Partial Fisher-Yates over the index vector; O(n) memory, exact.
    pub fn sample_distinct(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot sample {k} distinct values from {n}");
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below((n - i) as u64) as usize;
            idx.swap(i, j);
        }
        idx.truncate(k);
        idx
    }
}
