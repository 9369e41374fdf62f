//! Counter-addressed Gaussian streams.
//!
//! Every `(seed, replica)` pair owns an independent ChaCha8 stream. Draws for
//! time step `n` start at a fixed word offset, so the numbers a replica sees
//! never depend on which thread ran it or on what other replicas did.

use core::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[allow(unused_imports)]
use num_traits::Float;

/// Fixed padding mixed into the key so a 64-bit seed fills the 256-bit key.
const KEY_PAD: [u8; 24] = *b"ewlimit/gaussian-stream\0";

/// Words of ChaCha output consumed by one standard-normal pair.
pub const WORDS_PER_PAIR: u64 = 4;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    replica: u64,
    rng: ChaCha8Rng,
    draws: u64,
}

impl RngStream {
    pub fn new(seed: u64, replica: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..].copy_from_slice(&KEY_PAD);
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(replica);
        RngStream {
            seed,
            replica,
            rng,
            draws: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replica(&self) -> u64 {
        self.replica
    }

    /// Number of normal pairs drawn since the last seek.
    pub fn draw_counter(&self) -> u64 {
        self.draws
    }

    /// Position the stream at the first pair reserved for `block`, where each
    /// block reserves `pairs_per_block` pairs.
    pub fn seek_block(&mut self, block: u64, pairs_per_block: u64) {
        let pos = block as u128 * pairs_per_block as u128 * WORDS_PER_PAIR as u128;
        self.rng.set_word_pos(pos);
        self.draws = 0;
    }

    /// A uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Two independent standard normals by Box–Muller.
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let a = self.rng.next_u64();
        let b = self.rng.next_u64();
        self.draws += 1;
        // u1 in (0, 1], u2 in [0, 1)
        let u1 = ((a >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64);
        let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        (r * c, r * s)
    }
}
