//! Sources of measurement outcomes.
//!
//! A grey square measures to `0` or `1` with probability one half each. Every
//! random outcome in the crate is read from a [`BitSource`], one bit per grey
//! square measured, in left-to-right block order.
//!
//! # Seeded stream
//!
//! [`SeededBits`] is the fixed stream algorithm used by simulations and game
//! sessions. It must not change between versions:
//!
//! 1. Build a `ChaCha8Rng` with `SeedableRng::seed_from_u64(seed)`.
//! 2. Select the ChaCha stream with `set_stream(stream)` (stream `0` for a
//!    session, the trial index for Monte Carlo trial `i`).
//! 3. Draw 64-bit words with `next_u64`; bits are consumed least significant
//!    bit first, and a new word is drawn only when the previous one is used up.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Supplies one measurement bit per grey square.
pub trait BitSource {
    fn next_bit(&mut self) -> bool;
}

impl<B: BitSource + ?Sized> BitSource for &mut B {
    fn next_bit(&mut self) -> bool {
        (**self).next_bit()
    }
}

/// The reproducible stream described in the module docs.
#[derive(Clone, Debug)]
pub struct SeededBits {
    rng: ChaCha8Rng,
    word: u64,
    remaining: u32,
    consumed: u64,
}

impl SeededBits {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Stream used by Monte Carlo trial `trial`.
    pub fn for_trial(seed: u64, trial: u64) -> Self {
        Self::with_stream(seed, trial)
    }

    fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            rng,
            word: 0,
            remaining: 0,
            consumed: 0,
        }
    }

    /// Number of bits handed out so far.
    pub fn consumed(&self) -> u64 {
        self.consumed
    }
}

impl BitSource for SeededBits {
    fn next_bit(&mut self) -> bool {
        if self.remaining == 0 {
            self.word = self.rng.next_u64();
            self.remaining = 64;
        }
        let bit = self.word & 1 == 1;
        self.word >>= 1;
        self.remaining -= 1;
        self.consumed += 1;
        bit
    }
}

/// A scripted sequence of bits, mostly for tests and replays.
///
/// Panics when asked for more bits than it holds.
#[derive(Clone, Debug, Default)]
pub struct FixedBits {
    bits: Vec<bool>,
    next: usize,
}

impl FixedBits {
    pub fn new(bits: impl Into<Vec<bool>>) -> Self {
        Self {
            bits: bits.into(),
            next: 0,
        }
    }

    /// A source that must never be read, for moves without grey squares.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn consumed(&self) -> usize {
        self.next
    }
}

impl BitSource for FixedBits {
    fn next_bit(&mut self) -> bool {
        let bit = *self
            .bits
            .get(self.next)
            .unwrap_or_else(|| panic!("fixed bit source exhausted after {} bits", self.next));
        self.next += 1;
        bit
    }
}
