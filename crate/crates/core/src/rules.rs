//! Octal rule codes.
//!
//! A code `0.d1d2…dm` gives, for each block size `i`, a digit whose three bits
//! say which removals of `i` adjacent squares are allowed: bit 0 taking a
//! whole row, bit 1 taking from a border (one row left), bit 2 taking from the
//! centre (two rows left). A leading `Q` marks the quantum variant, where the
//! removed block is measured and `√NOT` hits the block's neighbours.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("malformed rule code {0:?}: expected [Q]0.<octal digits>")]
    Malformed(String),
    #[error("digit {digit} in rule code {code:?} is not octal")]
    NonOctalDigit { code: String, digit: char },
    #[error("digit value {0} is not octal")]
    DigitOutOfRange(u8),
    #[error("rule set {0} is not quantum")]
    NotQuantum(RuleSet),
}

/// The three allowed-removal bits of one octal digit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct DigitFlags {
    pub whole: bool,
    pub border: bool,
    pub central: bool,
}

/// Binary decomposition of an octal digit (`d` in `0..=7`).
pub fn digit_flags(d: u8) -> DigitFlags {
    debug_assert!(d <= 7, "digit {d} is not octal");
    DigitFlags {
        whole: d & 1 != 0,
        border: d & 2 != 0,
        central: d & 4 != 0,
    }
}

impl DigitFlags {
    pub fn to_digit(self) -> u8 {
        self.whole as u8 | (self.border as u8) << 1 | (self.central as u8) << 2
    }
}

/// A classical or quantum octal game, in canonical form (no trailing zero
/// digits).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RuleSet {
    quantum: bool,
    digits: Vec<u8>,
}

impl RuleSet {
    pub fn new(quantum: bool, digits: impl Into<Vec<u8>>) -> Result<Self, RuleError> {
        let mut digits = digits.into();
        if let Some(&d) = digits.iter().find(|&&d| d > 7) {
            return Err(RuleError::DigitOutOfRange(d));
        }
        while digits.last() == Some(&0) {
            digits.pop();
        }
        Ok(Self { quantum, digits })
    }

    pub fn parse(code: &str) -> Result<Self, RuleError> {
        code.parse()
    }

    pub fn is_quantum(&self) -> bool {
        self.quantum
    }

    /// Digits `d1..dm`, first digit first.
    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    /// Largest block size with a nonzero digit.
    pub fn max_block(&self) -> usize {
        self.digits.len()
    }

    /// Digit for block size `i` (1-based); zero outside the code.
    pub fn digit(&self, i: usize) -> u8 {
        if i == 0 {
            0
        } else {
            self.digits.get(i - 1).copied().unwrap_or(0)
        }
    }

    pub fn flags(&self, i: usize) -> DigitFlags {
        digit_flags(self.digit(i))
    }

    /// Iterates `(block size, flags)` over every nonzero digit.
    pub fn blocks(&self) -> impl Iterator<Item = (usize, DigitFlags)> + '_ {
        self.digits
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != 0)
            .map(|(i, &d)| (i + 1, digit_flags(d)))
    }

    /// The classical white game that governs play on the white squares.
    ///
    /// Taking `i` squares as a whole row removes `i` whites; from a border it
    /// also greys one neighbour, so `i + 1` whites leave the white game; from
    /// the centre both neighbours grey, `i + 2` whites.
    pub fn associated_white_game(&self) -> Result<RuleSet, RuleError> {
        if !self.quantum {
            return Err(RuleError::NotQuantum(self.clone()));
        }
        let n = self.digits.len() + 2;
        let digits: Vec<u8> = (1..=n)
            .map(|i| {
                let own = self.flags(i);
                let prev = if i >= 2 {
                    self.flags(i - 1)
                } else {
                    DigitFlags::default()
                };
                let prev2 = if i >= 3 {
                    self.flags(i - 2)
                } else {
                    DigitFlags::default()
                };
                DigitFlags {
                    whole: own.whole || prev.border || prev2.central,
                    border: prev.border || prev2.central,
                    central: prev2.central,
                }
                .to_digit()
            })
            .collect();
        RuleSet::new(false, digits)
    }

    /// The condition under which the couple brackets hold for a quantum code:
    /// single squares may be taken whole or from a border, and every
    /// even-indexed digit is zero.
    pub fn satisfies_framing_condition(&self) -> Result<bool, RuleError> {
        if !self.quantum {
            return Err(RuleError::NotQuantum(self.clone()));
        }
        let first = self.flags(1);
        let even_clear = (2..=self.digits.len())
            .step_by(2)
            .all(|i| self.digit(i) == 0);
        Ok(first.whole && first.border && even_clear)
    }
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.quantum {
            f.write_str("Q")?;
        }
        f.write_str("0.")?;
        if self.digits.is_empty() {
            return f.write_str("0");
        }
        for d in &self.digits {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl FromStr for RuleSet {
    type Err = RuleError;

    fn from_str(code: &str) -> Result<Self, Self::Err> {
        let (quantum, rest) = match code.strip_prefix('Q') {
            Some(rest) => (true, rest),
            None => (false, code),
        };
        let body = rest
            .strip_prefix("0.")
            .filter(|b| !b.is_empty())
            .ok_or_else(|| RuleError::Malformed(code.to_string()))?;
        let digits = body
            .chars()
            .map(|c| match c.to_digit(8) {
                Some(d) => Ok(d as u8),
                None if c.is_ascii_digit() => Err(RuleError::NonOctalDigit {
                    code: code.to_string(),
                    digit: c,
                }),
                None => Err(RuleError::Malformed(code.to_string())),
            })
            .collect::<Result<Vec<u8>, _>>()?;
        RuleSet::new(quantum, digits)
    }
}

impl TryFrom<String> for RuleSet {
    type Error = RuleError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<RuleSet> for String {
    fn from(r: RuleSet) -> String {
        r.to_string()
    }
}
