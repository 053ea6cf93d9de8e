//! Exact dyadic rationals `m / 2^k`.
//!
//! Every game value in the crate is built from halves, so probabilities never
//! leave this set and are compared exactly.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use thiserror::Error;

/// Largest exponent a value may carry; keeps every aligned numerator in `i128`.
const MAX_EXPONENT: u32 = 120;

/// `numerator / 2^exponent`, kept with an odd numerator (or zero with exponent 0).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    numerator: i128,
    exponent: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid dyadic rational {0:?}")]
pub struct ParseDyadicError(String);

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic {
        numerator: 0,
        exponent: 0,
    };
    pub const ONE: Dyadic = Dyadic {
        numerator: 1,
        exponent: 0,
    };
    pub const HALF: Dyadic = Dyadic {
        numerator: 1,
        exponent: 1,
    };

    pub fn new(numerator: i128, exponent: u32) -> Self {
        if numerator == 0 {
            return Self::ZERO;
        }
        let shift = numerator.trailing_zeros().min(exponent);
        let exponent = exponent - shift;
        assert!(
            exponent <= MAX_EXPONENT,
            "dyadic exponent {exponent} out of range"
        );
        Self {
            numerator: numerator >> shift,
            exponent,
        }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::new(n as i128, 0)
    }

    /// `2^-k`.
    pub fn pow_half(k: u32) -> Self {
        Self::new(1, k)
    }

    pub fn numerator(&self) -> i128 {
        self.numerator
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn denominator(&self) -> i128 {
        1i128 << self.exponent
    }

    pub fn one_minus(self) -> Self {
        Self::ONE - self
    }

    pub fn half(self) -> Self {
        Self::new(self.numerator, self.exponent + 1)
    }

    pub fn is_zero(&self) -> bool {
        self.numerator == 0
    }

    /// Compares against the ordinary fraction `num / den` (`den > 0`) by
    /// cross-multiplication.
    pub fn cmp_fraction(&self, num: i128, den: i128) -> Ordering {
        assert!(den > 0, "denominator must be positive");
        (self.numerator * den).cmp(&(num << self.exponent))
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 / (self.exponent as f64).exp2()
    }

    fn aligned(self, other: Self) -> (i128, i128, u32) {
        let exponent = self.exponent.max(other.exponent);
        (
            self.numerator << (exponent - self.exponent),
            other.numerator << (exponent - other.exponent),
            exponent,
        )
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        let (a, b, e) = self.aligned(rhs);
        Dyadic::new(a + b, e)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        let (a, b, e) = self.aligned(rhs);
        Dyadic::new(a - b, e)
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Dyadic) -> Dyadic {
        let numerator = self
            .numerator
            .checked_mul(rhs.numerator)
            .expect("dyadic numerator overflow");
        Dyadic::new(numerator, self.exponent + rhs.exponent)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(*other);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `m` for integers, `m/d` otherwise, with `d` written out as a power of two.
impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}", self.numerator, self.denominator())
        }
    }
}

impl FromStr for Dyadic {
    type Err = ParseDyadicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseDyadicError(s.to_string());
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let num: i128 = num.parse().map_err(|_| err())?;
        let den: i128 = den.parse().map_err(|_| err())?;
        if den <= 0 || den.count_ones() != 1 {
            return Err(err());
        }
        let exponent = den.trailing_zeros();
        if exponent > MAX_EXPONENT {
            return Err(err());
        }
        Ok(Dyadic::new(num, exponent))
    }
}
