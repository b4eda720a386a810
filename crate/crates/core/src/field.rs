//! Prime field parameters and scalar arithmetic in F_p.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported modulus; field values must fit 16 bits.
pub const MAX_PRIME: u32 = 65521;

/// Default modulus: the largest prime that fits in a byte.
pub const DEFAULT_PRIME: u32 = 251;

pub const DEFAULT_DIM: usize = 8;

/// Deterministic trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut k = 3;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 2;
    }
    true
}

/// The pair (p, d) that every matrix and protocol object is defined over.
///
/// The library accepts any prime `p <= 65521` (including 2, which the
/// exhaustive counting checks need). The command-line front end is stricter
/// and only admits odd primes that fit a byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldParams {
    p: u32,
    d: usize,
}

impl FieldParams {
    pub fn new(p: u32, d: usize) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p));
        }
        if p > MAX_PRIME {
            return Err(Error::InvalidParams(format!(
                "prime {p} exceeds the 16-bit limit {MAX_PRIME}"
            )));
        }
        if d < 2 {
            return Err(Error::InvalidParams(format!(
                "dimension {d} must be at least 2"
            )));
        }
        Ok(FieldParams { p, d })
    }

    #[inline]
    pub fn prime(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of entries in a d×d matrix.
    #[inline]
    pub fn entries(&self) -> usize {
        self.d * self.d
    }

    #[inline]
    pub fn reduce(&self, v: u64) -> u32 {
        (v % self.p as u64) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn pow(&self, base: u32, mut exp: u64) -> u32 {
        let mut acc = 1 % self.p;
        let mut b = base % self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by Fermat's little theorem; `None` for zero.
    pub fn inv(&self, a: u32) -> Option<u32> {
        let a = a % self.p;
        if a == 0 {
            None
        } else {
            Some(self.pow(a, self.p as u64 - 2))
        }
    }
}

impl Default for FieldParams {
    fn default() -> Self {
        FieldParams {
            p: DEFAULT_PRIME,
            d: DEFAULT_DIM,
        }
    }
}

impl fmt::Display for FieldParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GL({}, F_{})", self.d, self.p)
    }
}

/// A value of F_p, always held reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FieldElement(u32);

impl FieldElement {
    pub fn new(value: u64, params: &FieldParams) -> Self {
        FieldElement(params.reduce(value))
    }

    /// Wraps a value the caller already knows is reduced.
    #[inline]
    pub(crate) fn from_reduced(value: u32) -> Self {
        FieldElement(value)
    }

    #[inline]
    pub fn value(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}
