//! Byte streams and the samplers built on top of them.
//!
//! Every random draw in the crate funnels through [`RandomSource::next_byte`],
//! so a seeded [`SplitMix64`] reproduces the same keys, tokens and ciphertexts
//! on any platform. SplitMix64 is a statistical generator, not a CSPRNG.

use crate::field::{FieldElement, FieldParams};
use crate::matrix::{DiagonalSpec, Matrix};

/// A stream of uniformly distributed bytes.
pub trait RandomSource {
    fn next_byte(&mut self) -> u8;

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for b in dest {
            *b = self.next_byte();
        }
    }
}

impl<R: RandomSource + ?Sized> RandomSource for &mut R {
    fn next_byte(&mut self) -> u8 {
        (**self).next_byte()
    }
}

/// SplitMix64, emitting each 64-bit output as 8 little-endian bytes.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
    buf: [u8; 8],
    pos: usize,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 {
            state: seed,
            buf: [0; 8],
            pos: 8,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

impl RandomSource for SplitMix64 {
    fn next_byte(&mut self) -> u8 {
        if self.pos == 8 {
            self.buf = self.next_u64().to_le_bytes();
            self.pos = 0;
        }
        let b = self.buf[self.pos];
        self.pos += 1;
        b
    }
}

/// Replays a fixed byte script. Used to pin samplers to known inputs.
///
/// Panics when the script runs dry.
#[derive(Debug, Clone)]
pub struct ByteScript {
    bytes: Vec<u8>,
    pos: usize,
}

impl ByteScript {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Self {
        ByteScript {
            bytes: bytes.into(),
            pos: 0,
        }
    }

    pub fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

impl RandomSource for ByteScript {
    fn next_byte(&mut self) -> u8 {
        let b = *self.bytes.get(self.pos).expect("byte script exhausted");
        self.pos += 1;
        b
    }
}

/// Uniform value on `[lo, hi]` by rejection sampling.
///
/// Draws the fewest bytes whose little-endian value can reach `hi - lo`,
/// rejects anything above `hi - lo`, and offsets by `lo`. A zero-width range
/// consumes no bytes.
pub fn field_uniform<R: RandomSource + ?Sized>(rs: &mut R, lo: u32, hi: u32) -> FieldElement {
    assert!(lo <= hi, "empty sampling range [{lo}, {hi}]");
    let span = hi - lo;
    let nbytes = ((32 - span.leading_zeros()) as usize).div_ceil(8);
    loop {
        let mut v = 0u32;
        for i in 0..nbytes {
            v |= (rs.next_byte() as u32) << (8 * i);
        }
        if v <= span {
            return FieldElement::from_reduced(lo + v);
        }
    }
}

/// Draws matrices with uniform entries until one is invertible.
///
/// Returns the matrix and how many singular draws were discarded.
pub fn random_nonsingular<R: RandomSource + ?Sized>(
    rs: &mut R,
    params: FieldParams,
) -> (Matrix, u32) {
    let mut rejections = 0;
    loop {
        let m = random_matrix(rs, params);
        if !m.det().is_zero() {
            return (m, rejections);
        }
        rejections += 1;
    }
}

/// Uniform matrix over all of M_d(F_p), singular or not.
pub fn random_matrix<R: RandomSource + ?Sized>(rs: &mut R, params: FieldParams) -> Matrix {
    let top = params.prime() - 1;
    let entries = (0..params.entries())
        .map(|_| field_uniform(rs, 0, top).value())
        .collect();
    Matrix::from_reduced(params, entries)
}

/// d independent eigenvalues uniform on `[1, p-1]`. Repeats are allowed.
pub fn random_diagonal<R: RandomSource + ?Sized>(rs: &mut R, params: FieldParams) -> DiagonalSpec {
    let top = params.prime() - 1;
    let eig = (0..params.dim())
        .map(|_| field_uniform(rs, 1, top))
        .collect();
    DiagonalSpec::from_nonzero(params, eig)
}
