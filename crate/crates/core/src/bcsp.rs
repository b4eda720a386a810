//! Conjugation cipher keyed by the agreed session matrix, plus the codec
//! that packs byte strings into matrix blocks.
//!
//! A block is encrypted as `K^-1 · M · K` and decrypted as `K · C · K^-1`.
//! Blocks are independent, so equal plaintext blocks give equal ciphertext
//! blocks, and every ciphertext block is similar to its plaintext (same
//! trace, determinant and characteristic polynomial). Both properties are
//! inherent to the construction.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::field::FieldParams;
use crate::matrix::Matrix;
use crate::tdp::SessionKey;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlainBlock(pub Matrix);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherBlock(pub Matrix);

impl PlainBlock {
    pub fn matrix(&self) -> &Matrix {
        &self.0
    }
}

impl CipherBlock {
    pub fn matrix(&self) -> &Matrix {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherMessage {
    pub params: FieldParams,
    pub plaintext_length: u64,
    pub blocks: Vec<CipherBlock>,
}

/// Largest `k` with `256^k < p^(d^2)`; 63 for p = 251, d = 8.
pub fn bytes_per_block(params: FieldParams) -> usize {
    let cap = BigUint::from(params.prime()).pow(params.entries() as u32);
    // 256^k <= cap - 1  <=>  8k <= floor(log2(cap - 1))
    ((cap - 1u32).bits() as usize - 1) / 8
}

fn block_bound(params: FieldParams) -> BigUint {
    BigUint::from(1u32) << (8 * bytes_per_block(params))
}

pub fn block_count(params: FieldParams, len: u64) -> Result<u64> {
    let bpb = bytes_per_block(params) as u64;
    if bpb == 0 {
        return Err(Error::CodecUnsupported);
    }
    Ok(len.div_ceil(bpb))
}

/// Left-pads to a full block, reads it as a big-endian integer and writes its
/// `d^2` base-p digits (most significant first) into the matrix row-major.
pub fn encode_block(bytes: &[u8], params: FieldParams) -> Result<PlainBlock> {
    let bpb = bytes_per_block(params);
    if bpb == 0 {
        return Err(Error::CodecUnsupported);
    }
    if bytes.len() > bpb {
        return Err(Error::BlockTooLong {
            len: bytes.len(),
            max: bpb,
        });
    }
    let n = params.entries();
    let value = BigUint::from_bytes_be(bytes);
    let mut digits = vec![0u64; n];
    if !value.is_zero() {
        let raw = value.to_radix_be(params.prime());
        digits[n - raw.len()..]
            .iter_mut()
            .zip(raw)
            .for_each(|(slot, d)| *slot = d as u64);
    }
    Ok(PlainBlock(Matrix::from_entries(params, &digits)?))
}

/// Inverse of [`encode_block`]: returns the last `length` bytes of the
/// decoded block.
pub fn decode_block(block: &PlainBlock, length: usize) -> Result<Vec<u8>> {
    let params = block.0.params();
    let bpb = bytes_per_block(params);
    if bpb == 0 {
        return Err(Error::CodecUnsupported);
    }
    if length > bpb {
        return Err(Error::BlockTooLong {
            len: length,
            max: bpb,
        });
    }
    let p = BigUint::from(params.prime());
    let value = block
        .0
        .entries()
        .iter()
        .fold(BigUint::zero(), |acc, &v| acc * &p + v);
    if value >= block_bound(params) {
        return Err(Error::ValueOutOfRange);
    }
    let raw = value.to_bytes_be();
    let mut full = vec![0u8; bpb];
    if !value.is_zero() {
        full[bpb - raw.len()..].copy_from_slice(&raw);
    }
    Ok(full[bpb - length..].to_vec())
}

/// `K^-1 · M · K`.
pub fn encrypt_block(k: &SessionKey, m: &PlainBlock) -> Result<CipherBlock> {
    Ok(CipherBlock(m.0.conjugate(k.matrix())?))
}

/// `K · C · K^-1`.
pub fn decrypt_block(k: &SessionKey, c: &CipherBlock) -> Result<PlainBlock> {
    let ki = k.matrix().inverse()?;
    Ok(PlainBlock(Matrix::product([k.matrix(), &c.0, &ki])?))
}

/// Splits `plaintext` into full blocks (last one short), encodes and
/// conjugates each independently.
pub fn encrypt_message(k: &SessionKey, plaintext: &[u8]) -> Result<CipherMessage> {
    let params = k.params();
    let bpb = bytes_per_block(params);
    if bpb == 0 {
        return Err(Error::CodecUnsupported);
    }
    let ki = k.matrix().inverse()?;
    let blocks = plaintext
        .chunks(bpb)
        .map(|chunk| {
            let m = encode_block(chunk, params)?;
            Ok(CipherBlock(Matrix::product([&ki, &m.0, k.matrix()])?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CipherMessage {
        params,
        plaintext_length: plaintext.len() as u64,
        blocks,
    })
}

pub fn decrypt_message(k: &SessionKey, cm: &CipherMessage) -> Result<Vec<u8>> {
    let params = k.params();
    if cm.params != params {
        return Err(Error::ParamsMismatch);
    }
    let bpb = bytes_per_block(params);
    let expected = block_count(params, cm.plaintext_length)? as usize;
    if cm.blocks.len() != expected {
        return Err(Error::Framing {
            expected,
            found: cm.blocks.len(),
        });
    }
    let ki = k.matrix().inverse()?;
    let mut out = Vec::with_capacity(cm.plaintext_length as usize);
    let mut left = cm.plaintext_length as usize;
    for c in &cm.blocks {
        if c.0.params() != params {
            return Err(Error::ParamsMismatch);
        }
        let take = left.min(bpb);
        let m = PlainBlock(Matrix::product([k.matrix(), &c.0, &ki])?);
        out.extend(decode_block(&m, take)?);
        left -= take;
    }
    Ok(out)
}
