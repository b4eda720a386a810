//! `TDP1` binary records.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic        4   "TDP1"
//! record_type  1   1 setup, 2 private, 3 token, 4 session key, 5 ciphertext
//! prime        2
//! dim          1
//! role         1   0 none, 1 alice, 2 bob
//! matrix_count 4
//! [type 2]     1 + count*d   spec count, then d eigenvalue bytes per spec
//! [type 5]     8             plaintext length
//! matrices     matrix_count * d*d bytes, row-major, each < p
//! ```
//!
//! One byte per entry restricts files to `p <= 256`.

use crate::bcsp::{block_count, CipherBlock, CipherMessage};
use crate::error::{Error, Result};
use crate::field::FieldParams;
use crate::matrix::{DiagonalSpec, Matrix};
use crate::tdp::{AlicePrivate, BobPrivate, PublicSetup, PublicToken, Role, SessionKey};

pub const MAGIC: &[u8; 4] = b"TDP1";
pub const HEADER_LEN: usize = 13;
/// Largest prime representable with one byte per entry.
pub const MAX_FILE_PRIME: u32 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordType {
    Setup = 1,
    Private = 2,
    Token = 3,
    SessionKey = 4,
    Ciphertext = 5,
}

impl RecordType {
    fn from_byte(b: u8) -> Result<Self> {
        Ok(match b {
            1 => RecordType::Setup,
            2 => RecordType::Private,
            3 => RecordType::Token,
            4 => RecordType::SessionKey,
            5 => RecordType::Ciphertext,
            _ => return Err(Error::Format(format!("unknown record type {b}"))),
        })
    }
}

fn role_byte(role: Option<Role>) -> u8 {
    match role {
        None => 0,
        Some(Role::Alice) => 1,
        Some(Role::Bob) => 2,
    }
}

fn role_from_byte(b: u8) -> Result<Option<Role>> {
    match b {
        0 => Ok(None),
        1 => Ok(Some(Role::Alice)),
        2 => Ok(Some(Role::Bob)),
        _ => Err(Error::Format(format!("unknown role byte {b}"))),
    }
}

/// A decoded record before interpretation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyFile {
    pub record_type: RecordType,
    pub params: FieldParams,
    pub role: Option<Role>,
    pub specs: Vec<DiagonalSpec>,
    pub plaintext_length: u64,
    pub matrices: Vec<Matrix>,
}

/// Fails with `Format` when `params` cannot be stored one byte per entry.
pub fn check_file_params(params: FieldParams) -> Result<()> {
    if params.prime() > MAX_FILE_PRIME || params.dim() > u8::MAX as usize {
        return Err(Error::Format(format!(
            "{params} does not fit the one-byte-per-entry file format"
        )));
    }
    Ok(())
}

impl KeyFile {
    fn new(record_type: RecordType, params: FieldParams, role: Option<Role>) -> Self {
        KeyFile {
            record_type,
            params,
            role,
            specs: Vec::new(),
            plaintext_length: 0,
            matrices: Vec::new(),
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        check_file_params(self.params)?;
        let d = self.params.dim();
        let mut out = Vec::with_capacity(HEADER_LEN + self.matrices.len() * d * d);
        out.extend_from_slice(MAGIC);
        out.push(self.record_type as u8);
        out.extend_from_slice(&(self.params.prime() as u16).to_le_bytes());
        out.push(d as u8);
        out.push(role_byte(self.role));
        out.extend_from_slice(&(self.matrices.len() as u32).to_le_bytes());
        match self.record_type {
            RecordType::Private => {
                if self.specs.len() > u8::MAX as usize {
                    return Err(Error::Format("too many diagonal specs".into()));
                }
                out.push(self.specs.len() as u8);
                for s in &self.specs {
                    out.extend(s.values().into_iter().map(|v| v as u8));
                }
            }
            RecordType::Ciphertext => out.extend_from_slice(&self.plaintext_length.to_le_bytes()),
            _ => {}
        }
        for m in &self.matrices {
            if m.params() != self.params {
                return Err(Error::ParamsMismatch);
            }
            out.extend(m.entries().iter().map(|&v| v as u8));
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let fmt = |msg: &str| Error::Format(msg.to_string());
        if bytes.len() < HEADER_LEN {
            return Err(fmt("truncated header"));
        }
        if &bytes[..4] != MAGIC {
            return Err(fmt("bad magic"));
        }
        let record_type = RecordType::from_byte(bytes[4])?;
        let prime = u16::from_le_bytes([bytes[5], bytes[6]]) as u32;
        let dim = bytes[7] as usize;
        let role = role_from_byte(bytes[8])?;
        let count = u32::from_le_bytes(bytes[9..13].try_into().expect("4 bytes")) as usize;
        let params = FieldParams::new(prime, dim)
            .map_err(|e| Error::Format(format!("bad parameters: {e}")))?;
        check_file_params(params)?;

        let mut rest = &bytes[HEADER_LEN..];
        let mut take = |n: usize| -> Result<&[u8]> {
            if rest.len() < n {
                return Err(fmt("truncated body"));
            }
            let (head, tail) = rest.split_at(n);
            rest = tail;
            Ok(head)
        };

        let mut file = KeyFile::new(record_type, params, role);
        match record_type {
            RecordType::Private => {
                let n = take(1)?[0] as usize;
                for _ in 0..n {
                    let raw: Vec<u64> = take(dim)?.iter().map(|&b| b as u64).collect();
                    if raw.iter().any(|&v| v == 0 || v >= prime as u64) {
                        return Err(fmt("eigenvalue out of range"));
                    }
                    file.specs.push(DiagonalSpec::new(params, &raw)?);
                }
            }
            RecordType::Ciphertext => {
                file.plaintext_length = u64::from_le_bytes(take(8)?.try_into().expect("8 bytes"));
            }
            _ => {}
        }
        let n = dim * dim;
        let body = count
            .checked_mul(n)
            .ok_or_else(|| fmt("matrix count overflows"))?;
        let data = take(body)?;
        if !rest.is_empty() {
            return Err(fmt("trailing bytes"));
        }
        for chunk in data.chunks(n) {
            if chunk.iter().any(|&b| b as u32 >= prime) {
                return Err(fmt("matrix entry out of range"));
            }
            let vals: Vec<u64> = chunk.iter().map(|&b| b as u64).collect();
            file.matrices.push(Matrix::from_entries(params, &vals)?);
        }
        Ok(file)
    }

    fn expect(&self, ty: RecordType, matrices: usize) -> Result<()> {
        if self.record_type != ty {
            return Err(Error::Format(format!(
                "expected {ty:?} record, found {:?}",
                self.record_type
            )));
        }
        if self.matrices.len() != matrices {
            return Err(Error::Format(format!(
                "{ty:?} record needs {matrices} matrices, found {}",
                self.matrices.len()
            )));
        }
        Ok(())
    }
}

fn setup_from(ms: &[Matrix]) -> Result<PublicSetup> {
    PublicSetup::new(ms[0].clone(), ms[1].clone(), ms[2].clone(), ms[3].clone())
        .map_err(|_| Error::Format("setup basis is singular".into()))
}

pub fn encode_setup(setup: &PublicSetup) -> Result<Vec<u8>> {
    let mut f = KeyFile::new(RecordType::Setup, setup.params(), None);
    f.matrices = setup.bases().to_vec();
    f.to_bytes()
}

pub fn decode_setup(bytes: &[u8]) -> Result<PublicSetup> {
    let f = KeyFile::from_bytes(bytes)?;
    f.expect(RecordType::Setup, 4)?;
    setup_from(&f.matrices)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrivateKey {
    Alice(AlicePrivate),
    Bob(BobPrivate),
}

impl PrivateKey {
    pub fn role(&self) -> Role {
        match self {
            PrivateKey::Alice(_) => Role::Alice,
            PrivateKey::Bob(_) => Role::Bob,
        }
    }

    pub fn setup(&self) -> &PublicSetup {
        match self {
            PrivateKey::Alice(k) => k.setup(),
            PrivateKey::Bob(k) => k.setup(),
        }
    }
}

/// Setup bases, then `a1 a2 a3 x1 x2` (Alice) or `b1 b2 b3 y1 y2` (Bob).
pub fn encode_private(key: &PrivateKey) -> Result<Vec<u8>> {
    let setup = key.setup();
    let mut f = KeyFile::new(RecordType::Private, setup.params(), Some(key.role()));
    f.matrices = setup.bases().to_vec();
    let (specs, own): ([&DiagonalSpec; 4], [&Matrix; 5]) = match key {
        PrivateKey::Alice(k) => (k.specs(), [k.a1(), k.a2(), k.a3(), k.x1(), k.x2()]),
        PrivateKey::Bob(k) => (k.specs(), [k.b1(), k.b2(), k.b3(), k.y1(), k.y2()]),
    };
    f.specs = specs.into_iter().cloned().collect();
    f.matrices.extend(own.into_iter().cloned());
    f.to_bytes()
}

/// Rebuilds the private key from the stored specs and free matrix, and
/// requires the stored derived matrices to match.
pub fn decode_private(bytes: &[u8]) -> Result<PrivateKey> {
    let f = KeyFile::from_bytes(bytes)?;
    f.expect(RecordType::Private, 9)?;
    if f.specs.len() != 4 {
        return Err(Error::Format(format!(
            "private record needs 4 diagonal specs, found {}",
            f.specs.len()
        )));
    }
    let setup = setup_from(&f.matrices[..4])?;
    let own = &f.matrices[4..];
    let [s0, s1, s2, s3]: [DiagonalSpec; 4] = f.specs.clone().try_into().expect("4 specs");
    let bad = |_| Error::Format("free private matrix is singular".into());
    let (key, derived) = match f.role {
        Some(Role::Alice) => {
            let k = AlicePrivate::from_parts(setup, s0, s1, s2, s3, own[0].clone()).map_err(bad)?;
            let derived = [k.a2(), k.a3(), k.x1(), k.x2()].map(Clone::clone);
            (PrivateKey::Alice(k), derived)
        }
        Some(Role::Bob) => {
            let k = BobPrivate::from_parts(setup, s0, s1, s2, s3, own[2].clone()).map_err(bad)?;
            let derived = [k.b1(), k.b2(), k.y1(), k.y2()].map(Clone::clone);
            (PrivateKey::Bob(k), derived)
        }
        None => return Err(Error::Format("private record without a role".into())),
    };
    let stored = match f.role {
        Some(Role::Alice) => [&own[1], &own[2], &own[3], &own[4]],
        _ => [&own[0], &own[1], &own[3], &own[4]],
    };
    if derived.iter().zip(stored).any(|(a, b)| a != b) {
        return Err(Error::Format(
            "stored matrices disagree with the diagonal specs".into(),
        ));
    }
    Ok(key)
}

pub fn encode_token(t: &PublicToken) -> Result<Vec<u8>> {
    let mut f = KeyFile::new(RecordType::Token, t.params(), Some(t.role()));
    f.matrices = t.matrices().to_vec();
    f.to_bytes()
}

pub fn decode_token(bytes: &[u8]) -> Result<PublicToken> {
    let f = KeyFile::from_bytes(bytes)?;
    f.expect(RecordType::Token, 3)?;
    let role = f
        .role
        .ok_or_else(|| Error::Format("token record without a role".into()))?;
    let [a, b, c]: [Matrix; 3] = f.matrices.try_into().expect("3 matrices");
    PublicToken::new(role, a, b, c).map_err(|e| Error::Format(e.to_string()))
}

/// Role byte is 0 so both parties write identical files.
pub fn encode_session_key(k: &SessionKey) -> Result<Vec<u8>> {
    let mut f = KeyFile::new(RecordType::SessionKey, k.params(), None);
    f.matrices = vec![k.matrix().clone()];
    f.to_bytes()
}

pub fn decode_session_key(bytes: &[u8]) -> Result<SessionKey> {
    let f = KeyFile::from_bytes(bytes)?;
    f.expect(RecordType::SessionKey, 1)?;
    let m = f.matrices.into_iter().next().expect("1 matrix");
    SessionKey::new(m).map_err(|_| Error::Format("session key is singular".into()))
}

pub fn encode_ciphertext(cm: &CipherMessage) -> Result<Vec<u8>> {
    let mut f = KeyFile::new(RecordType::Ciphertext, cm.params, None);
    f.plaintext_length = cm.plaintext_length;
    f.matrices = cm.blocks.iter().map(|b| b.0.clone()).collect();
    f.to_bytes()
}

/// Also checks that the block count matches the plaintext length.
pub fn decode_ciphertext(bytes: &[u8]) -> Result<CipherMessage> {
    let f = KeyFile::from_bytes(bytes)?;
    let expected =
        block_count(f.params, f.plaintext_length).map_err(|e| Error::Format(e.to_string()))?;
    f.expect(RecordType::Ciphertext, expected as usize)?;
    Ok(CipherMessage {
        params: f.params,
        plaintext_length: f.plaintext_length,
        blocks: f.matrices.into_iter().map(CipherBlock).collect(),
    })
}
