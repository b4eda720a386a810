//! Dense d×d matrices over F_p.
//!
//! Matrices are immutable values: every operation returns a fresh matrix.
//! Inverse and determinant both run Gauss-Jordan elimination with modular
//! pivot inverses.

use std::fmt;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldParams};
use crate::poly::MonicPoly;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    params: FieldParams,
    entries: Vec<u32>,
}

impl Matrix {
    /// Builds a matrix from row-major values, reducing each mod p.
    pub fn from_entries(params: FieldParams, values: &[u64]) -> Result<Self> {
        if values.len() != params.entries() {
            return Err(Error::InvalidParams(format!(
                "expected {} entries, got {}",
                params.entries(),
                values.len()
            )));
        }
        Ok(Matrix {
            params,
            entries: values.iter().map(|&v| params.reduce(v)).collect(),
        })
    }

    pub fn from_rows<R: AsRef<[u64]>>(params: FieldParams, rows: &[R]) -> Result<Self> {
        if rows.len() != params.dim() || rows.iter().any(|r| r.as_ref().len() != params.dim()) {
            return Err(Error::InvalidParams(format!(
                "expected {d}x{d} rows",
                d = params.dim()
            )));
        }
        let flat: Vec<u64> = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().copied())
            .collect();
        Self::from_entries(params, &flat)
    }

    pub(crate) fn from_reduced(params: FieldParams, entries: Vec<u32>) -> Self {
        debug_assert_eq!(entries.len(), params.entries());
        debug_assert!(entries.iter().all(|&v| v < params.prime()));
        Matrix { params, entries }
    }

    pub fn zero(params: FieldParams) -> Self {
        Matrix {
            params,
            entries: vec![0; params.entries()],
        }
    }

    pub fn identity(params: FieldParams) -> Self {
        Self::scalar(params, 1)
    }

    pub fn scalar(params: FieldParams, s: u32) -> Self {
        let d = params.dim();
        let mut m = Self::zero(params);
        let s = s % params.prime();
        for i in 0..d {
            m.entries[i * d + i] = s;
        }
        m
    }

    #[inline]
    pub fn params(&self) -> FieldParams {
        self.params
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    /// Row-major entries.
    #[inline]
    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> FieldElement {
        FieldElement::from_reduced(self.entries[row * self.dim() + col])
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        self.entries.chunks(self.dim())
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.params)
    }

    pub fn is_diagonal(&self) -> bool {
        let d = self.dim();
        self.entries
            .iter()
            .enumerate()
            .all(|(k, &v)| v == 0 || k / d == k % d)
    }

    pub fn diagonal(&self) -> Vec<u32> {
        let d = self.dim();
        (0..d).map(|i| self.entries[i * d + i]).collect()
    }

    pub fn trace(&self) -> FieldElement {
        let f = self.params;
        let t = self.diagonal().into_iter().fold(0, |acc, v| f.add(acc, v));
        FieldElement::from_reduced(t)
    }

    fn check_same(&self, other: &Matrix) -> Result<()> {
        if self.params == other.params {
            Ok(())
        } else {
            Err(Error::ParamsMismatch)
        }
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix> {
        self.check_same(rhs)?;
        let d = self.dim();
        let p = self.params.prime() as u64;
        let mut out = vec![0u32; d * d];
        for i in 0..d {
            let row = &self.entries[i * d..(i + 1) * d];
            for j in 0..d {
                // each product < 2^32, so d of them cannot overflow u64
                let acc: u64 = row
                    .iter()
                    .enumerate()
                    .map(|(k, &a)| a as u64 * rhs.entries[k * d + j] as u64)
                    .sum();
                out[i * d + j] = (acc % p) as u32;
            }
        }
        Ok(Matrix::from_reduced(self.params, out))
    }

    /// Product of a non-empty chain of matrices, left to right.
    pub fn product<'a, I>(factors: I) -> Result<Matrix>
    where
        I: IntoIterator<Item = &'a Matrix>,
    {
        let mut it = factors.into_iter();
        let first = it
            .next()
            .ok_or_else(|| Error::InvalidParams("empty product".into()))?
            .clone();
        it.try_fold(first, |acc, m| acc.mul(m))
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.check_same(rhs)?;
        let f = self.params;
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(&a, &b)| f.add(a, b))
            .collect();
        Ok(Matrix::from_reduced(f, entries))
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.check_same(rhs)?;
        let f = self.params;
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(&a, &b)| f.sub(a, b))
            .collect();
        Ok(Matrix::from_reduced(f, entries))
    }

    pub fn scale(&self, s: u32) -> Matrix {
        let f = self.params;
        let entries = self
            .entries
            .iter()
            .map(|&a| f.mul(a, s % f.prime()))
            .collect();
        Matrix::from_reduced(f, entries)
    }

    /// Determinant via row reduction; each row swap contributes a factor p-1.
    pub fn det(&self) -> FieldElement {
        let f = self.params;
        let d = self.dim();
        let mut a = self.entries.clone();
        let mut det = 1u32;
        for col in 0..d {
            let Some(piv) = (col..d).find(|&r| a[r * d + col] != 0) else {
                return FieldElement::from_reduced(0);
            };
            if piv != col {
                swap_rows(&mut a, d, piv, col);
                det = f.neg(det);
            }
            let pv = a[col * d + col];
            det = f.mul(det, pv);
            let inv = f.inv(pv).expect("nonzero pivot");
            for r in col + 1..d {
                let factor = f.mul(a[r * d + col], inv);
                if factor != 0 {
                    for c in col..d {
                        let t = f.mul(factor, a[col * d + c]);
                        a[r * d + c] = f.sub(a[r * d + c], t);
                    }
                }
            }
        }
        FieldElement::from_reduced(det)
    }

    /// Gauss-Jordan inverse. Fails with [`Error::Singular`] when some column
    /// has no pivot.
    pub fn inverse(&self) -> Result<Matrix> {
        let f = self.params;
        let d = self.dim();
        let mut a = self.entries.clone();
        let mut b = Matrix::identity(f).entries;
        for col in 0..d {
            let piv = (col..d)
                .find(|&r| a[r * d + col] != 0)
                .ok_or(Error::Singular)?;
            if piv != col {
                swap_rows(&mut a, d, piv, col);
                swap_rows(&mut b, d, piv, col);
            }
            let inv = f.inv(a[col * d + col]).expect("nonzero pivot");
            for c in 0..d {
                a[col * d + c] = f.mul(a[col * d + c], inv);
                b[col * d + c] = f.mul(b[col * d + c], inv);
            }
            for r in 0..d {
                if r == col {
                    continue;
                }
                let factor = a[r * d + col];
                if factor == 0 {
                    continue;
                }
                for c in 0..d {
                    let ta = f.mul(factor, a[col * d + c]);
                    a[r * d + c] = f.sub(a[r * d + c], ta);
                    let tb = f.mul(factor, b[col * d + c]);
                    b[r * d + c] = f.sub(b[r * d + c], tb);
                }
            }
        }
        Ok(Matrix::from_reduced(f, b))
    }

    /// Multiplicative commutator `[a, b] = a^-1 b^-1 a b`.
    pub fn commutator(&self, b: &Matrix) -> Result<Matrix> {
        self.check_same(b)?;
        let ai = self.inverse()?;
        let bi = b.inverse()?;
        Matrix::product([&ai, &bi, self, b])
    }

    /// `c^-1 · self · c`.
    pub fn conjugate(&self, c: &Matrix) -> Result<Matrix> {
        self.check_same(c)?;
        let ci = c.inverse()?;
        Matrix::product([&ci, self, c])
    }

    pub fn commutes_with(&self, other: &Matrix) -> Result<bool> {
        Ok(self.mul(other)? == other.mul(self)?)
    }

    pub fn pow(&self, exp: &BigUint) -> Matrix {
        let mut acc = Matrix::identity(self.params);
        for i in (0..exp.bits()).rev() {
            acc = acc.mul(&acc).expect("same params");
            if exp.bit(i) {
                acc = acc.mul(self).expect("same params");
            }
        }
        acc
    }

    /// Characteristic polynomial det(xI - A), via reduction to upper
    /// Hessenberg form followed by the standard column recurrence.
    pub fn char_poly(&self) -> MonicPoly {
        let f = self.params;
        let n = self.dim();
        let mut h = self.entries.clone();
        // similarity reduction to upper Hessenberg
        for m in 1..n.saturating_sub(1) {
            let Some(piv) = (m..n).find(|&i| h[i * n + m - 1] != 0) else {
                continue;
            };
            if piv != m {
                swap_rows(&mut h, n, piv, m);
                for r in 0..n {
                    h.swap(r * n + piv, r * n + m);
                }
            }
            let inv = f.inv(h[m * n + m - 1]).expect("nonzero pivot");
            for i in m + 1..n {
                let t = f.mul(h[i * n + m - 1], inv);
                if t == 0 {
                    continue;
                }
                for c in 0..n {
                    let v = f.mul(t, h[m * n + c]);
                    h[i * n + c] = f.sub(h[i * n + c], v);
                }
                for r in 0..n {
                    let v = f.mul(t, h[r * n + i]);
                    h[r * n + m] = f.add(h[r * n + m], v);
                }
            }
        }
        // polys[k] = char poly of the leading k×k block, ascending coefficients
        let mut polys: Vec<Vec<u32>> = vec![vec![1]];
        for k in 0..n {
            let prev = &polys[k];
            let mut next = vec![0u32; k + 2];
            for (i, &c) in prev.iter().enumerate() {
                next[i + 1] = f.add(next[i + 1], c);
                next[i] = f.sub(next[i], f.mul(h[k * n + k], c));
            }
            let mut sub = 1u32;
            for i in (0..k).rev() {
                sub = f.mul(sub, h[(i + 1) * n + i]);
                let coef = f.mul(h[i * n + k], sub);
                if coef == 0 {
                    continue;
                }
                for (j, &c) in polys[i].iter().enumerate() {
                    next[j] = f.sub(next[j], f.mul(coef, c));
                }
            }
            polys.push(next);
        }
        let mut coeffs = polys.pop().expect("n >= 1");
        coeffs.pop();
        MonicPoly::from_reduced(f.prime(), coeffs)
    }
}

fn swap_rows(a: &mut [u32], d: usize, r1: usize, r2: usize) {
    if r1 == r2 {
        return;
    }
    let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
    let (head, tail) = a.split_at_mut(hi * d);
    head[lo * d..(lo + 1) * d].swap_with_slice(&mut tail[..d]);
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix[{}]", self.params)?;
        f.debug_list().entries(self.rows()).finish()
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.params.prime().saturating_sub(1).to_string().len();
        for (i, row) in self.rows().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{{")?;
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{v:>width$}")?;
            }
            write!(f, "}}")?;
        }
        Ok(())
    }
}

/// Eigenvalues of a diagonal matrix; all nonzero, repeats allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DiagonalSpec {
    params: FieldParams,
    eigenvalues: Vec<FieldElement>,
}

impl DiagonalSpec {
    pub fn new(params: FieldParams, values: &[u64]) -> Result<Self> {
        if values.len() != params.dim() {
            return Err(Error::InvalidParams(format!(
                "expected {} eigenvalues, got {}",
                params.dim(),
                values.len()
            )));
        }
        let eigenvalues: Vec<FieldElement> = values
            .iter()
            .map(|&v| FieldElement::new(v, &params))
            .collect();
        if let Some(i) = eigenvalues.iter().position(|e| e.is_zero()) {
            return Err(Error::ZeroEigenvalue(i));
        }
        Ok(DiagonalSpec {
            params,
            eigenvalues,
        })
    }

    pub(crate) fn from_nonzero(params: FieldParams, eigenvalues: Vec<FieldElement>) -> Self {
        debug_assert!(eigenvalues.iter().all(|e| !e.is_zero()));
        DiagonalSpec {
            params,
            eigenvalues,
        }
    }

    /// The spec with every eigenvalue equal to one.
    pub fn ones(params: FieldParams) -> Self {
        Self::from_nonzero(params, vec![FieldElement::from_reduced(1); params.dim()])
    }

    pub fn params(&self) -> FieldParams {
        self.params
    }

    pub fn eigenvalues(&self) -> &[FieldElement] {
        &self.eigenvalues
    }

    pub fn values(&self) -> Vec<u32> {
        self.eigenvalues.iter().map(|e| e.value()).collect()
    }

    pub fn to_matrix(&self) -> Matrix {
        let d = self.params.dim();
        let mut m = Matrix::zero(self.params);
        for (i, e) in self.eigenvalues.iter().enumerate() {
            m.entries[i * d + i] = e.value();
        }
        m
    }

    /// Product of the eigenvalues, i.e. the determinant of the diagonal matrix.
    pub fn product(&self) -> FieldElement {
        let f = self.params;
        let v = self
            .eigenvalues
            .iter()
            .fold(1, |acc, e| f.mul(acc, e.value()));
        FieldElement::from_reduced(v)
    }
}
