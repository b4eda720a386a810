//! Monic polynomials over F_p, irreducibility testing, companion matrices,
//! multiplicative orders, and the exact group/polynomial counts.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::field::{is_prime, FieldParams};
use crate::matrix::Matrix;
use crate::rng::{field_uniform, RandomSource};

/// Exact non-negative count.
pub type BigCount = BigUint;

/// `x^d + c_{d-1} x^{d-1} + ... + c_0`, stored as `c_0..c_{d-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MonicPoly {
    p: u32,
    coeffs: Vec<u32>,
}

impl MonicPoly {
    pub fn new(p: u32, coeffs: &[u64]) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p));
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidParams(
                "monic polynomial needs degree >= 1".into(),
            ));
        }
        Ok(MonicPoly {
            p,
            coeffs: coeffs.iter().map(|&c| (c % p as u64) as u32).collect(),
        })
    }

    pub(crate) fn from_reduced(p: u32, coeffs: Vec<u32>) -> Self {
        MonicPoly { p, coeffs }
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// Lower coefficients `c_0..c_{d-1}`; the leading one is implicit.
    pub fn coeffs(&self) -> Vec<u32> {
        self.coeffs.clone()
    }

    pub fn eval(&self, x: u32) -> u32 {
        let p = self.p as u64;
        let x = x as u64 % p;
        let mut acc = 1u64;
        for &c in self.coeffs.iter().rev() {
            acc = (acc * x + c as u64) % p;
        }
        acc as u32
    }

    fn dense(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.coeffs.iter().map(|&c| c as u64).collect();
        v.push(1);
        v
    }
}

impl fmt::Display for MonicPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.degree();
        match d {
            1 => write!(f, "x")?,
            _ => write!(f, "x^{d}")?,
        }
        for k in (0..d).rev() {
            let c = self.coeffs[k];
            if c == 0 {
                continue;
            }
            let coef = if c == 1 && k > 0 {
                String::new()
            } else {
                c.to_string()
            };
            match k {
                0 => write!(f, " + {c}")?,
                1 => write!(f, " + {coef}x")?,
                _ => write!(f, " + {coef}x^{k}")?,
            }
        }
        Ok(())
    }
}

// Dense F_p[x] helpers. Ascending coefficients, no trailing zeros.

fn trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = inv_mod(m[dm], p);
    while r.len() > dm {
        let shift = r.len() - 1 - dm;
        let t = r[r.len() - 1] * lead_inv % p;
        for (i, &c) in m.iter().enumerate() {
            let idx = shift + i;
            r[idx] = (r[idx] + p - t * c % p) % p;
        }
        trim(&mut r);
    }
    r
}

fn poly_mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    poly_rem(&prod, m, p)
}

fn poly_powmod(base: &[u64], mut exp: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut acc = poly_rem(&[1], m, p);
    let mut b = poly_rem(base, m, p);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = poly_mulmod(&acc, &b, m, p);
        }
        b = poly_mulmod(&b, &b, m, p);
        exp >>= 1;
    }
    acc
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = poly_rem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// `x^(p^k) mod f`, by k successive p-th powers.
fn frobenius_power(k: usize, f: &[u64], p: u64) -> Vec<u64> {
    let mut r = poly_rem(&[0, 1], f, p);
    for _ in 0..k {
        r = poly_powmod(&r, p, f, p);
    }
    r
}

fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            out.push(k);
            while n.is_multiple_of(k) {
                n /= k;
            }
        }
        k += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin's test: `f` of degree d is irreducible iff `x^(p^d) = x mod f` and
/// `gcd(x^(p^(d/t)) - x, f) = 1` for every prime `t | d`.
pub fn is_irreducible(f: &MonicPoly) -> bool {
    let p = f.p as u64;
    let d = f.degree();
    let dense = f.dense();
    let x = poly_rem(&[0, 1], &dense, p);
    if frobenius_power(d, &dense, p) != x {
        return false;
    }
    prime_divisors(d as u64).into_iter().all(|t| {
        let mut h = frobenius_power(d / t as usize, &dense, p);
        h.resize(h.len().max(2), 0);
        h[1] = (h[1] + p - 1) % p;
        trim(&mut h);
        poly_gcd(&dense, &h, p).len() == 1
    })
}

/// Random monic irreducible polynomial of degree `d`, with a nonzero
/// constant term. Returns the polynomial and the number of candidates tried.
///
/// Candidate coefficients are drawn `c_0` first (on `[1, p-1]`), then
/// `c_1..c_{d-1}` (on `[0, p-1]`).
pub fn random_irreducible<R: RandomSource + ?Sized>(
    rs: &mut R,
    d: usize,
    p: u32,
) -> Result<(MonicPoly, u32)> {
    if d < 1 {
        return Err(Error::InvalidParams("degree must be at least 1".into()));
    }
    if !is_prime(p as u64) {
        return Err(Error::NotPrime(p));
    }
    let mut trials = 0;
    loop {
        trials += 1;
        let mut coeffs = Vec::with_capacity(d);
        coeffs.push(field_uniform(rs, 1, p - 1).value());
        for _ in 1..d {
            coeffs.push(field_uniform(rs, 0, p - 1).value());
        }
        let f = MonicPoly::from_reduced(p, coeffs);
        if is_irreducible(&f) {
            return Ok((f, trials));
        }
    }
}

/// Companion matrix: ones on the subdiagonal, last column `-c_0..-c_{d-1}`.
pub fn companion_matrix(f: &MonicPoly) -> Result<Matrix> {
    let params = FieldParams::new(f.p, f.degree())?;
    let d = f.degree();
    let mut e = vec![0u64; d * d];
    for i in 1..d {
        e[i * d + i - 1] = 1;
    }
    for (i, &c) in f.coeffs.iter().enumerate() {
        e[i * d + d - 1] = params.neg(c) as u64;
    }
    Matrix::from_entries(params, &e)
}

/// Multiplicative order of `m`, given the full factorization of `p^d - 1`.
///
/// Starts from `n = p^d - 1` and strips each prime while `m^(n/q) = I`.
pub fn element_order(m: &Matrix, factorization: &[(u64, u32)]) -> Result<BigCount> {
    let params = m.params();
    let group_exp = BigUint::from(params.prime()).pow(params.dim() as u32) - 1u32;
    let claimed: BigUint = factorization
        .iter()
        .map(|&(q, e)| BigUint::from(q).pow(e))
        .product();
    if claimed != group_exp {
        return Err(Error::InvalidParams(
            "factorization does not multiply to p^d - 1".into(),
        ));
    }
    if !m.pow(&group_exp).is_identity() {
        return Err(Error::NotUnitOrder);
    }
    let mut n = group_exp;
    for &(q, e) in factorization {
        let q = BigUint::from(q);
        for _ in 0..e {
            let cand = &n / &q;
            if m.pow(&cand).is_identity() {
                n = cand;
            } else {
                break;
            }
        }
    }
    Ok(n)
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

fn pow_mod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod_u64(acc, b, m);
        }
        b = mul_mod_u64(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Factors `n` by trial division up to `bound`, accepting a leftover cofactor
/// only when it is provably prime. Returns `None` otherwise.
pub fn factor_trial(mut n: u64, bound: u64) -> Option<Vec<(u64, u32)>> {
    let mut out = Vec::new();
    if n == 0 {
        return None;
    }
    let mut k = 2u64;
    while k <= bound && k.saturating_mul(k) <= n {
        if n.is_multiple_of(k) {
            let mut e = 0;
            while n.is_multiple_of(k) {
                n /= k;
                e += 1;
            }
            out.push((k, e));
        }
        k += if k == 2 { 1 } else { 2 };
    }
    if n > 1 {
        if !is_prime_u64(n) {
            return None;
        }
        out.push((n, 1));
    }
    Some(out)
}

/// |GL(d, F_p)| = prod_{i<d} (p^d - p^i).
pub fn gl_order(params: FieldParams) -> BigCount {
    let p = BigUint::from(params.prime());
    let d = params.dim() as u32;
    let pd = p.pow(d);
    (0..d).map(|i| &pd - p.pow(i)).product()
}

/// p^(d^2): every d×d matrix over F_p.
pub fn total_matrices(params: FieldParams) -> BigCount {
    BigUint::from(params.prime()).pow((params.dim() * params.dim()) as u32)
}

pub fn singular_count(params: FieldParams) -> BigCount {
    total_matrices(params) - gl_order(params)
}

/// p^(d^2 - d).
pub fn nilpotent_count(params: FieldParams) -> BigCount {
    let d = params.dim();
    BigUint::from(params.prime()).pow((d * d - d) as u32)
}

fn mobius(n: u64) -> i32 {
    let mut n = n;
    let mut sign = 1;
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            n /= k;
            if n.is_multiple_of(k) {
                return 0;
            }
            sign = -sign;
        }
        k += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// Number of monic irreducible polynomials of degree `d` over F_p, by the
/// Möbius sum `(1/d) sum_{r|d} mu(d/r) p^r`.
pub fn count_irreducible(d: usize, p: u32) -> BigCount {
    assert!(d >= 1, "degree must be at least 1");
    let pb = BigInt::from(p);
    let d64 = d as u64;
    let sum: BigInt = (1..=d64)
        .filter(|r| d64.is_multiple_of(*r))
        .map(|r| BigInt::from(mobius(d64 / r)) * pb.pow(r as u32))
        .sum();
    let n = sum / BigInt::from(d64);
    n.to_biguint().expect("count is non-negative")
}

/// p^d - 2 (saturating at zero).
pub fn ntot_count(d: usize, p: u32) -> BigCount {
    let v = BigUint::from(p).pow(d as u32);
    let two = BigUint::from(2u32);
    if v < two {
        BigUint::zero()
    } else {
        v - two
    }
}

/// Scientific rendering with `digits` significant digits, truncated (not
/// rounded), e.g. `3.779005647067214e153`.
pub fn scientific(n: &BigUint, digits: usize) -> String {
    let s = n.to_str_radix(10);
    let exp = s.len() - 1;
    let mant: String = s.chars().take(digits.max(1)).collect();
    if mant.len() == 1 {
        format!("{mant}e{exp}")
    } else {
        format!("{}.{}e{exp}", &mant[..1], &mant[1..])
    }
}

/// Leading significant digits of `n` as a string, truncated.
pub fn leading_digits(n: &BigUint, digits: usize) -> String {
    n.to_str_radix(10).chars().take(digits).collect()
}

/// log2 of a positive count.
pub fn log2(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 1000 {
        n.to_f64().map(f64::log2).unwrap_or(f64::INFINITY)
    } else {
        let shift = bits - 64;
        let top = (n >> shift).to_f64().expect("fits");
        top.log2() + shift as f64
    }
}

/// Whether a polynomial's order equals `p^d - 1`.
pub fn is_primitive_order(order: &BigCount, p: u32, d: usize) -> bool {
    *order == BigUint::from(p).pow(d as u32) - BigUint::one()
}
