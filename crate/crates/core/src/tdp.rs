//! Two-party key agreement over GL(d, F_p) based on triple decomposition.
//!
//! The public setup is four random bases `P, Q, R, S`. Alice's private
//! matrices `a2, a3, x1, x2` are diagonal conjugates on `P, Q, R, S`
//! respectively and `a1` is an arbitrary invertible matrix; Bob's `y1, y2,
//! b1, b2` sit on the same four bases and `b3` is arbitrary. Because `a2`
//! commutes with `y1`, `a3` with `y2`, `b1` with `x1` and `b2` with `x2`, both
//! sides arrive at `K = a1 b1 a2 b2 a3 b3`.

use std::fmt;

use crate::commuting::member_with_inverse;
use crate::error::{Error, Result};
use crate::field::FieldParams;
use crate::matrix::{DiagonalSpec, Matrix};
use crate::rng::{random_diagonal, random_nonsingular, RandomSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Alice,
    Bob,
}

impl Role {
    pub fn peer(self) -> Role {
        match self {
            Role::Alice => Role::Bob,
            Role::Bob => Role::Alice,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Alice => "alice",
            Role::Bob => "bob",
        })
    }
}

/// Counters for the random draws behind a keygen or session.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DrawStats {
    /// Calls to the nonsingular sampler.
    pub nonsingular_draws: u64,
    /// Singular matrices discarded inside those calls.
    pub singular_rejections: u64,
    /// Whole-key regenerations forced by a singular derived product.
    pub regenerations: u64,
}

impl DrawStats {
    pub fn merge(&mut self, other: &DrawStats) {
        self.nonsingular_draws += other.nonsingular_draws;
        self.singular_rejections += other.singular_rejections;
        self.regenerations += other.regenerations;
    }

    fn draw<R: RandomSource + ?Sized>(&mut self, rs: &mut R, params: FieldParams) -> Matrix {
        let (m, rej) = random_nonsingular(rs, params);
        self.nonsingular_draws += 1;
        self.singular_rejections += rej as u64;
        m
    }
}

/// The four public eigenvector bases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicSetup {
    params: FieldParams,
    bases: [Matrix; 4],
    inverses: [Matrix; 4],
}

impl PublicSetup {
    pub fn new(p: Matrix, q: Matrix, r: Matrix, s: Matrix) -> Result<Self> {
        let params = p.params();
        if [&q, &r, &s].iter().any(|m| m.params() != params) {
            return Err(Error::ParamsMismatch);
        }
        let inverses = [p.inverse()?, q.inverse()?, r.inverse()?, s.inverse()?];
        Ok(PublicSetup {
            params,
            bases: [p, q, r, s],
            inverses,
        })
    }

    pub fn params(&self) -> FieldParams {
        self.params
    }

    /// Basis for `a2` and `y1`.
    pub fn p(&self) -> &Matrix {
        &self.bases[0]
    }

    /// Basis for `a3` and `y2`.
    pub fn q(&self) -> &Matrix {
        &self.bases[1]
    }

    /// Basis for `b1` and `x1`.
    pub fn r(&self) -> &Matrix {
        &self.bases[2]
    }

    /// Basis for `b2` and `x2`.
    pub fn s(&self) -> &Matrix {
        &self.bases[3]
    }

    pub fn bases(&self) -> &[Matrix; 4] {
        &self.bases
    }

    fn member(&self, which: usize, spec: &DiagonalSpec) -> Result<Matrix> {
        if spec.params() != self.params {
            return Err(Error::ParamsMismatch);
        }
        member_with_inverse(&self.bases[which], &self.inverses[which], spec)
    }
}

const P: usize = 0;
const Q: usize = 1;
const R: usize = 2;
const S: usize = 3;

/// Four independent random nonsingular bases, drawn in the order P, Q, R, S.
pub fn gen_setup<G: RandomSource + ?Sized>(rs: &mut G, params: FieldParams) -> PublicSetup {
    gen_setup_counted(rs, params, &mut DrawStats::default())
}

pub fn gen_setup_counted<G: RandomSource + ?Sized>(
    rs: &mut G,
    params: FieldParams,
    stats: &mut DrawStats,
) -> PublicSetup {
    let p = stats.draw(rs, params);
    let q = stats.draw(rs, params);
    let r = stats.draw(rs, params);
    let s = stats.draw(rs, params);
    PublicSetup::new(p, q, r, s).expect("bases are nonsingular by construction")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlicePrivate {
    setup: PublicSetup,
    d_a2: DiagonalSpec,
    d_a3: DiagonalSpec,
    d_x1: DiagonalSpec,
    d_x2: DiagonalSpec,
    a1: Matrix,
    a2: Matrix,
    a3: Matrix,
    x1: Matrix,
    x2: Matrix,
}

impl AlicePrivate {
    /// Derives `a2, a3, x1, x2` from the diagonal specs on bases P, Q, R, S.
    pub fn from_parts(
        setup: PublicSetup,
        d_a2: DiagonalSpec,
        d_a3: DiagonalSpec,
        d_x1: DiagonalSpec,
        d_x2: DiagonalSpec,
        a1: Matrix,
    ) -> Result<Self> {
        if a1.params() != setup.params() {
            return Err(Error::ParamsMismatch);
        }
        if a1.det().is_zero() {
            return Err(Error::Singular);
        }
        let a2 = setup.member(P, &d_a2)?;
        let a3 = setup.member(Q, &d_a3)?;
        let x1 = setup.member(R, &d_x1)?;
        let x2 = setup.member(S, &d_x2)?;
        Ok(AlicePrivate {
            setup,
            d_a2,
            d_a3,
            d_x1,
            d_x2,
            a1,
            a2,
            a3,
            x1,
            x2,
        })
    }

    pub fn setup(&self) -> &PublicSetup {
        &self.setup
    }

    /// Diagonal specs in the order `dA2, dA3, dX1, dX2`.
    pub fn specs(&self) -> [&DiagonalSpec; 4] {
        [&self.d_a2, &self.d_a3, &self.d_x1, &self.d_x2]
    }

    pub fn a1(&self) -> &Matrix {
        &self.a1
    }
    pub fn a2(&self) -> &Matrix {
        &self.a2
    }
    pub fn a3(&self) -> &Matrix {
        &self.a3
    }
    pub fn x1(&self) -> &Matrix {
        &self.x1
    }
    pub fn x2(&self) -> &Matrix {
        &self.x2
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BobPrivate {
    setup: PublicSetup,
    d_b1: DiagonalSpec,
    d_b2: DiagonalSpec,
    d_y1: DiagonalSpec,
    d_y2: DiagonalSpec,
    b1: Matrix,
    b2: Matrix,
    b3: Matrix,
    y1: Matrix,
    y2: Matrix,
}

impl BobPrivate {
    /// Derives `b1, b2, y1, y2` from the diagonal specs on bases R, S, P, Q.
    pub fn from_parts(
        setup: PublicSetup,
        d_b1: DiagonalSpec,
        d_b2: DiagonalSpec,
        d_y1: DiagonalSpec,
        d_y2: DiagonalSpec,
        b3: Matrix,
    ) -> Result<Self> {
        if b3.params() != setup.params() {
            return Err(Error::ParamsMismatch);
        }
        if b3.det().is_zero() {
            return Err(Error::Singular);
        }
        let b1 = setup.member(R, &d_b1)?;
        let b2 = setup.member(S, &d_b2)?;
        let y1 = setup.member(P, &d_y1)?;
        let y2 = setup.member(Q, &d_y2)?;
        Ok(BobPrivate {
            setup,
            d_b1,
            d_b2,
            d_y1,
            d_y2,
            b1,
            b2,
            b3,
            y1,
            y2,
        })
    }

    pub fn setup(&self) -> &PublicSetup {
        &self.setup
    }

    /// Diagonal specs in the order `dB1, dB2, dY1, dY2`.
    pub fn specs(&self) -> [&DiagonalSpec; 4] {
        [&self.d_b1, &self.d_b2, &self.d_y1, &self.d_y2]
    }

    pub fn b1(&self) -> &Matrix {
        &self.b1
    }
    pub fn b2(&self) -> &Matrix {
        &self.b2
    }
    pub fn b3(&self) -> &Matrix {
        &self.b3
    }
    pub fn y1(&self) -> &Matrix {
        &self.y1
    }
    pub fn y2(&self) -> &Matrix {
        &self.y2
    }
}

fn product_is_singular(factors: &[&Matrix]) -> bool {
    Matrix::product(factors.iter().copied())
        .map(|m| m.det().is_zero())
        .unwrap_or(true)
}

/// Draws `dA2, dA3, dX1, dX2` then `a1`, regenerating everything if
/// `x1·x2` or `a1·a2·a3` comes out singular.
pub fn alice_keygen<G: RandomSource + ?Sized>(
    rs: &mut G,
    setup: &PublicSetup,
) -> Result<AlicePrivate> {
    alice_keygen_counted(rs, setup, &mut DrawStats::default())
}

pub fn alice_keygen_counted<G: RandomSource + ?Sized>(
    rs: &mut G,
    setup: &PublicSetup,
    stats: &mut DrawStats,
) -> Result<AlicePrivate> {
    let params = setup.params();
    loop {
        let d_a2 = random_diagonal(rs, params);
        let d_a3 = random_diagonal(rs, params);
        let d_x1 = random_diagonal(rs, params);
        let d_x2 = random_diagonal(rs, params);
        let a1 = stats.draw(rs, params);
        let k = AlicePrivate::from_parts(setup.clone(), d_a2, d_a3, d_x1, d_x2, a1)?;
        if product_is_singular(&[&k.x1, &k.x2]) || product_is_singular(&[&k.a1, &k.a2, &k.a3]) {
            stats.regenerations += 1;
            continue;
        }
        return Ok(k);
    }
}

/// Draws `dB1, dB2, dY1, dY2` then `b3`, regenerating on a singular
/// `y1·y2` or `b1·b2·b3`.
pub fn bob_keygen<G: RandomSource + ?Sized>(rs: &mut G, setup: &PublicSetup) -> Result<BobPrivate> {
    bob_keygen_counted(rs, setup, &mut DrawStats::default())
}

pub fn bob_keygen_counted<G: RandomSource + ?Sized>(
    rs: &mut G,
    setup: &PublicSetup,
    stats: &mut DrawStats,
) -> Result<BobPrivate> {
    let params = setup.params();
    loop {
        let d_b1 = random_diagonal(rs, params);
        let d_b2 = random_diagonal(rs, params);
        let d_y1 = random_diagonal(rs, params);
        let d_y2 = random_diagonal(rs, params);
        let b3 = stats.draw(rs, params);
        let k = BobPrivate::from_parts(setup.clone(), d_b1, d_b2, d_y1, d_y2, b3)?;
        if product_is_singular(&[&k.y1, &k.y2]) || product_is_singular(&[&k.b1, &k.b2, &k.b3]) {
            stats.regenerations += 1;
            continue;
        }
        return Ok(k);
    }
}

/// A published triple: `(u, v, w)` from Alice or `(p, q, r)` from Bob.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicToken {
    role: Role,
    mats: [Matrix; 3],
}

impl PublicToken {
    pub fn new(role: Role, t1: Matrix, t2: Matrix, t3: Matrix) -> Result<Self> {
        if t2.params() != t1.params() || t3.params() != t1.params() {
            return Err(Error::ParamsMismatch);
        }
        Ok(PublicToken {
            role,
            mats: [t1, t2, t3],
        })
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn params(&self) -> FieldParams {
        self.mats[0].params()
    }

    pub fn matrices(&self) -> &[Matrix; 3] {
        &self.mats
    }

    pub fn t1(&self) -> &Matrix {
        &self.mats[0]
    }
    pub fn t2(&self) -> &Matrix {
        &self.mats[1]
    }
    pub fn t3(&self) -> &Matrix {
        &self.mats[2]
    }
}

/// `u = a1 x1`, `v = x1^-1 a2 x2`, `w = x2^-1 a3`.
pub fn alice_token(k: &AlicePrivate) -> Result<PublicToken> {
    let u = k.a1.mul(&k.x1)?;
    let v = Matrix::product([&k.x1.inverse()?, &k.a2, &k.x2])?;
    let w = k.x2.inverse()?.mul(&k.a3)?;
    PublicToken::new(Role::Alice, u, v, w)
}

/// `p = b1 y1`, `q = y1^-1 b2 y2`, `r = y2^-1 b3`.
pub fn bob_token(k: &BobPrivate) -> Result<PublicToken> {
    let p = k.b1.mul(&k.y1)?;
    let q = Matrix::product([&k.y1.inverse()?, &k.b2, &k.y2])?;
    let r = k.y2.inverse()?.mul(&k.b3)?;
    PublicToken::new(Role::Bob, p, q, r)
}

/// The agreed conjugator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionKey {
    k: Matrix,
}

impl SessionKey {
    pub fn new(k: Matrix) -> Result<Self> {
        if k.det().is_zero() {
            return Err(Error::Singular);
        }
        Ok(SessionKey { k })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.k
    }

    pub fn params(&self) -> FieldParams {
        self.k.params()
    }
}

fn expect_role(token: &PublicToken, expected: Role) -> Result<()> {
    if token.role == expected {
        Ok(())
    } else {
        Err(Error::RoleMismatch {
            expected,
            found: token.role,
        })
    }
}

/// `K = a1 · p · a2 · q · a3 · r`.
pub fn alice_shared(k: &AlicePrivate, bob: &PublicToken) -> Result<SessionKey> {
    expect_role(bob, Role::Bob)?;
    if bob.params() != k.setup.params() {
        return Err(Error::ParamsMismatch);
    }
    let [p, q, r] = &bob.mats;
    SessionKey::new(Matrix::product([&k.a1, p, &k.a2, q, &k.a3, r])?)
}

/// `K = u · b1 · v · b2 · w · b3`.
pub fn bob_shared(k: &BobPrivate, alice: &PublicToken) -> Result<SessionKey> {
    expect_role(alice, Role::Alice)?;
    if alice.params() != k.setup.params() {
        return Err(Error::ParamsMismatch);
    }
    let [u, v, w] = &alice.mats;
    SessionKey::new(Matrix::product([u, &k.b1, v, &k.b2, w, &k.b3])?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    /// Must commute for the key agreement to work.
    Required,
    /// Must NOT commute, or the session degenerates.
    Pitfall,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub kind: CheckKind,
    pub commutes: bool,
    /// The commutator, kept only when the check fails.
    pub offending: Option<Matrix>,
}

impl Check {
    pub fn passed(&self) -> bool {
        match self.kind {
            CheckKind::Required => self.commutes,
            CheckKind::Pitfall => !self.commutes,
        }
    }
}

/// Outcome of [`validate_session`]: four required commutation conditions and
/// eight pitfall commutators, each reported on its own.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn commutes(&self, name: &str) -> bool {
        self.get(name).map(|c| c.commutes).unwrap_or(false)
    }

    pub fn required_hold(&self) -> bool {
        self.checks
            .iter()
            .filter(|c| c.kind == CheckKind::Required)
            .all(Check::passed)
    }

    /// Pitfall pairs that commute.
    pub fn degenerate(&self) -> Vec<&Check> {
        self.checks
            .iter()
            .filter(|c| c.kind == CheckKind::Pitfall && c.commutes)
            .collect()
    }

    pub fn is_weak(&self) -> bool {
        !self.degenerate().is_empty()
    }

    /// `[x1,y1] = [x2,y1] = [x2,y2] = I`: the key is computable from the tokens.
    pub fn pitfall_a(&self) -> bool {
        ["[x1,y1]", "[x2,y1]", "[x2,y2]"]
            .iter()
            .all(|n| self.commutes(n))
    }

    /// `[a2,b1] = [a3,b2] = [a3,b1] = I`: the key is computable from the tokens.
    pub fn pitfall_b(&self) -> bool {
        ["[a2,b1]", "[a3,b2]", "[a3,b1]"]
            .iter()
            .all(|n| self.commutes(n))
    }

    /// `([a2,b1] and [x2,b1]) or ([a3,b2] and [a3,y1])`: security collapses to
    /// a two-factor decomposition.
    pub fn pitfall_c(&self) -> bool {
        (self.commutes("[a2,b1]") && self.commutes("[x2,b1]"))
            || (self.commutes("[a3,b2]") && self.commutes("[a3,y1]"))
    }
}

/// Commutator checks over both parties' private matrices. `setup` names the
/// bases both privates are expected to share; privates built on a different
/// setup show up as failed required checks.
pub fn validate_session(
    _setup: &PublicSetup,
    a: &AlicePrivate,
    b: &BobPrivate,
) -> ValidationReport {
    let pairs: [(&'static str, CheckKind, &Matrix, &Matrix); 12] = [
        ("[a2,y1]", CheckKind::Required, &a.a2, &b.y1),
        ("[a3,y2]", CheckKind::Required, &a.a3, &b.y2),
        ("[b1,x1]", CheckKind::Required, &b.b1, &a.x1),
        ("[b2,x2]", CheckKind::Required, &b.b2, &a.x2),
        ("[x1,y1]", CheckKind::Pitfall, &a.x1, &b.y1),
        ("[x2,y1]", CheckKind::Pitfall, &a.x2, &b.y1),
        ("[x2,y2]", CheckKind::Pitfall, &a.x2, &b.y2),
        ("[a2,b1]", CheckKind::Pitfall, &a.a2, &b.b1),
        ("[a3,b2]", CheckKind::Pitfall, &a.a3, &b.b2),
        ("[a3,b1]", CheckKind::Pitfall, &a.a3, &b.b1),
        ("[x2,b1]", CheckKind::Pitfall, &a.x2, &b.b1),
        ("[a3,y1]", CheckKind::Pitfall, &a.a3, &b.y1),
    ];
    let checks = pairs
        .into_iter()
        .map(|(name, kind, m, n)| {
            let c = m
                .commutator(n)
                .expect("private matrices are nonsingular by construction");
            let commutes = c.is_identity();
            let mut check = Check {
                name,
                kind,
                commutes,
                offending: None,
            };
            if !check.passed() {
                check.offending = Some(c);
            }
            check
        })
        .collect();
    ValidationReport { checks }
}
