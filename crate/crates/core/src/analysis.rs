//! Security-claim harness: keyspace sizes, exhaustive pseudo-key recovery at
//! toy sizes, entry-uniformity statistics, and the similarity leak of the
//! conjugation cipher.

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::bcsp::{
    bytes_per_block, decrypt_message, encode_block, encrypt_message, CipherBlock, PlainBlock,
};
use crate::commuting::CommutingFamily;
use crate::error::{Error, Result};
use crate::field::FieldParams;
use crate::matrix::{DiagonalSpec, Matrix};
use crate::poly::{log2, BigCount};
use crate::rng::RandomSource;
use crate::tdp::{
    alice_keygen_counted, alice_shared, alice_token, bob_keygen_counted, bob_shared, bob_token,
    gen_setup_counted, DrawStats, PublicSetup, PublicToken, Role, SessionKey,
};

/// Brute-force size of the four private diagonal specs, under two counting
/// conventions: `(p-2)^(4d)` as published and `(p-1)^(4d)` for "any nonzero
/// eigenvalue", which is what the samplers actually draw from.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyspaceReport {
    pub params: FieldParams,
    pub paper_convention: BigCount,
    pub nonzero_convention: BigCount,
    pub paper_bits: f64,
    pub nonzero_bits: f64,
}

impl KeyspaceReport {
    pub fn paper_quantum_bits(&self) -> f64 {
        self.paper_bits / 2.0
    }

    pub fn nonzero_quantum_bits(&self) -> f64 {
        self.nonzero_bits / 2.0
    }

    pub fn paper_bit_length(&self) -> u64 {
        self.paper_convention.bits()
    }
}

pub fn keyspace_size(params: FieldParams) -> KeyspaceReport {
    let exp = 4 * params.dim() as u32;
    let p = params.prime();
    let paper_convention = BigUint::from(p.saturating_sub(2)).pow(exp);
    let nonzero_convention = BigUint::from(p - 1).pow(exp);
    KeyspaceReport {
        params,
        paper_bits: log2(&paper_convention),
        nonzero_bits: log2(&nonzero_convention),
        paper_convention,
        nonzero_convention,
    }
}

/// Largest `(p-1)^(2d)` the exhaustive search will attempt.
pub const SEARCH_LIMIT: u128 = 10_000_000;

/// Number of `(x1', x2')` candidates: `(p-1)^(2d)`, saturating.
pub fn search_space(params: FieldParams) -> u128 {
    let base = (params.prime() - 1) as u128;
    let mut acc: u128 = 1;
    for _ in 0..2 * params.dim() {
        acc = acc.saturating_mul(base);
    }
    acc
}

/// A tuple solving the three public-key equations under the family
/// constraints; it derives the same session key as Alice's real private key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoKey {
    pub a1: Matrix,
    pub a2: Matrix,
    pub a3: Matrix,
    pub x1: Matrix,
    pub x2: Matrix,
}

impl PseudoKey {
    /// `a1 x1 = u`, `x1^-1 a2 x2 = v`, `x2^-1 a3 = w`.
    pub fn residuals_hold(&self, alice: &PublicToken) -> Result<bool> {
        let [u, v, w] = alice.matrices();
        let x1i = self.x1.inverse()?;
        let x2i = self.x2.inverse()?;
        Ok(self.a1.mul(&self.x1)? == *u
            && Matrix::product([&x1i, &self.a2, &self.x2])? == *v
            && x2i.mul(&self.a3)? == *w)
    }

    /// Alice's side of the agreement with the pseudo-key substituted.
    pub fn session_key(&self, bob: &PublicToken) -> Result<SessionKey> {
        if bob.role() != Role::Bob {
            return Err(Error::RoleMismatch {
                expected: Role::Bob,
                found: bob.role(),
            });
        }
        let [p, q, r] = bob.matrices();
        SessionKey::new(Matrix::product([&self.a1, p, &self.a2, q, &self.a3, r])?)
    }
}

/// Every diagonal spec with entries in `[1, p-1]`, in lexicographic order.
fn all_specs(params: FieldParams) -> impl Iterator<Item = DiagonalSpec> {
    let d = params.dim();
    let top = params.prime() as u64 - 1;
    let mut cur = vec![1u64; d];
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = DiagonalSpec::new(params, &cur).expect("nonzero entries");
        // odometer, last position fastest
        let mut i = d;
        loop {
            if i == 0 {
                done = true;
                break;
            }
            i -= 1;
            if cur[i] < top {
                cur[i] += 1;
                break;
            }
            cur[i] = 1;
        }
        Some(out)
    })
}

struct Candidate {
    spec: DiagonalSpec,
    m: Matrix,
    inv: Matrix,
}

fn family_candidates(fam: &CommutingFamily, params: FieldParams) -> Result<Vec<Candidate>> {
    all_specs(params)
        .map(|spec| {
            let m = fam.member(&spec)?;
            let inv_spec = DiagonalSpec::new(
                params,
                &spec
                    .values()
                    .into_iter()
                    .map(|v| params.inv(v).expect("nonzero") as u64)
                    .collect::<Vec<_>>(),
            )?;
            let inv = fam.member(&inv_spec)?;
            Ok(Candidate { spec, m, inv })
        })
        .collect()
}

fn probe(fam: &CommutingFamily, params: FieldParams) -> Result<Matrix> {
    let p = params.prime() as u64;
    let eig: Vec<u64> = (0..params.dim() as u64).map(|i| 1 + i % (p - 1)).collect();
    fam.member(&DiagonalSpec::new(params, &eig)?)
}

fn in_family(m: &Matrix, fam: &CommutingFamily, probe: &Matrix) -> bool {
    m.commutes_with(probe).unwrap_or(false) && fam.contains(m)
}

fn check_search_size(params: FieldParams) -> Result<()> {
    let space = search_space(params);
    if space > SEARCH_LIMIT {
        return Err(Error::ParamsTooLarge {
            space,
            limit: SEARCH_LIMIT,
        });
    }
    Ok(())
}

/// All family-consistent solutions of Alice's public-key equations.
///
/// Enumerates `x1'` over the R-family and `x2'` over the S-family, sets
/// `a1' = u x1'^-1`, `a2' = x1' v x2'^-1`, `a3' = x2' w`, and keeps the tuple
/// when `a2'` lies in the P-family and `a3'` in the Q-family.
pub fn enumerate_pseudo_keys(setup: &PublicSetup, alice: &PublicToken) -> Result<Vec<PseudoKey>> {
    let params = setup.params();
    check_search_size(params)?;
    if alice.role() != Role::Alice {
        return Err(Error::RoleMismatch {
            expected: Role::Alice,
            found: alice.role(),
        });
    }
    if alice.params() != params {
        return Err(Error::ParamsMismatch);
    }
    let fam_p = CommutingFamily::new(setup.p().clone())?;
    let fam_q = CommutingFamily::new(setup.q().clone())?;
    let fam_r = CommutingFamily::new(setup.r().clone())?;
    let fam_s = CommutingFamily::new(setup.s().clone())?;
    let probe_p = probe(&fam_p, params)?;
    let probe_q = probe(&fam_q, params)?;
    let [u, v, w] = alice.matrices();

    let x1s = family_candidates(&fam_r, params)?;
    let x2s = family_candidates(&fam_s, params)?;
    // a3' depends on x2' alone
    let a3s: Vec<Option<Matrix>> = x2s
        .iter()
        .map(|c| {
            let a3 = c.m.mul(w)?;
            Ok(in_family(&a3, &fam_q, &probe_q).then_some(a3))
        })
        .collect::<Result<_>>()?;

    let mut found = Vec::new();
    for c1 in &x1s {
        let a1 = u.mul(&c1.inv)?;
        let x1v = c1.m.mul(v)?;
        for (c2, a3) in x2s.iter().zip(&a3s) {
            let Some(a3) = a3 else { continue };
            let a2 = x1v.mul(&c2.inv)?;
            if !in_family(&a2, &fam_p, &probe_p) {
                continue;
            }
            debug_assert!(fam_r.spec_of(&c1.m).as_ref() == Some(&c1.spec));
            found.push(PseudoKey {
                a1: a1.clone(),
                a2,
                a3: a3.clone(),
                x1: c1.m.clone(),
                x2: c2.m.clone(),
            });
        }
    }
    Ok(found)
}

/// Exhaustive pseudo-key recovery at toy sizes. Returns the first
/// family-consistent candidate (in enumeration order) whose substituted
/// session key equals `true_key`.
pub fn brute_force_pseudo_key(
    setup: &PublicSetup,
    alice: &PublicToken,
    bob: &PublicToken,
    true_key: &SessionKey,
) -> Result<PseudoKey> {
    for cand in enumerate_pseudo_keys(setup, alice)? {
        if cand.session_key(bob)? == *true_key {
            return Ok(cand);
        }
    }
    Err(Error::NotFound)
}

/// Significance level of the uniformity verdict.
pub const SIGNIFICANCE: f64 = 0.001;

#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub samples: u64,
    /// Count of each value `0..p`.
    pub frequencies: Vec<u64>,
    pub chi_square: f64,
    pub degrees_of_freedom: u32,
    /// Upper critical value at [`SIGNIFICANCE`].
    pub critical_value: f64,
    pub pass: bool,
}

/// Pooled chi-square test of matrix entries against uniform on `[0, p-1]`.
pub fn uniformity_stats(matrices: &[Matrix]) -> Result<StatsReport> {
    let Some(first) = matrices.first() else {
        return Err(Error::TooFewSamples { have: 0, need: 1 });
    };
    let params = first.params();
    let p = params.prime() as usize;
    let mut freq = vec![0u64; p];
    let mut samples = 0u64;
    for m in matrices {
        if m.params() != params {
            return Err(Error::ParamsMismatch);
        }
        for &v in m.entries() {
            freq[v as usize] += 1;
        }
        samples += m.entries().len() as u64;
    }
    let need = 10 * p;
    if (samples as usize) < need {
        return Err(Error::TooFewSamples {
            have: samples as usize,
            need,
        });
    }
    Ok(chi_square_report(freq, samples))
}

fn chi_square_report(frequencies: Vec<u64>, samples: u64) -> StatsReport {
    let k = frequencies.len();
    let expected = samples as f64 / k as f64;
    let chi_square = frequencies
        .iter()
        .map(|&o| {
            let diff = o as f64 - expected;
            diff * diff / expected
        })
        .sum::<f64>();
    let dof = (k - 1) as u32;
    let critical_value = ChiSquared::new(dof as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(1.0 - SIGNIFICANCE);
    StatsReport {
        samples,
        frequencies,
        chi_square,
        degrees_of_freedom: dof,
        critical_value,
        pass: chi_square <= critical_value,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeakReport {
    pub trace_equal: bool,
    pub det_equal: bool,
    pub charpoly_equal: bool,
}

impl LeakReport {
    pub fn all_preserved(&self) -> bool {
        self.trace_equal && self.det_equal && self.charpoly_equal
    }
}

/// Compares the similarity invariants of a plaintext block and a ciphertext
/// block.
pub fn similarity_leak_check(m: &PlainBlock, c: &CipherBlock) -> LeakReport {
    let (a, b) = (m.matrix(), c.matrix());
    if a.params() != b.params() {
        return LeakReport {
            trace_equal: false,
            det_equal: false,
            charpoly_equal: false,
        };
    }
    LeakReport {
        trace_equal: a.trace() == b.trace(),
        det_equal: a.det() == b.det(),
        charpoly_equal: a.char_poly() == b.char_poly(),
    }
}

/// One full agreement-plus-encryption run.
#[derive(Debug, Clone)]
pub struct SessionOutcome {
    pub agreed: bool,
    pub roundtrip: bool,
    pub leak: LeakReport,
    pub plaintext: PlainBlock,
    pub ciphertext: CipherBlock,
    pub draws: DrawStats,
    pub elapsed: Duration,
}

/// Setup, both keygens, token exchange, both shared keys, then one block of
/// random bytes encrypted under Bob's key and decrypted under Alice's.
pub fn run_session<G: RandomSource + ?Sized>(
    rs: &mut G,
    params: FieldParams,
) -> Result<SessionOutcome> {
    let bpb = bytes_per_block(params);
    if bpb == 0 {
        return Err(Error::CodecUnsupported);
    }
    let start = Instant::now();
    let mut draws = DrawStats::default();
    let setup = gen_setup_counted(rs, params, &mut draws);
    let alice = alice_keygen_counted(rs, &setup, &mut draws)?;
    let bob = bob_keygen_counted(rs, &setup, &mut draws)?;
    let ta = alice_token(&alice)?;
    let tb = bob_token(&bob)?;
    let k_alice = alice_shared(&alice, &tb)?;
    let k_bob = bob_shared(&bob, &ta)?;

    let mut msg = vec![0u8; bpb];
    rs.fill_bytes(&mut msg);
    let cm = encrypt_message(&k_bob, &msg)?;
    let roundtrip = decrypt_message(&k_alice, &cm)
        .map(|r| r == msg)
        .unwrap_or(false);
    let elapsed = start.elapsed();

    let plaintext = encode_block(&msg, params)?;
    let ciphertext = cm.blocks.into_iter().next().expect("one full block");
    let leak = similarity_leak_check(&plaintext, &ciphertext);
    Ok(SessionOutcome {
        agreed: k_alice == k_bob,
        roundtrip,
        leak,
        plaintext,
        ciphertext,
        draws,
        elapsed,
    })
}

#[derive(Debug, Clone)]
pub struct SessionSummary {
    pub sessions: u64,
    pub agreements: u64,
    pub roundtrips: u64,
    pub leak_preserved: u64,
    pub total_time: Duration,
    pub draws: DrawStats,
    pub ciphertexts: Vec<Matrix>,
}

impl SessionSummary {
    pub fn agreement_rate(&self) -> f64 {
        self.agreements as f64 / self.sessions as f64
    }

    pub fn mean_session_time(&self) -> Duration {
        self.total_time / self.sessions as u32
    }

    /// Fraction of uniform matrix draws that were singular and redrawn.
    pub fn singular_retry_rate(&self) -> f64 {
        let drawn = self.draws.nonsingular_draws + self.draws.singular_rejections;
        if drawn == 0 {
            0.0
        } else {
            self.draws.singular_rejections as f64 / drawn as f64
        }
    }
}

/// Runs `n` sessions back to back on one source.
pub fn session_statistics<G: RandomSource + ?Sized>(
    rs: &mut G,
    params: FieldParams,
    n: u64,
) -> Result<SessionSummary> {
    if n == 0 {
        return Err(Error::InvalidParams("need at least one session".into()));
    }
    let mut summary = SessionSummary {
        sessions: n,
        agreements: 0,
        roundtrips: 0,
        leak_preserved: 0,
        total_time: Duration::ZERO,
        draws: DrawStats::default(),
        ciphertexts: Vec::with_capacity(n as usize),
    };
    for _ in 0..n {
        let out = run_session(rs, params)?;
        summary.agreements += out.agreed as u64;
        summary.roundtrips += out.roundtrip as u64;
        summary.leak_preserved += out.leak.all_preserved() as u64;
        summary.total_time += out.elapsed;
        summary.draws.merge(&out.draws);
        summary.ciphertexts.push(out.ciphertext.0);
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_matrix, SplitMix64};
    use crate::tdp::{alice_keygen, bob_keygen, gen_setup};

    #[test]
    fn keyspace_values() {
        let r = keyspace_size(FieldParams::default());
        assert_eq!(r.paper_convention, BigUint::from(249u32).pow(32));
        assert_eq!(r.nonzero_convention, BigUint::from(250u32).pow(32));
        assert_eq!(r.paper_bit_length(), 255);
        assert!((r.paper_quantum_bits() * 2.0 - r.paper_bits).abs() < 1e-12);
        let small = keyspace_size(FieldParams::new(5, 2).unwrap());
        assert_eq!(small.paper_convention, BigUint::from(6561u32));
    }

    #[test]
    fn spec_enumeration() {
        let params = FieldParams::new(5, 2).unwrap();
        let all: Vec<Vec<u32>> = all_specs(params).map(|s| s.values()).collect();
        assert_eq!(all.len(), 16);
        assert_eq!(all[0], vec![1, 1]);
        assert_eq!(all[1], vec![1, 2]);
        assert_eq!(all[15], vec![4, 4]);
    }

    #[test]
    fn search_bound() {
        assert_eq!(search_space(FieldParams::new(5, 2).unwrap()), 256);
        assert_eq!(search_space(FieldParams::new(3, 2).unwrap()), 16);
        let big = FieldParams::default();
        let setup = gen_setup(&mut SplitMix64::new(1), big);
        let i = Matrix::identity(big);
        let t = PublicToken::new(Role::Alice, i.clone(), i.clone(), i).unwrap();
        assert!(matches!(
            enumerate_pseudo_keys(&setup, &t),
            Err(Error::ParamsTooLarge { .. })
        ));
    }

    #[test]
    fn toy_attack_recovers_working_key() {
        let params = FieldParams::new(5, 2).unwrap();
        let mut g = SplitMix64::new(1);
        let setup = gen_setup(&mut g, params);
        let a = alice_keygen(&mut g, &setup).unwrap();
        let b = bob_keygen(&mut g, &setup).unwrap();
        let ta = alice_token(&a).unwrap();
        let tb = bob_token(&b).unwrap();
        let k = alice_shared(&a, &tb).unwrap();
        let pk = brute_force_pseudo_key(&setup, &ta, &tb, &k).unwrap();
        assert!(pk.residuals_hold(&ta).unwrap());
        assert_eq!(pk.session_key(&tb).unwrap(), k);
    }

    #[test]
    fn uniformity_rejects_constant() {
        let params = FieldParams::default();
        let zeros = vec![Matrix::zero(params); 100_000 / 64 + 1];
        let r = uniformity_stats(&zeros).unwrap();
        assert!(!r.pass);
        assert_eq!(r.frequencies.iter().sum::<u64>(), r.samples);
    }

    #[test]
    fn uniformity_needs_samples() {
        let params = FieldParams::default();
        assert_eq!(
            uniformity_stats(&[Matrix::zero(params)]),
            Err(Error::TooFewSamples {
                have: 64,
                need: 2510
            })
        );
        assert!(uniformity_stats(&[]).is_err());
    }

    #[test]
    fn uniform_source_passes() {
        let params = FieldParams::default();
        let mut g = SplitMix64::new(31337);
        let ms: Vec<Matrix> = (0..100_000 / 64 + 1)
            .map(|_| random_matrix(&mut g, params))
            .collect();
        let r = uniformity_stats(&ms).unwrap();
        assert_eq!(r.degrees_of_freedom, 250);
        assert!(r.pass, "chi2 {} > {}", r.chi_square, r.critical_value);
    }

    #[test]
    fn unrelated_matrices_differ_in_invariants() {
        let params = FieldParams::default();
        let mut g = SplitMix64::new(8);
        let a = PlainBlock(random_matrix(&mut g, params));
        let b = CipherBlock(random_matrix(&mut g, params));
        let r = similarity_leak_check(&a, &b);
        assert!(!r.charpoly_equal);
    }

    #[test]
    fn single_session_summary() {
        let mut g = SplitMix64::new(7);
        let s = session_statistics(&mut g, FieldParams::default(), 1).unwrap();
        assert_eq!(s.sessions, 1);
        assert_eq!(s.agreements, 1);
        assert_eq!(s.roundtrips, 1);
        assert_eq!(s.leak_preserved, 1);
        assert_eq!(s.ciphertexts.len(), 1);
        assert_eq!(s.draws.nonsingular_draws, 6);
        assert!(session_statistics(&mut g, FieldParams::default(), 0).is_err());
    }
}
