use std::fs;
use std::io::Write;
use std::path::Path;

use tdp_core::analysis::{
    brute_force_pseudo_key, enumerate_pseudo_keys, keyspace_size, search_space, session_statistics,
    uniformity_stats, SEARCH_LIMIT, SIGNIFICANCE,
};
use tdp_core::keyfile::{
    check_file_params, decode_ciphertext, decode_private, decode_session_key, decode_setup,
    decode_token, encode_ciphertext, encode_private, encode_session_key, encode_setup,
    encode_token, PrivateKey,
};
use tdp_core::poly::{
    companion_matrix, count_irreducible, element_order, factor_trial, gl_order, is_primitive_order,
    nilpotent_count, random_irreducible, scientific, singular_count, total_matrices, BigCount,
};
use tdp_core::tdp::{alice_keygen_counted, bob_keygen_counted, gen_setup_counted, DrawStats};
use tdp_core::{
    alice_shared, alice_token, bob_shared, bob_token, bytes_per_block, decrypt_message,
    encrypt_message, FieldParams, Matrix, PublicToken, Role, SplitMix64,
};

use crate::report::{yes_no, Format, Report};
use crate::{Cli, Command, Common, Failure};

type Outcome = Result<String, Failure>;

/// Factor bound for the order computation in `irreducible`.
const FACTOR_BOUND: u64 = 1_000_000;

pub fn run(cli: &Cli) -> Outcome {
    let c = &cli.common;
    match &cli.command {
        Command::Params => params(c),
        Command::Setup { out } => setup(c, out),
        Command::Keygen { role, input, out } => keygen(c, (*role).into(), input, out),
        Command::Token { key, out } => token(c, key, out),
        Command::Shared {
            key,
            peer,
            role,
            out,
        } => shared(c, key, peer, role.map(Into::into), out),
        Command::Encrypt { key, input, out } => encrypt(c, key, input, out),
        Command::Decrypt { key, input, out } => decrypt(c, key, input, out),
        Command::Stats { sessions } => stats(c, *sessions),
        Command::Attack => attack(c),
        Command::Irreducible { degree } => irreducible(c, *degree),
    }
}

fn flag_params(c: &Common) -> Result<FieldParams, Failure> {
    Ok(FieldParams::new(
        c.prime.unwrap_or(251),
        c.dim.unwrap_or(8),
    )?)
}

/// Parameters usable by the protocol: at least two nonzero eigenvalues.
fn protocol_params(c: &Common) -> Result<FieldParams, Failure> {
    let params = flag_params(c)?;
    if params.prime() == 2 {
        return Err(Failure::new(2, "the protocol needs an odd prime"));
    }
    Ok(params)
}

fn file_params(c: &Common) -> Result<FieldParams, Failure> {
    let params = protocol_params(c)?;
    check_file_params(params).map_err(|_| {
        Failure::new(
            2,
            format!(
                "prime {} does not fit the key file format (one byte per entry, p <= 256)",
                params.prime()
            ),
        )
    })?;
    Ok(params)
}

/// Explicit --prime/--dim flags must agree with parameters read from a file.
fn check_flags(c: &Common, params: FieldParams) -> Result<(), Failure> {
    let prime_ok = c.prime.is_none_or(|p| p == params.prime());
    let dim_ok = c.dim.is_none_or(|d| d == params.dim());
    if prime_ok && dim_ok {
        Ok(())
    } else {
        Err(Failure::new(
            4,
            format!("flags disagree with the input file parameters {params}"),
        ))
    }
}

fn source(c: &Common) -> Result<(SplitMix64, u64), Failure> {
    let seed = match c.seed {
        Some(s) => s,
        None => {
            let mut buf = [0u8; 8];
            getrandom::getrandom(&mut buf)
                .map_err(|e| Failure::new(1, format!("os randomness unavailable: {e}")))?;
            u64::from_le_bytes(buf)
        }
    };
    Ok((SplitMix64::new(seed), seed))
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))
}

/// Writes to a sibling temp file and renames it into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| Failure::new(1, format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

fn finish(c: &Common, r: &Report) -> Outcome {
    Ok(r.render(c.format))
}

/// Exact below 17 digits, else 16 significant digits, truncated.
fn count(n: &BigCount, format: Format) -> String {
    let s = n.to_string();
    if s.len() <= 16 {
        return s;
    }
    let sci = scientific(n, 16);
    match format {
        Format::Kv => sci,
        Format::Text => sci.replacen('e', "×10^", 1),
    }
}

fn matrix_value(m: &Matrix, format: Format) -> String {
    match format {
        Format::Text => format!("\n{m}"),
        Format::Kv => m
            .entries()
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join(","),
    }
}

fn draw_fields(r: &mut Report, d: &DrawStats) {
    r.field(
        "nonsingular_draws",
        "nonsingular draws",
        d.nonsingular_draws,
    )
    .field(
        "singular_rejections",
        "singular rejections",
        d.singular_rejections,
    )
    .field("regenerations", "key regenerations", d.regenerations);
}

fn params(c: &Common) -> Outcome {
    let params = flag_params(c)?;
    let (p, d) = (params.prime(), params.dim());
    let f = c.format;
    let ks = keyspace_size(params);
    let bits = |b: f64| {
        if b.is_finite() {
            format!("{b:.2}")
        } else {
            "0".to_string()
        }
    };
    let mut r = Report::default();
    r.field("group", "group", params)
        .field(
            "total_matrices",
            "matrices p^(d^2)",
            count(&total_matrices(params), f),
        )
        .field("gl_order", "|GL(d, F_p)|", count(&gl_order(params), f))
        .field(
            "singular",
            "singular matrices",
            count(&singular_count(params), f),
        )
        .field(
            "nilpotent",
            "nilpotent matrices",
            count(&nilpotent_count(params), f),
        )
        .field(
            "irreducible",
            "monic irreducible polynomials of degree d",
            count(&count_irreducible(d, p), f),
        )
        .field(
            "bytes_per_block",
            "plaintext bytes per block",
            bytes_per_block(params),
        )
        .field(
            "keyspace_paper",
            "keyspace (p-2)^(4d)",
            count(&ks.paper_convention, f),
        )
        .field(
            "keyspace_paper_bits",
            "keyspace (p-2)^(4d) bits",
            ks.paper_convention.bits(),
        )
        .field(
            "classical_bits_paper",
            "classical security bits (p-2)",
            bits(ks.paper_bits),
        )
        .field(
            "quantum_bits_paper",
            "quantum security bits (p-2)",
            bits(ks.paper_quantum_bits()),
        )
        .field(
            "keyspace_nonzero",
            "keyspace (p-1)^(4d)",
            count(&ks.nonzero_convention, f),
        )
        .field(
            "keyspace_nonzero_bits",
            "keyspace (p-1)^(4d) bits",
            ks.nonzero_convention.bits(),
        )
        .field(
            "classical_bits_nonzero",
            "classical security bits (p-1)",
            bits(ks.nonzero_bits),
        )
        .field(
            "quantum_bits_nonzero",
            "quantum security bits (p-1)",
            bits(ks.nonzero_quantum_bits()),
        );
    if f == Format::Kv {
        r.field("gl_order_exact", "", gl_order(params)).field(
            "singular_exact",
            "",
            singular_count(params),
        );
    }
    finish(c, &r)
}

fn setup(c: &Common, out: &Path) -> Outcome {
    let params = file_params(c)?;
    let (mut g, seed) = source(c)?;
    let mut draws = DrawStats::default();
    let s = gen_setup_counted(&mut g, params, &mut draws);
    write_atomic(out, &encode_setup(&s)?)?;
    let mut r = Report::default();
    r.field("record", "wrote setup", out.display())
        .field("group", "group", params)
        .field("seed", "seed", seed);
    draw_fields(&mut r, &draws);
    finish(c, &r)
}

fn keygen(c: &Common, role: Role, input: &Path, out: &Path) -> Outcome {
    let s = decode_setup(&read(input)?)?;
    check_flags(c, s.params())?;
    let (mut g, seed) = source(c)?;
    let mut draws = DrawStats::default();
    let key = match role {
        Role::Alice => PrivateKey::Alice(alice_keygen_counted(&mut g, &s, &mut draws)?),
        Role::Bob => PrivateKey::Bob(bob_keygen_counted(&mut g, &s, &mut draws)?),
    };
    write_atomic(out, &encode_private(&key)?)?;
    let mut r = Report::default();
    r.field("record", "wrote private key", out.display())
        .field("role", "role", role)
        .field("group", "group", s.params())
        .field("seed", "seed", seed);
    draw_fields(&mut r, &draws);
    finish(c, &r)
}

fn token_of(key: &PrivateKey) -> Result<PublicToken, Failure> {
    Ok(match key {
        PrivateKey::Alice(k) => alice_token(k)?,
        PrivateKey::Bob(k) => bob_token(k)?,
    })
}

fn token(c: &Common, key: &Path, out: &Path) -> Outcome {
    let k = decode_private(&read(key)?)?;
    check_flags(c, k.setup().params())?;
    let t = token_of(&k)?;
    write_atomic(out, &encode_token(&t)?)?;
    let mut r = Report::default();
    r.field("record", "wrote token", out.display())
        .field("role", "role", t.role());
    finish(c, &r)
}

fn shared(c: &Common, key: &Path, peer: &Path, role: Option<Role>, out: &Path) -> Outcome {
    let k = decode_private(&read(key)?)?;
    let t = decode_token(&read(peer)?)?;
    check_flags(c, k.setup().params())?;
    if let Some(role) = role {
        if role != k.role() {
            return Err(Failure::new(
                2,
                format!("--role {role} but the private key belongs to {}", k.role()),
            ));
        }
    }
    if t.params() != k.setup().params() {
        return Err(Failure::new(
            4,
            "private key and peer token use different parameters",
        ));
    }
    let sk = match &k {
        PrivateKey::Alice(a) => alice_shared(a, &t)?,
        PrivateKey::Bob(b) => bob_shared(b, &t)?,
    };
    write_atomic(out, &encode_session_key(&sk)?)?;
    let mut r = Report::default();
    r.field("record", "wrote session key", out.display())
        .field("role", "role", k.role());
    finish(c, &r)
}

fn encrypt(c: &Common, key: &Path, input: &Path, out: &Path) -> Outcome {
    let k = decode_session_key(&read(key)?)?;
    check_flags(c, k.params())?;
    let msg = read(input)?;
    let cm = encrypt_message(&k, &msg)?;
    write_atomic(out, &encode_ciphertext(&cm)?)?;
    let mut r = Report::default();
    r.field("record", "wrote ciphertext", out.display())
        .field("plaintext_bytes", "plaintext bytes", msg.len())
        .field("blocks", "blocks", cm.blocks.len());
    finish(c, &r)
}

fn decrypt(c: &Common, key: &Path, input: &Path, out: &Path) -> Outcome {
    let k = decode_session_key(&read(key)?)?;
    let cm = decode_ciphertext(&read(input)?)?;
    check_flags(c, k.params())?;
    let msg = decrypt_message(&k, &cm)?;
    write_atomic(out, &msg)?;
    let mut r = Report::default();
    r.field("record", "wrote plaintext", out.display()).field(
        "plaintext_bytes",
        "plaintext bytes",
        msg.len(),
    );
    finish(c, &r)
}

fn stats(c: &Common, sessions: u64) -> Outcome {
    let params = protocol_params(c)?;
    if sessions == 0 {
        return Err(Failure::new(2, "--sessions must be at least 1"));
    }
    let (mut g, seed) = source(c)?;
    let s = session_statistics(&mut g, params, sessions)?;
    let mut r = Report::default();
    r.field("group", "group", params)
        .field("seed", "seed", seed)
        .field("sessions", "sessions", s.sessions)
        .field(
            "agreement",
            "agreement",
            format!("{}/{}", s.agreements, s.sessions),
        )
        .field(
            "roundtrip",
            "message roundtrip",
            format!("{}/{}", s.roundtrips, s.sessions),
        )
        .field(
            "mean_session_ms",
            "mean session time (ms)",
            format!("{:.4}", s.mean_session_time().as_secs_f64() * 1e3),
        )
        .field(
            "singular_retry_percent",
            "singular retry rate (%)",
            format!("{:.4}", 100.0 * s.singular_retry_rate()),
        );
    draw_fields(&mut r, &s.draws);
    match uniformity_stats(&s.ciphertexts) {
        Ok(u) => {
            r.field(
                "chi_square",
                "ciphertext entry chi-square",
                format!("{:.2}", u.chi_square),
            )
            .field("chi_square_dof", "degrees of freedom", u.degrees_of_freedom)
            .field(
                "chi_square_critical",
                &format!("critical value at {SIGNIFICANCE}"),
                format!("{:.2}", u.critical_value),
            )
            .field("uniform", "entries uniform", yes_no(u.pass));
        }
        Err(e) => {
            r.field("uniform", "entries uniform", format!("untested ({e})"));
        }
    }
    r.field(
        "similarity_preserved",
        "trace/det/charpoly preserved",
        yes_no(s.leak_preserved == s.sessions),
    );
    finish(c, &r)
}

fn attack(c: &Common) -> Outcome {
    let params = protocol_params(c)?;
    let space = search_space(params);
    if space > SEARCH_LIMIT {
        return Err(Failure::new(
            2,
            format!(
                "search space (p-1)^(2d) = {} exceeds the bound {SEARCH_LIMIT}; use toy parameters",
                if space == u128::MAX {
                    "overflow".to_string()
                } else {
                    space.to_string()
                }
            ),
        ));
    }
    let (mut g, seed) = source(c)?;
    let mut draws = DrawStats::default();
    let setup = gen_setup_counted(&mut g, params, &mut draws);
    let alice = alice_keygen_counted(&mut g, &setup, &mut draws)?;
    let bob = bob_keygen_counted(&mut g, &setup, &mut draws)?;
    let ta = alice_token(&alice)?;
    let tb = bob_token(&bob)?;
    let k = alice_shared(&alice, &tb)?;
    let consistent = enumerate_pseudo_keys(&setup, &ta)?.len();
    let pk = brute_force_pseudo_key(&setup, &ta, &tb, &k)?;
    let works = pk.session_key(&tb)? == k;
    let is_true = pk.a1 == *alice.a1()
        && pk.a2 == *alice.a2()
        && pk.a3 == *alice.a3()
        && pk.x1 == *alice.x1()
        && pk.x2 == *alice.x2();

    let f = c.format;
    let mut r = Report::default();
    r.field("group", "group", params)
        .field("seed", "seed", seed)
        .field("search_space", "search space", space)
        .field(
            "consistent_candidates",
            "family-consistent candidates",
            consistent,
        )
        .field("a1", "a1'", matrix_value(&pk.a1, f))
        .field("a2", "a2'", matrix_value(&pk.a2, f))
        .field("a3", "a3'", matrix_value(&pk.a3, f))
        .field("x1", "x1'", matrix_value(&pk.x1, f))
        .field("x2", "x2'", matrix_value(&pk.x2, f))
        .field(
            "residuals",
            "public-key equations hold",
            yes_no(pk.residuals_hold(&ta)?),
        )
        .field(
            "reproduces_key",
            "pseudo-key reproduces session key",
            yes_no(works),
        )
        .field(
            "equals_private",
            "pseudo-key equals the real private key",
            yes_no(is_true),
        );
    finish(c, &r)
}

fn root_order(root: u32, p: u32) -> u64 {
    let mut acc = root as u64;
    let mut k = 1;
    while acc != 1 {
        acc = acc * root as u64 % p as u64;
        k += 1;
    }
    k
}

fn irreducible(c: &Common, degree: Option<usize>) -> Outcome {
    let p = c.prime.unwrap_or(251);
    // validates the prime with the library's rules
    FieldParams::new(p, 2)?;
    let d = degree.or(c.dim).unwrap_or(8);
    if d < 1 {
        return Err(Failure::new(2, "--degree must be at least 1"));
    }
    let (mut g, seed) = source(c)?;
    let (poly, trials) = random_irreducible(&mut g, d, p)?;
    let mut r = Report::default();
    r.field("seed", "seed", seed)
        .field("polynomial", "polynomial", &poly)
        .field("trials", "candidates tried", trials);

    let order = if d == 1 {
        let root = FieldParams::new(p, 2)?.neg(poly.coeffs()[0]);
        r.field("root", "root", root);
        Some(root_order(root, p).into())
    } else {
        let comp = companion_matrix(&poly)?;
        r.field(
            "companion",
            "companion matrix",
            matrix_value(&comp, c.format),
        );
        (p as u64)
            .checked_pow(d as u32)
            .and_then(|n| factor_trial(n - 1, FACTOR_BOUND))
            .map(|fac| element_order(&comp, &fac))
            .transpose()?
    };
    match order {
        Some(o) => {
            let prim = is_primitive_order(&o, p, d);
            match c.format {
                Format::Text => r.text(format!("order {o}, primitive: {}", yes_no(prim))),
                Format::Kv => r
                    .field("order", "", &o)
                    .field("primitive", "", yes_no(prim)),
            };
        }
        None => {
            r.field("order", "order", "unknown (p^d - 1 not factored)");
        }
    }
    finish(c, &r)
}
