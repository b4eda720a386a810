use proptest::prelude::*;

use tdp_core::analysis::similarity_leak_check;
use tdp_core::keyfile::{
    decode_ciphertext, decode_private, encode_ciphertext, encode_private, PrivateKey,
};
use tdp_core::rng::{field_uniform, random_matrix, random_nonsingular};
use tdp_core::{
    alice_keygen, alice_shared, alice_token, bob_keygen, bob_shared, bob_token, bytes_per_block,
    commuting_from_basis, decode_block, decrypt_block, decrypt_message, encode_block,
    encrypt_block, encrypt_message, gen_setup, validate_session, DiagonalSpec, FieldParams,
    SplitMix64,
};

const SMALL_PRIMES: [u32; 6] = [5, 7, 11, 13, 101, 251];

fn params() -> impl Strategy<Value = FieldParams> {
    (prop::sample::select(SMALL_PRIMES.to_vec()), 2usize..=6)
        .prop_map(|(p, d)| FieldParams::new(p, d).unwrap())
}

fn spec(params: FieldParams) -> impl Strategy<Value = DiagonalSpec> {
    let top = params.prime() as u64 - 1;
    prop::collection::vec(1..=top, params.dim())
        .prop_map(move |v| DiagonalSpec::new(params, &v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn inverse_is_two_sided(params in params(), seed: u64) {
        let mut g = SplitMix64::new(seed);
        let (a, _) = random_nonsingular(&mut g, params);
        let ai = a.inverse().unwrap();
        prop_assert!(a.mul(&ai).unwrap().is_identity());
        prop_assert!(ai.mul(&a).unwrap().is_identity());
    }

    #[test]
    fn det_is_multiplicative(params in params(), seed: u64) {
        let mut g = SplitMix64::new(seed);
        let a = random_matrix(&mut g, params);
        let b = random_matrix(&mut g, params);
        let lhs = a.mul(&b).unwrap().det().value();
        prop_assert_eq!(lhs, params.mul(a.det().value(), b.det().value()));
    }

    #[test]
    fn shared_basis_members_commute(
        (params, s1, s2) in params().prop_flat_map(|p| (Just(p), spec(p), spec(p))),
        seed: u64,
    ) {
        let mut g = SplitMix64::new(seed);
        let (basis, _) = random_nonsingular(&mut g, params);
        let a = commuting_from_basis(&basis, &s1).unwrap();
        let b = commuting_from_basis(&basis, &s2).unwrap();
        prop_assert!(a.commutator(&b).unwrap().is_identity());
    }

    #[test]
    fn keys_agree_and_messages_roundtrip(
        params in params(),
        seed: u64,
        msg in prop::collection::vec(any::<u8>(), 0..200),
    ) {
        let mut g = SplitMix64::new(seed);
        let setup = gen_setup(&mut g, params);
        let a = alice_keygen(&mut g, &setup).unwrap();
        let b = bob_keygen(&mut g, &setup).unwrap();
        prop_assert!(validate_session(&setup, &a, &b).required_hold());
        let ka = alice_shared(&a, &bob_token(&b).unwrap()).unwrap();
        let kb = bob_shared(&b, &alice_token(&a).unwrap()).unwrap();
        prop_assert_eq!(&ka, &kb);
        if bytes_per_block(params) > 0 {
            let cm = encrypt_message(&kb, &msg).unwrap();
            prop_assert_eq!(decrypt_message(&ka, &cm).unwrap(), msg);
        }
    }

    #[test]
    fn cipher_preserves_similarity_invariants(params in params(), seed: u64) {
        let mut g = SplitMix64::new(seed);
        let (k, _) = random_nonsingular(&mut g, params);
        let k = tdp_core::SessionKey::new(k).unwrap();
        let m = tdp_core::PlainBlock(random_matrix(&mut g, params));
        let c = encrypt_block(&k, &m).unwrap();
        prop_assert!(similarity_leak_check(&m, &c).all_preserved());
        prop_assert_eq!(decrypt_block(&k, &c).unwrap(), m);
    }

    #[test]
    fn codec_roundtrip(
        params in params(),
        bytes in prop::collection::vec(any::<u8>(), 0..=63),
    ) {
        let bpb = bytes_per_block(params);
        prop_assume!(bpb > 0);
        let bytes = &bytes[..bytes.len().min(bpb)];
        let block = encode_block(bytes, params).unwrap();
        prop_assert!(block.0.entries().iter().all(|&v| v < params.prime()));
        prop_assert_eq!(decode_block(&block, bytes.len()).unwrap(), bytes.to_vec());
    }

    #[test]
    fn field_uniform_stays_in_range(seed: u64, lo in 0u32..251, width in 0u32..251) {
        let hi = (lo + width).min(250);
        let mut g = SplitMix64::new(seed);
        for _ in 0..16 {
            let v = field_uniform(&mut g, lo, hi).value();
            prop_assert!((lo..=hi).contains(&v));
        }
    }

    #[test]
    fn key_files_roundtrip(seed: u64, msg in prop::collection::vec(any::<u8>(), 0..300)) {
        let params = FieldParams::new(251, 4).unwrap();
        let mut g = SplitMix64::new(seed);
        let setup = gen_setup(&mut g, params);
        let a = alice_keygen(&mut g, &setup).unwrap();
        let b = bob_keygen(&mut g, &setup).unwrap();
        let k = alice_shared(&a, &bob_token(&b).unwrap()).unwrap();
        for key in [PrivateKey::Alice(a), PrivateKey::Bob(b)] {
            let bytes = encode_private(&key).unwrap();
            prop_assert_eq!(encode_private(&decode_private(&bytes).unwrap()).unwrap(), bytes);
        }
        let cm = encrypt_message(&k, &msg).unwrap();
        let bytes = encode_ciphertext(&cm).unwrap();
        prop_assert_eq!(decode_ciphertext(&bytes).unwrap(), cm);
    }
}
