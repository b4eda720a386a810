//! Triple decomposition key agreement over `GL(d, F_p)` with a conjugation
//! block cipher, plus the counting and analysis tools around it.
//!
//! ```
//! use tdp_core::{
//!     alice_keygen, alice_shared, alice_token, bob_keygen, bob_shared, bob_token,
//!     decrypt_message, encrypt_message, gen_setup, FieldParams, SplitMix64,
//! };
//!
//! let mut rng = SplitMix64::new(7);
//! let setup = gen_setup(&mut rng, FieldParams::default());
//! let alice = alice_keygen(&mut rng, &setup).unwrap();
//! let bob = bob_keygen(&mut rng, &setup).unwrap();
//! let ka = alice_shared(&alice, &bob_token(&bob).unwrap()).unwrap();
//! let kb = bob_shared(&bob, &alice_token(&alice).unwrap()).unwrap();
//! assert_eq!(ka, kb);
//!
//! let ct = encrypt_message(&kb, b"attack at dawn").unwrap();
//! assert_eq!(decrypt_message(&ka, &ct).unwrap(), b"attack at dawn");
//! ```

pub mod analysis;
pub mod bcsp;
pub mod commuting;
pub mod error;
pub mod field;
pub mod keyfile;
pub mod matrix;
pub mod poly;
pub mod rng;
pub mod tdp;

pub use bcsp::{
    bytes_per_block, decode_block, decrypt_block, decrypt_message, encode_block, encrypt_block,
    encrypt_message, CipherBlock, CipherMessage, PlainBlock,
};
pub use commuting::{commuting_from_basis, verify_commuting_pair, CommutingFamily};
pub use error::{Error, Result};
pub use field::{FieldElement, FieldParams};
pub use matrix::{DiagonalSpec, Matrix};
pub use poly::{BigCount, MonicPoly};
pub use rng::{ByteScript, RandomSource, SplitMix64};
pub use tdp::{
    alice_keygen, alice_shared, alice_token, bob_keygen, bob_shared, bob_token, gen_setup,
    validate_session, AlicePrivate, BobPrivate, PublicSetup, PublicToken, Role, SessionKey,
};
