//! Cryptographic substrate.
//!
//! - [`ahe`]: exponential ElGamal over Ristretto, an additively homomorphic
//!   scheme with a small plaintext space and table-assisted decryption.
//! - [`prf`]: a keyed-hash PRF into a prime field.
//! - [`chunks`]: splitting a field-element key into 24-bit plaintext chunks.
//! - [`ole`]: ideal oblivious linear evaluation dealers.

pub mod ahe;
pub mod chunks;
pub mod ole;
pub mod prf;

use thiserror::Error;

pub use ahe::{AdditiveHe, AheKeypair, AhePublicKey, Ciphertext, CIPHERTEXT_BYTES, DEFAULT_MSG_BITS};
pub use chunks::{chunks_to_key, key_to_chunks, KeyChunks, CHUNK_BITS};
pub use ole::{ole_ideal, vole_ideal, OleSenderOutput};
pub use prf::{prf_field, prf_field_bytes, PrfKey};

/// Errors raised by the cryptographic layer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CryptoError {
    /// The decrypted group element is not `m * G` for any plaintext in range.
    #[error("ciphertext does not decrypt to an in-range plaintext")]
    DecryptOutOfRange,
    /// A key chunk does not fit in its bit width.
    #[error("key chunk exceeds {CHUNK_BITS} bits")]
    ChunkOverflow,
    /// Two inputs that must have equal length do not.
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    /// Reassembled chunks do not form a canonical field element.
    #[error("reassembled key is not a canonical field element")]
    NonCanonicalKey,
    /// A serialized group element or ciphertext is malformed.
    #[error("invalid group element encoding")]
    InvalidEncoding,
}
