//! Exponential ElGamal over the Ristretto group.
//!
//! `Enc(m) = (r G, m G + r H)` with `H = sk G`. Addition of ciphertexts adds
//! plaintexts; multiplying both components by a scalar multiplies the
//! plaintext. Decryption recovers `m G` and solves the discrete logarithm for
//! `m < 2^msg_bits` with baby-step giant-step over a shared table of `2^16`
//! baby steps; anything outside that range is reported as
//! [`CryptoError::DecryptOutOfRange`].

use std::collections::HashMap;
use std::sync::OnceLock;

use curve25519_dalek::constants::{RISTRETTO_BASEPOINT_POINT, RISTRETTO_BASEPOINT_TABLE};
use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoBasepointTable, RistrettoPoint};
use curve25519_dalek::scalar::Scalar;
use curve25519_dalek::traits::Identity;
use rand::{CryptoRng, RngCore};

use super::CryptoError;

/// Default plaintext width in bits.
pub const DEFAULT_MSG_BITS: u32 = 24;
/// Serialized ciphertext width in bytes.
pub const CIPHERTEXT_BYTES: usize = 64;

const BABY_BITS: u32 = 16;
const GIANT_BATCH: usize = 64;

/// An additively homomorphic public-key encryption scheme.
pub trait AdditiveHe {
    /// Ciphertext type.
    type Ciphertext: Clone;

    /// Plaintext width in bits.
    fn msg_bits(&self) -> u32;
    /// Encrypts `m < 2^msg_bits`.
    fn encrypt<R: RngCore + CryptoRng>(&self, m: u64, rng: &mut R) -> Self::Ciphertext;
    /// Encryption of the plaintext sum.
    fn add(&self, a: &Self::Ciphertext, b: &Self::Ciphertext) -> Self::Ciphertext;
    /// Encryption of the plaintext difference.
    fn sub(&self, a: &Self::Ciphertext, b: &Self::Ciphertext) -> Self::Ciphertext;
    /// Encryption of `s` times the plaintext.
    fn scale(&self, c: &Self::Ciphertext, s: i64) -> Self::Ciphertext;
    /// Multiplies the plaintext by a fresh uniformly random non-zero scalar:
    /// zero stays zero, anything else becomes a uniformly random group element.
    fn blind_random<R: RngCore + CryptoRng>(&self, c: &Self::Ciphertext, rng: &mut R) -> Self::Ciphertext;
}

/// An ElGamal ciphertext `(c1, c2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ciphertext {
    c1: RistrettoPoint,
    c2: RistrettoPoint,
}

impl Ciphertext {
    /// The randomness-free encryption `(0, m G)`, valid under every key.
    pub fn trivial(m: u64) -> Self {
        Self { c1: RistrettoPoint::identity(), c2: RISTRETTO_BASEPOINT_TABLE * &Scalar::from(m) }
    }

    /// Compressed encoding: `c1 || c2`.
    pub fn to_bytes(&self) -> [u8; CIPHERTEXT_BYTES] {
        let mut out = [0u8; CIPHERTEXT_BYTES];
        out[..32].copy_from_slice(self.c1.compress().as_bytes());
        out[32..].copy_from_slice(self.c2.compress().as_bytes());
        out
    }

    /// Decodes [`Ciphertext::to_bytes`] output.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        if bytes.len() != CIPHERTEXT_BYTES {
            return Err(CryptoError::InvalidEncoding);
        }
        Ok(Self { c1: decode_point(&bytes[..32])?, c2: decode_point(&bytes[32..])? })
    }
}

fn decode_point(bytes: &[u8]) -> Result<RistrettoPoint, CryptoError> {
    CompressedRistretto::from_slice(bytes)
        .map_err(|_| CryptoError::InvalidEncoding)?
        .decompress()
        .ok_or(CryptoError::InvalidEncoding)
}

fn signed_scalar(s: i64) -> Scalar {
    let mag = Scalar::from(s.unsigned_abs());
    if s < 0 {
        -mag
    } else {
        mag
    }
}

/// Public key: `H = sk G` plus a fixed-base table for `H`.
#[derive(Clone)]
pub struct AhePublicKey {
    h: RistrettoPoint,
    h_table: RistrettoBasepointTable,
    msg_bits: u32,
}

impl std::fmt::Debug for AhePublicKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AhePublicKey").field("h", &self.h.compress()).field("msg_bits", &self.msg_bits).finish()
    }
}

impl PartialEq for AhePublicKey {
    fn eq(&self, other: &Self) -> bool {
        self.h == other.h && self.msg_bits == other.msg_bits
    }
}

impl AhePublicKey {
    fn from_point(h: RistrettoPoint, msg_bits: u32) -> Self {
        Self { h, h_table: RistrettoBasepointTable::create(&h), msg_bits }
    }

    /// Compressed encoding of `H` (32 bytes).
    pub fn to_bytes(&self) -> [u8; 32] {
        self.h.compress().to_bytes()
    }

    /// Decodes a public key for the given plaintext width.
    pub fn from_bytes(bytes: &[u8], msg_bits: u32) -> Result<Self, CryptoError> {
        Ok(Self::from_point(decode_point(bytes)?, msg_bits))
    }
}

impl AdditiveHe for AhePublicKey {
    type Ciphertext = Ciphertext;

    fn msg_bits(&self) -> u32 {
        self.msg_bits
    }

    fn encrypt<R: RngCore + CryptoRng>(&self, m: u64, rng: &mut R) -> Ciphertext {
        let r = Scalar::random(rng);
        let mg = match m {
            0 => RistrettoPoint::identity(),
            1 => RISTRETTO_BASEPOINT_POINT,
            _ => RISTRETTO_BASEPOINT_TABLE * &Scalar::from(m),
        };
        Ciphertext { c1: RISTRETTO_BASEPOINT_TABLE * &r, c2: mg + &self.h_table * &r }
    }

    fn add(&self, a: &Ciphertext, b: &Ciphertext) -> Ciphertext {
        Ciphertext { c1: a.c1 + b.c1, c2: a.c2 + b.c2 }
    }

    fn sub(&self, a: &Ciphertext, b: &Ciphertext) -> Ciphertext {
        Ciphertext { c1: a.c1 - b.c1, c2: a.c2 - b.c2 }
    }

    fn scale(&self, c: &Ciphertext, s: i64) -> Ciphertext {
        let k = signed_scalar(s);
        Ciphertext { c1: c.c1 * k, c2: c.c2 * k }
    }

    fn blind_random<R: RngCore + CryptoRng>(&self, c: &Ciphertext, rng: &mut R) -> Ciphertext {
        let k = loop {
            let k = Scalar::random(rng);
            if k != Scalar::ZERO {
                break k;
            }
        };
        Ciphertext { c1: c.c1 * k, c2: c.c2 * k }
    }
}

/// A keypair; decryption requires the secret scalar.
#[derive(Clone)]
pub struct AheKeypair {
    pk: AhePublicKey,
    sk: Scalar,
}

impl std::fmt::Debug for AheKeypair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AheKeypair").field("pk", &self.pk).finish_non_exhaustive()
    }
}

impl AheKeypair {
    /// Generates a keypair for plaintexts below `2^msg_bits`.
    ///
    /// # Panics
    /// Panics if `msg_bits` is 0 or above 40.
    pub fn generate<R: RngCore + CryptoRng>(msg_bits: u32, rng: &mut R) -> Self {
        assert!((1..=40).contains(&msg_bits), "unsupported plaintext width");
        let sk = Scalar::random(rng);
        Self { pk: AhePublicKey::from_point(RISTRETTO_BASEPOINT_TABLE * &sk, msg_bits), sk }
    }

    /// The public half.
    pub fn public(&self) -> &AhePublicKey {
        &self.pk
    }

    /// Decrypts to the plaintext in `[0, 2^msg_bits)`.
    pub fn decrypt(&self, c: &Ciphertext) -> Result<u64, CryptoError> {
        discrete_log(c.c2 - c.c1 * self.sk, self.pk.msg_bits)
    }
}

impl AdditiveHe for AheKeypair {
    type Ciphertext = Ciphertext;

    fn msg_bits(&self) -> u32 {
        self.pk.msg_bits
    }
    fn encrypt<R: RngCore + CryptoRng>(&self, m: u64, rng: &mut R) -> Ciphertext {
        self.pk.encrypt(m, rng)
    }
    fn add(&self, a: &Ciphertext, b: &Ciphertext) -> Ciphertext {
        self.pk.add(a, b)
    }
    fn sub(&self, a: &Ciphertext, b: &Ciphertext) -> Ciphertext {
        self.pk.sub(a, b)
    }
    fn scale(&self, c: &Ciphertext, s: i64) -> Ciphertext {
        self.pk.scale(c, s)
    }
    fn blind_random<R: RngCore + CryptoRng>(&self, c: &Ciphertext, rng: &mut R) -> Ciphertext {
        self.pk.blind_random(c, rng)
    }
}

/// Baby steps keyed by the first 8 bytes of `compress(2 * lo * G)`.
///
/// Doubling before compression lets both sides use the batched
/// double-and-compress routine, which shares one field inversion per batch.
fn baby_table() -> &'static HashMap<u64, u32> {
    static TABLE: OnceLock<HashMap<u64, u32>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = 1usize << BABY_BITS;
        let mut points = Vec::with_capacity(n);
        let mut acc = RistrettoPoint::identity();
        for _ in 0..n {
            points.push(acc);
            acc += RISTRETTO_BASEPOINT_POINT;
        }
        let compressed = RistrettoPoint::double_and_compress_batch(&points);
        let mut table = HashMap::with_capacity(n);
        for (lo, c) in compressed.iter().enumerate() {
            table.entry(prefix_key(c)).or_insert(lo as u32);
        }
        table
    })
}

fn prefix_key(c: &CompressedRistretto) -> u64 {
    u64::from_le_bytes(c.as_bytes()[..8].try_into().expect("8 bytes"))
}

fn discrete_log(target: RistrettoPoint, msg_bits: u32) -> Result<u64, CryptoError> {
    let table = baby_table();
    let limit = 1u64 << msg_bits;
    let step = RISTRETTO_BASEPOINT_TABLE * &Scalar::from(1u64 << BABY_BITS);
    let giants = limit.div_ceil(1 << BABY_BITS) as usize;
    let mut current = target;
    let mut hi = 0usize;
    while hi < giants {
        let batch_len = GIANT_BATCH.min(giants - hi);
        let mut batch = Vec::with_capacity(batch_len);
        for _ in 0..batch_len {
            batch.push(current);
            current -= step;
        }
        let compressed = RistrettoPoint::double_and_compress_batch(&batch);
        for (i, c) in compressed.iter().enumerate() {
            if let Some(&lo) = table.get(&prefix_key(c)) {
                let m = (((hi + i) as u64) << BABY_BITS) + u64::from(lo);
                if m < limit && RISTRETTO_BASEPOINT_TABLE * &Scalar::from(m) == target {
                    return Ok(m);
                }
            }
        }
        hi += batch_len;
    }
    Err(CryptoError::DecryptOutOfRange)
}
