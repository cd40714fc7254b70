//! Exact-match PSI engines over opaque byte strings.
//!
//! Two engines share one interface: Alice learns which of her elements Bob
//! also holds, Bob learns nothing beyond the sizes.
//!
//! - [`Backend::Oracle`]: Bob sends his set in the clear. It is the ideal
//!   functionality for tests and has no privacy.
//! - [`Backend::Dh`]: commutative blinding over Ristretto. Alice sends
//!   `H(x)^alpha`; Bob returns `H(x)^(alpha beta)` in order together with his
//!   shuffled `H(y)^beta`; Alice raises the latter to `alpha` and compares.

use std::collections::HashSet;
use std::hash::Hash;
use std::str::FromStr;

use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoPoint};
use curve25519_dalek::scalar::Scalar;
use rand::seq::SliceRandom;
use rand::{CryptoRng, RngCore};
use sha2::Sha512;

use crate::transport::{Channel, PayloadReader, PayloadWriter, Tag, TransportError};

/// Width of a compressed group element.
pub const POINT_BYTES: usize = 32;
const HASH_DOMAIN: &[u8] = b"dapsi/psi-dh/v1";

/// Elements of `a` that also occur in `b`, in `a`'s order.
pub fn psi_plain_oracle<T: Eq + Hash + Clone>(a: &[T], b: &[T]) -> Vec<T> {
    let bs: HashSet<&T> = b.iter().collect();
    a.iter().filter(|x| bs.contains(x)).cloned().collect()
}

/// Hashes an element to the group.
pub fn hash_to_group(x: &[u8]) -> RistrettoPoint {
    let mut input = Vec::with_capacity(HASH_DOMAIN.len() + x.len());
    input.extend_from_slice(HASH_DOMAIN);
    input.extend_from_slice(x);
    RistrettoPoint::hash_from_bytes::<Sha512>(&input)
}

/// Samples a non-zero blinding exponent.
pub fn random_exponent<R: RngCore + CryptoRng>(rng: &mut R) -> Scalar {
    loop {
        let s = Scalar::random(rng);
        if s != Scalar::ZERO {
            return s;
        }
    }
}

/// Selects a PSI engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Plaintext ideal functionality.
    Oracle,
    /// Diffie-Hellman commutative blinding.
    #[default]
    Dh,
}

impl FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "oracle" => Ok(Self::Oracle),
            "dh" => Ok(Self::Dh),
            other => Err(format!("unknown backend `{other}` (expected oracle or dh)")),
        }
    }
}

fn write_points(w: &mut PayloadWriter, pts: impl ExactSizeIterator<Item = RistrettoPoint>) {
    w.u32(pts.len() as u32);
    for p in pts {
        w.raw(p.compress().as_bytes());
    }
}

fn read_points(r: &mut PayloadReader<'_>) -> Result<Vec<RistrettoPoint>, TransportError> {
    let n = r.u32()? as usize;
    if n > r.remaining() / POINT_BYTES {
        return Err(TransportError::Malformed("truncated point list"));
    }
    (0..n)
        .map(|_| {
            CompressedRistretto::from_slice(r.raw(POINT_BYTES)?)
                .ok()
                .and_then(|c| c.decompress())
                .ok_or(TransportError::Malformed("invalid group element"))
        })
        .collect()
}

impl Backend {
    /// Alice's side: indices of her elements that Bob also holds, ascending.
    pub fn run_alice<R: RngCore + CryptoRng>(
        self,
        ch: &mut dyn Channel,
        elems: &[Vec<u8>],
        rng: &mut R,
    ) -> Result<Vec<usize>, TransportError> {
        match self {
            Self::Oracle => {
                let payload = ch.recv_expect(Tag::PsiPlainSet)?;
                let mut r = PayloadReader::new(&payload);
                let n = r.u32()? as usize;
                let theirs: HashSet<&[u8]> = (0..n).map(|_| r.bytes()).collect::<Result<_, _>>()?;
                r.finish()?;
                Ok((0..elems.len()).filter(|&i| theirs.contains(elems[i].as_slice())).collect())
            }
            Self::Dh => {
                let alpha = random_exponent(rng);
                let mut w = PayloadWriter::new();
                write_points(&mut w, elems.iter().map(|x| hash_to_group(x) * alpha));
                ch.send(Tag::PsiBlinded, &w.finish())?;
                let payload = ch.recv_expect(Tag::PsiReply)?;
                let mut r = PayloadReader::new(&payload);
                let mine = read_points(&mut r)?;
                let theirs = read_points(&mut r)?;
                r.finish()?;
                if mine.len() != elems.len() {
                    return Err(TransportError::Malformed("reply length differs from query"));
                }
                let theirs: HashSet<[u8; 32]> = theirs.iter().map(|p| (p * alpha).compress().to_bytes()).collect();
                Ok((0..mine.len()).filter(|&i| theirs.contains(&mine[i].compress().to_bytes())).collect())
            }
        }
    }

    /// Bob's side.
    pub fn run_bob<R: RngCore + CryptoRng>(
        self,
        ch: &mut dyn Channel,
        elems: &[Vec<u8>],
        rng: &mut R,
    ) -> Result<(), TransportError> {
        match self {
            Self::Oracle => {
                let mut w = PayloadWriter::new();
                w.u32(elems.len() as u32);
                for x in elems {
                    w.bytes(x);
                }
                ch.send(Tag::PsiPlainSet, &w.finish())
            }
            Self::Dh => {
                let beta = random_exponent(rng);
                let payload = ch.recv_expect(Tag::PsiBlinded)?;
                let mut r = PayloadReader::new(&payload);
                let query = read_points(&mut r)?;
                r.finish()?;
                let mut own: Vec<RistrettoPoint> = elems.iter().map(|y| hash_to_group(y) * beta).collect();
                own.shuffle(rng);
                let mut w = PayloadWriter::new();
                write_points(&mut w, query.into_iter().map(|p| p * beta));
                write_points(&mut w, own.into_iter());
                ch.send(Tag::PsiReply, &w.finish())
            }
        }
    }
}
