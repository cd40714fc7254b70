//! A PRF `F_p x {0,1}* -> F_p` built from SHA-256 with rejection sampling.
//!
//! Output block `i` is `SHA-256(tag || key || len(data) || data || i)`; its
//! low 16 bytes are masked to the bit width of `p` and accepted when below `p`.

use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

use crate::field::{bit_mask, PrimeField};
use crate::Fe;

const DOMAIN: &[u8] = b"dapsi/prf/v1";
const SEED_DOMAIN: &[u8] = b"dapsi/prf-seed/v1";

/// A PRF key: a uniform element of the default field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrfKey(pub Fe);

impl PrfKey {
    /// Samples a uniform key.
    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        Self(Fe::random(rng))
    }

    /// Derives a key deterministically from public seed bytes.
    pub fn from_seed(seed: &[u8]) -> Self {
        Self(hash_to_field(SEED_DOMAIN, &[0u8; 16], seed))
    }

    /// The key as a field element.
    pub fn value(&self) -> Fe {
        self.0
    }
}

fn hash_to_field<F: PrimeField>(domain: &[u8], key: &[u8; 16], data: &[u8]) -> F {
    let mask = bit_mask(F::BITS);
    let mut prefix = Sha256::new();
    prefix.update(domain);
    prefix.update(key);
    prefix.update((data.len() as u64).to_le_bytes());
    prefix.update(data);
    for counter in 0u32.. {
        let mut h = prefix.clone();
        h.update(counter.to_le_bytes());
        let digest = h.finalize();
        let mut low = [0u8; 16];
        low.copy_from_slice(&digest[..16]);
        if let Some(x) = F::from_canonical(u128::from_le_bytes(low) & mask) {
            return x;
        }
    }
    unreachable!("rejection sampling terminates with overwhelming probability")
}

/// `phi(key, index)`: the PRF evaluated at an integer index.
pub fn prf_field<F: PrimeField>(key: &PrfKey, index: u64) -> F {
    prf_field_bytes(key, &index.to_le_bytes())
}

/// The PRF evaluated at an arbitrary byte string.
pub fn prf_field_bytes<F: PrimeField>(key: &PrfKey, data: &[u8]) -> F {
    hash_to_field(DOMAIN, &key.0.to_bytes(), data)
}
