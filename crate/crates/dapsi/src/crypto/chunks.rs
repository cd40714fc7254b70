//! Splitting a PRF key into plaintext-sized chunks for the KeySet.

use super::{CryptoError, PrfKey};
use crate::field::PrimeField;
use crate::Fe;

/// Bit width of one chunk, matching the AHE plaintext space.
pub const CHUNK_BITS: u32 = 24;

/// Base-`2^24` digits of a key, least significant first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyChunks {
    /// The digits.
    pub chunks: Vec<u32>,
}

impl KeyChunks {
    /// Number of chunks for a key of the default field: `ceil(127 / 24) = 6`.
    pub const COUNT: usize = Fe::BITS.div_ceil(CHUNK_BITS) as usize;
}

/// Splits `key` into [`KeyChunks::COUNT`] little-endian 24-bit digits.
pub fn key_to_chunks(key: &PrfKey) -> KeyChunks {
    let mut v = key.0.value();
    let chunks = (0..KeyChunks::COUNT)
        .map(|_| {
            let c = (v & ((1 << CHUNK_BITS) - 1)) as u32;
            v >>= CHUNK_BITS;
            c
        })
        .collect();
    KeyChunks { chunks }
}

/// Reassembles a key from its digits.
pub fn chunks_to_key(chunks: &KeyChunks) -> Result<PrfKey, CryptoError> {
    if chunks.chunks.len() != KeyChunks::COUNT {
        return Err(CryptoError::LengthMismatch(chunks.chunks.len(), KeyChunks::COUNT));
    }
    let mut acc: u128 = 0;
    for (i, &c) in chunks.chunks.iter().enumerate().rev() {
        if c >= 1 << CHUNK_BITS {
            return Err(CryptoError::ChunkOverflow);
        }
        // The top digit only has 127 - 5 * 24 = 7 meaningful bits.
        if i == KeyChunks::COUNT - 1 && u128::from(c) >> (Fe::BITS - CHUNK_BITS * i as u32) != 0 {
            return Err(CryptoError::NonCanonicalKey);
        }
        acc = (acc << CHUNK_BITS) | u128::from(c);
    }
    Fe::from_canonical(acc).map(PrfKey).ok_or(CryptoError::NonCanonicalKey)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn examples() {
        assert_eq!(KeyChunks::COUNT, 6);
        assert_eq!(key_to_chunks(&PrfKey(Fe::from_u64(0))).chunks, vec![0; 6]);
        assert_eq!(key_to_chunks(&PrfKey(Fe::from_u64(1 << 24))).chunks, vec![0, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn digits_match_base_2_24_oracle() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        for _ in 0..100 {
            let k = PrfKey::random(&mut rng);
            let mut v = k.0.value();
            for c in key_to_chunks(&k).chunks {
                assert_eq!(u128::from(c), v % (1 << 24));
                v /= 1 << 24;
            }
            assert_eq!(v, 0);
        }
    }

    #[test]
    fn round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let k = PrfKey::random(&mut rng);
            assert_eq!(chunks_to_key(&key_to_chunks(&k)).unwrap(), k);
        }
    }

    #[test]
    fn rejects_bad_chunks() {
        let mut c = key_to_chunks(&PrfKey(Fe::from_u64(5)));
        c.chunks[0] = 1 << 24;
        assert_eq!(chunks_to_key(&c), Err(CryptoError::ChunkOverflow));
        assert_eq!(chunks_to_key(&KeyChunks { chunks: vec![0; 5] }), Err(CryptoError::LengthMismatch(5, 6)));
        let mut top = vec![0; 6];
        top[5] = 1 << 7;
        assert_eq!(chunks_to_key(&KeyChunks { chunks: top }), Err(CryptoError::NonCanonicalKey));
        // 2^127 - 1 itself is the modulus and not a valid key.
        let all =
            KeyChunks { chunks: vec![(1 << 24) - 1, (1 << 24) - 1, (1 << 24) - 1, (1 << 24) - 1, (1 << 24) - 1, 127] };
        assert_eq!(chunks_to_key(&all), Err(CryptoError::NonCanonicalKey));
    }
}
