//! Packed bit vectors.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

/// Error parsing a `0`/`1` string.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid bit character {0:?}")]
pub struct BitParseError(pub char);

/// A fixed-length vector of bits, packed into 64-bit words.
///
/// Bit `i` is the `i`-th character of the textual form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    /// All-zero vector of length `len`.
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; len.div_ceil(64)] }
    }

    /// Uniformly random vector of length `len`.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut v = Self::zeros(len);
        for w in &mut v.words {
            *w = rng.gen();
        }
        v.clear_tail();
        v
    }

    /// Builds a vector from booleans.
    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    fn clear_tail(&mut self) {
        if !self.len.is_multiple_of(64) {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << (self.len % 64)) - 1;
            }
        }
    }

    /// Number of bits.
    pub fn len(&self) -> usize {
        self.len
    }

    /// True for the empty vector.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit `i`.
    ///
    /// # Panics
    /// Panics if `i >= len`.
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index out of range");
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// Sets bit `i`.
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index out of range");
        let mask = 1u64 << (i % 64);
        if bit {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    /// Complements bit `i`.
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index out of range");
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    /// Number of set bits.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Hamming distance to a vector of the same length.
    ///
    /// # Panics
    /// Panics if the lengths differ.
    pub fn hamming_distance(&self, other: &Self) -> usize {
        assert_eq!(self.len, other.len, "length mismatch");
        self.words.iter().zip(&other.words).map(|(a, b)| (a ^ b).count_ones() as usize).sum()
    }

    /// Bitwise AND with a vector of the same length.
    pub fn and(&self, other: &Self) -> Self {
        assert_eq!(self.len, other.len, "length mismatch");
        Self { len: self.len, words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect() }
    }

    /// Iterates over the bits in order.
    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    /// Packed little-endian bytes (bit `i` is bit `i % 8` of byte `i / 8`).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        out.truncate(self.len.div_ceil(8));
        out
    }

    /// Inverse of [`BitVector::to_bytes`]; bits beyond `len` are ignored.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Self {
        let mut v = Self::zeros(len);
        for (i, chunk) in bytes.chunks(8).take(v.words.len()).enumerate() {
            let mut w = [0u8; 8];
            w[..chunk.len()].copy_from_slice(chunk);
            v.words[i] = u64::from_le_bytes(w);
        }
        v.clear_tail();
        v
    }
}

impl FromStr for BitVector {
    type Err = BitParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(BitParseError(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_bits(&bits))
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_and_display() {
        let v: BitVector = "1001".parse().unwrap();
        assert_eq!(v.len(), 4);
        assert!(v.get(0) && !v.get(1) && !v.get(2) && v.get(3));
        assert_eq!(v.to_string(), "1001");
        assert_eq!("10x".parse::<BitVector>(), Err(BitParseError('x')));
    }

    #[test]
    fn distance_and_weight() {
        let a: BitVector = "1001".parse().unwrap();
        let b: BitVector = "1011".parse().unwrap();
        assert_eq!(a.hamming_distance(&b), 1);
        assert_eq!(a.weight(), 2);
        assert_eq!(b.weight(), 3);
        assert_eq!(a.and(&b).weight(), 2);
    }

    proptest! {
        #[test]
        fn bytes_round_trip(bits in proptest::collection::vec(any::<bool>(), 0..300)) {
            let v = BitVector::from_bits(&bits);
            prop_assert_eq!(BitVector::from_bytes(&v.to_bytes(), bits.len()), v.clone());
            prop_assert_eq!(v.iter().collect::<Vec<_>>(), bits);
        }

        #[test]
        fn distance_matches_bit_count(a in proptest::collection::vec(any::<bool>(), 130), b in proptest::collection::vec(any::<bool>(), 130)) {
            let expect = a.iter().zip(&b).filter(|(x, y)| x != y).count();
            prop_assert_eq!(BitVector::from_bits(&a).hamming_distance(&BitVector::from_bits(&b)), expect);
        }
    }
}
