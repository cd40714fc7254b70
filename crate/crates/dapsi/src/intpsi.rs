//! Integer distance-aware PSI through prefix-trie set augmentation.
//!
//! A pair `(a, b)` matches when `|a - b| < d`. Alice covers the open interval
//! `(a - d, a + d)` with its maximal enclosing complete subtries, which are
//! exactly the greedy aligned dyadic blocks of the interval; each block is a
//! prefix followed by wildcards. Bob emits the prefixes of `b` with
//! `0, 1, ..., floor(log2(2d - 1)) + 1` wildcards. A string is common to both
//! sets exactly when `b` lies in one of Alice's blocks, so an exact-match PSI
//! over the encoded strings decides the distance predicate.

use std::collections::BTreeMap;
use std::fmt;

use rand::{CryptoRng, RngCore};
use thiserror::Error;

use crate::psi_backend::Backend;
use crate::session::{party_rng, run_in_process, Link};
use crate::transport::{PayloadReader, PayloadWriter, Tag, Transcript, TransportError};

/// Default bit length, matching IPv4 addresses.
pub const DEFAULT_MAX_BIT_LEN: u32 = 32;
/// Largest supported bit length.
pub const MAX_SUPPORTED_BIT_LEN: u32 = 63;

/// Errors raised by integer PSI.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntError {
    /// The distance threshold is zero.
    #[error("distance threshold must be at least 1")]
    InvalidThreshold,
    /// The bit length is outside `1..=63`.
    #[error("bit length {0} is outside 1..={MAX_SUPPORTED_BIT_LEN}")]
    InvalidBitLen(u32),
    /// An input does not fit in the bit length.
    #[error("value {value} does not fit in {bits} bits")]
    OutOfRange { value: u64, bits: u32 },
    /// The peer announced different parameters.
    #[error("peer parameters differ: {0}")]
    ParamMismatch(String),
    /// Channel or backend failure.
    #[error(transparent)]
    Transport(#[from] TransportError),
}

/// Public parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntParams {
    /// Distance threshold: pairs with `|a - b| < d` match.
    pub d: u64,
    /// Bit length `L` of every input.
    pub max_bit_len: u32,
}

impl IntParams {
    /// Validated parameters.
    pub fn new(d: u64, max_bit_len: u32) -> Result<Self, IntError> {
        if d == 0 {
            return Err(IntError::InvalidThreshold);
        }
        if !(1..=MAX_SUPPORTED_BIT_LEN).contains(&max_bit_len) {
            return Err(IntError::InvalidBitLen(max_bit_len));
        }
        Ok(Self { d, max_bit_len })
    }

    fn check(&self, v: u64) -> Result<(), IntError> {
        if v >> self.max_bit_len != 0 {
            return Err(IntError::OutOfRange { value: v, bits: self.max_bit_len });
        }
        Ok(())
    }

    fn top(&self) -> u64 {
        (1u64 << self.max_bit_len) - 1
    }
}

/// A prefix followed by wildcards: the aligned block of `2^(L - prefix_len)`
/// integers sharing the prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WildcardString {
    /// The prefix as an integer, below `2^prefix_len`.
    pub prefix_value: u64,
    /// Number of fixed leading bits.
    pub prefix_len: u32,
    /// Total length `L`.
    pub total_len: u32,
}

impl WildcardString {
    /// The string of `v` with its lowest `wildcards` bits replaced by wildcards.
    pub fn of(v: u64, wildcards: u32, total_len: u32) -> Self {
        Self { prefix_value: v >> wildcards, prefix_len: total_len - wildcards, total_len }
    }

    /// Number of wildcard positions.
    pub fn wildcards(&self) -> u32 {
        self.total_len - self.prefix_len
    }

    /// Smallest and largest integer of the block.
    pub fn bounds(&self) -> (u64, u64) {
        let w = self.wildcards();
        let lo = self.prefix_value << w;
        (lo, lo + ((1u64 << w) - 1))
    }

    /// Whether `x` lies in the block.
    pub fn contains(&self, x: u64) -> bool {
        let (lo, hi) = self.bounds();
        (lo..=hi).contains(&x)
    }
}

impl fmt::Display for WildcardString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.prefix_len).rev() {
            f.write_str(if (self.prefix_value >> i) & 1 == 1 { "1" } else { "0" })?;
        }
        for _ in 0..self.wildcards() {
            f.write_str("*")?;
        }
        Ok(())
    }
}

/// Canonical PSI encoding: `L`, prefix length, then the prefix in
/// `ceil(L / 8)` little-endian bytes.
pub fn wildcard_encode(s: &WildcardString) -> Vec<u8> {
    let mut out = vec![s.total_len as u8, s.prefix_len as u8];
    out.extend_from_slice(&s.prefix_value.to_le_bytes()[..s.total_len.div_ceil(8) as usize]);
    out
}

/// Greedy aligned dyadic decomposition of `[lo, hi]`.
fn dyadic_blocks(lo: u64, hi: u64, total_len: u32) -> Vec<WildcardString> {
    let mut out = Vec::new();
    let (mut x, end) = (u128::from(lo), u128::from(hi) + 1);
    while x < end {
        let mut k = if x == 0 { total_len } else { x.trailing_zeros().min(total_len) };
        while x + (1u128 << k) > end {
            k -= 1;
        }
        out.push(WildcardString::of(x as u64, k, total_len));
        x += 1u128 << k;
    }
    out
}

/// Number of maximal enclosing complete subtries of the trie over `[lo, hi]`.
///
/// Splitting at the highest bit where `lo` and `hi + 1` differ, the left part
/// contributes one block per set bit of its width, and so does the right.
pub fn count_mec_subtries(lo: u64, hi: u64, _total_len: u32) -> u32 {
    let (x, y) = (u128::from(lo), u128::from(hi) + 1);
    let k = 127 - (x ^ y).leading_zeros();
    let mid = y >> k << k;
    (mid - x).count_ones() + (y - mid).count_ones()
}

/// MEC subtries covering the open interval `(lo, hi)` of `L`-bit integers.
pub fn augment_open_interval(lo: u64, hi: u64, total_len: u32) -> Vec<WildcardString> {
    if hi <= lo + 1 {
        return Vec::new();
    }
    dyadic_blocks(lo + 1, hi - 1, total_len)
}

/// Alice's representative strings: the MEC subtries of `(a - d, a + d)`,
/// clamped to `[0, 2^L)`.
pub fn alice_augment(a: u64, params: &IntParams) -> Result<Vec<WildcardString>, IntError> {
    params.check(a)?;
    let lo = a.saturating_sub(params.d - 1);
    let hi = a.saturating_add(params.d - 1).min(params.top());
    Ok(dyadic_blocks(lo, hi, params.max_bit_len))
}

/// Height of the tallest block Bob must offer: `floor(log2(2d - 1)) + 1`.
pub fn ladder_top(d: u64) -> u32 {
    (2 * d - 1).ilog2() + 1
}

/// Bob's prefix ladder with `0..=floor(log2(2d - 1)) + 1` wildcards.
pub fn bob_augment(b: u64, params: &IntParams) -> Result<Vec<WildcardString>, IntError> {
    params.check(b)?;
    Ok((0..=ladder_top(params.d).min(params.max_bit_len))
        .map(|w| WildcardString::of(b, w, params.max_bit_len))
        .collect())
}

/// Baseline augmentation: every integer of the interval as a full string.
pub fn naive_augment(a: u64, params: &IntParams) -> Result<Vec<WildcardString>, IntError> {
    params.check(a)?;
    let lo = a.saturating_sub(params.d - 1);
    let hi = a.saturating_add(params.d - 1).min(params.top());
    Ok((lo..=hi).map(|x| WildcardString::of(x, 0, params.max_bit_len)).collect())
}

/// Set augmentation strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Augmentation {
    /// MEC subtries for Alice and the prefix ladder for Bob.
    #[default]
    Dyadic,
    /// Every integer of Alice's interval, and Bob's value alone.
    Naive,
}

/// Deduplicated encoded strings with the inputs that produced each one.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AugmentedSet {
    /// Encoded strings in ascending byte order.
    pub elems: Vec<Vec<u8>>,
    /// Originating inputs per string.
    pub sources: Vec<Vec<u64>>,
}

impl AugmentedSet {
    fn build(
        values: &[u64],
        params: &IntParams,
        f: impl Fn(u64, &IntParams) -> Result<Vec<WildcardString>, IntError>,
    ) -> Result<Self, IntError> {
        let mut map: BTreeMap<Vec<u8>, Vec<u64>> = BTreeMap::new();
        for &v in values {
            for s in f(v, params)? {
                map.entry(wildcard_encode(&s)).or_default().push(v);
            }
        }
        let (elems, sources) = map.into_iter().unzip();
        Ok(Self { elems, sources })
    }

    /// Alice's augmented set.
    pub fn alice(values: &[u64], params: &IntParams, aug: Augmentation) -> Result<Self, IntError> {
        match aug {
            Augmentation::Dyadic => Self::build(values, params, alice_augment),
            Augmentation::Naive => Self::build(values, params, naive_augment),
        }
    }

    /// Bob's augmented set.
    pub fn bob(values: &[u64], params: &IntParams, aug: Augmentation) -> Result<Self, IntError> {
        match aug {
            Augmentation::Dyadic => Self::build(values, params, bob_augment),
            Augmentation::Naive => Self::build(values, params, |b, p| {
                p.check(b)?;
                Ok(vec![WildcardString::of(b, 0, p.max_bit_len)])
            }),
        }
    }

    /// Number of distinct strings.
    pub fn len(&self) -> usize {
        self.elems.len()
    }

    /// True when empty.
    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }
}

fn dedup_sorted(values: &[u64]) -> Vec<u64> {
    let mut v = values.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

fn write_pairs(w: &mut PayloadWriter, pairs: &[(u64, u64)]) {
    w.u32(pairs.len() as u32);
    for &(a, b) in pairs {
        w.u64(a).u64(b);
    }
}

fn read_pairs(payload: &[u8]) -> Result<Vec<(u64, u64)>, TransportError> {
    let mut r = PayloadReader::new(payload);
    let n = r.u32()? as usize;
    if n > r.remaining() / 16 {
        return Err(TransportError::Malformed("truncated pair list"));
    }
    let pairs = (0..n).map(|_| Ok((r.u64()?, r.u64()?))).collect::<Result<_, TransportError>>()?;
    r.finish()?;
    Ok(pairs)
}

/// Alice's side: augments, runs the backend, sends her sources for every
/// matched string and receives the final pairs.
pub fn int_psi_alice<R: RngCore + CryptoRng>(
    link: &mut Link,
    a_set: &[u64],
    params: &IntParams,
    backend: Backend,
    aug: Augmentation,
    rng: &mut R,
) -> Result<Vec<(u64, u64)>, IntError> {
    let aset = AugmentedSet::alice(&dedup_sorted(a_set), params, aug)?;
    link.set_phase("setup");
    link.peer().send(Tag::Setup, &PayloadWriter::new().u64(params.d).u32(params.max_bit_len).finish())?;
    link.set_phase("psi");
    let hits = backend.run_alice(link.peer(), &aset.elems, rng)?;
    link.set_phase("pairs");
    let mut w = PayloadWriter::new();
    w.u32(hits.len() as u32);
    for &h in &hits {
        w.bytes(&aset.elems[h]).u32(aset.sources[h].len() as u32);
        for &a in &aset.sources[h] {
            w.u64(a);
        }
    }
    link.peer().send(Tag::IntMatches, &w.finish())?;
    Ok(read_pairs(&link.peer().recv_expect(Tag::IntPairs)?)?)
}

/// Bob's side; returns the same pairs Alice obtains.
pub fn int_psi_bob<R: RngCore + CryptoRng>(
    link: &mut Link,
    b_set: &[u64],
    params: &IntParams,
    backend: Backend,
    aug: Augmentation,
    rng: &mut R,
) -> Result<Vec<(u64, u64)>, IntError> {
    let bset = AugmentedSet::bob(&dedup_sorted(b_set), params, aug)?;
    link.set_phase("setup");
    let payload = link.peer().recv_expect(Tag::Setup)?;
    let mut r = PayloadReader::new(&payload);
    let theirs = (r.u64()?, r.u32()?);
    r.finish()?;
    if theirs != (params.d, params.max_bit_len) {
        return Err(IntError::ParamMismatch(format!(
            "(d, L) = {theirs:?}, expected {:?}",
            (params.d, params.max_bit_len)
        )));
    }
    link.set_phase("psi");
    backend.run_bob(link.peer(), &bset.elems, rng)?;
    link.set_phase("pairs");
    let payload = link.peer().recv_expect(Tag::IntMatches)?;
    let mut r = PayloadReader::new(&payload);
    let n = r.u32()? as usize;
    let mut pairs = Vec::new();
    for _ in 0..n {
        let s = r.bytes()?;
        let k = r.u32()? as usize;
        let sources: Vec<u64> = (0..k).map(|_| r.u64()).collect::<Result<_, _>>()?;
        let idx = bset
            .elems
            .binary_search_by(|e| e.as_slice().cmp(s))
            .map_err(|_| TransportError::Malformed("matched string unknown to Bob"))?;
        for &a in &sources {
            for &b in &bset.sources[idx] {
                pairs.push((a, b));
            }
        }
    }
    r.finish()?;
    pairs.sort_unstable();
    pairs.dedup();
    let mut w = PayloadWriter::new();
    write_pairs(&mut w, &pairs);
    link.peer().send(Tag::IntPairs, &w.finish())?;
    Ok(pairs)
}

/// Result of an in-process run.
#[derive(Debug, Clone)]
pub struct IntPsiRun {
    /// Matched `(a, b)` pairs, sorted.
    pub pairs: Vec<(u64, u64)>,
    /// Every frame of the run.
    pub transcript: Transcript,
    /// Size of Alice's augmented set.
    pub alice_strings: usize,
    /// Size of Bob's augmented set.
    pub bob_strings: usize,
}

/// Runs integer PSI between threads; `seed` fixes all randomness.
pub fn int_psi(
    a_set: &[u64],
    b_set: &[u64],
    params: &IntParams,
    backend: Backend,
    aug: Augmentation,
    seed: u64,
) -> Result<IntPsiRun, IntError> {
    let alice_strings = AugmentedSet::alice(&dedup_sorted(a_set), params, aug)?.len();
    let bob_strings = AugmentedSet::bob(&dedup_sorted(b_set), params, aug)?.len();
    let run = run_in_process(
        false,
        |link| int_psi_alice(link, a_set, params, backend, aug, &mut party_rng(seed, "alice")),
        |link| int_psi_bob(link, b_set, params, backend, aug, &mut party_rng(seed, "bob")),
    );
    let pairs = run.alice?;
    let bob_pairs = run.bob?;
    debug_assert_eq!(pairs, bob_pairs);
    Ok(IntPsiRun { pairs, transcript: run.transcript, alice_strings, bob_strings })
}

/// Brute-force reference: every `(a, b)` with `|a - b| < d`, sorted.
pub fn brute_force_pairs(a_set: &[u64], b_set: &[u64], d: u64) -> Vec<(u64, u64)> {
    let (a, b) = (dedup_sorted(a_set), dedup_sorted(b_set));
    let mut out: Vec<(u64, u64)> =
        a.iter().flat_map(|&x| b.iter().filter(move |&&y| x.abs_diff(y) < d).map(move |&y| (x, y))).collect();
    out.sort_unstable();
    out
}
