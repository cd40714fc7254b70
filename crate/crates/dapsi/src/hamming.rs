//! Hamming-distance-aware PSI.
//!
//! For every query vector `a_i`, Bob picks a public seed that permutes the
//! coordinates and splits them into `N` bins. Each party maps its vector to
//! the set of `N` PRF values of `(bin index, bin contents)` and to the
//! `N`-bit parity vector of its bins. The query then runs in three phases:
//!
//! - `restricted`: Alice sends her encrypted parity vector. For each of his
//!   vectors `b_j` Bob computes `Enc(HD(X, Y_j))` homomorphically and returns a
//!   KeySet: row `i` holds the chunks of a fresh PRF key `k_j`, each masked by
//!   a random multiple of `HD - i`. Alice opens a row only when the parity
//!   distance is at most `d`.
//! - `recon`: one VOLE batch per abscissa carries blinded set-reconciliation
//!   values for every `j`. Alice strips the blind with each opened key and
//!   recovers the bins that differ, which succeeds when at most `d` bins differ.
//! - `reveal`: Alice sends `a_i` and the key she recovered. Bob checks the key
//!   and the distance and releases `b_j` only if both hold.
//!
//! The sub-sampled variant ([`ham_psi_sample`]) replaces the bins with `T`
//! masked PRF samples computed by the dealer's oracle, and matches when at
//! least `t` samples agree.

use rand::seq::index::sample as sample_indices;
use rand::seq::SliceRandom;
use rand::{CryptoRng, Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::bits::BitVector;
use crate::crypto::{
    chunks_to_key, key_to_chunks, prf_field_bytes, AdditiveHe, AheKeypair, AhePublicKey, Ciphertext, CryptoError,
    KeyChunks, PrfKey, CIPHERTEXT_BYTES, DEFAULT_MSG_BITS,
};
use crate::session::{
    decode_vole_output, encode_subsample_sender, encode_vectors, encode_vole_sender, party_rng, run_in_process, Link,
};
use crate::setrecon::{
    binomial, eval_points, prf_blinds, AliceRecon, CandidateScan, MappedSet, RandomEvalSampler, ReconError,
    ReconOutcome,
};
use crate::transport::{PayloadReader, PayloadWriter, Tag, Transcript, TransportError};
use crate::Fe;

/// Length of the per-query partition seed.
pub const SEED_BYTES: usize = 32;
/// Default bound on the number of candidate probes per sub-sampled query.
pub const DEFAULT_COMPUTE_CAP: u128 = 1 << 24;

/// Errors raised by the Hamming protocols.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HamError {
    /// Channel failure.
    #[error(transparent)]
    Transport(#[from] TransportError),
    /// Set reconciliation failure.
    #[error(transparent)]
    Recon(#[from] ReconError),
    /// Cryptographic layer failure.
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    /// Parameters violate a documented constraint.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    /// The peer announced different public parameters.
    #[error("peer parameters differ: {0}")]
    ParamMismatch(String),
    /// Alice recovered a key but Bob's check rejected the claim.
    #[error("Bob rejected the recovered match")]
    VerifyFailed,
    /// The protocol needs a dealer connection and none was supplied.
    #[error("this protocol requires a dealer")]
    DealerRequired,
    /// The peer deviated from the message flow.
    #[error("protocol violation: {0}")]
    Protocol(&'static str),
    /// The candidate search is larger than the configured cap.
    #[error("candidate search needs {candidates} probes, cap is {cap}")]
    ComputeCapExceeded { candidates: u128, cap: u128 },
}

/// Public parameters of the binned protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamParams {
    /// Vector length.
    pub ell: usize,
    /// Distance threshold: pairs with `HD <= d` match.
    pub d: usize,
    /// Target false-positive rate for pairs with `d < HD <= 2d`.
    pub fpr: f64,
    /// Number of bins `N`.
    pub n_bins: usize,
}

impl HamParams {
    /// Parameters with `N = ceil(2 d^2 / fpr)` bins.
    pub fn new(ell: usize, d: usize, fpr: f64) -> Result<Self, HamError> {
        if !(fpr > 0.0 && fpr < 0.5) {
            return Err(HamError::InvalidParams(format!("false-positive rate {fpr} is outside (0, 0.5)")));
        }
        let n_bins = (2.0 * (d * d) as f64 / fpr - 1e-9).ceil().max(1.0) as usize;
        Self::with_bins(ell, d, fpr, n_bins)
    }

    /// Parameters with an explicit bin count.
    pub fn with_bins(ell: usize, d: usize, fpr: f64, n_bins: usize) -> Result<Self, HamError> {
        if d == 0 || 2 * d >= ell {
            return Err(HamError::InvalidParams(format!("need 0 < d < l/2, got d = {d}, l = {ell}")));
        }
        if n_bins < 2 * d + 1 {
            return Err(HamError::InvalidParams(format!("need at least 2d + 1 bins, got {n_bins}")));
        }
        Ok(Self { ell, d, fpr, n_bins })
    }

    /// Number of reconciliation abscissas, `N + 2d + 1`.
    pub fn recon_points(&self) -> usize {
        self.n_bins + 2 * self.d + 1
    }

    fn abscissas(&self) -> Vec<Fe> {
        eval_points(self.n_bins, self.recon_points())
    }
}

/// A vector split into bins by a seeded permutation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    /// Bin contents, in permuted coordinate order.
    pub sub_vectors: Vec<BitVector>,
    /// Parity of each bin.
    pub parity: BitVector,
}

impl Partition {
    /// The set `{ PRF(i || bin_i) }` keyed by the seed-derived public key.
    pub fn encode(&self, key: &PrfKey) -> MappedSet<Fe> {
        let elems = self.sub_vectors.iter().enumerate().map(|(i, s)| encode_bin(key, i, s)).collect();
        MappedSet::new(elems).expect("bin indices make the encodings distinct")
    }
}

fn encode_bin(key: &PrfKey, i: usize, bin: &BitVector) -> Fe {
    let mut data = Vec::with_capacity(8 + bin.len().div_ceil(8));
    data.extend_from_slice(&(i as u32).to_le_bytes());
    data.extend_from_slice(&(bin.len() as u32).to_le_bytes());
    data.extend_from_slice(&bin.to_bytes());
    prf_field_bytes(key, &data)
}

/// Permutes the coordinates of `v` with a seeded shuffle and cuts them into
/// `n_bins` contiguous bins; bin `i` starts at position `floor(i l / N)`.
pub fn permute_and_partition(v: &BitVector, seed: &[u8; SEED_BYTES], n_bins: usize) -> Partition {
    let ell = v.len();
    let mut perm: Vec<usize> = (0..ell).collect();
    perm.shuffle(&mut ChaCha20Rng::from_seed(*seed));
    let bounds: Vec<usize> = (0..=n_bins).map(|i| i * ell / n_bins).collect();
    let sub_vectors: Vec<BitVector> = bounds
        .windows(2)
        .map(|w| BitVector::from_bits(&perm[w[0]..w[1]].iter().map(|&p| v.get(p)).collect::<Vec<_>>()))
        .collect();
    let parity = BitVector::from_bits(&sub_vectors.iter().map(|s| s.weight() % 2 == 1).collect::<Vec<_>>());
    Partition { sub_vectors, parity }
}

/// The public encoding key derived from a partition seed.
pub fn encoding_key(seed: &[u8; SEED_BYTES]) -> PrfKey {
    PrfKey::from_seed(seed)
}

/// Alice's encrypted parity vector together with the encryption of its weight.
#[derive(Debug, Clone)]
pub struct EncryptedParity {
    cts: Vec<Ciphertext>,
    sum: Ciphertext,
}

impl EncryptedParity {
    /// Encrypts each bit of `x`.
    pub fn encrypt<R: RngCore + CryptoRng>(pk: &AhePublicKey, x: &BitVector, rng: &mut R) -> Self {
        Self::from_ciphertexts(pk, x.iter().map(|b| pk.encrypt(u64::from(b), rng)).collect())
    }

    /// Wraps received ciphertexts.
    pub fn from_ciphertexts(pk: &AhePublicKey, cts: Vec<Ciphertext>) -> Self {
        let sum = cts.iter().fold(Ciphertext::trivial(0), |acc, c| pk.add(&acc, c));
        Self { cts, sum }
    }

    /// The per-bit ciphertexts.
    pub fn ciphertexts(&self) -> &[Ciphertext] {
        &self.cts
    }

    /// `Enc(HD(X, y))` via `HD = w(X) + w(y) - 2 sum_{y_i = 1} X_i`.
    pub fn distance<R: RngCore + CryptoRng>(&self, pk: &AhePublicKey, y: &BitVector, rng: &mut R) -> Ciphertext {
        let mut acc = pk.add(&self.sum, &pk.encrypt(y.weight() as u64, rng));
        for (c, bit) in self.cts.iter().zip(y.iter()) {
            if bit {
                acc = pk.sub(&pk.sub(&acc, c), c);
            }
        }
        acc
    }
}

/// Encrypted key rows: row `i` decrypts to the key chunks exactly when the
/// encrypted distance equals `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeySet {
    /// `(d + 1)` rows of [`KeyChunks::COUNT`] ciphertexts.
    pub rows: Vec<Vec<Ciphertext>>,
}

impl KeySet {
    /// Cell `(i, c)` is `r_ic (HD - i) + chunk_c` under fresh non-zero `r_ic`.
    pub fn build<R: RngCore + CryptoRng>(
        pk: &AhePublicKey,
        enc_hd: &Ciphertext,
        key: &PrfKey,
        d: usize,
        rng: &mut R,
    ) -> Self {
        let chunks = key_to_chunks(key);
        let rows = (0..=d)
            .map(|i| {
                let shifted = pk.sub(enc_hd, &Ciphertext::trivial(i as u64));
                chunks
                    .chunks
                    .iter()
                    .map(|&c| pk.add(&pk.blind_random(&shifted, rng), &pk.encrypt(u64::from(c), rng)))
                    .collect()
            })
            .collect();
        Self { rows }
    }

    /// Every key carried by a fully decryptable row, with the row index.
    /// A row is abandoned at its first cell that does not decrypt.
    pub fn open(&self, kp: &AheKeypair) -> Vec<(usize, PrfKey)> {
        self.rows
            .iter()
            .enumerate()
            .filter_map(|(i, row)| {
                let chunks = row.iter().map(|c| kp.decrypt(c).map(|m| m as u32)).collect::<Result<Vec<_>, _>>().ok()?;
                chunks_to_key(&KeyChunks { chunks }).ok().map(|k| (i, k))
            })
            .collect()
    }

    fn write(&self, w: &mut PayloadWriter) {
        w.u32(self.rows.len() as u32).u32(self.rows.first().map_or(0, Vec::len) as u32);
        for c in self.rows.iter().flatten() {
            w.raw(&c.to_bytes());
        }
    }

    fn read(r: &mut PayloadReader<'_>) -> Result<Self, HamError> {
        let (n_rows, n_cols) = (r.u32()? as usize, r.u32()? as usize);
        if n_rows.saturating_mul(n_cols) > r.remaining() / CIPHERTEXT_BYTES {
            return Err(TransportError::Malformed("truncated KeySet").into());
        }
        let rows = (0..n_rows)
            .map(|_| (0..n_cols).map(|_| Ok(Ciphertext::from_bytes(r.raw(CIPHERTEXT_BYTES)?)?)).collect())
            .collect::<Result<_, HamError>>()?;
        Ok(Self { rows })
    }
}

/// A key Alice recovered before Bob's check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HamHit {
    /// Alice's vector index.
    pub i: usize,
    /// Bob's vector index.
    pub j: usize,
    /// The recovered key.
    pub key: PrfKey,
    /// Number of bins in which the vectors differ.
    pub differing_bins: usize,
}

/// A released pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HamMatch {
    /// Alice's vector index.
    pub i: usize,
    /// Bob's vector index.
    pub j: usize,
    /// Bob's vector.
    pub b: BitVector,
}

/// Alice's view of a run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HamAliceOutput {
    /// Pairs Bob released.
    pub matches: Vec<HamMatch>,
    /// Every recovered key, before Bob's check.
    pub hits: Vec<HamHit>,
    /// Claims Bob rejected, as `(i, j)`.
    pub rejected: Vec<(usize, usize)>,
    /// KeySet rows that decrypted.
    pub opened_rows: usize,
}

/// Bob's view of a run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HamBobOutput {
    /// Pairs released to Alice.
    pub released: Vec<(usize, usize)>,
    /// Claims refused.
    pub rejected: Vec<(usize, usize)>,
}

fn check_lengths(set: &[BitVector], ell: usize) -> Result<(), HamError> {
    match set.iter().find(|v| v.len() != ell) {
        Some(v) => Err(HamError::InvalidParams(format!("vector of length {} where l = {ell}", v.len()))),
        None => Ok(()),
    }
}

fn write_fe_matrix_columns(z: &[Vec<Fe>], j: usize) -> Vec<Fe> {
    z.iter().map(|row| row[j]).collect()
}

fn send_release(link: &mut Link, decisions: &[(usize, Option<&BitVector>)]) -> Result<(), HamError> {
    let mut w = PayloadWriter::new();
    w.u32(decisions.len() as u32);
    for &(j, b) in decisions {
        w.u32(j as u32);
        match b {
            Some(b) => w.u8(1).raw(&b.to_bytes()),
            None => w.u8(0),
        };
    }
    link.peer().send(Tag::HamRelease, &w.finish())?;
    Ok(())
}

fn recv_release(link: &mut Link, ell: usize) -> Result<Vec<(usize, Option<BitVector>)>, HamError> {
    let payload = link.peer().recv_expect(Tag::HamRelease)?;
    let mut r = PayloadReader::new(&payload);
    let n = r.u32()? as usize;
    let mut out = Vec::with_capacity(n.min(r.remaining()));
    for _ in 0..n {
        let j = r.u32()? as usize;
        let b = match r.u8()? {
            0 => None,
            1 => Some(BitVector::from_bytes(r.raw(ell.div_ceil(8))?, ell)),
            _ => return Err(TransportError::Malformed("release status").into()),
        };
        out.push((j, b));
    }
    r.finish()?;
    Ok(out)
}

fn finish_dealer(link: &mut Link) -> Result<(), HamError> {
    link.dealer().ok_or(HamError::DealerRequired)?.send(Tag::DealerDone, &[])?;
    Ok(())
}

/// Alice's side of the binned protocol.
pub fn ham_psi_alice<R: RngCore + CryptoRng>(
    link: &mut Link,
    a_set: &[BitVector],
    params: &HamParams,
    rng: &mut R,
) -> Result<HamAliceOutput, HamError> {
    check_lengths(a_set, params.ell)?;
    if link.dealer().is_none() {
        return Err(HamError::DealerRequired);
    }
    let kp = AheKeypair::generate(DEFAULT_MSG_BITS, rng);
    link.set_phase("setup");
    let mut w = PayloadWriter::new();
    w.u32(params.ell as u32).u32(params.d as u32).u32(params.n_bins as u32).u32(a_set.len() as u32);
    w.raw(&kp.public().to_bytes());
    link.peer().send(Tag::Setup, &w.finish())?;

    let xs = params.abscissas();
    let m = xs.len();
    let mut out = HamAliceOutput::default();
    for (i, a) in a_set.iter().enumerate() {
        link.set_phase("restricted");
        let seed: [u8; SEED_BYTES] =
            link.peer().recv_expect(Tag::HamSeed)?.try_into().map_err(|_| TransportError::Malformed("seed length"))?;
        let part = permute_and_partition(a, &seed, params.n_bins);
        let parity = EncryptedParity::encrypt(kp.public(), &part.parity, rng);
        let mut w = PayloadWriter::new();
        for c in parity.ciphertexts() {
            w.raw(&c.to_bytes());
        }
        link.peer().send(Tag::HamParity, &w.finish())?;

        let payload = link.peer().recv_expect(Tag::HamKeySet)?;
        let mut r = PayloadReader::new(&payload);
        let n_b = r.u32()? as usize;
        let mut candidates: Vec<Vec<PrfKey>> = Vec::new();
        for _ in 0..n_b {
            let ks = KeySet::read(&mut r)?;
            let mut keys: Vec<PrfKey> = ks.open(&kp).into_iter().map(|(_, k)| k).collect();
            out.opened_rows += keys.len();
            keys.sort();
            keys.dedup();
            candidates.push(keys);
        }
        r.finish()?;

        link.set_phase("recon");
        let recon = AliceRecon::new(part.encode(&encoding_key(&seed)), &xs)?;
        let dealer = link.dealer().ok_or(HamError::DealerRequired)?;
        dealer.send(Tag::VoleReceiverInput, &PayloadWriter::new().fes(&recon.ole_inputs()).finish())?;
        let z = decode_vole_output(&dealer.recv_expect(Tag::VoleOutput)?)?;
        if z.len() != m || z.iter().any(|row| row.len() != n_b) {
            return Err(HamError::Protocol("VOLE output shape"));
        }
        let mut claims = Vec::new();
        for (j, keys) in candidates.iter().enumerate() {
            let col = write_fe_matrix_columns(&z, j);
            for key in keys {
                let blinds: Vec<Fe> = prf_blinds(key, m);
                let unblinded: Vec<Fe> = col.iter().zip(&blinds).map(|(&a, &b)| a - b).collect();
                if let ReconOutcome::Diff(diff) = recon.recover(&unblinded, params.n_bins + params.d, params.d) {
                    out.hits.push(HamHit { i, j, key: *key, differing_bins: diff.len() });
                    claims.push((j, *key));
                }
            }
        }

        link.set_phase("reveal");
        let mut w = PayloadWriter::new();
        w.u32(claims.len() as u32);
        if !claims.is_empty() {
            w.raw(&a.to_bytes());
            for (j, key) in &claims {
                w.u32(*j as u32).fe(key.value());
            }
        }
        link.peer().send(Tag::HamReveal, &w.finish())?;
        for (j, b) in recv_release(link, params.ell)? {
            match b {
                Some(b) => out.matches.push(HamMatch { i, j, b }),
                None => out.rejected.push((i, j)),
            }
        }
    }
    finish_dealer(link)?;
    Ok(out)
}

/// Bob's side of the binned protocol.
pub fn ham_psi_bob<R: RngCore + CryptoRng>(
    link: &mut Link,
    b_set: &[BitVector],
    params: &HamParams,
    rng: &mut R,
) -> Result<HamBobOutput, HamError> {
    check_lengths(b_set, params.ell)?;
    if link.dealer().is_none() {
        return Err(HamError::DealerRequired);
    }
    link.set_phase("setup");
    let payload = link.peer().recv_expect(Tag::Setup)?;
    let mut r = PayloadReader::new(&payload);
    let theirs = (r.u32()? as usize, r.u32()? as usize, r.u32()? as usize);
    let n_a = r.u32()? as usize;
    let pk = AhePublicKey::from_bytes(r.raw(32)?, DEFAULT_MSG_BITS)?;
    r.finish()?;
    let ours = (params.ell, params.d, params.n_bins);
    if theirs != ours {
        return Err(HamError::ParamMismatch(format!("(l, d, N) = {theirs:?}, expected {ours:?}")));
    }

    let xs = params.abscissas();
    let sampler = RandomEvalSampler::new(&xs, params.n_bins)?;
    let mut out = HamBobOutput::default();
    for i in 0..n_a {
        link.set_phase("restricted");
        let mut seed = [0u8; SEED_BYTES];
        rng.fill_bytes(&mut seed);
        link.peer().send(Tag::HamSeed, &seed)?;
        let parts: Vec<Partition> = b_set.iter().map(|b| permute_and_partition(b, &seed, params.n_bins)).collect();
        let keys: Vec<PrfKey> = (0..b_set.len()).map(|_| PrfKey::random(rng)).collect();

        let payload = link.peer().recv_expect(Tag::HamParity)?;
        if payload.len() != params.n_bins * CIPHERTEXT_BYTES {
            return Err(TransportError::Malformed("parity length").into());
        }
        let cts = payload.chunks(CIPHERTEXT_BYTES).map(Ciphertext::from_bytes).collect::<Result<_, _>>()?;
        let parity = EncryptedParity::from_ciphertexts(&pk, cts);
        let mut w = PayloadWriter::new();
        w.u32(b_set.len() as u32);
        for (part, key) in parts.iter().zip(&keys) {
            let enc_hd = parity.distance(&pk, &part.parity, rng);
            KeySet::build(&pk, &enc_hd, key, params.d, rng).write(&mut w);
        }
        link.peer().send(Tag::HamKeySet, &w.finish())?;

        link.set_phase("recon");
        let enc_key = encoding_key(&seed);
        let (mut u, mut v) =
            (vec![Vec::with_capacity(b_set.len()); xs.len()], vec![Vec::with_capacity(b_set.len()); xs.len()]);
        for (part, key) in parts.iter().zip(&keys) {
            let q = part.encode(&enc_key).vanishing_evals(&xs);
            let (r1, r2) = (sampler.sample(rng), sampler.sample(rng));
            let blinds: Vec<Fe> = prf_blinds(key, xs.len());
            for k in 0..xs.len() {
                u[k].push(r1[k]);
                v[k].push(r2[k] * q[k] + blinds[k]);
            }
        }
        link.dealer().ok_or(HamError::DealerRequired)?.send(Tag::VoleSenderInput, &encode_vole_sender(&u, &v))?;

        link.set_phase("reveal");
        let payload = link.peer().recv_expect(Tag::HamReveal)?;
        let mut r = PayloadReader::new(&payload);
        let n_claims = r.u32()? as usize;
        let mut decisions = Vec::new();
        if n_claims > 0 {
            let a = BitVector::from_bytes(r.raw(params.ell.div_ceil(8))?, params.ell);
            for _ in 0..n_claims {
                let (j, key) = (r.u32()? as usize, PrfKey(r.fe()?));
                let ok = j < b_set.len() && keys[j] == key && a.hamming_distance(&b_set[j]) <= params.d;
                if ok {
                    out.released.push((i, j));
                } else {
                    out.rejected.push((i, j));
                }
                decisions.push((j, ok.then(|| &b_set[j])));
            }
        }
        r.finish()?;
        send_release(link, &decisions)?;
    }
    finish_dealer(link)?;
    Ok(out)
}

/// Result of an in-process run.
#[derive(Debug, Clone)]
pub struct HamPsiRun<A, B> {
    /// Released `(i, j)` pairs, sorted.
    pub pairs: Vec<(usize, usize)>,
    /// Alice's output.
    pub alice: A,
    /// Bob's output.
    pub bob: B,
    /// Every frame of the run.
    pub transcript: Transcript,
}

fn collect<A, B>(
    run: crate::session::InProcessRun<Result<A, HamError>, Result<B, HamError>>,
    pairs: impl FnOnce(&A) -> Vec<(usize, usize)>,
) -> Result<HamPsiRun<A, B>, HamError> {
    let alice = run.alice?;
    let bob = run.bob?;
    if let Some(d) = run.dealer {
        d?;
    }
    let mut p = pairs(&alice);
    p.sort_unstable();
    Ok(HamPsiRun { pairs: p, alice, bob, transcript: run.transcript })
}

/// Runs the binned protocol between threads; `seed` fixes all randomness.
pub fn ham_psi(
    a_set: &[BitVector],
    b_set: &[BitVector],
    params: &HamParams,
    seed: u64,
) -> Result<HamPsiRun<HamAliceOutput, HamBobOutput>, HamError> {
    let run = run_in_process(
        true,
        |link| ham_psi_alice(link, a_set, params, &mut party_rng(seed, "alice")),
        |link| ham_psi_bob(link, b_set, params, &mut party_rng(seed, "bob")),
    );
    collect(run, |a| a.matches.iter().map(|m| (m.i, m.j)).collect())
}

/// Containment query: every `j` for which Alice recovered Bob's key, before
/// any check by Bob.
pub fn ham_contain_query(
    a: &BitVector,
    b_set: &[BitVector],
    params: &HamParams,
    seed: u64,
) -> Result<Vec<HamHit>, HamError> {
    Ok(ham_psi(std::slice::from_ref(a), b_set, params, seed)?.alice.hits)
}

/// Threshold query on one pair: `Some((a, b))` when released, `None` when
/// nothing was recovered, [`HamError::VerifyFailed`] when Bob rejected the
/// recovered key.
pub fn t_ham_query(
    a: &BitVector,
    b: &BitVector,
    params: &HamParams,
    seed: u64,
) -> Result<Option<(BitVector, BitVector)>, HamError> {
    let run = ham_psi(std::slice::from_ref(a), std::slice::from_ref(b), params, seed)?;
    if let Some(m) = run.alice.matches.first() {
        return Ok(Some((a.clone(), m.b.clone())));
    }
    if run.alice.rejected.is_empty() {
        Ok(None)
    } else {
        Err(HamError::VerifyFailed)
    }
}

/// Parameters of the sub-sampling oracle: `T` masks and a PRF key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubSampleParams {
    /// Number of samples `T`.
    pub big_t: usize,
    /// Required agreements `t`.
    pub t: usize,
    /// Coordinate masks, one per sample.
    pub masks: Vec<BitVector>,
    /// Sample encoding key.
    pub key: PrfKey,
}

impl SubSampleParams {
    /// `T` random masks of `mask_weight` coordinates each and a random key.
    pub fn random<R: RngCore + CryptoRng>(
        ell: usize,
        big_t: usize,
        t: usize,
        mask_weight: usize,
        rng: &mut R,
    ) -> Result<Self, HamError> {
        if t == 0 || t > big_t {
            return Err(HamError::InvalidParams(format!("need 0 < t <= T, got t = {t}, T = {big_t}")));
        }
        if mask_weight == 0 || mask_weight > ell {
            return Err(HamError::InvalidParams(format!("mask weight {mask_weight} outside 1..={ell}")));
        }
        let masks = (0..big_t)
            .map(|_| {
                let mut m = BitVector::zeros(ell);
                for p in sample_indices(rng, ell, mask_weight) {
                    m.set(p, true);
                }
                m
            })
            .collect();
        Ok(Self { big_t, t, masks, key: PrfKey::random(rng) })
    }
}

/// Default mask weight `ceil(l / T)`.
pub fn default_mask_weight(ell: usize, big_t: usize) -> usize {
    ell.div_ceil(big_t.max(1)).max(1)
}

/// The samples `PRF(i || (v AND mask_i))` for `i < T`.
pub fn subsample(v: &BitVector, params: &SubSampleParams) -> Vec<Fe> {
    params
        .masks
        .iter()
        .enumerate()
        .map(|(i, mask)| {
            let masked = v.and(mask);
            let mut data = (i as u32).to_le_bytes().to_vec();
            data.extend_from_slice(&masked.to_bytes());
            prf_field_bytes(&params.key, &data)
        })
        .collect()
}

/// Number of sample positions where two vectors agree.
pub fn sample_agreement(a: &BitVector, b: &BitVector, params: &SubSampleParams) -> usize {
    subsample(a, params).iter().zip(subsample(b, params)).filter(|(x, y)| **x == *y).count()
}

/// Public configuration of the sub-sampled protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleConfig {
    /// Vector length.
    pub ell: usize,
    /// Samples per vector `T`.
    pub big_t: usize,
    /// Required agreements `t`.
    pub t: usize,
    /// Coordinates per mask.
    pub mask_weight: usize,
    /// Bound on `C(T, t) * |B|` probes per query.
    pub compute_cap: u128,
}

impl SampleConfig {
    /// Configuration with the default mask weight and compute cap.
    pub fn new(ell: usize, big_t: usize, t: usize) -> Self {
        Self { ell, big_t, t, mask_weight: default_mask_weight(ell, big_t), compute_cap: DEFAULT_COMPUTE_CAP }
    }

    fn points(&self) -> usize {
        2 * self.big_t - self.t + 2
    }
}

fn to_set(elems: Vec<Fe>) -> Result<MappedSet<Fe>, HamError> {
    MappedSet::new(elems).map_err(|_| HamError::Protocol("sub-samples collide"))
}

/// Alice's side of the sub-sampled protocol; returns released matches.
pub fn ham_psi_sample_alice<R: RngCore + CryptoRng>(
    link: &mut Link,
    a_set: &[BitVector],
    cfg: &SampleConfig,
    _rng: &mut R,
) -> Result<Vec<HamMatch>, HamError> {
    check_lengths(a_set, cfg.ell)?;
    if link.dealer().is_none() {
        return Err(HamError::DealerRequired);
    }
    link.set_phase("setup");
    let mut w = PayloadWriter::new();
    w.u32(cfg.ell as u32).u32(cfg.big_t as u32).u32(cfg.t as u32).u32(a_set.len() as u32);
    link.peer().send(Tag::Setup, &w.finish())?;
    let n_b = PayloadReader::new(&link.peer().recv_expect(Tag::Setup)?).u32()? as usize;
    let candidates = binomial(cfg.big_t, cfg.t).saturating_mul(n_b as u128);
    if candidates > cfg.compute_cap {
        return Err(HamError::ComputeCapExceeded { candidates, cap: cfg.compute_cap });
    }

    link.set_phase("subsample");
    let dealer = link.dealer().ok_or(HamError::DealerRequired)?;
    dealer.send(Tag::SubsampleRequest, &encode_vectors(a_set))?;
    let payload = dealer.recv_expect(Tag::SubsampleResponse)?;
    let mut r = PayloadReader::new(&payload);
    if r.u32()? as usize != a_set.len() {
        return Err(HamError::Protocol("sub-sample count"));
    }
    let samples: Vec<Vec<Fe>> = (0..a_set.len()).map(|_| r.fes()).collect::<Result<_, _>>()?;
    r.finish()?;

    let xs: Vec<Fe> = eval_points(cfg.big_t, cfg.points());
    let mut matches = Vec::new();
    for (i, (a, s)) in a_set.iter().zip(samples).enumerate() {
        link.set_phase("recon");
        let set = to_set(s)?;
        let scan = CandidateScan::sample(&set, &xs, cfg.t)?;
        let dealer = link.dealer().ok_or(HamError::DealerRequired)?;
        dealer.send(Tag::VoleReceiverInput, &PayloadWriter::new().fes(&set.vanishing_evals(&xs)).finish())?;
        let z = decode_vole_output(&dealer.recv_expect(Tag::VoleOutput)?)?;
        if z.len() != xs.len() || z.iter().any(|row| row.len() != n_b) {
            return Err(HamError::Protocol("VOLE output shape"));
        }
        let claims: Vec<usize> =
            (0..n_b).filter(|&j| scan.first_accepted(&write_fe_matrix_columns(&z, j)).is_some()).collect();

        link.set_phase("reveal");
        let mut w = PayloadWriter::new();
        w.u32(claims.len() as u32);
        if !claims.is_empty() {
            w.raw(&a.to_bytes());
            for &j in &claims {
                w.u32(j as u32);
            }
        }
        link.peer().send(Tag::HamReveal, &w.finish())?;
        for (j, b) in recv_release(link, cfg.ell)? {
            if let Some(b) = b {
                matches.push(HamMatch { i, j, b });
            }
        }
    }
    finish_dealer(link)?;
    Ok(matches)
}

/// Bob's output of the sub-sampled protocol: the oracle parameters he drew
/// and the released index pairs.
pub type SampleBobOutput = (SubSampleParams, Vec<(usize, usize)>);

/// Bob's side of the sub-sampled protocol; returns the oracle parameters he
/// drew and the released pairs.
pub fn ham_psi_sample_bob<R: RngCore + CryptoRng>(
    link: &mut Link,
    b_set: &[BitVector],
    cfg: &SampleConfig,
    rng: &mut R,
) -> Result<SampleBobOutput, HamError> {
    check_lengths(b_set, cfg.ell)?;
    if link.dealer().is_none() {
        return Err(HamError::DealerRequired);
    }
    link.set_phase("setup");
    let payload = link.peer().recv_expect(Tag::Setup)?;
    let mut r = PayloadReader::new(&payload);
    let theirs = (r.u32()? as usize, r.u32()? as usize, r.u32()? as usize);
    let n_a = r.u32()? as usize;
    r.finish()?;
    let ours = (cfg.ell, cfg.big_t, cfg.t);
    if theirs != ours {
        return Err(HamError::ParamMismatch(format!("(l, T, t) = {theirs:?}, expected {ours:?}")));
    }
    link.peer().send(Tag::Setup, &PayloadWriter::new().u32(b_set.len() as u32).finish())?;
    let params = SubSampleParams::random(cfg.ell, cfg.big_t, cfg.t, cfg.mask_weight, rng)?;

    link.set_phase("subsample");
    link.dealer().ok_or(HamError::DealerRequired)?.send(Tag::SubsampleSender, &encode_subsample_sender(&params))?;
    let xs: Vec<Fe> = eval_points(cfg.big_t, cfg.points());
    let q_vals: Vec<Vec<Fe>> = b_set
        .iter()
        .map(|b| Ok(to_set(subsample(b, &params))?.vanishing_evals(&xs)))
        .collect::<Result<_, HamError>>()?;
    let sampler = RandomEvalSampler::new(&xs, cfg.big_t)?;

    let mut released = Vec::new();
    for i in 0..n_a {
        link.set_phase("recon");
        let (mut u, mut v) = (vec![Vec::new(); xs.len()], vec![Vec::new(); xs.len()]);
        for q in &q_vals {
            let (r1, r2) = (sampler.sample(rng), sampler.sample(rng));
            for k in 0..xs.len() {
                u[k].push(r1[k]);
                v[k].push(r2[k] * q[k]);
            }
        }
        link.dealer().ok_or(HamError::DealerRequired)?.send(Tag::VoleSenderInput, &encode_vole_sender(&u, &v))?;

        link.set_phase("reveal");
        let payload = link.peer().recv_expect(Tag::HamReveal)?;
        let mut r = PayloadReader::new(&payload);
        let n_claims = r.u32()? as usize;
        let mut decisions = Vec::new();
        if n_claims > 0 {
            let a = BitVector::from_bytes(r.raw(cfg.ell.div_ceil(8))?, cfg.ell);
            for _ in 0..n_claims {
                let j = r.u32()? as usize;
                let ok = j < b_set.len() && sample_agreement(&a, &b_set[j], &params) >= cfg.t;
                if ok {
                    released.push((i, j));
                }
                decisions.push((j, ok.then(|| &b_set[j])));
            }
        }
        r.finish()?;
        send_release(link, &decisions)?;
    }
    finish_dealer(link)?;
    Ok((params, released))
}

/// Runs the sub-sampled protocol between threads; `seed` fixes all randomness.
pub fn ham_psi_sample(
    a_set: &[BitVector],
    b_set: &[BitVector],
    cfg: &SampleConfig,
    seed: u64,
) -> Result<HamPsiRun<Vec<HamMatch>, SampleBobOutput>, HamError> {
    let run = run_in_process(
        true,
        |link| ham_psi_sample_alice(link, a_set, cfg, &mut party_rng(seed, "alice")),
        |link| ham_psi_sample_bob(link, b_set, cfg, &mut party_rng(seed, "bob")),
    );
    collect(run, |a| a.iter().map(|m| (m.i, m.j)).collect())
}

/// Flips `k` distinct random coordinates of `v`.
pub fn flip_random<R: Rng + ?Sized>(v: &BitVector, k: usize, rng: &mut R) -> BitVector {
    let mut out = v.clone();
    for p in sample_indices(rng, v.len(), k) {
        out.flip(p);
    }
    out
}
