//! Party links, the ideal-functionality dealer and the in-process runner.
//!
//! A protocol party talks to its peer over one [`Channel`] and, for the
//! Hamming protocols, to a third endpoint: the dealer that realizes ideal
//! VOLE and the ideal sub-sampling oracle. The dealer always reads Bob's
//! message first, then Alice's, and answers Alice only.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::bits::BitVector;
use crate::crypto::{vole_ideal, PrfKey};
use crate::hamming::{subsample, SubSampleParams};
use crate::transport::{Channel, MemChannel, PayloadReader, PayloadWriter, Tag, Transcript, TransportError};
use crate::Fe;

/// Deterministic per-party randomness derived from a run seed and a label.
pub fn party_rng(seed: u64, label: &str) -> ChaCha20Rng {
    let mut h = Sha256::new();
    h.update(b"dapsi/party-rng/v1");
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    ChaCha20Rng::from_seed(h.finalize().into())
}

/// A party's connections: its peer and, optionally, the dealer.
pub struct Link {
    peer: Box<dyn Channel>,
    dealer: Option<Box<dyn Channel>>,
}

impl Link {
    /// Wraps the channels of one party.
    pub fn new(peer: Box<dyn Channel>, dealer: Option<Box<dyn Channel>>) -> Self {
        Self { peer, dealer }
    }

    /// The channel to the other party.
    pub fn peer(&mut self) -> &mut dyn Channel {
        self.peer.as_mut()
    }

    /// The channel to the dealer, if connected.
    pub fn dealer(&mut self) -> Option<&mut dyn Channel> {
        match &mut self.dealer {
            Some(d) => Some(d.as_mut()),
            None => None,
        }
    }

    /// Labels subsequent traffic on every channel.
    pub fn set_phase(&mut self, phase: &str) {
        self.peer.set_phase(phase);
        if let Some(d) = &mut self.dealer {
            d.set_phase(phase);
        }
    }

    /// Counters of every channel of this party.
    pub fn transcript(&self) -> Transcript {
        let mut t = self.peer.transcript().clone();
        t.merge(&self.dealer_transcript());
        t
    }

    /// Counters of the dealer channel only.
    pub fn dealer_transcript(&self) -> Transcript {
        self.dealer.as_ref().map(|d| d.transcript().clone()).unwrap_or_default()
    }
}

/// Encodes Bob's VOLE inputs: `u[k][j]`, `v[k][j]` for abscissa `k` and batch slot `j`.
pub fn encode_vole_sender(u: &[Vec<Fe>], v: &[Vec<Fe>]) -> Vec<u8> {
    let (m, n) = (u.len(), u.first().map_or(0, Vec::len));
    let mut w = PayloadWriter::new();
    w.u32(m as u32).u32(n as u32);
    for row in u.iter().chain(v) {
        for &x in row {
            w.fe(x);
        }
    }
    w.finish()
}

/// Row-major matrix of field elements.
pub type FeMatrix = Vec<Vec<Fe>>;

fn read_matrix(r: &mut PayloadReader<'_>, m: usize, n: usize) -> Result<FeMatrix, TransportError> {
    if m.saturating_mul(n) > r.remaining() / 16 {
        return Err(TransportError::Malformed("truncated matrix"));
    }
    (0..m).map(|_| (0..n).map(|_| r.fe()).collect()).collect()
}

/// Decodes [`encode_vole_sender`] output.
pub fn decode_vole_sender(payload: &[u8]) -> Result<(FeMatrix, FeMatrix), TransportError> {
    let mut r = PayloadReader::new(payload);
    let (m, n) = (r.u32()? as usize, r.u32()? as usize);
    let u = read_matrix(&mut r, m, n)?;
    let v = read_matrix(&mut r, m, n)?;
    r.finish()?;
    Ok((u, v))
}

/// Encodes the dealer's VOLE output `z[k][j]`.
pub fn encode_vole_output(z: &[Vec<Fe>]) -> Vec<u8> {
    let (m, n) = (z.len(), z.first().map_or(0, Vec::len));
    let mut w = PayloadWriter::new();
    w.u32(m as u32).u32(n as u32);
    for row in z {
        for &x in row {
            w.fe(x);
        }
    }
    w.finish()
}

/// Decodes [`encode_vole_output`] output.
pub fn decode_vole_output(payload: &[u8]) -> Result<FeMatrix, TransportError> {
    let mut r = PayloadReader::new(payload);
    let (m, n) = (r.u32()? as usize, r.u32()? as usize);
    let z = read_matrix(&mut r, m, n)?;
    r.finish()?;
    Ok(z)
}

/// Encodes Bob's sub-sampling parameters for the oracle.
pub fn encode_subsample_sender(p: &SubSampleParams) -> Vec<u8> {
    let mut w = PayloadWriter::new();
    w.fe(p.key.value()).u32(p.big_t as u32).u32(p.t as u32).u32(p.masks.first().map_or(0, BitVector::len) as u32);
    for mask in &p.masks {
        w.raw(&mask.to_bytes());
    }
    w.finish()
}

/// Decodes [`encode_subsample_sender`] output.
pub fn decode_subsample_sender(payload: &[u8]) -> Result<SubSampleParams, TransportError> {
    let mut r = PayloadReader::new(payload);
    let key = PrfKey(r.fe()?);
    let (big_t, t, ell) = (r.u32()? as usize, r.u32()? as usize, r.u32()? as usize);
    let masks =
        (0..big_t).map(|_| r.raw(ell.div_ceil(8)).map(|b| BitVector::from_bytes(b, ell))).collect::<Result<_, _>>()?;
    r.finish()?;
    Ok(SubSampleParams { big_t, t, masks, key })
}

/// Encodes a list of equal-length bit vectors.
pub fn encode_vectors(vs: &[BitVector]) -> Vec<u8> {
    let mut w = PayloadWriter::new();
    w.u32(vs.len() as u32).u32(vs.first().map_or(0, BitVector::len) as u32);
    for v in vs {
        w.raw(&v.to_bytes());
    }
    w.finish()
}

/// Decodes [`encode_vectors`] output.
pub fn decode_vectors(payload: &[u8]) -> Result<Vec<BitVector>, TransportError> {
    let mut r = PayloadReader::new(payload);
    let (n, ell) = (r.u32()? as usize, r.u32()? as usize);
    let vs = (0..n).map(|_| r.raw(ell.div_ceil(8)).map(|b| BitVector::from_bytes(b, ell))).collect::<Result<_, _>>()?;
    r.finish()?;
    Ok(vs)
}

/// Work performed by a dealer session.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DealerStats {
    /// VOLE batches served.
    pub vole_batches: usize,
    /// Individual OLE evaluations across all batches.
    pub ole_evaluations: usize,
    /// Sub-sampling requests served.
    pub subsample_requests: usize,
}

/// Serves ideal VOLE and sub-sampling until both parties send `DealerDone`.
pub fn run_dealer(alice: &mut dyn Channel, bob: &mut dyn Channel) -> Result<DealerStats, TransportError> {
    let mut stats = DealerStats::default();
    loop {
        let (tag, payload) = bob.recv()?;
        match tag {
            Tag::DealerDone => {
                alice.recv_expect(Tag::DealerDone)?;
                return Ok(stats);
            }
            Tag::VoleSenderInput => {
                let (u, v) = decode_vole_sender(&payload)?;
                let input = alice.recv_expect(Tag::VoleReceiverInput)?;
                let mut r = PayloadReader::new(&input);
                let xs: Vec<Fe> = r.fes()?;
                r.finish()?;
                if xs.len() != u.len() {
                    return Err(TransportError::Malformed("VOLE batch count mismatch"));
                }
                let z = xs
                    .iter()
                    .zip(u.iter().zip(&v))
                    .map(|(&x, (u, v))| vole_ideal(x, u, v).map(|(z, _)| z))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| TransportError::Malformed("VOLE vector length mismatch"))?;
                alice.send(Tag::VoleOutput, &encode_vole_output(&z))?;
                stats.vole_batches += 1;
                stats.ole_evaluations += z.iter().map(Vec::len).sum::<usize>();
            }
            Tag::SubsampleSender => {
                let params = decode_subsample_sender(&payload)?;
                let vectors = decode_vectors(&alice.recv_expect(Tag::SubsampleRequest)?)?;
                if vectors.iter().any(|v| Some(v.len()) != params.masks.first().map(BitVector::len)) {
                    return Err(TransportError::Malformed("vector length differs from mask length"));
                }
                let mut w = PayloadWriter::new();
                w.u32(vectors.len() as u32);
                for v in &vectors {
                    w.fes(&subsample(v, &params));
                }
                alice.send(Tag::SubsampleResponse, &w.finish())?;
                stats.subsample_requests += 1;
            }
            _ => return Err(TransportError::Malformed("unexpected message at the dealer")),
        }
    }
}

/// Outputs of an in-process run.
#[derive(Debug)]
pub struct InProcessRun<RA, RB> {
    /// Alice's return value.
    pub alice: RA,
    /// Bob's return value.
    pub bob: RB,
    /// Every frame of the run, each counted once.
    pub transcript: Transcript,
    /// The dealer's result, when a dealer took part.
    pub dealer: Option<Result<DealerStats, TransportError>>,
}

/// Runs Alice and Bob (and optionally the dealer) on threads connected by
/// in-memory channels.
pub fn run_in_process<RA, RB, A, B>(with_dealer: bool, alice: A, bob: B) -> InProcessRun<RA, RB>
where
    RA: Send,
    RB: Send,
    A: FnOnce(&mut Link) -> RA + Send,
    B: FnOnce(&mut Link) -> RB + Send,
{
    let (a_peer, b_peer) = MemChannel::pair("alice", "bob");
    let (a_dealer, b_dealer, dealer_ends) = if with_dealer {
        let (a, da) = MemChannel::pair("alice", "dealer");
        let (b, db) = MemChannel::pair("bob", "dealer");
        (Some(Box::new(a) as Box<dyn Channel>), Some(Box::new(b) as Box<dyn Channel>), Some((da, db)))
    } else {
        (None, None, None)
    };
    std::thread::scope(|s| {
        let dealer = dealer_ends.map(|(mut da, mut db)| s.spawn(move || run_dealer(&mut da, &mut db)));
        let bob_handle = s.spawn(move || {
            let mut link = Link::new(Box::new(b_peer), b_dealer);
            let out = bob(&mut link);
            (out, link.dealer_transcript())
        });
        let (alice_out, mut transcript) = {
            let mut link = Link::new(Box::new(a_peer), a_dealer);
            let out = alice(&mut link);
            (out, link.transcript())
        };
        let (bob_out, bob_dealer) = bob_handle.join().expect("bob thread panicked");
        transcript.merge(&bob_dealer);
        let dealer = dealer.map(|h| h.join().expect("dealer thread panicked"));
        InProcessRun { alice: alice_out, bob: bob_out, transcript, dealer }
    })
}
