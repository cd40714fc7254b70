//! Two-party channels with framed messages and per-phase byte accounting.
//!
//! A frame is `len: u32 LE || tag: u8 || payload`, with `len = 1 + |payload|`.
//! Every endpoint keeps a [`Transcript`] keyed by the current phase label and
//! the direction of travel, so protocol runs report exactly how many bytes
//! each phase put on the wire.

mod codec;
mod mem;
mod tcp;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use thiserror::Error;

pub use codec::{PayloadReader, PayloadWriter};
pub use mem::MemChannel;
pub use tcp::TcpChannel;

/// Largest accepted frame body (tag plus payload).
pub const MAX_FRAME: usize = 64 << 20;
/// Bytes of framing overhead per message: length prefix and tag.
pub const FRAME_OVERHEAD: usize = 5;

/// Errors raised by channels and payload decoding.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransportError {
    /// The peer hung up.
    #[error("channel closed")]
    ChannelClosed,
    /// A frame exceeds [`MAX_FRAME`].
    #[error("frame of {0} bytes exceeds the 64 MiB limit")]
    FrameTooLarge(usize),
    /// A frame carries an unregistered tag.
    #[error("unknown tag {0:#04x}")]
    TagUnknown(u8),
    /// A frame arrived with a different tag than the protocol step expects.
    #[error("expected tag {expected:?}, got {got:?}")]
    UnexpectedTag { expected: Tag, got: Tag },
    /// A payload does not match its expected layout.
    #[error("malformed payload: {0}")]
    Malformed(&'static str),
    /// Operating-system I/O failure.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for TransportError {
    fn from(e: std::io::Error) -> Self {
        match e.kind() {
            std::io::ErrorKind::UnexpectedEof
            | std::io::ErrorKind::BrokenPipe
            | std::io::ErrorKind::ConnectionReset
            | std::io::ErrorKind::ConnectionAborted => Self::ChannelClosed,
            _ => Self::Io(e.to_string()),
        }
    }
}

macro_rules! tags {
    ($($(#[$doc:meta])* $name:ident = $val:literal,)*) => {
        /// Registered message kinds.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        #[repr(u8)]
        pub enum Tag {
            $($(#[$doc])* $name = $val,)*
        }

        impl TryFrom<u8> for Tag {
            type Error = TransportError;
            fn try_from(v: u8) -> Result<Self, TransportError> {
                match v {
                    $($val => Ok(Tag::$name),)*
                    other => Err(TransportError::TagUnknown(other)),
                }
            }
        }
    };
}

tags! {
    /// Session parameters and public key.
    Setup = 0x01,
    /// Test and diagnostic payloads.
    Raw = 0x02,
    /// Permutation seed for one query.
    HamSeed = 0x10,
    /// Alice's encrypted parity vector.
    HamParity = 0x11,
    /// Bob's KeySets, one per element of his set.
    HamKeySet = 0x12,
    /// Bob's VOLE inputs, sent to the dealer.
    VoleSenderInput = 0x20,
    /// Alice's VOLE inputs, sent to the dealer.
    VoleReceiverInput = 0x21,
    /// The dealer's VOLE output to Alice.
    VoleOutput = 0x22,
    /// Alice's request for the matched vectors.
    HamReveal = 0x30,
    /// Bob's released vectors.
    HamRelease = 0x31,
    /// Bob's masks and PRF key, sent to the sub-sampling oracle.
    SubsampleSender = 0x38,
    /// Alice's vectors, sent to the sub-sampling oracle.
    SubsampleRequest = 0x39,
    /// The sub-sampling oracle's output to Alice.
    SubsampleResponse = 0x3a,
    /// DH-PSI: Alice's blinded elements.
    PsiBlinded = 0x40,
    /// DH-PSI: Bob's double-blinded reply and his own blinded elements.
    PsiReply = 0x41,
    /// Oracle PSI: a set sent in the clear.
    PsiPlainSet = 0x42,
    /// Integer PSI: matched strings with Alice's source elements.
    IntMatches = 0x50,
    /// Integer PSI: the resulting pairs.
    IntPairs = 0x51,
    /// Ends a session with the dealer.
    DealerDone = 0x60,
}

/// Serializes one frame.
pub fn encode_frame(tag: Tag, payload: &[u8]) -> Result<Vec<u8>, TransportError> {
    let body = payload.len() + 1;
    if body > MAX_FRAME {
        return Err(TransportError::FrameTooLarge(body));
    }
    let mut out = Vec::with_capacity(body + 4);
    out.extend_from_slice(&(body as u32).to_le_bytes());
    out.push(tag as u8);
    out.extend_from_slice(payload);
    Ok(out)
}

/// Reads one frame from a byte stream.
pub fn read_frame<R: Read>(r: &mut R) -> Result<(Tag, Vec<u8>), TransportError> {
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let body = u32::from_le_bytes(len) as usize;
    if body > MAX_FRAME {
        return Err(TransportError::FrameTooLarge(body));
    }
    if body == 0 {
        return Err(TransportError::Malformed("zero-length frame"));
    }
    let mut tag = [0u8; 1];
    r.read_exact(&mut tag)?;
    let tag = Tag::try_from(tag[0])?;
    let mut payload = vec![0u8; body - 1];
    r.read_exact(&mut payload)?;
    Ok((tag, payload))
}

/// Writes one frame to a byte stream.
pub fn write_frame<W: Write>(w: &mut W, tag: Tag, payload: &[u8]) -> Result<usize, TransportError> {
    let frame = encode_frame(tag, payload)?;
    w.write_all(&frame)?;
    w.flush()?;
    Ok(frame.len())
}

/// Byte and frame counters for one (phase, direction) cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseStats {
    /// Bytes including framing.
    pub bytes: u64,
    /// Number of frames.
    pub frames: u64,
}

/// Per-phase, per-direction traffic counters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    cells: BTreeMap<(String, String), PhaseStats>,
}

impl Transcript {
    /// Records one frame.
    pub fn record(&mut self, phase: &str, dir: &str, bytes: usize) {
        let cell = self.cells.entry((phase.to_owned(), dir.to_owned())).or_default();
        cell.bytes += bytes as u64;
        cell.frames += 1;
    }

    /// Adds every counter of `other` into `self`.
    pub fn merge(&mut self, other: &Transcript) {
        for (key, stats) in &other.cells {
            let cell = self.cells.entry(key.clone()).or_default();
            cell.bytes += stats.bytes;
            cell.frames += stats.frames;
        }
    }

    /// `(phase, dir, stats)` rows in sorted order.
    pub fn rows(&self) -> impl Iterator<Item = (&str, &str, PhaseStats)> {
        self.cells.iter().map(|((p, d), s)| (p.as_str(), d.as_str(), *s))
    }

    /// Total bytes across all cells.
    pub fn total_bytes(&self) -> u64 {
        self.cells.values().map(|s| s.bytes).sum()
    }

    /// Total bytes of one phase over all directions.
    pub fn phase_bytes(&self, phase: &str) -> u64 {
        self.cells.iter().filter(|((p, _), _)| p == phase).map(|(_, s)| s.bytes).sum()
    }

    /// Total frames across all cells.
    pub fn total_frames(&self) -> u64 {
        self.cells.values().map(|s| s.frames).sum()
    }

    /// True when nothing was recorded.
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// CSV with columns `phase,dir,bytes,frames`.
pub fn phase_report(t: &Transcript) -> String {
    let mut out = String::from("phase,dir,bytes,frames\n");
    for (phase, dir, s) in t.rows() {
        let _ = writeln!(out, "{phase},{dir},{},{}", s.bytes, s.frames);
    }
    out
}

/// CSV comparing a run with a baseline run, cell by cell:
/// `phase,dir,bytes,baseline_bytes,ratio` where `ratio = bytes / baseline_bytes`.
pub fn comparison_report(measured: &Transcript, baseline: &Transcript) -> String {
    let mut keys: Vec<(&str, &str)> = measured.rows().map(|(p, d, _)| (p, d)).collect();
    keys.extend(baseline.rows().map(|(p, d, _)| (p, d)));
    keys.sort();
    keys.dedup();
    let get = |t: &Transcript, p: &str, d: &str| t.cells.get(&(p.to_owned(), d.to_owned())).map_or(0, |s| s.bytes);
    let mut out = String::from("phase,dir,bytes,baseline_bytes,ratio\n");
    for (p, d) in keys {
        let (m, b) = (get(measured, p, d), get(baseline, p, d));
        let ratio = if b == 0 { String::from("inf") } else { format!("{:.4}", m as f64 / b as f64) };
        let _ = writeln!(out, "{p},{d},{m},{b},{ratio}");
    }
    out
}

/// A reliable, ordered, framed duplex channel between two named parties.
pub trait Channel: Send {
    /// Sends one frame.
    fn send(&mut self, tag: Tag, payload: &[u8]) -> Result<(), TransportError>;
    /// Receives the next frame.
    fn recv(&mut self) -> Result<(Tag, Vec<u8>), TransportError>;
    /// Sets the phase label applied to subsequent frames in both directions.
    fn set_phase(&mut self, phase: &str);
    /// Counters recorded by this endpoint.
    fn transcript(&self) -> &Transcript;

    /// Receives the next frame and checks its tag.
    fn recv_expect(&mut self, tag: Tag) -> Result<Vec<u8>, TransportError> {
        let (got, payload) = self.recv()?;
        if got != tag {
            return Err(TransportError::UnexpectedTag { expected: tag, got });
        }
        Ok(payload)
    }
}

/// Shared bookkeeping for channel implementations.
#[derive(Debug, Clone)]
pub(crate) struct Accounting {
    phase: String,
    out_dir: String,
    in_dir: String,
    transcript: Transcript,
}

impl Accounting {
    pub(crate) fn new(local: &str, remote: &str) -> Self {
        Self {
            phase: String::from("default"),
            out_dir: format!("{local}->{remote}"),
            in_dir: format!("{remote}->{local}"),
            transcript: Transcript::default(),
        }
    }

    pub(crate) fn sent(&mut self, bytes: usize) {
        self.transcript.record(&self.phase, &self.out_dir, bytes);
    }

    pub(crate) fn received(&mut self, bytes: usize) {
        self.transcript.record(&self.phase, &self.in_dir, bytes);
    }
}
