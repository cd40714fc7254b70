//! In-process channels over standard-library queues.

use std::sync::mpsc::{channel, Receiver, Sender};

use super::{encode_frame, read_frame, Accounting, Channel, Tag, Transcript, TransportError};

/// One end of an in-process duplex pipe carrying encoded frames.
#[derive(Debug)]
pub struct MemChannel {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
    acct: Accounting,
}

impl MemChannel {
    /// A connected pair: the first end belongs to `a`, the second to `b`.
    pub fn pair(a: &str, b: &str) -> (Self, Self) {
        let (tx_ab, rx_ab) = channel();
        let (tx_ba, rx_ba) = channel();
        (
            Self { tx: tx_ab, rx: rx_ba, acct: Accounting::new(a, b) },
            Self { tx: tx_ba, rx: rx_ab, acct: Accounting::new(b, a) },
        )
    }
}

impl Channel for MemChannel {
    fn send(&mut self, tag: Tag, payload: &[u8]) -> Result<(), TransportError> {
        let frame = encode_frame(tag, payload)?;
        let n = frame.len();
        self.tx.send(frame).map_err(|_| TransportError::ChannelClosed)?;
        self.acct.sent(n);
        Ok(())
    }

    fn recv(&mut self) -> Result<(Tag, Vec<u8>), TransportError> {
        let frame = self.rx.recv().map_err(|_| TransportError::ChannelClosed)?;
        let out = read_frame(&mut frame.as_slice())?;
        self.acct.received(frame.len());
        Ok(out)
    }

    fn set_phase(&mut self, phase: &str) {
        phase.clone_into(&mut self.acct.phase);
    }

    fn transcript(&self) -> &Transcript {
        &self.acct.transcript
    }
}
