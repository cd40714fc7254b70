//! Framed channels over TCP.

use std::io::{BufReader, BufWriter};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::thread::sleep;
use std::time::{Duration, Instant};

use super::{read_frame, write_frame, Accounting, Channel, Tag, Transcript, TransportError};

/// A framed TCP connection between two named parties.
#[derive(Debug)]
pub struct TcpChannel {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
    acct: Accounting,
}

impl TcpChannel {
    fn from_stream(stream: TcpStream, local: &str, remote: &str) -> Result<Self, TransportError> {
        stream.set_nodelay(true)?;
        let reader = BufReader::new(stream.try_clone()?);
        Ok(Self { reader, writer: BufWriter::new(stream), acct: Accounting::new(local, remote) })
    }

    /// Accepts one connection on `listener`.
    pub fn accept(listener: &TcpListener, local: &str, remote: &str) -> Result<Self, TransportError> {
        let (stream, _) = listener.accept()?;
        Self::from_stream(stream, local, remote)
    }

    /// Connects to `addr`, retrying until `timeout` elapses.
    pub fn connect<A: ToSocketAddrs + Clone>(
        addr: A,
        local: &str,
        remote: &str,
        timeout: Duration,
    ) -> Result<Self, TransportError> {
        let start = Instant::now();
        loop {
            match TcpStream::connect(addr.clone()) {
                Ok(s) => return Self::from_stream(s, local, remote),
                Err(e) if start.elapsed() >= timeout => return Err(e.into()),
                Err(_) => sleep(Duration::from_millis(50)),
            }
        }
    }
}

impl Channel for TcpChannel {
    fn send(&mut self, tag: Tag, payload: &[u8]) -> Result<(), TransportError> {
        let n = write_frame(&mut self.writer, tag, payload)?;
        self.acct.sent(n);
        Ok(())
    }

    fn recv(&mut self) -> Result<(Tag, Vec<u8>), TransportError> {
        let (tag, payload) = read_frame(&mut self.reader)?;
        self.acct.received(payload.len() + super::FRAME_OVERHEAD);
        Ok((tag, payload))
    }

    fn set_phase(&mut self, phase: &str) {
        phase.clone_into(&mut self.acct.phase);
    }

    fn transcript(&self) -> &Transcript {
        &self.acct.transcript
    }
}
