//! Little-endian payload builders and parsers.

use super::TransportError;
use crate::field::{PrimeField, ELEMENT_BYTES};

/// Appends primitive values to a payload buffer.
#[derive(Debug, Default, Clone)]
pub struct PayloadWriter {
    buf: Vec<u8>,
}

impl PayloadWriter {
    /// Empty payload.
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends one byte.
    pub fn u8(&mut self, v: u8) -> &mut Self {
        self.buf.push(v);
        self
    }

    /// Appends a `u32`.
    pub fn u32(&mut self, v: u32) -> &mut Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    /// Appends a `u64`.
    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    /// Appends bytes without a length prefix.
    pub fn raw(&mut self, v: &[u8]) -> &mut Self {
        self.buf.extend_from_slice(v);
        self
    }

    /// Appends a `u32` length prefix and the bytes.
    pub fn bytes(&mut self, v: &[u8]) -> &mut Self {
        self.u32(v.len() as u32).raw(v)
    }

    /// Appends a field element (16 bytes).
    pub fn fe<F: PrimeField>(&mut self, v: F) -> &mut Self {
        self.raw(&v.to_bytes())
    }

    /// Appends a `u32` count and the field elements.
    pub fn fes<F: PrimeField>(&mut self, v: &[F]) -> &mut Self {
        self.u32(v.len() as u32);
        for &x in v {
            self.fe(x);
        }
        self
    }

    /// The finished payload.
    pub fn finish(&mut self) -> Vec<u8> {
        std::mem::take(&mut self.buf)
    }
}

/// Parses primitive values from a payload.
#[derive(Debug, Clone)]
pub struct PayloadReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> PayloadReader<'a> {
    /// Reader over `buf`.
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    /// Takes the next `n` bytes.
    pub fn raw(&mut self, n: usize) -> Result<&'a [u8], TransportError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or(TransportError::Malformed("truncated payload"))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    /// Reads one byte.
    pub fn u8(&mut self) -> Result<u8, TransportError> {
        Ok(self.raw(1)?[0])
    }

    /// Reads a `u32`.
    pub fn u32(&mut self) -> Result<u32, TransportError> {
        Ok(u32::from_le_bytes(self.raw(4)?.try_into().expect("4 bytes")))
    }

    /// Reads a `u64`.
    pub fn u64(&mut self) -> Result<u64, TransportError> {
        Ok(u64::from_le_bytes(self.raw(8)?.try_into().expect("8 bytes")))
    }

    /// Reads a `u32` length prefix and that many bytes.
    pub fn bytes(&mut self) -> Result<&'a [u8], TransportError> {
        let n = self.u32()? as usize;
        self.raw(n)
    }

    /// Reads a canonical field element.
    pub fn fe<F: PrimeField>(&mut self) -> Result<F, TransportError> {
        let b: &[u8; ELEMENT_BYTES] = self.raw(ELEMENT_BYTES)?.try_into().expect("16 bytes");
        F::from_bytes(b).map_err(|_| TransportError::Malformed("non-canonical field element"))
    }

    /// Reads a `u32` count and that many field elements.
    pub fn fes<F: PrimeField>(&mut self) -> Result<Vec<F>, TransportError> {
        let n = self.u32()? as usize;
        if n > self.remaining() / ELEMENT_BYTES {
            return Err(TransportError::Malformed("truncated payload"));
        }
        (0..n).map(|_| self.fe()).collect()
    }

    /// Bytes not yet consumed.
    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    /// Fails if any bytes remain.
    pub fn finish(&self) -> Result<(), TransportError> {
        if self.remaining() == 0 {
            Ok(())
        } else {
            Err(TransportError::Malformed("trailing bytes"))
        }
    }
}
