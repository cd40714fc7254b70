//! Ideal (vector) oblivious linear evaluation.
//!
//! The dealer receives `x` from the receiver and `(u, v)` from the sender and
//! returns `u * x + v` to the receiver only. The sender's output type carries
//! no data, so the sender provably learns nothing from the call.

use super::CryptoError;
use crate::field::PrimeField;

/// What the sender learns from an OLE or VOLE call: nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OleSenderOutput;

/// Single OLE: the receiver learns `u * x + v`.
pub fn ole_ideal<F: PrimeField>(alice_x: F, bob_u: F, bob_v: F) -> (F, OleSenderOutput) {
    (bob_u * alice_x + bob_v, OleSenderOutput)
}

/// Vector OLE: the receiver learns `u_i * x + v_i` for every `i`.
pub fn vole_ideal<F: PrimeField>(
    alice_x: F,
    bob_u: &[F],
    bob_v: &[F],
) -> Result<(Vec<F>, OleSenderOutput), CryptoError> {
    if bob_u.len() != bob_v.len() {
        return Err(CryptoError::LengthMismatch(bob_u.len(), bob_v.len()));
    }
    let z = bob_u.iter().zip(bob_v).map(|(&u, &v)| u * alice_x + v).collect();
    Ok((z, OleSenderOutput))
}
