//! Distance-aware private set intersection.

pub mod bits;
pub mod crypto;
pub mod field;
pub mod hamming;
pub mod interp;
pub mod intpsi;
pub mod psi_backend;
pub mod session;
pub mod setrecon;
pub mod transport;

pub use field::{Mersenne127, Polynomial, PrimeField};

/// Default field element: `F_p` with `p = 2^127 - 1`.
pub type Fe = Mersenne127;
/// Polynomial over the default field.
pub type Poly = Polynomial<Fe>;
