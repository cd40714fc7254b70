//! Prime-field arithmetic and dense polynomials over `F_p`.
//!
//! Every protocol in this crate is written against the [`PrimeField`] trait.
//! Two families implement it:
//!
//! - [`Mersenne127`], the production field modulo `2^127 - 1`;
//! - [`Fp<P>`], a small prime field with a const-generic modulus, used by the
//!   exhaustive enumeration tests at `p = 5`, `7` and `101`.
//!
//! Elements are always held in canonical form (`value < p`).

mod mersenne;
mod poly;
mod small;

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

pub use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

pub use mersenne::Mersenne127;
pub use poly::Polynomial;
pub use small::Fp;

/// Width in bytes of a serialized field element.
pub const ELEMENT_BYTES: usize = 16;

/// Errors raised by field and polynomial operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    /// A root was supplied more than once to [`Polynomial::from_roots`].
    #[error("duplicate root in polynomial construction")]
    DuplicateRoot,
    /// The operation has no defined result (gcd of two zeros, division by zero).
    #[error("operation undefined for the given operands")]
    Undefined,
    /// A serialized element was not below the modulus.
    #[error("serialized value is not a canonical field element")]
    NonCanonical,
    /// A byte buffer ended before the encoded value did.
    #[error("truncated encoding")]
    Truncated,
}

/// A prime field `F_p` with `p < 2^127`.
///
/// The arithmetic operators are total; inversion is the only partial
/// operation and is exposed through [`PrimeField::inverse`].
pub trait PrimeField:
    Copy
    + Clone
    + Default
    + Eq
    + Ord
    + Hash
    + Debug
    + Display
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
    + Product
{
    /// The prime modulus `p`.
    const MODULUS: u128;
    /// Bit length of `p`.
    const BITS: u32;

    /// Reduces an arbitrary integer modulo `p`.
    fn from_u128(value: u128) -> Self;

    /// Returns the canonical representative in `[0, p)`.
    fn value(self) -> u128;

    /// Accepts `value` only if it is already canonical.
    fn from_canonical(value: u128) -> Option<Self> {
        (value < Self::MODULUS).then(|| Self::from_u128(value))
    }

    /// Convenience constructor from a machine integer.
    fn from_u64(value: u64) -> Self {
        Self::from_u128(u128::from(value))
    }

    /// Raises `self` to the power `exp`.
    fn pow(self, mut exp: u128) -> Self {
        let mut base = self;
        let mut acc = Self::one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc *= base;
            }
            base *= base;
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse, or `None` for zero.
    fn inverse(self) -> Option<Self> {
        (!self.is_zero()).then(|| self.pow(Self::MODULUS - 2))
    }

    /// Samples a uniform element by rejection on a `BITS`-wide mask.
    fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mask = bit_mask(Self::BITS);
        loop {
            let candidate = rng.gen::<u128>() & mask;
            if let Some(x) = Self::from_canonical(candidate) {
                return x;
            }
        }
    }

    /// Samples a uniform non-zero element.
    fn random_nonzero<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let x = Self::random(rng);
            if !x.is_zero() {
                return x;
            }
        }
    }

    /// Fixed-width 16-byte little-endian encoding.
    fn to_bytes(self) -> [u8; ELEMENT_BYTES] {
        self.value().to_le_bytes()
    }

    /// Decodes a 16-byte little-endian value, rejecting non-canonical input.
    fn from_bytes(bytes: &[u8; ELEMENT_BYTES]) -> Result<Self, FieldError> {
        Self::from_canonical(u128::from_le_bytes(*bytes)).ok_or(FieldError::NonCanonical)
    }
}

/// Mask with the low `bits` bits set.
pub(crate) const fn bit_mask(bits: u32) -> u128 {
    if bits >= 128 {
        u128::MAX
    } else {
        (1u128 << bits) - 1
    }
}

/// Inverts every element of `values` with a single field inversion.
///
/// Returns `None` if any element is zero.
pub fn batch_inverse<F: PrimeField>(values: &[F]) -> Option<Vec<F>> {
    let mut prefix = Vec::with_capacity(values.len());
    let mut acc = F::one();
    for &v in values {
        if v.is_zero() {
            return None;
        }
        prefix.push(acc);
        acc *= v;
    }
    let mut inv = acc.inverse()?;
    let mut out = vec![F::zero(); values.len()];
    for i in (0..values.len()).rev() {
        out[i] = inv * prefix[i];
        inv *= values[i];
    }
    Some(out)
}

/// Field with five elements, used by exhaustive enumeration tests.
pub type F5 = Fp<5>;
/// Field with seven elements, used by the worked examples.
pub type F7 = Fp<7>;
/// Field with 101 elements, used by false-accept enumeration tests.
pub type F101 = Fp<101>;
