//! The field modulo the Mersenne prime `2^127 - 1`.

use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{One, Zero};

use super::PrimeField;

const P: u128 = (1u128 << 127) - 1;

/// Element of `F_p` with `p = 2^127 - 1`, stored canonically.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mersenne127(u128);

/// Reduces any `u128` to `[0, p)` using `2^127 = 1 (mod p)`.
#[inline]
fn reduce(x: u128) -> u128 {
    let folded = (x & P) + (x >> 127);
    if folded >= P {
        folded - P
    } else {
        folded
    }
}

#[inline]
fn add_canonical(a: u128, b: u128) -> u128 {
    // a, b < 2^127 so the sum fits in 128 bits.
    reduce(a + b)
}

#[inline]
fn mul_canonical(a: u128, b: u128) -> u128 {
    let (a0, a1) = (a as u64 as u128, a >> 64);
    let (b0, b1) = (b as u64 as u128, b >> 64);
    let low = a0 * b0;
    // Each cross term is below 2^127, so the sum fits.
    let mid = a0 * b1 + a1 * b0;
    let high = a1 * b1;
    // a*b = hi*2^128 + lo as a 256-bit value; hi < 2^126 since a, b < 2^127.
    let (lo, carry) = low.overflowing_add(mid << 64);
    let hi = high + (mid >> 64) + u128::from(carry);
    // Fold bits at and above 2^127 back onto the low bits.
    reduce((lo & P) + ((lo >> 127) | (hi << 1)))
}

impl Mersenne127 {
    /// Builds an element from a value that is already canonical.
    ///
    /// # Panics
    /// Panics if `value >= 2^127 - 1`.
    pub const fn new_canonical(value: u128) -> Self {
        assert!(value < P, "value not below the modulus");
        Self(value)
    }
}

impl PrimeField for Mersenne127 {
    const MODULUS: u128 = P;
    const BITS: u32 = 127;

    #[inline]
    fn from_u128(value: u128) -> Self {
        Self(reduce(value))
    }

    #[inline]
    fn value(self) -> u128 {
        self.0
    }
}

impl Zero for Mersenne127 {
    fn zero() -> Self {
        Self(0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl One for Mersenne127 {
    fn one() -> Self {
        Self(1)
    }
}

impl Add for Mersenne127 {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self(add_canonical(self.0, rhs.0))
    }
}

impl Sub for Mersenne127 {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        if self.0 >= rhs.0 {
            Self(self.0 - rhs.0)
        } else {
            Self(self.0 + (P - rhs.0))
        }
    }
}

impl Neg for Mersenne127 {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        if self.0 == 0 {
            self
        } else {
            Self(P - self.0)
        }
    }
}

impl Mul for Mersenne127 {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self(mul_canonical(self.0, rhs.0))
    }
}

impl AddAssign for Mersenne127 {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for Mersenne127 {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl MulAssign for Mersenne127 {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl Sum for Mersenne127 {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), Add::add)
    }
}

impl Product for Mersenne127 {
    fn product<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::one(), Mul::mul)
    }
}

impl fmt::Debug for Mersenne127 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fe({})", self.0)
    }
}

impl fmt::Display for Mersenne127 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
