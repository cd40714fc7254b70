//! Dense univariate polynomials, lowest coefficient first.

use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::{FieldError, PrimeField, ELEMENT_BYTES};

/// A polynomial over `F`, stored densely with the constant term first.
///
/// The coefficient vector never has a trailing zero, so the zero polynomial
/// is the empty vector and `degree()` is `None` for it.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial<F> {
    coeffs: Vec<F>,
}

impl<F: PrimeField> Polynomial<F> {
    /// Builds a polynomial, trimming trailing zero coefficients.
    pub fn new(mut coeffs: Vec<F>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// The zero polynomial.
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    /// The constant polynomial `c`.
    pub fn constant(c: F) -> Self {
        Self::new(vec![c])
    }

    /// The constant polynomial `1`.
    pub fn one() -> Self {
        Self::constant(F::one())
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::new(vec![F::zero(), F::one()])
    }

    /// Coefficients, constant term first.
    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    /// Coefficient of `x^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> F {
        self.coeffs.get(i).copied().unwrap_or_else(F::zero)
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// True for the zero polynomial.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Leading coefficient (zero for the zero polynomial).
    pub fn leading(&self) -> F {
        self.coeffs.last().copied().unwrap_or_else(F::zero)
    }

    /// Monic polynomial with exactly the given roots: `prod (x - r)`.
    pub fn from_roots(roots: &[F]) -> Result<Self, FieldError> {
        let mut seen = HashSet::with_capacity(roots.len());
        if !roots.iter().all(|r| seen.insert(*r)) {
            return Err(FieldError::DuplicateRoot);
        }
        let mut coeffs = Vec::with_capacity(roots.len() + 1);
        coeffs.push(F::one());
        for &r in roots {
            // Multiply in place by (x - r).
            coeffs.push(F::zero());
            for i in (1..coeffs.len()).rev() {
                coeffs[i] = coeffs[i - 1] - r * coeffs[i];
            }
            coeffs[0] = -r * coeffs[0];
        }
        Ok(Self::new(coeffs))
    }

    /// Horner evaluation at `x`.
    pub fn eval(&self, x: F) -> F {
        self.coeffs.iter().rev().fold(F::zero(), |acc, &c| acc * x + c)
    }

    /// Multiplies every coefficient by `s`.
    pub fn scale(&self, s: F) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Scales to leading coefficient one. The zero polynomial is returned unchanged.
    pub fn monic(&self) -> Self {
        match self.leading().inverse() {
            Some(inv) => self.scale(inv),
            None => Self::zero(),
        }
    }

    /// Euclidean division: returns `(q, r)` with `self = q * d + r` and `deg r < deg d`.
    pub fn divrem(&self, divisor: &Self) -> Result<(Self, Self), FieldError> {
        let lead_inv = divisor.leading().inverse().ok_or(FieldError::Undefined)?;
        let dd = divisor.coeffs.len() - 1;
        if self.coeffs.len() <= dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![F::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let q = rem[i + dd] * lead_inv;
            quot[i] = q;
            if q.is_zero() {
                continue;
            }
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                rem[i + j] -= q * dc;
            }
        }
        rem.truncate(dd);
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Monic greatest common divisor by the Euclidean algorithm.
    pub fn gcd(&self, other: &Self) -> Result<Self, FieldError> {
        if self.is_zero() && other.is_zero() {
            return Err(FieldError::Undefined);
        }
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.divrem(&b)?;
            a = b;
            b = r;
        }
        Ok(a.monic())
    }

    /// Divides `(x - root)` out of `self` by synthetic division, returning the
    /// quotient and the remainder `self(root)`.
    pub fn div_linear(&self, root: F) -> (Self, F) {
        if self.coeffs.is_empty() {
            return (Self::zero(), F::zero());
        }
        let n = self.coeffs.len();
        let mut quot = vec![F::zero(); n - 1];
        let mut carry = F::zero();
        for i in (0..n).rev() {
            let v = self.coeffs[i] + carry * root;
            if i == 0 {
                return (Self::new(quot), v);
            }
            quot[i - 1] = v;
            carry = v;
        }
        unreachable!("loop returns at i == 0")
    }

    /// Serializes as a little-endian `u32` coefficient count followed by the
    /// 16-byte coefficients.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + self.coeffs.len() * ELEMENT_BYTES);
        out.extend_from_slice(&(self.coeffs.len() as u32).to_le_bytes());
        for c in &self.coeffs {
            out.extend_from_slice(&c.to_bytes());
        }
        out
    }

    /// Inverse of [`Polynomial::to_bytes`]; returns the polynomial and the
    /// number of bytes consumed.
    pub fn from_bytes(bytes: &[u8]) -> Result<(Self, usize), FieldError> {
        let len_bytes: [u8; 4] = bytes.get(..4).ok_or(FieldError::Truncated)?.try_into().unwrap();
        let len = u32::from_le_bytes(len_bytes) as usize;
        let end = len.checked_mul(ELEMENT_BYTES).and_then(|n| n.checked_add(4)).ok_or(FieldError::Truncated)?;
        let body = bytes.get(4..end).ok_or(FieldError::Truncated)?;
        let coeffs = body
            .chunks_exact(ELEMENT_BYTES)
            .map(|c| F::from_bytes(c.try_into().unwrap()))
            .collect::<Result<Vec<_>, _>>()?;
        if coeffs.last().is_some_and(|c| c.is_zero()) {
            return Err(FieldError::NonCanonical);
        }
        Ok((Self { coeffs }, end))
    }
}

impl<F: PrimeField> Add for &Polynomial<F> {
    type Output = Polynomial<F>;
    fn add(self, rhs: Self) -> Polynomial<F> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<F: PrimeField> Sub for &Polynomial<F> {
    type Output = Polynomial<F>;
    fn sub(self, rhs: Self) -> Polynomial<F> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<F: PrimeField> Neg for &Polynomial<F> {
    type Output = Polynomial<F>;
    fn neg(self) -> Polynomial<F> {
        Polynomial::new(self.coeffs.iter().map(|&c| -c).collect())
    }
}

impl<F: PrimeField> Mul for &Polynomial<F> {
    type Output = Polynomial<F>;
    fn mul(self, rhs: Self) -> Polynomial<F> {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![F::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl<F: PrimeField> fmt::Debug for Polynomial<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}x")?,
                _ => write!(f, "{c}x^{i}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Mersenne127, Zero, F7};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use std::collections::BTreeSet;

    fn f7(v: u64) -> F7 {
        F7::from_u64(v)
    }

    fn p7(coeffs: &[u64]) -> Polynomial<F7> {
        Polynomial::new(coeffs.iter().map(|&c| f7(c)).collect())
    }

    /// Expands `(x - a)(x - b)` symbolically: `x^2 - (a+b)x + ab`, reduced mod 7.
    fn quadratic_oracle(a: u64, b: u64) -> Polynomial<F7> {
        p7(&[(a * b) % 7, (14 - (a + b) % 7) % 7, 1])
    }

    fn random_poly(rng: &mut ChaCha20Rng, deg: usize) -> Polynomial<Mersenne127> {
        let mut c: Vec<_> = (0..=deg).map(|_| Mersenne127::random(rng)).collect();
        c[deg] = Mersenne127::random_nonzero(rng);
        Polynomial::new(c)
    }

    #[test]
    fn from_roots_examples() {
        assert_eq!(Polynomial::<F7>::from_roots(&[]).unwrap(), Polynomial::one());
        assert_eq!(Polynomial::<F7>::from_roots(&[f7(0)]).unwrap(), Polynomial::x());
        let p = Polynomial::from_roots(&[f7(2), f7(3)]).unwrap();
        assert_eq!(p, p7(&[6, 2, 1]));
        assert_eq!(p, quadratic_oracle(2, 3));
        assert_eq!(Polynomial::from_roots(&[f7(2), f7(2)]), Err(FieldError::DuplicateRoot));
    }

    #[test]
    fn eval_examples() {
        assert_eq!(Polynomial::<F7>::one().eval(f7(5)), f7(1));
        assert_eq!(Polynomial::<F7>::x().eval(f7(4)), f7(4));
        assert_eq!(p7(&[6, 2, 1]).eval(f7(2)), f7(0));
    }

    #[test]
    fn gcd_examples() {
        let a = Polynomial::from_roots(&[f7(2), f7(3)]).unwrap();
        let b = Polynomial::from_roots(&[f7(3), f7(4)]).unwrap();
        assert_eq!(a.gcd(&b).unwrap(), p7(&[4, 1]));
        let scaled = a.scale(f7(3));
        assert_eq!(scaled.gcd(&scaled).unwrap(), a);
        assert_eq!(a.gcd(&Polynomial::one()).unwrap(), Polynomial::one());
        assert_eq!(Polynomial::<F7>::zero().gcd(&Polynomial::zero()), Err(FieldError::Undefined));
    }

    #[test]
    fn divrem_examples() {
        let a = Polynomial::from_roots(&[f7(2), f7(3)]).unwrap();
        let (q, r) = a.divrem(&p7(&[4, 1])).unwrap();
        assert_eq!(q, p7(&[5, 1]));
        assert!(r.is_zero());
        assert_eq!(&q * &p7(&[4, 1]), a);
        assert_eq!(a.divrem(&Polynomial::one()).unwrap(), (a.clone(), Polynomial::zero()));
        assert_eq!(a.divrem(&a).unwrap(), (Polynomial::one(), Polynomial::zero()));
        assert_eq!(a.divrem(&Polynomial::zero()), Err(FieldError::Undefined));
    }

    #[test]
    fn divrem_recomposes_on_random_inputs() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for trial in 0..1000 {
            let dp = trial % 30;
            let dd = trial % (dp + 1);
            let p = random_poly(&mut rng, dp);
            let d = random_poly(&mut rng, dd);
            let (q, r) = p.divrem(&d).unwrap();
            assert!(r.degree().is_none_or(|rd| rd < dd));
            assert_eq!(&(&q * &d) + &r, p);
        }
    }

    #[test]
    fn div_linear_matches_divrem() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = random_poly(&mut rng, 12);
            let root = Mersenne127::random(&mut rng);
            let (q, r) = p.div_linear(root);
            let lin = Polynomial::new(vec![-root, Mersenne127::from_u64(1)]);
            let (q2, r2) = p.divrem(&lin).unwrap();
            assert_eq!(q, q2);
            assert_eq!(r, r2.coeff(0));
            assert_eq!(r, p.eval(root));
        }
    }

    #[test]
    fn serialization_round_trip() {
        let p = p7(&[6, 2, 1]);
        let bytes = p.to_bytes();
        assert_eq!(bytes.len(), 4 + 3 * 16);
        assert_eq!(&bytes[..4], &3u32.to_le_bytes());
        assert_eq!(Polynomial::<F7>::from_bytes(&bytes).unwrap(), (p, bytes.len()));
        assert_eq!(Polynomial::<F7>::from_bytes(&bytes[..10]), Err(FieldError::Truncated));
        let zero = Polynomial::<F7>::zero().to_bytes();
        assert_eq!(zero, 0u32.to_le_bytes());
    }

    proptest! {
        #[test]
        fn roots_vanish_and_others_do_not(roots in proptest::collection::btree_set(0u64..101, 0..10), probe in 0u64..101) {
            use crate::field::F101;
            let rs: Vec<F101> = roots.iter().map(|&r| F101::from_u64(r)).collect();
            let p = Polynomial::from_roots(&rs).unwrap();
            prop_assert_eq!(p.degree(), Some(rs.len()));
            for r in &rs {
                prop_assert!(p.eval(*r).is_zero());
            }
            prop_assert_eq!(p.eval(F101::from_u64(probe)).is_zero(), roots.contains(&probe));
        }

        #[test]
        fn gcd_of_root_products_is_product_of_common_roots(
            a in proptest::collection::btree_set(0u64..60, 0..=8),
            b in proptest::collection::btree_set(0u64..60, 0..=8),
        ) {
            use crate::field::F101;
            let to_field = |s: &BTreeSet<u64>| s.iter().map(|&v| F101::from_u64(v)).collect::<Vec<_>>();
            let pa = Polynomial::from_roots(&to_field(&a)).unwrap();
            let pb = Polynomial::from_roots(&to_field(&b)).unwrap();
            let common: BTreeSet<u64> = a.intersection(&b).copied().collect();
            let expect = Polynomial::from_roots(&to_field(&common)).unwrap();
            prop_assert_eq!(pa.gcd(&pb).unwrap(), expect);
        }

        #[test]
        fn arithmetic_stays_canonical(a in proptest::collection::vec(any::<u128>(), 0..8), b in proptest::collection::vec(any::<u128>(), 1..8)) {
            let pa = Polynomial::new(a.into_iter().map(Mersenne127::from_u128).collect());
            let pb = Polynomial::new(b.into_iter().map(Mersenne127::from_u128).collect());
            let results = [&pa + &pb, &pa - &pb, &pa * &pb];
            for p in &results {
                prop_assert!(p.coeffs().iter().all(|c| c.value() < Mersenne127::MODULUS));
                prop_assert!(p.coeffs().last().is_none_or(|c| !c.is_zero()));
            }
        }
    }
}
