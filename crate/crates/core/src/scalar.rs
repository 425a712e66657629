//! Scalar fields for sequences and truncated matrices.
//!
//! Two fields are provided: double-precision complex numbers ([`C64`]) for
//! the numeric checks, and complex numbers over arbitrary-precision
//! rationals ([`CRat`]) for the identities that should hold exactly.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::complex::Complex;
use num::rational::BigRational;
use num::traits::{One, ToPrimitive, Zero};

pub type C64 = Complex<f64>;
pub type CRat = Complex<BigRational>;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn conj(&self) -> Self;

    /// Absolute value as a float.
    fn modulus(&self) -> f64;

    /// Multiplicative inverse, `None` for zero.
    fn recip(&self) -> Option<Self>;

    fn from_real(x: f64) -> Self;

    fn from_int(k: i64) -> Self;
}

impl Scalar for C64 {
    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn modulus(&self) -> f64 {
        self.norm()
    }

    fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.inv())
        }
    }

    fn from_real(x: f64) -> Self {
        Complex::new(x, 0.0)
    }

    fn from_int(k: i64) -> Self {
        Complex::new(k as f64, 0.0)
    }
}

impl Scalar for CRat {
    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }

    fn modulus(&self) -> f64 {
        let re = self.re.to_f64().unwrap_or(f64::NAN);
        let im = self.im.to_f64().unwrap_or(f64::NAN);
        re.hypot(im)
    }

    fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.inv())
        }
    }

    /// Exact conversion of the binary value of `x`; panics on non-finite input.
    fn from_real(x: f64) -> Self {
        let re = BigRational::from_float(x).expect("finite float");
        Complex::new(re, BigRational::zero())
    }

    fn from_int(k: i64) -> Self {
        Complex::new(BigRational::from_integer(BigInt::from(k)), BigRational::zero())
    }
}

/// Converts a float complex to the rational field, exactly.
pub fn to_rational(z: C64) -> CRat {
    Complex::new(
        BigRational::from_float(z.re).expect("finite real part"),
        BigRational::from_float(z.im).expect("finite imaginary part"),
    )
}

pub fn to_float(z: &CRat) -> C64 {
    Complex::new(
        z.re.to_f64().unwrap_or(f64::NAN),
        z.im.to_f64().unwrap_or(f64::NAN),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_recip_is_exact() {
        let z = CRat::new(
            BigRational::new(3.into(), 4.into()),
            BigRational::new((-1).into(), 2.into()),
        );
        let w = Scalar::recip(&z).unwrap();
        assert_eq!(z * w, CRat::one());
        assert!(Scalar::recip(&CRat::zero()).is_none());
    }

    #[test]
    fn float_round_trip() {
        let z = C64::new(0.1, -2.5);
        assert_eq!(to_float(&to_rational(z)), z);
        assert_eq!(Scalar::conj(&z), C64::new(0.1, 2.5));
    }
}
