//! The coefficient interface shared by exact (Q(√−p)) and p-adic arithmetic.

use std::fmt::{Debug, Display};
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::padic::PadicElement;
use crate::quad::QuadRational;

/// Ring operations plus the embedding of Q; enough for truncated series.
pub trait Coeff:
    Clone
    + Debug
    + Display
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
{
    fn from_rational(r: &BigRational) -> Self;
    fn try_div(&self, rhs: &Self) -> Result<Self>;
    /// Nonzero, and decidably so at the available precision.
    fn is_certified_nonzero(&self) -> bool;
    /// Equality for exact types, agreement at the joint precision otherwise.
    fn approx_eq(&self, other: &Self) -> bool;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&BigRational::new(num.into(), den.into()))
    }

    fn powu(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc * self;
        }
        acc
    }
}

/// Coefficients of Q(√−p) or its completion.
pub trait Scalar: Coeff {
    /// α = √−p.
    fn sqrt_neg_p(p: u32) -> Self;
    fn conj(&self) -> Self;
}

impl Coeff for BigRational {
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn try_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            Err(Error::DivisionByZero)
        } else {
            Ok(self / rhs)
        }
    }
    fn is_certified_nonzero(&self) -> bool {
        !self.is_zero()
    }
    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }
}

impl Coeff for QuadRational {
    fn from_rational(r: &BigRational) -> Self {
        QuadRational::rational(r.clone())
    }
    fn try_div(&self, rhs: &Self) -> Result<Self> {
        rhs.inv().map(|i| self * &i).ok_or(Error::DivisionByZero)
    }
    fn is_certified_nonzero(&self) -> bool {
        !self.is_zero()
    }
    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }
    fn powu(&self, e: u32) -> Self {
        self.pow(e)
    }
}

impl Scalar for QuadRational {
    fn sqrt_neg_p(p: u32) -> Self {
        QuadRational::sqrt_neg_p(p)
    }
    fn conj(&self) -> Self {
        QuadRational::conj(self)
    }
}

impl Coeff for PadicElement {
    fn from_rational(r: &BigRational) -> Self {
        PadicElement::from_rational(r.clone())
    }
    fn try_div(&self, rhs: &Self) -> Result<Self> {
        self.checked_div(rhs)
    }
    fn is_certified_nonzero(&self) -> bool {
        PadicElement::is_certified_nonzero(self)
    }
    fn approx_eq(&self, other: &Self) -> bool {
        self.agrees_with(other)
    }
    fn powu(&self, e: u32) -> Self {
        self.pow(e)
    }
}

impl Scalar for PadicElement {
    fn sqrt_neg_p(p: u32) -> Self {
        PadicElement::sqrt_neg_p(p)
    }
    fn conj(&self) -> Self {
        PadicElement::conj(self)
    }
}
