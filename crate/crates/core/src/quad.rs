//! Exact arithmetic in Q(√−p) on the basis (1, s), s² = −p.
//!
//! `p = 0` marks a plain rational that has not been attached to a prime yet;
//! it adopts the prime of whatever it is combined with.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::padic::HalfInt;

#[derive(Clone, Debug)]
pub struct QuadRational {
    p: u32,
    re: BigRational,
    im: BigRational,
}

/// Equality is by value; an unbound rational equals the same rational tagged with a prime.
impl PartialEq for QuadRational {
    fn eq(&self, other: &Self) -> bool {
        self.re == other.re && self.im == other.im
    }
}

impl Eq for QuadRational {}

pub(crate) fn join_primes(p: u32, q: u32) -> u32 {
    match (p, q) {
        (0, q) => q,
        (p, 0) => p,
        (p, q) if p == q => p,
        (p, q) => panic!("mixing elements over different primes {p} and {q}"),
    }
}

/// p-adic valuation of a nonzero integer.
pub fn vp_int(n: &BigInt, p: u32) -> i64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// p-adic valuation of a nonzero rational.
pub fn vp_rat(r: &BigRational, p: u32) -> i64 {
    vp_int(r.numer(), p) - vp_int(r.denom(), p)
}

impl QuadRational {
    pub fn new(p: u32, re: BigRational, im: BigRational) -> Self {
        assert!(p != 0 || im.is_zero(), "s needs a prime");
        QuadRational { p, re, im }
    }

    pub fn rational(r: BigRational) -> Self {
        QuadRational { p: 0, re: r, im: BigRational::zero() }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::rational(BigRational::new(num.into(), den.into()))
    }

    pub fn integer(n: impl Into<BigInt>) -> Self {
        Self::rational(BigRational::from_integer(n.into()))
    }

    /// The element s = √−p.
    pub fn sqrt_neg_p(p: u32) -> Self {
        assert!(p >= 3 && p % 2 == 1, "odd prime expected");
        QuadRational { p, re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn with_prime(mut self, p: u32) -> Self {
        self.p = join_primes(self.p, p);
        self
    }

    pub fn re(&self) -> &BigRational {
        &self.re
    }

    pub fn im(&self) -> &BigRational {
        &self.im
    }

    pub fn conj(&self) -> Self {
        QuadRational { p: self.p, re: self.re.clone(), im: -self.im.clone() }
    }

    /// Field norm a² + p b².
    pub fn norm(&self) -> BigRational {
        &self.re * &self.re + BigRational::from_integer(self.p.into()) * &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        Some(QuadRational { p: self.p, re: &self.re / &n, im: -(&self.im / &n) })
    }

    /// Valuation in the normalisation v(p) = 1, so v(s) = 1/2. The two
    /// coordinates contribute valuations of different parity, hence no cancellation.
    pub fn valuation(&self, p: u32) -> Option<HalfInt> {
        let p = join_primes(self.p, p);
        assert!(p != 0, "valuation needs a prime");
        let va = (!self.re.is_zero()).then(|| 2 * vp_rat(&self.re, p));
        let vb = (!self.im.is_zero()).then(|| 2 * vp_rat(&self.im, p) + 1);
        match (va, vb) {
            (None, None) => None,
            (Some(a), None) => Some(HalfInt(a)),
            (None, Some(b)) => Some(HalfInt(b)),
            (Some(a), Some(b)) => Some(HalfInt(a.min(b))),
        }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = QuadRational { p: self.p, re: BigRational::one(), im: BigRational::zero() };
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Integer power, negative exponents allowed for nonzero elements.
    pub fn powi(&self, e: i64) -> Self {
        if e >= 0 {
            self.pow(e as u32)
        } else {
            self.inv().expect("negative power of zero").pow((-e) as u32)
        }
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }
}

impl fmt::Display for QuadRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}*s", self.re, self.im)
    }
}

impl Zero for QuadRational {
    fn zero() -> Self {
        Self::rational(BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for QuadRational {
    fn one() -> Self {
        Self::rational(BigRational::one())
    }
}

impl<'a> Add<&'a QuadRational> for &'a QuadRational {
    type Output = QuadRational;
    fn add(self, rhs: &QuadRational) -> QuadRational {
        QuadRational { p: join_primes(self.p, rhs.p), re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl<'a> Sub<&'a QuadRational> for &'a QuadRational {
    type Output = QuadRational;
    fn sub(self, rhs: &QuadRational) -> QuadRational {
        QuadRational { p: join_primes(self.p, rhs.p), re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl<'a> Mul<&'a QuadRational> for &'a QuadRational {
    type Output = QuadRational;
    fn mul(self, rhs: &QuadRational) -> QuadRational {
        let p = join_primes(self.p, rhs.p);
        let pp = BigRational::from_integer(p.into());
        QuadRational {
            p,
            re: &self.re * &rhs.re - pp * &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl<'a> Div<&'a QuadRational> for &'a QuadRational {
    type Output = QuadRational;
    fn div(self, rhs: &QuadRational) -> QuadRational {
        self * &rhs.inv().expect("division by zero in Q(sqrt(-p))")
    }
}

impl Neg for &QuadRational {
    type Output = QuadRational;
    fn neg(self) -> QuadRational {
        QuadRational { p: self.p, re: -self.re.clone(), im: -self.im.clone() }
    }
}

macro_rules! forward_owned {
    ($t:ty; $($tr:ident $m:ident),*) => {$(
        impl $tr<$t> for $t {
            type Output = $t;
            fn $m(self, rhs: $t) -> $t { (&self).$m(&rhs) }
        }
        impl<'a> $tr<&'a $t> for $t {
            type Output = $t;
            fn $m(self, rhs: &'a $t) -> $t { (&self).$m(rhs) }
        }
    )*};
}
pub(crate) use forward_owned;

forward_owned!(QuadRational; Add add, Sub sub, Mul mul, Div div);

impl Neg for QuadRational {
    type Output = QuadRational;
    fn neg(self) -> QuadRational {
        -&self
    }
}

/// True when the rational is p-integral.
pub fn is_p_integral(r: &BigRational, p: u32) -> bool {
    r.is_zero() || !r.denom().is_multiple_of(&BigInt::from(p))
}
