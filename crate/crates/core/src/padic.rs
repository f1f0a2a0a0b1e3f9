//! Finite-precision elements of Q_p and of the ramified extension Q_p(√−p).
//!
//! An element is either exact (an element of Q(√−p), see [`QuadRational`]) or
//! approximate: `p^shift · (a + b·s)` known modulo the ideal of valuation
//! `prec/2`. Valuations and precisions are half-integers since v(s) = 1/2.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::quad::{forward_owned, join_primes, vp_int, vp_rat, QuadRational};

/// A half-integer stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HalfInt(pub i64);

impl HalfInt {
    pub const fn int(n: i64) -> Self {
        HalfInt(2 * n)
    }
    pub fn twice(self) -> i64 {
        self.0
    }
    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }
    pub fn floor(self) -> i64 {
        self.0.div_euclid(2)
    }
    pub fn ceil(self) -> i64 {
        (self.0 + 1).div_euclid(2)
    }
    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, o: HalfInt) -> HalfInt {
        HalfInt(self.0 + o.0)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, o: HalfInt) -> HalfInt {
        HalfInt(self.0 - o.0)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl Mul<i64> for HalfInt {
    type Output = HalfInt;
    fn mul(self, k: i64) -> HalfInt {
        HalfInt(self.0 * k)
    }
}

impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Valuation {
    /// Exact zero.
    Infinite,
    Exact(HalfInt),
    /// Indistinguishable from zero at the element's precision.
    AtLeast(HalfInt),
}

impl Valuation {
    pub fn decided(self) -> Option<HalfInt> {
        match self {
            Valuation::Exact(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Infinite => write!(f, "inf"),
            Valuation::Exact(v) => write!(f, "{v}"),
            Valuation::AtLeast(v) => write!(f, ">={v}"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitVerdict {
    EqualUpToUnit,
    Unequal,
    Undecidable,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicElement {
    repr: Repr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Repr {
    Exact(QuadRational),
    Approx(Approx),
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Approx {
    p: u32,
    shift: i64,
    a: BigInt,
    b: BigInt,
    /// twice the absolute precision
    prec: i64,
}

fn ppow(p: u32, k: i64) -> BigInt {
    debug_assert!(k >= 0);
    BigInt::from(p).pow(k as u32)
}

fn reduce(x: BigInt, p: u32, digits: i64) -> BigInt {
    if digits <= 0 {
        BigInt::zero()
    } else {
        x.mod_floor(&ppow(p, digits))
    }
}

impl Approx {
    fn normalize(p: u32, mut shift: i64, a: BigInt, b: BigInt, prec: i64) -> Approx {
        let ka = (prec + 1).div_euclid(2) - shift;
        let kb = prec.div_euclid(2) - shift;
        let mut a = reduce(a, p, ka);
        let mut b = reduce(b, p, kb);
        if a.is_zero() && b.is_zero() {
            return Approx { p, shift: 0, a, b, prec };
        }
        let pb = BigInt::from(p);
        loop {
            let (qa, ra) = a.div_rem(&pb);
            let (qb, rb) = b.div_rem(&pb);
            if !ra.is_zero() || !rb.is_zero() {
                break;
            }
            a = qa;
            b = qb;
            shift += 1;
        }
        Approx { p, shift, a, b, prec }
    }

    fn zero(p: u32, prec: i64) -> Approx {
        Approx { p, shift: 0, a: BigInt::zero(), b: BigInt::zero(), prec }
    }

    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Twice the valuation, or the precision when the element is zero at it.
    fn val2(&self) -> i64 {
        if self.is_zero() {
            return self.prec;
        }
        let va = (!self.a.is_zero()).then(|| 2 * (self.shift + vp_int(&self.a, self.p)));
        let vb = (!self.b.is_zero()).then(|| 2 * (self.shift + vp_int(&self.b, self.p)) + 1);
        va.into_iter().chain(vb).min().unwrap()
    }

    fn from_quad(q: &QuadRational, p: u32, prec: i64) -> Approx {
        if q.is_zero() {
            return Approx::zero(p, prec);
        }
        let vre = (!q.re().is_zero()).then(|| vp_rat(q.re(), p));
        let vim = (!q.im().is_zero()).then(|| vp_rat(q.im(), p));
        let shift = vre.into_iter().chain(vim).min().unwrap();
        let ka = (prec + 1).div_euclid(2) - shift;
        let kb = prec.div_euclid(2) - shift;
        let a = coord_to_int(q.re(), p, shift, ka);
        let b = coord_to_int(q.im(), p, shift, kb);
        Approx::normalize(p, shift, a, b, prec)
    }

    fn coords(&self) -> (BigRational, BigRational) {
        let scale = if self.shift >= 0 {
            BigRational::from_integer(ppow(self.p, self.shift))
        } else {
            BigRational::new(BigInt::one(), ppow(self.p, -self.shift))
        };
        (
            BigRational::from_integer(self.a.clone()) * &scale,
            BigRational::from_integer(self.b.clone()) * &scale,
        )
    }
}

/// Integer congruent to r / p^shift modulo p^digits (r / p^shift must be p-integral).
fn coord_to_int(r: &BigRational, p: u32, shift: i64, digits: i64) -> BigInt {
    if r.is_zero() || digits <= 0 {
        return BigInt::zero();
    }
    let mut num = r.numer().clone();
    let mut den = r.denom().clone();
    if shift >= 0 {
        den *= ppow(p, shift);
    } else {
        num *= ppow(p, -shift);
    }
    let g = num.gcd(&den);
    num /= &g;
    den /= &g;
    let m = ppow(p, digits);
    let inv = den.mod_floor(&m).modinv(&m).expect("coordinate not p-integral");
    (num * inv).mod_floor(&m)
}

impl PadicElement {
    pub fn exact(q: QuadRational) -> Self {
        PadicElement { repr: Repr::Exact(q) }
    }

    pub fn from_i64(n: i64) -> Self {
        Self::exact(QuadRational::integer(n))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::exact(QuadRational::from_ratio(num, den))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Self::exact(QuadRational::rational(r))
    }

    /// α = √−p.
    pub fn sqrt_neg_p(p: u32) -> Self {
        Self::exact(QuadRational::sqrt_neg_p(p))
    }

    /// Zero known modulo p^N.
    pub fn zero_mod(p: u32, n: HalfInt) -> Self {
        PadicElement { repr: Repr::Approx(Approx::zero(p, n.0)) }
    }

    /// The rational `r` reduced to absolute precision `n`.
    pub fn from_rational_mod(p: u32, r: &BigRational, n: HalfInt) -> Self {
        Self::from_rational(r.clone()).with_precision(p, n)
    }

    pub fn prime(&self) -> u32 {
        match &self.repr {
            Repr::Exact(q) => q.prime(),
            Repr::Approx(x) => x.p,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.repr, Repr::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&QuadRational> {
        match &self.repr {
            Repr::Exact(q) => Some(q),
            Repr::Approx(_) => None,
        }
    }

    /// Absolute precision; `None` for exact elements.
    pub fn abs_precision(&self) -> Option<HalfInt> {
        match &self.repr {
            Repr::Exact(_) => None,
            Repr::Approx(x) => Some(HalfInt(x.prec)),
        }
    }

    /// Truncate (or, for exact elements, round) to absolute precision `n`.
    /// Never raises the precision of an approximate element.
    pub fn with_precision(&self, p: u32, n: HalfInt) -> Self {
        let p = join_primes(self.prime(), p);
        assert!(p != 0, "precision needs a prime");
        let x = match &self.repr {
            Repr::Exact(q) => Approx::from_quad(q, p, n.0),
            Repr::Approx(x) => {
                Approx::normalize(p, x.shift, x.a.clone(), x.b.clone(), x.prec.min(n.0))
            }
        };
        PadicElement { repr: Repr::Approx(x) }
    }

    pub fn valuation(&self) -> Valuation {
        match &self.repr {
            Repr::Exact(q) => match q.valuation(q.prime()) {
                None => Valuation::Infinite,
                Some(v) => Valuation::Exact(v),
            },
            Repr::Approx(x) => {
                if x.is_zero() {
                    Valuation::AtLeast(HalfInt(x.prec))
                } else {
                    Valuation::Exact(HalfInt(x.val2()))
                }
            }
        }
    }

    /// Lower bound for the valuation used in precision bookkeeping
    /// (`None` means exact zero).
    fn val2_lb(&self) -> Option<i64> {
        match &self.repr {
            Repr::Exact(q) => q.valuation(q.prime()).map(|v| v.0),
            Repr::Approx(x) => Some(x.val2()),
        }
    }

    /// Relative precision in half-units (`None` for exact elements).
    pub fn relative_precision(&self) -> Option<i64> {
        match &self.repr {
            Repr::Exact(_) => None,
            Repr::Approx(x) => Some(x.prec - x.val2()),
        }
    }

    pub fn conj(&self) -> Self {
        match &self.repr {
            Repr::Exact(q) => Self::exact(q.conj()),
            Repr::Approx(x) => PadicElement {
                repr: Repr::Approx(Approx::normalize(x.p, x.shift, x.a.clone(), -x.b.clone(), x.prec)),
            },
        }
    }

    /// Coordinates (a, b) of a + b·s, each as an exact rational representative.
    pub fn coords(&self) -> (BigRational, BigRational) {
        match &self.repr {
            Repr::Exact(q) => (q.re().clone(), q.im().clone()),
            Repr::Approx(x) => x.coords(),
        }
    }

    /// The Q_p-coordinate a of a + b·s, with the precision it is known to.
    pub fn re_part(&self) -> Self {
        match &self.repr {
            Repr::Exact(q) => Self::exact(QuadRational::new(q.prime(), q.re().clone(), BigRational::zero())),
            Repr::Approx(x) => {
                let prec = 2 * (x.prec + 1).div_euclid(2);
                PadicElement {
                    repr: Repr::Approx(Approx::normalize(x.p, x.shift, x.a.clone(), BigInt::zero(), prec)),
                }
            }
        }
    }

    /// The coordinate b of a + b·s, as an element of Q_p.
    pub fn im_part(&self) -> Self {
        match &self.repr {
            Repr::Exact(q) => Self::exact(QuadRational::new(q.prime(), q.im().clone(), BigRational::zero())),
            Repr::Approx(x) => {
                let prec = 2 * x.prec.div_euclid(2);
                PadicElement {
                    repr: Repr::Approx(Approx::normalize(x.p, x.shift, x.b.clone(), BigInt::zero(), prec)),
                }
            }
        }
    }

    /// True when the s-coordinate is zero at the available precision.
    pub fn is_in_qp(&self) -> bool {
        match &self.repr {
            Repr::Exact(q) => q.im().is_zero(),
            Repr::Approx(x) => x.b.is_zero(),
        }
    }

    pub fn is_certified_nonzero(&self) -> bool {
        match &self.repr {
            Repr::Exact(q) => !q.is_zero(),
            Repr::Approx(x) => !x.is_zero(),
        }
    }

    pub fn inv(&self) -> Result<Self> {
        match &self.repr {
            Repr::Exact(q) => q.inv().map(Self::exact).ok_or(Error::DivisionByZero),
            Repr::Approx(y) => {
                if y.is_zero() {
                    return Err(Error::DivisionByZero);
                }
                Ok(PadicElement { repr: Repr::Approx(approx_inv(y)) })
            }
        }
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self * &rhs.inv()?)
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = PadicElement::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Σ (−1)^{k+1} (u−1)^k / k for u ∈ 1 + pZ_p, summed until the tail
    /// valuation k·v(u−1) − v(k) clears the precision of u.
    pub fn iwasawa_log(&self) -> Result<Self> {
        let p = self.prime();
        if let Repr::Exact(q) = &self.repr {
            if q.is_one() {
                return Ok(PadicElement::exact(QuadRational::zero().with_prime(p)));
            }
            return Err(Error::Precision("logarithm of an exact element needs a precision".into()));
        }
        if !self.is_in_qp() {
            return Err(Error::Invalid("logarithm needs an element of Q_p".into()));
        }
        let x = self - &PadicElement::one();
        let e = x.abs_precision().unwrap().0;
        if x.is_zero() {
            return Ok(PadicElement::zero_mod(p, HalfInt(e)));
        }
        let v = x.val2_lb().unwrap();
        if v < 2 {
            return Err(Error::Invalid(format!("log_p needs v(u-1) >= 1, got {}", HalfInt(v))));
        }
        let mut sum = PadicElement::zero_mod(p, HalfInt(e));
        let mut xk = PadicElement::one();
        let mut k: i64 = 1;
        while k * v - 2 * ilog(k as u64, p as u64) < e {
            xk = &xk * &x;
            let sign = if k % 2 == 1 { 1 } else { -1 };
            sum = &sum + &(&xk * &PadicElement::from_ratio(sign, k));
            k += 1;
        }
        Ok(sum.with_precision(p, HalfInt(e)))
    }

    /// Iwasawa's branch on Q_p^×: log_p(p) = 0 and log_p(u) = log(u^{p−1})/(p−1) on units.
    pub fn log_p(&self) -> Result<Self> {
        let p = self.prime();
        let v = self
            .valuation()
            .decided()
            .ok_or_else(|| Error::Undecidable("log_p of an element indistinguishable from 0".into()))?;
        if !v.is_integer() || !self.is_in_qp() {
            return Err(Error::Invalid("log_p is defined here on Q_p^x only".into()));
        }
        let pv = PadicElement::exact(QuadRational::integer(BigInt::from(p)).with_prime(p)).pow(v.0.unsigned_abs() as u32 / 2);
        let u = if v.0 >= 0 { self.checked_div(&pv)? } else { self * &pv };
        let w = u.pow(p - 1);
        Ok(&w.iwasawa_log()? * &PadicElement::from_ratio(1, p as i64 - 1))
    }

    pub fn unit_equal(&self, other: &Self) -> UnitVerdict {
        use Valuation::*;
        match (self.valuation(), other.valuation()) {
            (Exact(a), Exact(b)) => {
                if a == b {
                    UnitVerdict::EqualUpToUnit
                } else {
                    UnitVerdict::Unequal
                }
            }
            (Exact(a), AtLeast(b)) | (AtLeast(b), Exact(a)) => {
                if a < b {
                    UnitVerdict::Unequal
                } else {
                    UnitVerdict::Undecidable
                }
            }
            (Infinite, Infinite) => UnitVerdict::EqualUpToUnit,
            (Infinite, Exact(_)) | (Exact(_), Infinite) => UnitVerdict::Unequal,
            _ => UnitVerdict::Undecidable,
        }
    }

    /// Difference certified zero at the joint precision.
    pub fn agrees_with(&self, other: &Self) -> bool {
        (self - other).is_zero()
    }

    pub fn parse(s: &str, p: u32) -> Result<Self> {
        let bad = || Error::Parse(format!("malformed p-adic string {s:?}"));
        let (body, modulus) = match s.split_once(" mod ") {
            Some((b, m)) => (b.trim(), Some(m.trim())),
            None => (s.trim(), None),
        };
        let (a_str, b_str) = body.split_once(" + ").ok_or_else(bad)?;
        let b_str = b_str.strip_suffix("*s").ok_or_else(bad)?;
        let a = parse_coord(a_str.trim(), p)?;
        let b = parse_coord(b_str.trim(), p)?;
        let q = QuadRational::new(p, a, b);
        match modulus {
            None => Ok(Self::exact(q)),
            Some(m) => {
                let (base, exp) = m.split_once('^').ok_or_else(bad)?;
                if base.parse::<u32>().map_err(|_| bad())? != p {
                    return Err(Error::Parse(format!("prime mismatch in {s:?}")));
                }
                let prec = if let Some(inner) = exp.strip_prefix('(').and_then(|e| e.strip_suffix(')')) {
                    let (num, den) = inner.split_once('/').ok_or_else(bad)?;
                    if den != "2" {
                        return Err(bad());
                    }
                    num.parse::<i64>().map_err(|_| bad())?
                } else {
                    2 * exp.parse::<i64>().map_err(|_| bad())?
                };
                let x = Approx::from_quad(&q, p, prec);
                Ok(PadicElement { repr: Repr::Approx(x) })
            }
        }
    }
}

fn ilog(k: u64, p: u64) -> i64 {
    let mut n = 0;
    let mut t = k;
    while t >= p {
        t /= p;
        n += 1;
    }
    n
}

fn parse_coord(s: &str, p: u32) -> Result<BigRational> {
    let bad = || Error::Parse(format!("malformed coordinate {s:?}"));
    match s.split_once('/') {
        None => Ok(BigRational::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
        Some((n, d)) => {
            let n = BigInt::from_str(n).map_err(|_| bad())?;
            let d = match d.split_once('^') {
                Some((base, k)) => {
                    if base.parse::<u32>().map_err(|_| bad())? != p {
                        return Err(bad());
                    }
                    ppow(p, k.parse::<i64>().map_err(|_| bad())?)
                }
                None => BigInt::from_str(d).map_err(|_| bad())?,
            };
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
    }
}

fn format_coord(x: &BigInt, shift: i64, p: u32) -> String {
    if x.is_zero() {
        return "0".into();
    }
    if shift >= 0 {
        return (x * ppow(p, shift)).to_string();
    }
    let t = vp_int(x, p).min(-shift);
    let y = x / ppow(p, t);
    let k = -shift - t;
    if k == 0 {
        y.to_string()
    } else {
        format!("{y}/{p}^{k}")
    }
}

impl fmt::Display for PadicElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Exact(q) => write!(f, "{} + {}*s", q.re(), q.im()),
            Repr::Approx(x) => {
                let n = HalfInt(x.prec);
                let exp = if n.is_integer() { n.to_string() } else { format!("({}/2)", x.prec) };
                write!(
                    f,
                    "{} + {}*s mod {}^{}",
                    format_coord(&x.a, x.shift, x.p),
                    format_coord(&x.b, x.shift, x.p),
                    x.p,
                    exp
                )
            }
        }
    }
}

impl Serialize for PadicElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

fn approx_add(x: &Approx, y: &Approx) -> Approx {
    let p = join_primes(x.p, y.p);
    let shift = x.shift.min(y.shift);
    let a = &x.a * ppow(p, x.shift - shift) + &y.a * ppow(p, y.shift - shift);
    let b = &x.b * ppow(p, x.shift - shift) + &y.b * ppow(p, y.shift - shift);
    Approx::normalize(p, shift, a, b, x.prec.min(y.prec))
}

fn approx_mul(x: &Approx, y: &Approx) -> Approx {
    let p = join_primes(x.p, y.p);
    let prec = (x.prec + y.val2()).min(y.prec + x.val2());
    let pb = BigInt::from(p);
    let a = &x.a * &y.a - pb * &x.b * &y.b;
    let b = &x.a * &y.b + &x.b * &y.a;
    Approx::normalize(p, x.shift + y.shift, a, b, prec)
}

fn approx_inv(y: &Approx) -> Approx {
    let p = y.p;
    let v = y.val2();
    let prec = y.prec - 2 * v;
    let digits = ((prec + 1).div_euclid(2) + y.shift.abs() + 2).max(1);
    let m = ppow(p, digits);
    let pb = BigInt::from(p);
    // 1/(c + d s) for c a unit: (c − d s)/(c² + p d²)
    let unit_inv = |c: &BigInt, d: &BigInt| -> (BigInt, BigInt) {
        let n = (c * c + &pb * d * d).mod_floor(&m);
        let ni = n.modinv(&m).expect("norm of a unit is a unit");
        ((c * &ni).mod_floor(&m), (-(d * &ni)).mod_floor(&m))
    };
    if !y.a.is_multiple_of(&pb) {
        let (ra, rb) = unit_inv(&y.a, &y.b);
        Approx::normalize(p, -y.shift, ra, rb, prec)
    } else {
        // a = p a′, so a + b s = s (b − a′ s) and 1/s = −s/p
        let a1 = &y.a / &pb;
        let (wa, wb) = unit_inv(&y.b, &(-a1));
        Approx::normalize(p, -y.shift - 1, &pb * wb, -wa, prec)
    }
}

fn add_impl(x: &PadicElement, y: &PadicElement) -> PadicElement {
    let repr = match (&x.repr, &y.repr) {
        (Repr::Exact(a), Repr::Exact(b)) => Repr::Exact(a + b),
        (Repr::Exact(q), Repr::Approx(z)) | (Repr::Approx(z), Repr::Exact(q)) => {
            let p = join_primes(q.prime(), z.p);
            Repr::Approx(approx_add(&Approx::from_quad(q, p, z.prec), z))
        }
        (Repr::Approx(a), Repr::Approx(b)) => Repr::Approx(approx_add(a, b)),
    };
    PadicElement { repr }
}

fn mul_impl(x: &PadicElement, y: &PadicElement) -> PadicElement {
    let repr = match (&x.repr, &y.repr) {
        (Repr::Exact(a), Repr::Exact(b)) => Repr::Exact(a * b),
        (Repr::Exact(q), Repr::Approx(z)) | (Repr::Approx(z), Repr::Exact(q)) => {
            let p = join_primes(q.prime(), z.p);
            match q.valuation(p) {
                None => Repr::Exact(QuadRational::zero().with_prime(p)),
                Some(vq) => {
                    let ec = (z.prec + vq.0 - z.val2()).max(vq.0 + 2);
                    Repr::Approx(approx_mul(&Approx::from_quad(q, p, ec), z))
                }
            }
        }
        (Repr::Approx(a), Repr::Approx(b)) => Repr::Approx(approx_mul(a, b)),
    };
    PadicElement { repr }
}

impl<'a> Add<&'a PadicElement> for &'a PadicElement {
    type Output = PadicElement;
    fn add(self, rhs: &PadicElement) -> PadicElement {
        add_impl(self, rhs)
    }
}

impl<'a> Sub<&'a PadicElement> for &'a PadicElement {
    type Output = PadicElement;
    fn sub(self, rhs: &PadicElement) -> PadicElement {
        add_impl(self, &-rhs)
    }
}

impl<'a> Mul<&'a PadicElement> for &'a PadicElement {
    type Output = PadicElement;
    fn mul(self, rhs: &PadicElement) -> PadicElement {
        mul_impl(self, rhs)
    }
}

impl<'a> Div<&'a PadicElement> for &'a PadicElement {
    type Output = PadicElement;
    fn div(self, rhs: &PadicElement) -> PadicElement {
        self.checked_div(rhs).expect("p-adic division by an element indistinguishable from 0")
    }
}

impl Neg for &PadicElement {
    type Output = PadicElement;
    fn neg(self) -> PadicElement {
        match &self.repr {
            Repr::Exact(q) => PadicElement::exact(-q),
            Repr::Approx(x) => PadicElement {
                repr: Repr::Approx(Approx::normalize(x.p, x.shift, -x.a.clone(), -x.b.clone(), x.prec)),
            },
        }
    }
}

impl Neg for PadicElement {
    type Output = PadicElement;
    fn neg(self) -> PadicElement {
        -&self
    }
}

forward_owned!(PadicElement; Add add, Sub sub, Mul mul, Div div);

impl Zero for PadicElement {
    fn zero() -> Self {
        Self::exact(QuadRational::zero())
    }
    /// Zero at the available precision.
    fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Exact(q) => q.is_zero(),
            Repr::Approx(x) => x.is_zero(),
        }
    }
}

impl One for PadicElement {
    fn one() -> Self {
        Self::exact(QuadRational::one())
    }
}

impl From<QuadRational> for PadicElement {
    fn from(q: QuadRational) -> Self {
        Self::exact(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn int(p: u32, n: i64, prec: i64) -> PadicElement {
        PadicElement::from_i64(n).with_precision(p, HalfInt::int(prec))
    }

    #[test]
    fn valuations() {
        assert_eq!(int(5, 5, 10).valuation(), Valuation::Exact(HalfInt::int(1)));
        assert_eq!(PadicElement::sqrt_neg_p(5).valuation(), Valuation::Exact(HalfInt(1)));
        assert_eq!(PadicElement::zero_mod(5, HalfInt::int(8)).valuation(), Valuation::AtLeast(HalfInt::int(8)));
        assert_eq!(int(5, 250, 2).valuation(), Valuation::AtLeast(HalfInt::int(2)));
    }

    #[test]
    fn unit_equality() {
        let p = 5;
        assert_eq!(int(p, 25, 10).unit_equal(&int(p, 75, 10)), UnitVerdict::EqualUpToUnit);
        assert_eq!(int(p, 5, 10).unit_equal(&int(p, 25, 10)), UnitVerdict::Unequal);
        let z = PadicElement::zero_mod(p, HalfInt::int(3));
        assert_eq!(z.unit_equal(&int(p, 3125, 10)), UnitVerdict::Undecidable);
    }

    #[test]
    fn conjugation() {
        let a = PadicElement::sqrt_neg_p(7);
        let b = -a.clone();
        assert_eq!(a.conj(), b);
        assert_eq!((&a * &b).as_exact().unwrap(), &QuadRational::integer(7).with_prime(7));
        assert_eq!((&a * &b).conj(), &a * &b);
        let x = int(7, 12, 5);
        assert_eq!(x.conj(), x);
        assert!((&a + &b).is_zero());
    }

    #[test]
    fn log_of_one_plus_p() {
        let p = 5u32;
        let u = int(p, 1 + p as i64, 5);
        let l = u.iwasawa_log().unwrap();
        let pr = |k: u32| BigRational::from_integer(BigInt::from(p).pow(k));
        let term = |k: u32| pr(k) / BigRational::from_integer(k.into());
        let four = term(1) - term(2) + term(3) - term(4);
        // the k = p term p^p/p has valuation p − 1 = 4, so four terms only agree mod p^4
        let five = &four + term(5);
        assert!(l.agrees_with(&PadicElement::from_rational_mod(p, &five, HalfInt::int(5))), "{l}");
        assert!(l.with_precision(p, HalfInt::int(4)).agrees_with(&PadicElement::from_rational_mod(p, &four, HalfInt::int(4))));
        assert!(!l.agrees_with(&PadicElement::from_rational_mod(p, &four, HalfInt::int(5))));
        assert_eq!(l.valuation(), Valuation::Exact(HalfInt::int(1)));
        assert!(PadicElement::one().iwasawa_log().unwrap().is_zero());
        assert!(int(p, 2, 5).iwasawa_log().is_err());
    }

    #[test]
    fn log_matches_long_rational_sum() {
        // oracle: 200 terms of the series in exact rationals
        let p = 7u32;
        let x0 = BigRational::new(BigInt::from(7 * 3), BigInt::from(1));
        let mut sum = BigRational::zero();
        let mut xk = BigRational::one();
        for k in 1..200i64 {
            xk *= &x0;
            let t = &xk / BigRational::from_integer(k.into());
            if k % 2 == 1 { sum += t } else { sum -= t }
        }
        let l = int(p, 22, 30).iwasawa_log().unwrap();
        assert!(l.agrees_with(&PadicElement::from_rational_mod(p, &sum, HalfInt::int(30))));
        assert_eq!(l.abs_precision(), Some(HalfInt::int(30)));
    }

    #[test]
    fn emit_parse_round_trip() {
        let p = 5;
        let alpha = PadicElement::sqrt_neg_p(p);
        let samples = vec![
            int(p, 1234567, 12),
            (&int(p, 3, 10) + &alpha).with_precision(p, HalfInt(21)),
            (&int(p, 7, 10) * &alpha.inv().unwrap()).with_precision(p, HalfInt(15)),
            PadicElement::zero_mod(p, HalfInt::int(4)),
            PadicElement::from_ratio(1, 125).with_precision(p, HalfInt::int(6)),
            PadicElement::exact(QuadRational::new(p, BigRational::new(1.into(), 2.into()), BigRational::from_integer((-3).into()))),
        ];
        for x in samples {
            let s = x.to_string();
            let y = PadicElement::parse(&s, p).unwrap();
            assert_eq!(x, y, "{s}");
            assert_eq!(y.to_string(), s);
        }
        let fixture = "43862580566904/5^1 + 0*s mod 5^19";
        assert_eq!(PadicElement::parse(fixture, 5).unwrap().to_string(), fixture);
        assert!(PadicElement::parse("1 + 2*s mod 7^3", 5).is_err());
    }

    #[test]
    fn inverse_times_self_is_one() {
        let p = 5;
        let alpha = PadicElement::sqrt_neg_p(p);
        for x in [&int(p, 3, 12) + &(&int(p, 10, 12) * &alpha), &int(p, 25, 12) + &(&int(p, 3, 12) * &alpha)] {
            let one = &x * &x.inv().unwrap();
            assert!((&one - &PadicElement::one()).is_zero(), "{x}: {one}");
        }
    }

    fn element(p: u32, prec: i64) -> impl Strategy<Value = PadicElement> {
        (any::<i64>(), any::<i64>(), 0i64..3).prop_map(move |(a, b, k)| {
            let q = QuadRational::new(
                p,
                BigRational::new(a.into(), BigInt::from(p).pow(k as u32)),
                BigRational::from_integer(b.into()),
            );
            PadicElement::exact(q)
        }).prop_map(move |x| x.with_precision(p, HalfInt(prec)))
    }

    proptest! {
        #[test]
        fn lower_precision_agrees_with_higher(a in element(5, 60), b in element(5, 60), c in element(5, 60)) {
            let p = 5;
            let lo = |x: &PadicElement| x.with_precision(p, HalfInt(24));
            let f = |a: &PadicElement, b: &PadicElement, c: &PadicElement| {
                let t = &(a * b) + c;
                match c.inv() { Ok(ci) => &t * &ci, Err(_) => t }
            };
            let hi_r = f(&a, &b, &c);
            let lo_in = (lo(&a), lo(&b), lo(&c));
            if lo_in.2.is_certified_nonzero() == c.is_certified_nonzero() {
                let lo_r = f(&lo_in.0, &lo_in.1, &lo_in.2);
                let n = lo_r.abs_precision().unwrap();
                prop_assert!(lo_r.agrees_with(&hi_r.with_precision(p, n)));
            }
        }

        #[test]
        fn valuation_is_additive(a in element(7, 40), b in element(7, 40)) {
            if let (Some(va), Some(vb)) = (a.valuation().decided(), b.valuation().decided()) {
                prop_assert_eq!((&a * &b).valuation(), Valuation::Exact(va + vb));
            }
        }

        #[test]
        fn log_is_a_homomorphism(x in 0i64..1_000_000, y in 0i64..1_000_000) {
            let p = 5u32;
            let u = int(p, 1 + 5 * x, 20);
            let v = int(p, 1 + 5 * y, 20);
            let lhs = (&u * &v).iwasawa_log().unwrap();
            let rhs = &u.iwasawa_log().unwrap() + &v.iwasawa_log().unwrap();
            prop_assert!(lhs.agrees_with(&rhs));
        }
    }
}
