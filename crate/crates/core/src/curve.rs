//! Elliptic curves over Q in long Weierstrass form: fixtures, point counts,
//! q-expansions, the rational group law, formal-group expansions and periods.

use std::collections::BTreeMap;
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::PadicElement;
use crate::real::{parse_decimal, periods_from_b, Real};
use crate::series::TruncatedSeries;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    Split,
    Nonsplit,
    Additive,
}

impl Reduction {
    /// a_ℓ at a bad prime.
    pub fn a_l(self) -> i64 {
        match self {
            Reduction::Split => 1,
            Reduction::Nonsplit => -1,
            Reduction::Additive => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Point {
    Infinity,
    Affine { x: BigRational, y: BigRational },
}

impl Point {
    pub fn new(x: BigRational, y: BigRational) -> Self {
        Point::Affine { x, y }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Point::Infinity)
    }

    pub fn x(&self) -> Option<&BigRational> {
        match self {
            Point::Affine { x, .. } => Some(x),
            Point::Infinity => None,
        }
    }

    pub fn y(&self) -> Option<&BigRational> {
        match self {
            Point::Affine { y, .. } => Some(y),
            Point::Infinity => None,
        }
    }
}

fn rat(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Curve {
    /// [a1, a2, a3, a4, a6]
    pub a: [BigInt; 5],
}

#[derive(Clone, Debug)]
pub struct BInvariants {
    pub b2: BigInt,
    pub b4: BigInt,
    pub b6: BigInt,
    pub b8: BigInt,
}

impl Curve {
    pub fn new(a: [i64; 5]) -> Self {
        Curve { a: a.map(BigInt::from) }
    }

    pub fn b_invariants(&self) -> BInvariants {
        let [a1, a2, a3, a4, a6] = &self.a;
        BInvariants {
            b2: a1 * a1 + 4 * a2,
            b4: 2 * a4 + a1 * a3,
            b6: a3 * a3 + 4 * a6,
            b8: a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4,
        }
    }

    pub fn c4(&self) -> BigInt {
        let b = self.b_invariants();
        &b.b2 * &b.b2 - 24 * &b.b4
    }

    pub fn discriminant(&self) -> BigInt {
        let BInvariants { b2, b4, b6, b8 } = self.b_invariants();
        -(&b2 * &b2 * &b8) - 8 * b4.pow(3) - 27 * &b6 * &b6 + 9 * &b2 * &b4 * &b6
    }

    fn ar(&self) -> [BigRational; 5] {
        self.a.clone().map(BigRational::from_integer)
    }

    pub fn is_on(&self, pt: &Point) -> bool {
        match pt {
            Point::Infinity => true,
            Point::Affine { x, y } => {
                let [a1, a2, a3, a4, a6] = self.ar();
                y * y + &a1 * x * y + &a3 * y == x * x * x + &a2 * x * x + &a4 * x + &a6
            }
        }
    }

    pub fn neg(&self, pt: &Point) -> Point {
        match pt {
            Point::Infinity => Point::Infinity,
            Point::Affine { x, y } => {
                let [a1, _, a3, _, _] = self.ar();
                Point::new(x.clone(), -y - &a1 * x - a3)
            }
        }
    }

    pub fn add(&self, p: &Point, q: &Point) -> Point {
        let (x1, y1, x2, y2) = match (p, q) {
            (Point::Infinity, _) => return q.clone(),
            (_, Point::Infinity) => return p.clone(),
            (Point::Affine { x: x1, y: y1 }, Point::Affine { x: x2, y: y2 }) => (x1, y1, x2, y2),
        };
        let [a1, a2, a3, a4, _] = self.ar();
        if x1 == x2 && (y1 + y2 + &a1 * x2 + &a3).is_zero() {
            return Point::Infinity;
        }
        let lam = if x1 == x2 {
            (rat(3) * x1 * x1 + rat(2) * &a2 * x1 + &a4 - &a1 * y1) / (rat(2) * y1 + &a1 * x1 + &a3)
        } else {
            (y2 - y1) / (x2 - x1)
        };
        let nu = y1 - &lam * x1;
        let x3 = &lam * &lam + &a1 * &lam - &a2 - x1 - x2;
        let y3 = -(&lam + &a1) * &x3 - nu - a3;
        Point::new(x3, y3)
    }

    pub fn mul(&self, n: i64, pt: &Point) -> Point {
        let mut base = if n < 0 { self.neg(pt) } else { pt.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = Point::Infinity;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            base = self.add(&base, &base);
            k >>= 1;
        }
        acc
    }

    /// Torsion test by Mazur's bound on the order.
    pub fn is_torsion(&self, pt: &Point) -> bool {
        let mut q = pt.clone();
        for _ in 1..=12 {
            if q.is_infinity() {
                return true;
            }
            q = self.add(&q, pt);
        }
        q.is_infinity()
    }

    fn a_mod(&self, l: u64) -> [i64; 5] {
        let lb = BigInt::from(l);
        self.a.clone().map(|c| c.mod_floor(&lb).to_i64().unwrap())
    }

    /// a_ℓ = ℓ + 1 − #E(F_ℓ) at a prime of good reduction.
    pub fn count_ap(&self, l: u64) -> Result<i64> {
        if (self.discriminant() % BigInt::from(l)).is_zero() {
            return Err(Error::Invalid(format!("{l} is a prime of bad reduction")));
        }
        if l > BSGS_FROM {
            if let Some(ap) = self.ap_bsgs(l) {
                return Ok(ap);
            }
        }
        self.ap_by_character_sum(l)
    }

    fn ap_by_character_sum(&self, l: u64) -> Result<i64> {
        let li = l as i64;
        let [a1, a2, a3, a4, a6] = self.a_mod(l);
        let count: i64 = if l == 2 {
            let mut n = 1;
            for x in 0..2i64 {
                for y in 0..2i64 {
                    if (y * y + a1 * x * y + a3 * y - x * x * x - a2 * x * x - a4 * x - a6).rem_euclid(2) == 0 {
                        n += 1;
                    }
                }
            }
            n
        } else {
            // (2y + a1x + a3)² = 4x³ + b2x² + 2b4x + b6 =: g(x)
            let m = |v: i64| v.rem_euclid(li);
            let b2 = m(a1 * a1 + 4 * a2);
            let b4 = m(2 * a4 + a1 * a3);
            let b6 = m(a3 * a3 + 4 * a6);
            let mut chi = vec![-1i8; l as usize];
            chi[0] = 0;
            for s in 1..li {
                chi[((s * s) % li) as usize] = 1;
            }
            let mut sum = 0i64;
            for x in 0..li {
                let g = m(m(m(m(4 * x + b2) * x) + 2 * b4) * x % li + b6);
                sum += chi[g as usize] as i64;
            }
            li + 1 + sum
        };
        let ap = li + 1 - count;
        if (ap * ap) as u64 > 4 * l {
            return Err(Error::Invalid(format!("a_{l} = {ap} violates the Hasse bound")));
        }
        Ok(ap)
    }

    /// a_ℓ by baby-step giant-step on E and its quadratic twist.
    ///
    /// On the short model y² = x³ + Ax + B, for any x with d = g(x) ≠ 0 the
    /// point (dx, d²) lies on y² = x³ + Ad²x + Bd³, which is E when d is a
    /// square and the twist otherwise. Orders of such points constrain
    /// ℓ + 1 ∓ a_ℓ until one value in the Hasse interval survives. `None`
    /// when that does not happen within a fixed number of points.
    pub fn ap_bsgs(&self, l: u64) -> Option<i64> {
        if l < 5 {
            return None;
        }
        let li = l as i64;
        let lb = BigInt::from(l);
        let c6: BigInt = {
            let b = self.b_invariants();
            -(&b.b2 * &b.b2 * &b.b2) + 36 * &b.b2 * &b.b4 - 216 * &b.b6
        };
        let a = (BigInt::from(-27) * self.c4()).mod_floor(&lb).to_i64()?;
        let b = (BigInt::from(-54) * c6).mod_floor(&lb).to_i64()?;
        let m = |v: i64| v.rem_euclid(li);
        let g = |x: i64| m(m(m(x * x) * x) + m(a * x) + b);
        let bound = (2.0 * (l as f64).sqrt()).floor() as i64;
        // multiples known for ℓ + 1 − a and ℓ + 1 + a
        let (mut lcm_e, mut lcm_t) = (1i64, 1i64);
        for x in 1..60i64 {
            let d = g(x);
            if d == 0 {
                continue;
            }
            let twist = pow_mod(d, (li - 1) / 2, li) != 1;
            let d2 = m(d * d);
            let ad = m(a * d2);
            let pt = (m(x * d), d2);
            let ord = point_order(pt, ad, li, bound)?;
            if twist {
                lcm_t = lcm_t.lcm(&ord);
            } else {
                lcm_e = lcm_e.lcm(&ord);
            }
            let mut found = None;
            let mut count = 0;
            for t in -bound..=bound {
                if (li + 1 - t) % lcm_e == 0 && (li + 1 + t) % lcm_t == 0 {
                    found = Some(t);
                    count += 1;
                }
            }
            if count == 1 {
                return found;
            }
            if count == 0 {
                return None;
            }
        }
        None
    }

    /// Order of the reduction of `pt` in E(F_ℓ) at a good prime ℓ.
    pub fn order_mod(&self, pt: &Point, l: u64) -> Result<u64> {
        let red = self.reduce(pt, l);
        let bound = l + 2 + 2 * (l as f64).sqrt().ceil() as u64;
        let mut q = red;
        for k in 1..=bound {
            if q.is_none() {
                return Ok(k);
            }
            q = self.add_mod(&q, &red, l);
        }
        Err(Error::Invalid(format!("no point order found modulo {l}")))
    }

    fn reduce(&self, pt: &Point, l: u64) -> Option<(i64, i64)> {
        let (x, y) = match pt {
            Point::Infinity => return None,
            Point::Affine { x, y } => (x, y),
        };
        let lb = BigInt::from(l);
        if (x.denom() % &lb).is_zero() {
            return None;
        }
        let red = |r: &BigRational| {
            let d = r.denom().mod_floor(&lb).to_i64().unwrap();
            let n = r.numer().mod_floor(&lb).to_i64().unwrap();
            (n * inv_mod(d, l as i64)).rem_euclid(l as i64)
        };
        Some((red(x), red(y)))
    }

    fn add_mod(&self, p: &Option<(i64, i64)>, q: &Option<(i64, i64)>, l: u64) -> Option<(i64, i64)> {
        let ((x1, y1), (x2, y2)) = match (p, q) {
            (None, _) => return *q,
            (_, None) => return *p,
            (Some(a), Some(b)) => (*a, *b),
        };
        let li = l as i64;
        let [a1, a2, a3, a4, _] = self.a_mod(l);
        let m = |v: i64| v.rem_euclid(li);
        if x1 == x2 && m(y1 + y2 + a1 * x2 + a3) == 0 {
            return None;
        }
        let lam = if x1 == x2 {
            m(m(3 * x1 % li * x1 + 2 * a2 * x1 + a4 - a1 * y1) * inv_mod(m(2 * y1 + a1 * x1 + a3), li))
        } else {
            m(m(y2 - y1) * inv_mod(m(x2 - x1), li))
        };
        let nu = m(y1 - lam * x1 % li);
        let x3 = m(lam * lam % li + a1 * lam - a2 - x1 - x2);
        let y3 = m(-(m(lam + a1) * x3 % li) - nu - a3);
        Some((x3, y3))
    }

    /// True when `pt` reduces to a nonsingular point (or to O) modulo ℓ.
    pub fn reduces_nonsingular(&self, pt: &Point, l: u64) -> bool {
        let Some((x, y)) = self.reduce(pt, l) else { return true };
        let li = l as i64;
        let [a1, a2, a3, a4, _] = self.a_mod(l);
        let m = |v: i64| v.rem_euclid(li);
        let fy = m(2 * y + a1 * x + a3);
        let fx = m(a1 * y - 3 * x % li * x - 2 * a2 * x - a4);
        fy != 0 || fx != 0
    }

    /// (Ω⁺, Ω⁻) by the arithmetic–geometric mean.
    pub fn real_periods<F: Real>(&self) -> Result<(F, F)> {
        let b = self.b_invariants();
        let small = |v: &BigInt| v.to_i64().ok_or_else(|| Error::Invalid("b-invariant out of range".into()));
        periods_from_b(small(&b.b2)?, small(&b.b4)?, small(&b.b6)?, self.discriminant().is_positive())
    }

    pub fn formal(&self, trunc: usize) -> FormalExpansions {
        FormalExpansions::new(self, trunc)
    }
}

/// Primes above this use [`Curve::ap_bsgs`].
const BSGS_FROM: u64 = 1000;

fn pow_mod(mut b: i64, mut e: i64, m: i64) -> i64 {
    let mut r = 1i64;
    b = b.rem_euclid(m);
    while e > 0 {
        if e & 1 == 1 {
            r = (r as i128 * b as i128 % m as i128) as i64;
        }
        b = (b as i128 * b as i128 % m as i128) as i64;
        e >>= 1;
    }
    r
}

fn inv_small(a: i64, m: i64) -> i64 {
    let (mut r0, mut r1, mut s0, mut s1) = (m, a.rem_euclid(m), 0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    s0.rem_euclid(m)
}

type Pt = Option<(i64, i64)>;

/// Group law on y² = x³ + ax + b over F_ℓ.
fn short_add(p: Pt, q: Pt, a: i64, l: i64) -> Pt {
    let ((x1, y1), (x2, y2)) = match (p, q) {
        (None, _) => return q,
        (_, None) => return p,
        (Some(u), Some(v)) => (u, v),
    };
    let m = |v: i64| v.rem_euclid(l);
    let lam = if x1 == x2 {
        if m(y1 + y2) == 0 {
            return None;
        }
        m(m(3 * m(x1 * x1) + a) * inv_small(2 * y1, l))
    } else {
        m(m(y2 - y1) * inv_small(x2 - x1, l))
    };
    let x3 = m(m(lam * lam) - x1 - x2);
    let y3 = m(m(lam * (x1 - x3)) - y1);
    Some((x3, y3))
}

fn short_mul(mut k: i64, p: Pt, a: i64, l: i64) -> Pt {
    let mut base = p;
    if k < 0 {
        base = base.map(|(x, y)| (x, (-y).rem_euclid(l)));
        k = -k;
    }
    let mut acc = None;
    while k > 0 {
        if k & 1 == 1 {
            acc = short_add(acc, base, a, l);
        }
        base = short_add(base, base, a, l);
        k >>= 1;
    }
    acc
}

/// Exact order of a point whose order lies in a multiple found by BSGS
/// over the Hasse interval around ℓ + 1.
fn point_order(pt: (i64, i64), a: i64, l: i64, bound: i64) -> Option<i64> {
    let p = Some(pt);
    let width = 2 * bound + 1;
    let s = (width as f64).sqrt().ceil() as i64;
    let mut baby = std::collections::HashMap::with_capacity(s as usize + 1);
    let mut q: Pt = None;
    for j in 0..=s {
        if let Some((x, _)) = q {
            baby.entry(x).or_insert(j);
        }
        q = short_add(q, p, a, l);
    }
    let lo = l + 1 - bound;
    let step = short_mul(s, p, a, l);
    let mut g = short_mul(lo, p, a, l);
    let mut multiple = None;
    for i in 0..=s + 1 {
        let k = lo + i * s;
        match g {
            None => {
                multiple = Some(k);
                break;
            }
            Some((x, y)) => {
                if let Some(&j) = baby.get(&x) {
                    let jp = short_mul(j, p, a, l).unwrap();
                    multiple = Some(if jp.1 == y { k - j } else { k + j });
                    break;
                }
            }
        }
        g = short_add(g, step, a, l);
    }
    let mut n = multiple?;
    if n <= 0 || short_mul(n, p, a, l).is_some() {
        return None;
    }
    let mut rest = n;
    let mut f = 2;
    while f * f <= rest {
        if rest % f == 0 {
            while rest % f == 0 {
                rest /= f;
            }
            while n % f == 0 && short_mul(n / f, p, a, l).is_none() {
                n /= f;
            }
        }
        f += 1;
    }
    if rest > 1 && short_mul(n / rest, p, a, l).is_none() {
        n /= rest;
    }
    Some(n)
}

pub(crate) fn inv_mod(a: i64, m: i64) -> i64 {
    let e = BigInt::from(a).extended_gcd(&BigInt::from(m));
    assert!(e.gcd.is_one(), "{a} not invertible modulo {m}");
    e.x.mod_floor(&BigInt::from(m)).to_i64().unwrap()
}

fn primes_up_to(n: usize) -> Vec<u64> {
    let mut sieve = vec![true; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if sieve[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
    }
    out
}

/// a_1..a_M of the newform (index 0 is unused and zero).
pub fn q_expansion(curve: &Curve, bad: &BTreeMap<u64, Reduction>, terms: usize) -> Result<Vec<i64>> {
    let disc = curve.discriminant();
    let primes = primes_up_to(terms);
    let ap: Vec<i64> = primes
        .par_iter()
        .map(|&l| match bad.get(&l) {
            Some(r) => Ok(r.a_l()),
            None if (&disc % BigInt::from(l)).is_zero() => {
                Err(Error::Invalid(format!("{l} divides the discriminant but has no reduction type")))
            }
            None => curve.count_ap(l),
        })
        .collect::<Result<_>>()?;
    let mut an = vec![0i64; terms + 1];
    if terms >= 1 {
        an[1] = 1;
    }
    // smallest prime factor sieve
    let mut spf = vec![0u32; terms + 1];
    for &l in &primes {
        let mut j = l as usize;
        while j <= terms {
            if spf[j] == 0 {
                spf[j] = l as u32;
            }
            j += l as usize;
        }
    }
    let index: BTreeMap<u64, usize> = primes.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    for n in 2..=terms {
        let l = spf[n] as usize;
        let mut rest = n;
        let mut k = 0;
        while rest % l == 0 {
            rest /= l;
            k += 1;
        }
        let a = ap[index[&(l as u64)]];
        let prime_power = if bad.contains_key(&(l as u64)) {
            a.pow(k)
        } else {
            let (mut prev, mut cur) = (1i64, a);
            for _ in 1..k {
                (prev, cur) = (cur, a * cur - l as i64 * prev);
            }
            cur
        };
        an[n] = an[rest] * prime_power;
    }
    Ok(an)
}

/// Expansions at O in the parameter t = −x/y, over Q.
///
/// `w = t³·big_w`, x = t⁻²·u, y = −t⁻³·u with u = 1/big_w; the invariant
/// differential is ω = f(t)dt and z = ∫f is the formal logarithm.
#[derive(Clone, Debug)]
pub struct FormalExpansions {
    pub big_w: TruncatedSeries<BigRational>,
    pub u: TruncatedSeries<BigRational>,
    pub f: TruncatedSeries<BigRational>,
    pub z: TruncatedSeries<BigRational>,
}

impl FormalExpansions {
    pub fn new(curve: &Curve, trunc: usize) -> Self {
        let [a1, a2, a3, a4, a6] = curve.ar();
        let m = trunc.max(3);
        let tp = |k: usize, c: &BigRational| TruncatedSeries::<BigRational>::x_power(k, m).scale(c);
        let one = TruncatedSeries::constant(BigRational::one(), m);
        // W = 1 + a1 t W + a2 t² W + a3 t³ W² + a4 t⁴ W² + a6 t⁶ W³
        let mut w = one.clone();
        for _ in 0..m {
            let w2 = w.mul(&w);
            let w3 = w2.mul(&w);
            w = one
                .add(&tp(1, &a1).mul(&w))
                .add(&tp(2, &a2).mul(&w))
                .add(&tp(3, &a3).mul(&w2))
                .add(&tp(4, &a4).mul(&w2))
                .add(&tp(6, &a6).mul(&w3));
        }
        let u = one.divide(&w).expect("W(0) = 1");
        let du = derivative(&u);
        let two = rat(2);
        // f = (−2u + t u') / (−2u + a1 t u + a3 t³)
        let num = u.scale(&-two.clone()).add(&du.shift_up(1).truncate(m));
        let den = u.scale(&-two).add(&u.shift_up(1).truncate(m).scale(&a1)).add(&tp(3, &a3));
        let f = num.divide(&den).expect("denominator starts with −2");
        let z = integral(&f);
        FormalExpansions { big_w: w, u, f, z }
    }
}

pub fn derivative(s: &TruncatedSeries<BigRational>) -> TruncatedSeries<BigRational> {
    let m = s.trunc_order();
    let c: Vec<BigRational> = (1..m).map(|k| s.coeff(k) * rat(k as i64)).collect();
    TruncatedSeries::new(c, m.saturating_sub(1))
}

pub fn integral(s: &TruncatedSeries<BigRational>) -> TruncatedSeries<BigRational> {
    let m = s.trunc_order();
    let mut c = vec![BigRational::zero()];
    c.extend((0..m).map(|k| s.coeff(k) / rat(k as i64 + 1)));
    TruncatedSeries::new(c, m + 1)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveFixture {
    pub label: String,
    pub a_invariants: [i64; 5],
    pub conductor: u64,
    pub p: u32,
    pub rank: u32,
    pub generators: Vec<[String; 2]>,
    pub torsion_order: u64,
    pub tamagawa_product: u64,
    pub sha_order: u64,
    pub bad_reduction: BTreeMap<String, Reduction>,
    pub frobenius_on_omega: [String; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frobenius_on_eta: Option<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<[String; 2]>,
    pub precision: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

impl CurveFixture {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn curve(&self) -> Curve {
        Curve::new(self.a_invariants)
    }

    pub fn generators(&self) -> Result<Vec<Point>> {
        self.generators
            .iter()
            .map(|[x, y]| {
                let parse = |s: &str| s.parse::<BigRational>().map_err(|_| Error::Parse(format!("rational {s:?}")));
                Ok(Point::new(parse(x)?, parse(y)?))
            })
            .collect()
    }

    pub fn bad_primes(&self) -> Result<BTreeMap<u64, Reduction>> {
        self.bad_reduction
            .iter()
            .map(|(k, v)| Ok((k.parse::<u64>().map_err(|_| Error::Parse(format!("prime {k:?}")))?, *v)))
            .collect()
    }

    /// (u, v) with φ(ω) = uω + vη.
    pub fn frobenius_omega(&self) -> Result<[PadicElement; 2]> {
        let [u, v] = &self.frobenius_on_omega;
        Ok([PadicElement::parse(u, self.p)?, PadicElement::parse(v, self.p)?])
    }

    pub fn frobenius_eta(&self) -> Result<Option<[PadicElement; 2]>> {
        match &self.frobenius_on_eta {
            None => Ok(None),
            Some([c, d]) => Ok(Some([PadicElement::parse(c, self.p)?, PadicElement::parse(d, self.p)?])),
        }
    }

    /// Ingested periods, or the AGM values when the fixture has none.
    pub fn periods<F: Real>(&self) -> Result<(F, F)> {
        match &self.periods {
            Some([a, b]) => Ok((parse_decimal(a)?, parse_decimal(b)?)),
            None => self.curve().real_periods(),
        }
    }

    /// Modular-symbol table recorded by the fixture generator, if any.
    pub fn oracle_symbols(&self) -> BTreeMap<String, String> {
        self.oracle
            .as_ref()
            .and_then(|o| o.get("modular_symbols"))
            .and_then(|m| serde_json::from_value(m.clone()).ok())
            .unwrap_or_default()
    }

    /// Curve-level invariants: nonsingular minimal model, generators on the
    /// curve and of infinite order, good supersingular reduction with a_p = 0.
    pub fn validate(&self) -> Result<()> {
        let e = self.curve();
        let disc = e.discriminant();
        if disc.is_zero() {
            return Err(Error::Invalid("singular Weierstrass equation".into()));
        }
        let c4 = e.c4();
        let bad = self.bad_primes()?;
        let mut n = BigInt::one();
        for (&l, &r) in &bad {
            let lb = BigInt::from(l);
            let vd = valuation_int(&disc, &lb);
            let vc = if c4.is_zero() { u32::MAX } else { valuation_int(&c4, &lb) };
            if vd == 0 {
                return Err(Error::Invalid(format!("{l} listed as bad but does not divide the discriminant")));
            }
            if vd >= 12 && vc >= 4 {
                return Err(Error::Invalid(format!("model may be non-minimal at {l}")));
            }
            n *= if r == Reduction::Additive { &lb * &lb } else { lb };
        }
        for l in primes_dividing(&disc) {
            if !bad.contains_key(&l) {
                return Err(Error::Invalid(format!("{l} divides the discriminant but has no reduction type")));
            }
        }
        if bad.values().all(|&r| r != Reduction::Additive) && n != BigInt::from(self.conductor) {
            return Err(Error::Invalid(format!("conductor {} differs from the semistable value {n}", self.conductor)));
        }
        let p = self.p as u64;
        if p < 3 || bad.contains_key(&p) {
            return Err(Error::Hypothesis(format!("p = {p} must be an odd prime of good reduction")));
        }
        if e.count_ap(p)? != 0 {
            return Err(Error::Hypothesis(format!("a_{p} != 0")));
        }
        let gens = self.generators()?;
        if gens.len() != self.rank as usize {
            return Err(Error::Invalid(format!("{} generators for rank {}", gens.len(), self.rank)));
        }
        for g in &gens {
            if !e.is_on(g) {
                return Err(Error::Invalid(format!("generator {g:?} is not on the curve")));
            }
            if e.is_torsion(g) {
                return Err(Error::Invalid(format!("generator {g:?} is torsion")));
            }
        }
        Ok(())
    }
}

fn valuation_int(n: &BigInt, l: &BigInt) -> u32 {
    let mut n = n.clone();
    let mut v = 0;
    while !n.is_zero() && (&n % l).is_zero() {
        n /= l;
        v += 1;
    }
    v
}

fn primes_dividing(n: &BigInt) -> Vec<u64> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut d = 2u64;
    while BigInt::from(d) * BigInt::from(d) <= n {
        let db = BigInt::from(d);
        if (&n % &db).is_zero() {
            out.push(d);
            while (&n % &db).is_zero() {
                n /= &db;
            }
        }
        d += 1;
    }
    if n > BigInt::one() {
        out.push(n.to_u64().expect("large prime factor of the discriminant"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::Hi;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn e37a() -> Curve {
        Curve::new([0, 0, 1, -1, 0])
    }

    #[test]
    fn bsgs_point_count_matches_character_sum() {
        let curves = [e37a(), Curve::new([1, -1, 1, 0, 0]), Curve::new([1, 1, 0, -2, 0]), Curve::new([0, 1, 1, 0, 0])];
        for e in &curves {
            let disc = e.discriminant();
            for l in primes_up_to(4000).into_iter().filter(|&l| l > 5) {
                if (&disc % BigInt::from(l)).is_zero() {
                    continue;
                }
                let slow = e.ap_by_character_sum(l).unwrap();
                if let Some(fast) = e.ap_bsgs(l) {
                    assert_eq!(fast, slow, "ℓ = {l}");
                } else {
                    assert!(l < 300, "BSGS gave up at ℓ = {l}");
                }
            }
        }
    }

    #[test]
    fn point_counts() {
        // y² = x³ − x at 3: x ∈ {0, 1, 2} gives g = 0, 0, 6 ≡ 0, so 3 + 1 points and a_3 = 0
        let e = Curve::new([0, 0, 0, -1, 0]);
        assert_eq!(e.count_ap(3).unwrap(), 0);
        // 37a: a_2 = −2, a_3 = −3, a_5 = −2, a_7 = −1
        let e = e37a();
        let got: Vec<i64> = [2u64, 3, 5, 7].iter().map(|&l| e.count_ap(l).unwrap()).collect();
        assert_eq!(got, vec![-2, -3, -2, -1]);
        assert!(e.count_ap(37).is_err());
    }

    #[test]
    fn hecke_relations() {
        let e = e37a();
        let bad = BTreeMap::from([(37u64, Reduction::Nonsplit)]);
        let a = q_expansion(&e, &bad, 200).unwrap();
        assert_eq!(a[1], 1);
        assert_eq!(&a[1..11], &[1, -2, -3, 2, -2, 6, -1, 0, 6, 4]);
        for l in [2usize, 3, 5, 7, 11, 13] {
            assert_eq!(a[l * l], a[l] * a[l] - l as i64);
        }
        assert_eq!(a[6], a[2] * a[3]);
        assert_eq!(a[37], -1);
        assert_eq!(a[74], a[2] * a[37]);
    }

    #[test]
    fn group_law() {
        let e = e37a();
        let p = Point::new(r(0, 1), r(0, 1));
        let p2 = e.mul(2, &p);
        assert_eq!(p2, Point::new(r(1, 1), r(0, 1)));
        let p3 = e.add(&p2, &p);
        assert_eq!(p3, Point::new(r(-1, 1), r(-1, 1)));
        assert!(e.is_on(&e.mul(7, &p)));
        assert_eq!(e.add(&e.mul(3, &p), &e.mul(4, &p)), e.mul(7, &p));
        // associativity on P, 2P, 5P
        let (a, b, c) = (p.clone(), p2.clone(), e.mul(5, &p));
        assert_eq!(e.add(&e.add(&a, &b), &c), e.add(&a, &e.add(&b, &c)));
        assert_eq!(e.add(&p, &e.neg(&p)), Point::Infinity);
        assert!(!e.is_torsion(&p));
        // 14a1 has a point of order 6
        let e14 = Curve::new([1, 0, 1, 4, -6]);
        let t = Point::new(r(2, 1), r(-5, 1));
        assert!(e14.is_on(&t) && e14.is_torsion(&t));
        assert_eq!(e14.mul(6, &t), Point::Infinity);
    }

    #[test]
    fn orders_modulo_primes() {
        let e = e37a();
        let p = Point::new(r(0, 1), r(0, 1));
        for l in [3u64, 5, 7, 11] {
            let n = e.order_mod(&p, l).unwrap();
            let count = (l as i64 + 1 - e.count_ap(l).unwrap()) as u64;
            assert_eq!(count % n, 0);
            // nP reduces to O modulo l
            let q = e.mul(n as i64, &p);
            assert!(q.is_infinity() || (q.x().unwrap().denom() % BigInt::from(l)).is_zero());
        }
    }

    #[test]
    fn formal_group_expansions() {
        for a in [[0, 0, 1, -1, 0], [1, 0, 1, 4, -6], [1, -1, 1, 0, 0]] {
            let e = Curve::new(a);
            let fe = e.formal(8);
            let z = &fe.z;
            assert_eq!(z.coeff(0), &r(0, 1));
            assert_eq!(z.coeff(1), &r(1, 1));
            assert_eq!(z.coeff(2), &r(a[0], 2));
            // x(t)·t² = u → 1 + O(t); f(0) = 1
            assert_eq!(fe.u.coeff(0), &r(1, 1));
            assert_eq!(fe.f.coeff(0), &r(1, 1));
            // w = t³ + a1 t⁴ + (a1² + a2) t⁵ + …
            assert_eq!(fe.big_w.coeff(1), &r(a[0], 1));
            assert_eq!(fe.big_w.coeff(2), &r(a[0] * a[0] + a[1], 1));
            // f has integral coefficients
            assert!(fe.f.coeffs().iter().all(|c| c.is_integer()));
        }
    }

    #[test]
    fn formal_point_satisfies_equation() {
        // (x, y) = (t⁻²u, −t⁻³u) solves the Weierstrass equation as Laurent series:
        // multiply through by t⁶: u² ·(−1)… checked numerically at t = 1/1000
        let e = Curve::new([1, -1, 1, 0, 0]);
        let fe = e.formal(14);
        let t = r(1, 1000);
        let mut u = r(0, 1);
        for k in (0..fe.u.trunc_order()).rev() {
            u = u * &t + fe.u.coeff(k);
        }
        let x = &u / (&t * &t);
        let y = -&u / (&t * &t * &t);
        let [a1, a2, a3, a4, a6] = e.ar();
        let resid = &y * &y + &a1 * &x * &y + &a3 * &y - (&x * &x * &x + &a2 * &x * &x + &a4 * &x + &a6);
        // truncation at t^14 leaves an error of size about t^(14 − 6)
        assert!(resid.abs() < r(1, 10i64.pow(15)));
    }

    #[test]
    fn fixture_periods_match_agm() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
        for entry in std::fs::read_dir(dir).unwrap() {
            let fx = CurveFixture::load(entry.unwrap().path()).unwrap();
            let (pp, pm): (Hi, Hi) = fx.curve().real_periods().unwrap();
            let [sp, sm] = fx.periods.clone().unwrap();
            let (fp, fm): (Hi, Hi) = (parse_decimal(&sp).unwrap(), parse_decimal(&sm).unwrap());
            assert!(((pp - fp) / fp).abs() < Hi::from(1e-29), "{} Ω⁺", fx.label);
            assert!(((pm - fm) / fm).abs() < Hi::from(1e-29), "{} Ω⁻", fx.label);
            // f64 and double-double agree on every digit f64 reports
            let (p64, _): (f64, f64) = fx.curve().real_periods().unwrap();
            assert!((p64 - pp.hi()).abs() < 1e-14 * p64);
            assert!(pp > Hi::from(0.0));
        }
    }

    #[test]
    fn fixtures_validate() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
        for entry in std::fs::read_dir(dir).unwrap() {
            let fx = CurveFixture::load(entry.unwrap().path()).unwrap();
            fx.validate().unwrap_or_else(|e| panic!("{}: {e}", fx.label));
            let mut bad = fx.clone();
            bad.a_invariants[4] += 1;
            assert!(bad.validate().is_err());
        }
    }
}
