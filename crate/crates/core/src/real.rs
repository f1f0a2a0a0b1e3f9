//! Real arithmetic for periods and Eichler–Shimura sums, generic over
//! `f64` and double-double [`TwoFloat`].
//!
//! The transcendental functions shipped with `TwoFloat` are only good to about
//! 1e-17, so `exp` and `cos_sin_turn` are implemented here by argument
//! reduction and Taylor series at full working precision.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use twofloat::TwoFloat;

use crate::error::{Error, Result};

pub trait Real: Float + FloatConst + FromPrimitive + Send + Sync + Debug + Display + 'static {
    /// Unit roundoff of the format.
    fn unit_roundoff() -> Self;

    fn from_f(x: f64) -> Self;

    /// Correctly rounded-ish division. `TwoFloat`'s own `/` keeps only about
    /// 16 digits (its residual 1 − b·(1/b) is formed without an FMA), so one
    /// correction step with the exact product residual is applied.
    fn quot(self, rhs: Self) -> Self {
        let q = self / rhs;
        q + (self - q * rhs) / rhs
    }

    fn from_bigint(n: &BigInt) -> Self {
        let hi = n.to_f64().unwrap_or(f64::NAN);
        let rest = n - BigInt::from_f64(hi).unwrap_or_default();
        Self::from_f(hi) + Self::from_f(rest.to_f64().unwrap_or(0.0))
    }

    fn from_rational(r: &BigRational) -> Self {
        Self::from_bigint(r.numer()).quot(Self::from_bigint(r.denom()))
    }

    fn int(n: i64) -> Self {
        Self::from_bigint(&BigInt::from(n))
    }
}

impl Real for f64 {
    fn unit_roundoff() -> Self {
        f64::EPSILON / 2.0
    }

    fn from_f(x: f64) -> Self {
        x
    }
}

impl Real for TwoFloat {
    fn unit_roundoff() -> Self {
        TwoFloat::from(f64::EPSILON * f64::EPSILON / 4.0)
    }

    fn from_f(x: f64) -> Self {
        TwoFloat::from(x)
    }
}

/// Double-double working precision (about 31 significant digits).
pub type Hi = TwoFloat;

/// Parse a decimal literal such as `-1.25e-3` exactly, then round once.
pub fn parse_decimal<F: Real>(s: &str) -> Result<F> {
    Ok(F::from_rational(&decimal_to_rational(s)?))
}

pub fn decimal_to_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("not a decimal number: {s:?}"));
    let s = s.trim();
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let shift = exp - frac.len() as i64;
    let ten = BigInt::from(10);
    let mut r = if shift >= 0 {
        BigRational::from_integer(digits * ten.pow(shift as u32))
    } else {
        BigRational::new(digits, ten.pow((-shift) as u32))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

/// e^x − 1 by its Taylor series; |x| should be small.
fn expm1_taylor<F: Real>(x: F) -> F {
    let eps = F::unit_roundoff();
    let mut sum = x;
    let mut term = x;
    let mut k = 2;
    while k < 200 {
        term = (term * x).quot(F::int(k));
        sum = sum + term;
        if term.abs() <= eps * sum.abs() {
            break;
        }
        k += 1;
    }
    sum
}

pub fn exp<F: Real>(x: F) -> F {
    if x.is_zero() {
        return F::one();
    }
    // x = k·ln2 + r with |r| ≤ ln2/2; e^{r/2^10} − 1 is squared up in the
    // form u ↦ 2u + u², which keeps its relative accuracy
    let k = x.quot(F::LN_2()).round();
    let r = x - k * F::LN_2();
    let mut u = expm1_taylor(r / F::int(1024));
    for _ in 0..10 {
        u = F::int(2) * u + u * u;
    }
    (F::one() + u) * F::int(2).powi(k.to_i32().unwrap_or(i32::MAX))
}

/// (cos θ, sin θ) for small θ, by Taylor series.
fn cos_sin_small<F: Real>(t: F) -> (F, F) {
    let eps = F::unit_roundoff();
    let t2 = t * t;
    let (mut c, mut s) = (F::one(), t);
    let (mut tc, mut ts) = (F::one(), t);
    let mut k = 1;
    while k < 100 {
        tc = (-tc * t2).quot(F::int((2 * k - 1) * (2 * k)));
        ts = (-ts * t2).quot(F::int((2 * k) * (2 * k + 1)));
        c = c + tc;
        s = s + ts;
        if tc.abs() <= eps && ts.abs() <= eps * t.abs() {
            break;
        }
        k += 1;
    }
    (c, s)
}

/// (cos 2πa/m, sin 2πa/m), reducing the rational angle exactly first.
pub fn cos_sin_turn<F: Real>(a: i64, m: i64) -> (F, F) {
    assert!(m > 0);
    let mut a = a.rem_euclid(m);
    if 2 * a > m {
        a -= m;
    }
    // θ ∈ [−π, π], shrunk 16-fold and doubled back
    let theta = (F::int(2) * F::PI() * F::int(a)).quot(F::int(m));
    let (mut c, mut s) = cos_sin_small(theta / F::int(16));
    for _ in 0..4 {
        let (c2, s2) = (c * c - s * s, F::int(2) * s * c);
        c = c2;
        s = s2;
    }
    (c, s)
}

/// Arithmetic–geometric mean of positive reals.
pub fn agm<F: Real>(a: F, b: F) -> Result<F> {
    let (mut a, mut b) = (a, b);
    let tol = F::int(8) * F::unit_roundoff();
    for _ in 0..64 {
        if (a - b).abs() <= tol * a.abs() {
            return Ok(a);
        }
        let m = (a + b) / F::int(2);
        b = (a * b).sqrt();
        a = m;
    }
    Err(Error::Agm(64))
}

fn newton_cubic<F: Real>(c: [F; 4], x0: f64) -> F {
    // c[0] x³ + c[1] x² + c[2] x + c[3]
    let mut x = F::from_f(x0);
    for _ in 0..8 {
        let f = ((c[0] * x + c[1]) * x + c[2]) * x + c[3];
        let df = (F::int(3) * c[0] * x + F::int(2) * c[1]) * x + c[2];
        if df.is_zero() {
            break;
        }
        x = x - f.quot(df);
    }
    x
}

/// Real roots of 4x³ + b2 x² + 2 b4 x + b6, descending (f64 seeds, refined by Newton in F).
fn two_torsion_roots<F: Real>(b2: i64, b4: i64, b6: i64) -> Vec<F> {
    let (a, b, c, d) = (4.0, b2 as f64, 2.0 * b4 as f64, b6 as f64);
    // depressed cubic t³ + pt + q with x = t − b/(3a)
    let p = (3.0 * a * c - b * b) / (3.0 * a * a);
    let q = (2.0 * b * b * b - 9.0 * a * b * c + 27.0 * a * a * d) / (27.0 * a * a * a);
    let shift = -b / (3.0 * a);
    let disc = -(4.0 * p * p * p + 27.0 * q * q);
    let seeds: Vec<f64> = if disc > 0.0 {
        let r = 2.0 * (-p / 3.0).sqrt();
        let phi = (3.0 * q / (p * r)).acos() / 3.0;
        (0..3).map(|k| r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + shift).collect()
    } else {
        let s = (q * q / 4.0 + p * p * p / 27.0).sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt() + shift]
    };
    let coeffs = [F::int(4), F::int(b2), F::int(2 * b4), F::int(b6)];
    let mut roots: Vec<F> = seeds.into_iter().map(|x0| newton_cubic(coeffs, x0)).collect();
    roots.sort_by(|x, y| y.partial_cmp(x).unwrap());
    roots
}

/// (Ω⁺, Ω⁻) from the b-invariants and the sign of the discriminant.
///
/// Ω⁺ = 2∫_{e₁}^∞ dx/√g; Ω⁻ is twice the integral over the cycle through the
/// other real root(s), (e₂, e₁) when Δ > 0 and (−∞, e₁) when Δ < 0.
pub fn periods_from_b<F: Real>(b2: i64, b4: i64, b6: i64, disc_positive: bool) -> Result<(F, F)> {
    let roots = two_torsion_roots::<F>(b2, b4, b6);
    let two = F::int(2);
    if disc_positive {
        if roots.len() != 3 {
            return Err(Error::Invalid("positive discriminant but one real 2-torsion root".into()));
        }
        let (e1, e2, e3) = (roots[0], roots[1], roots[2]);
        let plus = F::PI().quot(agm((e1 - e3).sqrt(), (e1 - e2).sqrt())?);
        let minus = F::PI().quot(agm((e1 - e3).sqrt(), (e2 - e3).sqrt())?);
        Ok((plus, minus))
    } else {
        let e1 = roots[0];
        // g(x) = 4(x − e1)(x² + Bx + C)
        let bq = F::int(b2) / F::int(4) + e1;
        let cq = F::int(b4) / two + e1 * bq;
        let re = -bq / two;
        let r = ((e1 - re) * (e1 - re) + (cq - re * re)).sqrt();
        let plus = (two * F::PI()).quot(agm(two * r.sqrt(), (two * r + two * (e1 - re)).sqrt())?);
        let minus = (two * F::PI()).quot(agm(two * r.sqrt(), (two * r - two * (e1 - re)).sqrt())?);
        Ok((plus, minus))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close<F: Real>(a: F, b: F, tol: f64) -> bool {
        (a - b).abs() <= F::from_f(tol) * (F::one() + b.abs())
    }

    #[test]
    fn corrected_division() {
        let tenth = Hi::from(1.0).quot(Hi::from(10.0));
        assert!((tenth * Hi::from(10.0) - Hi::from(1.0)).abs() < Hi::from(1e-32));
        let third = Hi::from(2.0).quot(Hi::from(3.0));
        assert!((third * Hi::from(3.0) - Hi::from(2.0)).abs() < Hi::from(1e-32));
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(decimal_to_rational("-1.25e-3").unwrap(), BigRational::new((-1).into(), 800.into()));
        assert_eq!(decimal_to_rational("42").unwrap(), BigRational::from_integer(42.into()));
        assert!(decimal_to_rational("1.2.3").is_err());
        let x: Hi = parse_decimal("0.1").unwrap();
        assert!(close(x * Hi::from(10.0), Hi::from(1.0), 1e-31));
    }

    #[test]
    fn exp_matches_reference_digits() {
        // e and e^{-10.5} against 40-digit references
        let e: Hi = exp(Hi::from(1.0));
        let e_ref: Hi = parse_decimal("2.718281828459045235360287471352662497757").unwrap();
        assert!(close(e, e_ref, 1e-30));
        let x: Hi = exp(Hi::from(-10.5));
        let x_ref: Hi = parse_decimal("2.753644934974715785741109710242551110159e-5").unwrap();
        assert!(close(x.quot(x_ref), Hi::from(1.0), 1e-30));
        assert!(close(exp(1.0f64), std::f64::consts::E, 1e-15));
    }

    #[test]
    fn cos_sin_of_rational_turns() {
        let (c, s): (Hi, Hi) = cos_sin_turn(1, 8);
        let half_root2: Hi = parse_decimal("0.7071067811865475244008443621048490392848").unwrap();
        assert!(close(c, half_root2, 1e-30) && close(s, half_root2, 1e-30));
        let (c, s): (Hi, Hi) = cos_sin_turn(-5, 12);
        let r3: Hi = parse_decimal("0.8660254037844386467637231707529361834714").unwrap();
        assert!(close(c, -r3, 1e-30) && close(s, Hi::from(-0.5), 1e-30));
        for m in [5i64, 7, 25, 125, 343] {
            for a in 0..m {
                let (c, s): (Hi, Hi) = cos_sin_turn(a, m);
                assert!(close(c * c + s * s, Hi::from(1.0), 1e-30));
                let (c64, s64): (f64, f64) = cos_sin_turn(a, m);
                assert!((c.hi() - c64).abs() < 1e-14 && (s.hi() - s64).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn agm_reference() {
        // AGM(1, √2) = 1.19814023473559220744…
        let g: Hi = agm(Hi::from(1.0), Hi::from(2.0).sqrt()).unwrap();
        let g_ref: Hi = parse_decimal("1.198140234735592207439922492280323878227").unwrap();
        assert!(close(g, g_ref, 1e-30));
    }
}
