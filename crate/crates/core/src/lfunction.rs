//! Plus modular symbols by numerical Eichler–Shimura integration, the
//! Mazur–Tate–Teitelbaum L-function L_α by Riemann sums, and the signed
//! decomposition through the logarithm matrix.
//!
//! For gcd(m, N) = 1 and γ ∈ Γ₀(N) with γ(a/m) = 0, the point z = a/m + iy
//! is carried by W_N·γ to v/m + i/(N m² y) with v ≡ −(Na)⁻¹ (mod m), so
//!
//!   λ(a/m) = I(a/m + iy) − ε·I(v/m + i/(N m² y)),   I(z) = Σ aₙ/n qⁿ,
//!
//! where ε is the W_N-eigenvalue. Every height y gives the same λ; the
//! primary pass uses the balanced y = 1/(m√N) and the check pass an
//! unbalanced pair, so the two evaluations share no q-series points.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::curve::{q_expansion, Curve, CurveFixture, Reduction};
use crate::error::{Error, Result};
use crate::padic::{HalfInt, PadicElement};
use crate::quad::{vp_rat, QuadRational};
use crate::real::{cos_sin_turn, exp, Hi, Real};
use crate::series::{binomials, LogMatrix, TruncatedSeries};

/// Bumped whenever the integration or snapping changes, so stale caches miss.
const ALGORITHM: &str = "es-fft-2";

/// Ratio between the two heights of the check pass.
const CHECK_STRETCH: f64 = 1.25;

#[derive(Clone, Copy, Debug)]
struct Cx {
    re: Hi,
    im: Hi,
}

impl Cx {
    fn add(self, o: Cx) -> Cx {
        Cx { re: self.re + o.re, im: self.im + o.im }
    }

    fn mul(self, o: Cx) -> Cx {
        Cx { re: self.re * o.re - self.im * o.im, im: self.re * o.im + self.im * o.re }
    }
}

/// Decimation in time over a length pᵏ. `tw[t·stride]` is e^{2πi t/len}.
fn dft(x: &[Cx], p: usize, tw: &[Cx], stride: usize) -> Vec<Cx> {
    let len = x.len();
    if len == 1 {
        return x.to_vec();
    }
    let sub = len / p;
    let parts: Vec<Vec<Cx>> = (0..p)
        .into_par_iter()
        .map(|s| {
            let xs: Vec<Cx> = (0..sub).map(|i| x[s + p * i]).collect();
            dft(&xs, p, tw, stride * p)
        })
        .collect();
    (0..len)
        .map(|k| {
            let mut acc = parts[0][k % sub];
            for (s, part) in parts.iter().enumerate().skip(1) {
                acc = acc.add(tw[(k * s % len) * stride].mul(part[k % sub]));
            }
            acc
        })
        .collect()
}

fn twiddles(m: usize) -> Vec<Cx> {
    (0..m)
        .into_par_iter()
        .map(|t| {
            let (c, s) = cos_sin_turn::<Hi>(t as i64, m as i64);
            Cx { re: c, im: s }
        })
        .collect()
}

/// C_r = Σ_{j ≡ r (m), j ≤ terms} a_j/j·e^{−2πyj}.
fn fold(an: &[i64], m: usize, y: Hi, terms: usize) -> Vec<Hi> {
    let q = exp(-Hi::from(2.0) * <Hi as num_traits::FloatConst>::PI() * y);
    let mut c = vec![Hi::from(0.0); m];
    let mut qj = Hi::from(1.0);
    for (j, &a) in an.iter().enumerate().take(terms + 1).skip(1) {
        qj = qj * q;
        if a != 0 {
            c[j % m] = c[j % m] + (Hi::int(a) * qj).quot(Hi::int(j as i64));
        }
    }
    c
}

/// All values I(a/m + iy), a = 0..m.
fn eval_all(an: &[i64], p: usize, m: usize, y: Hi, terms: usize, tw: &[Cx]) -> Vec<Cx> {
    let c: Vec<Cx> = fold(an, m, y, terms).into_iter().map(|re| Cx { re, im: Hi::from(0.0) }).collect();
    if m == 1 {
        return c;
    }
    dft(&c, p, tw, 1)
}

/// Terms needed so that the tail of both I-terms, divided by Ω⁺, is below
/// 10^{−digits}: |aⱼ|/j ≤ 2 gives 4q^{M+1}/(1 − q) ≤ 10^{−digits}·Ω⁺.
fn terms_for(y: f64, digits: u32, omega: f64) -> usize {
    let two_pi_y = 2.0 * std::f64::consts::PI * y;
    let one_minus_q = -(-two_pi_y).exp_m1();
    let need = digits as f64 * std::f64::consts::LN_10 + (4.0 / (one_minus_q * omega)).ln();
    (need / two_pi_y).ceil().max(1.0) as usize
}

/// Digits such that a value within 10^{−digits+2} of a rational with
/// denominator ≤ B determines it (distinct such rationals are 1/B² apart).
fn digits_for(bound: u64) -> u32 {
    let b = bound as f64;
    (4.0 * b * b).log10().ceil() as u32 + 3
}

/// The convergent of x with denominator ≤ bound within `tol`, if any.
fn snap(x: Hi, bound: u64, tol: f64) -> Option<BigRational> {
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut t = x;
    for _ in 0..64 {
        let a = t.floor();
        let ai = BigInt::from(a.hi() as i64) + BigInt::from(a.lo() as i64);
        let h2 = &ai * &h1 + &h0;
        let k2 = &ai * &k1 + &k0;
        if k2 > BigInt::from(bound) {
            return None;
        }
        let r = BigRational::new(h2.clone(), k2.clone());
        let err: f64 = (x - Hi::from_rational(&r)).abs().into();
        if err <= tol {
            return Some(r);
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = t - a;
        if frac == Hi::from(0.0) {
            return None;
        }
        t = Hi::from(1.0).quot(frac);
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolParams {
    pub terms: usize,
    pub check_terms: usize,
    pub digits: u32,
    pub denominator_bound: u64,
    /// Largest |value − snapped rational| over both passes.
    pub max_residual: String,
}

/// [a/pᵏ]⁺ for the units a modulo pᵏ (just [0]⁺ at level 0).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModularSymbolTable {
    pub label: String,
    pub sign: String,
    pub p: u32,
    pub level: u32,
    pub values: BTreeMap<String, String>,
    pub params: SymbolParams,
    pub digest: String,
}

impl ModularSymbolTable {
    pub fn parsed(&self) -> Result<BTreeMap<u64, BigRational>> {
        self.values
            .iter()
            .map(|(k, v)| {
                let a = k.split('/').next().and_then(|a| a.parse::<u64>().ok());
                let val = BigRational::from_str(v).ok();
                match (a, val) {
                    (Some(a), Some(val)) => Ok((a, val)),
                    _ => Err(Error::Parse(format!("symbol entry {k:?}: {v:?}"))),
                }
            })
            .collect()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("symbol table json") + "\n"
    }
}

/// Where symbol tables are cached; `rebuild` ignores existing files.
#[derive(Clone, Debug, Default)]
pub struct SymbolStore {
    pub dir: Option<PathBuf>,
    pub rebuild: bool,
}

impl SymbolStore {
    pub fn in_dir(dir: impl Into<PathBuf>) -> Self {
        SymbolStore { dir: Some(dir.into()), rebuild: false }
    }

    fn path(&self, label: &str, p: u32, level: u32) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{label}-p{p}-k{level}.json")))
    }

    fn load(&self, label: &str, p: u32, level: u32, digest: &str) -> Option<ModularSymbolTable> {
        if self.rebuild {
            return None;
        }
        let text = fs::read_to_string(self.path(label, p, level)?).ok()?;
        let table: ModularSymbolTable = serde_json::from_str(&text).ok()?;
        (table.digest == digest && table.label == label).then_some(table)
    }

    /// Write-then-rename, so readers see either the old file or the new one.
    fn save(&self, table: &ModularSymbolTable) -> Result<()> {
        let Some(path) = self.path(&table.label, table.p, table.level) else { return Ok(()) };
        let dir = path.parent().unwrap_or(Path::new("."));
        fs::create_dir_all(dir)?;
        let tmp = dir.join(format!(".{}.{}.tmp", path.file_name().unwrap().to_string_lossy(), std::process::id()));
        fs::write(&tmp, table.to_json_string())?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    pub fn file_for(&self, label: &str, p: u32, level: u32) -> Option<PathBuf> {
        self.path(label, p, level)
    }
}

/// Everything needed to integrate the newform of a fixture curve.
pub struct SymbolContext {
    pub label: String,
    pub p: u32,
    pub conductor: u64,
    /// W_N-eigenvalue ε = ∏_{ℓ | N} (−a_ℓ).
    pub epsilon: i64,
    pub torsion: u64,
    curve: Curve,
    bad: BTreeMap<u64, Reduction>,
    omega_text: String,
    omega: Hi,
    an: Vec<i64>,
}

impl SymbolContext {
    pub fn from_fixture(fx: &CurveFixture) -> Result<Self> {
        let bad = fx.bad_primes()?;
        let mut epsilon = 1;
        let mut prod = 1u64;
        for (&l, r) in &bad {
            if *r == Reduction::Additive {
                return Err(Error::Hypothesis(format!("additive reduction at {l}: the W_N sign needs a squarefree conductor")));
            }
            epsilon *= -r.a_l();
            prod *= l;
        }
        if prod != fx.conductor {
            return Err(Error::Invalid(format!("conductor {} differs from the product of bad primes {prod}", fx.conductor)));
        }
        // analytic rank parity: ε = −1 for even rank
        if epsilon != if fx.rank % 2 == 0 { -1 } else { 1 } {
            return Err(Error::Invalid(format!("W_N sign {epsilon} contradicts rank {}", fx.rank)));
        }
        let (omega, _) = fx.periods::<Hi>()?;
        let omega_text = fx.periods.as_ref().map(|p| p[0].clone()).unwrap_or_else(|| format!("{omega:e}"));
        Ok(SymbolContext {
            label: fx.label.clone(),
            p: fx.p,
            conductor: fx.conductor,
            epsilon,
            torsion: fx.torsion_order,
            curve: fx.curve(),
            bad,
            omega_text,
            omega,
            an: vec![0, 1],
        })
    }

    fn ensure_terms(&mut self, terms: usize) -> Result<()> {
        if self.an.len() <= terms {
            self.an = q_expansion(&self.curve, &self.bad, terms)?;
        }
        Ok(())
    }

    pub fn denominator_bound(&self, m: u64) -> u64 {
        2 * self.torsion * self.torsion * m * self.conductor
    }

    fn heights(&self, m: u64) -> (f64, f64, f64) {
        let bal = 1.0 / (m as f64 * (self.conductor as f64).sqrt());
        (bal, bal * CHECK_STRETCH, bal / CHECK_STRETCH)
    }

    fn plan(&self, m: u64) -> (u32, u64, usize, usize) {
        let bound = self.denominator_bound(m);
        let digits = digits_for(bound);
        let omega: f64 = self.omega.into();
        let (bal, _, low) = self.heights(m);
        (digits, bound, terms_for(bal, digits, omega), terms_for(low, digits, omega))
    }

    fn digest(&self, level: u32, params: (u32, u64, usize, usize)) -> String {
        let key = serde_json::json!({
            "algorithm": ALGORITHM,
            "a_invariants": self.curve.a.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "conductor": self.conductor,
            "bad": self.bad,
            "omega_plus": self.omega_text,
            "epsilon": self.epsilon,
            "p": self.p,
            "level": level,
            "digits": params.0,
            "bound": params.1,
            "terms": params.2,
            "check_terms": params.3,
        });
        let hash = Sha256::digest(key.to_string().as_bytes());
        hash.iter().take(16).map(|b| format!("{b:02x}")).collect()
    }

    /// The table at level k, from the cache when its digest matches.
    pub fn table(&mut self, level: u32, store: &SymbolStore) -> Result<ModularSymbolTable> {
        let m = (self.p as u64).pow(level);
        let plan = self.plan(m);
        let digest = self.digest(level, plan);
        if let Some(t) = store.load(&self.label, self.p, level, &digest) {
            return Ok(t);
        }
        let table = self.compute_table(level, plan, digest)?;
        store.save(&table)?;
        Ok(table)
    }

    fn compute_table(&mut self, level: u32, plan: (u32, u64, usize, usize), digest: String) -> Result<ModularSymbolTable> {
        let (digits, bound, terms, check_terms) = plan;
        self.ensure_terms(terms.max(check_terms))?;
        let p = self.p as usize;
        let m = p.pow(level);
        let n = self.conductor as i64;
        let (bal, hi, lo) = self.heights(m as u64);
        let tw = if m > 1 { twiddles(m) } else { Vec::new() };
        let primary = eval_all(&self.an, p, m, Hi::from(bal), terms, &tw);
        let upper = eval_all(&self.an, p, m, Hi::from(hi), check_terms, &tw);
        let lower = eval_all(&self.an, p, m, Hi::from(lo), check_terms, &tw);
        let eps = Hi::int(self.epsilon);
        let tol = 10f64.powi(-(digits as i32) + 2);
        let units: Vec<usize> = if m == 1 { vec![0] } else { (1..m).filter(|a| a % p != 0).collect() };
        let omega = self.omega;
        let snapped: Vec<(usize, BigRational, f64)> = units
            .par_iter()
            .map(|&a| {
                let v = if m == 1 { 0 } else { (-crate::curve::inv_mod((n * a as i64).rem_euclid(m as i64), m as i64)).rem_euclid(m as i64) as usize };
                let x1 = (primary[a].re - eps * primary[v].re).quot(omega);
                let x2 = (upper[a].re - eps * lower[v].re).quot(omega);
                let r1 = snap(x1, bound, tol);
                let r2 = snap(x2, bound, tol);
                match (r1, r2) {
                    (Some(r1), Some(r2)) if r1 == r2 => {
                        let res1: f64 = (x1 - Hi::from_rational(&r1)).abs().into();
                        let res2: f64 = (x2 - Hi::from_rational(&r1)).abs().into();
                        Ok((a, r1, res1.max(res2)))
                    }
                    _ => Err(Error::Recognition { value: format!("[{a}/{m}] = {x1} (check pass {x2})"), bound }),
                }
            })
            .collect::<Result<_>>()?;
        let mut values = BTreeMap::new();
        let mut worst = 0f64;
        for (a, r, res) in snapped {
            values.insert(format!("{a}/{m}"), r.to_string());
            worst = worst.max(res);
        }
        Ok(ModularSymbolTable {
            label: self.label.clone(),
            sign: "+".into(),
            p: self.p,
            level,
            values,
            params: SymbolParams { terms, check_terms, digits, denominator_bound: bound, max_residual: format!("{worst:.1e}") },
            digest,
        })
    }

    /// [a/m]⁺ for a single cusp with gcd(m, N) = 1, by direct summation at
    /// both the balanced and an unbalanced height.
    pub fn modular_symbol(&mut self, a: i64, m: u64) -> Result<BigRational> {
        if m == 0 || (m as i64).gcd(&(self.conductor as i64)) != 1 {
            return Err(Error::Invalid(format!("cusp {a}/{m}: denominator must be prime to the conductor")));
        }
        let g = a.gcd(&(m as i64));
        let (a, m) = if m == 1 { (0, 1) } else { (a / g, m / g as u64) };
        let (a, m) = if m == 1 { (0, 1) } else { (a.rem_euclid(m as i64), m) };
        let plan = self.plan(m);
        let (digits, bound, terms, check_terms) = plan;
        self.ensure_terms(terms.max(check_terms))?;
        let mi = m as i64;
        let v = if m == 1 { 0 } else { (-crate::curve::inv_mod((self.conductor as i64 * a).rem_euclid(mi), mi)).rem_euclid(mi) };
        let (bal, hi, lo) = self.heights(m);
        let re_i = |num: i64, y: f64, terms: usize| -> Hi {
            let q = exp(-Hi::from(2.0) * <Hi as num_traits::FloatConst>::PI() * Hi::from(y));
            let (c, s) = cos_sin_turn::<Hi>(num, mi);
            let z = Cx { re: q * c, im: q * s };
            let mut zj = Cx { re: Hi::from(1.0), im: Hi::from(0.0) };
            let mut acc = Hi::from(0.0);
            for j in 1..=terms {
                zj = zj.mul(z);
                let aj = self.an[j];
                if aj != 0 {
                    acc = acc + (Hi::int(aj) * zj.re).quot(Hi::int(j as i64));
                }
            }
            acc
        };
        let eps = Hi::int(self.epsilon);
        let x1 = (re_i(a, bal, terms) - eps * re_i(v, bal, terms)).quot(self.omega);
        let x2 = (re_i(a, hi, check_terms) - eps * re_i(v, lo, check_terms)).quot(self.omega);
        let tol = 10f64.powi(-(digits as i32) + 2);
        match (snap(x1, bound, tol), snap(x2, bound, tol)) {
            (Some(r1), Some(r2)) if r1 == r2 => Ok(r1),
            _ => Err(Error::Recognition { value: format!("[{a}/{m}] = {x1} (check pass {x2})"), bound }),
        }
    }
}

/// Symbol tables at levels 0..=n, indexed for lookup of [b/pᵏ]⁺ at any b.
#[derive(Clone, Debug)]
pub struct SymbolLevels {
    pub p: u32,
    pub label: String,
    pub tables: Vec<ModularSymbolTable>,
    values: Vec<Vec<Option<BigRational>>>,
}

impl SymbolLevels {
    pub fn build(ctx: &mut SymbolContext, n: u32, store: &SymbolStore) -> Result<Self> {
        let tables = (0..=n).map(|k| ctx.table(k, store)).collect::<Result<Vec<_>>>()?;
        Self::from_tables(ctx.p, &ctx.label, tables)
    }

    pub fn from_tables(p: u32, label: &str, tables: Vec<ModularSymbolTable>) -> Result<Self> {
        let mut values = Vec::new();
        for (k, t) in tables.iter().enumerate() {
            if t.level as usize != k || t.p != p {
                return Err(Error::Invalid(format!("symbol table {k} is for level {} and p = {}", t.level, t.p)));
            }
            let m = (p as usize).pow(k as u32);
            let mut row = vec![None; m];
            for (a, v) in t.parsed()? {
                *row.get_mut(a as usize).ok_or_else(|| Error::Invalid(format!("entry {a} out of range at level {k}")))? = Some(v);
            }
            values.push(row);
        }
        Ok(SymbolLevels { p, label: label.to_string(), tables, values })
    }

    pub fn top(&self) -> u32 {
        self.values.len() as u32 - 1
    }

    /// [b/pᵏ]⁺ for any integer b; k ≤ 0 gives [0]⁺.
    pub fn get(&self, b: &BigInt, k: i64) -> Result<BigRational> {
        let p = BigInt::from(self.p);
        let (mut b, mut k) = (b.clone(), k);
        while k > 0 && (&b % &p).is_zero() {
            b /= &p;
            k -= 1;
        }
        if k <= 0 {
            return self.values[0][0].clone().ok_or_else(|| Error::Invalid("missing [0]".into()));
        }
        let m = p.pow(k as u32);
        let a = b.mod_floor(&m).to_usize().unwrap();
        self.values
            .get(k as usize)
            .and_then(|row| row[a].clone())
            .ok_or_else(|| Error::Invalid(format!("[{a}/{m}] is beyond the computed levels")))
    }

    /// min(0, least valuation of a computed symbol), in whole units.
    pub fn valuation_floor(&self) -> i64 {
        let p = self.p;
        self.values.iter().flatten().flatten().filter(|v| !v.is_zero()).map(|v| vp_rat(v, p)).min().unwrap_or(0).min(0)
    }

    /// μ_α(b + pᵏZ_p) = α^{−k}[b/pᵏ]⁺ − α^{−(k+1)}[b/p^{k−1}]⁺.
    pub fn measure(&self, b: &BigInt, k: u32) -> Result<QuadRational> {
        let alpha = QuadRational::sqrt_neg_p(self.p);
        let hi = self.get(b, k as i64)?;
        let lo = self.get(b, k as i64 - 1)?;
        Ok(&alpha.powi(-(k as i64)) * &QuadRational::rational(hi) - &alpha.powi(-(k as i64) - 1) * &QuadRational::rational(lo))
    }
}

fn pow_mod(b: u64, mut e: u64, m: u64) -> u64 {
    let (mut r, mut b) = (1u128, b as u128 % m as u128);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m as u128;
        }
        b = b * b % m as u128;
        e >>= 1;
    }
    r as u64
}

/// ℓ(a) ∈ [0, p^{n−1}) with ⟨a⟩ ≡ (1+p)^ℓ (mod pⁿ), for every unit a mod pⁿ.
pub fn cyclotomic_exponents(p: u32, n: u32) -> Vec<Option<u32>> {
    let m = (p as u64).pow(n);
    let order = (p as u64).pow(n - 1);
    let mut dlog = vec![None; m as usize];
    let mut g = 1u64;
    for l in 0..order {
        dlog[g as usize] = Some(l as u32);
        g = g * (1 + p as u64) % m;
    }
    (0..m)
        .map(|a| {
            if a % p as u64 == 0 {
                return None;
            }
            let teich = pow_mod(a, order, m);
            let inv = crate::curve::inv_mod(teich as i64, m as i64) as u64;
            dlog[(a as u128 * inv as u128 % m as u128) as usize]
        })
        .collect()
}

fn floor_log(p: u32, j: usize) -> i64 {
    let (mut k, mut t) = (0, j);
    while t >= p as usize {
        t /= p as usize;
        k += 1;
    }
    k
}

/// Certified absolute precision (half-units) of X^j in the level-n Riemann
/// sum. The constant term is exact; `sym_floor` is the least symbol valuation.
pub fn coefficient_precision(p: u32, n: u32, j: usize, sym_floor: i64) -> Option<HalfInt> {
    if j == 0 {
        return None;
    }
    let e = n as i64 - 3 - 2 * floor_log(p, j) - i64::from(j >= p as usize) + 2 * sym_floor;
    Some(HalfInt(e))
}

/// Least level at which X^j is certified to absolute precision `target`.
pub fn required_level(p: u32, j: usize, target: HalfInt, sym_floor: i64) -> u32 {
    let mut n = 2;
    while coefficient_precision(p, n, j, sym_floor).is_some_and(|e| e < target) {
        n += 1;
    }
    n
}

/// L_α at level n: exact Riemann sum plus its per-coefficient ledger.
#[derive(Clone, Debug)]
pub struct LAlpha {
    pub p: u32,
    pub n: u32,
    pub exact: TruncatedSeries<QuadRational>,
    /// None for exact coefficients.
    pub ledger: Vec<Option<HalfInt>>,
    pub series: TruncatedSeries<PadicElement>,
}

impl LAlpha {
    pub fn beta(&self) -> TruncatedSeries<PadicElement> {
        self.series.conj()
    }

    /// Refuses when X^j is not certified to `target`.
    pub fn require(&self, j: usize, target: HalfInt, sym_floor: i64) -> Result<()> {
        match self.ledger.get(j).copied().flatten() {
            Some(e) if e < target => Err(Error::Level { have: self.n, need: required_level(self.p, j, target, sym_floor) }),
            _ => Ok(()),
        }
    }
}

/// Σ_{a ∈ (Z/pⁿ)^×} μ_α(a + pⁿZ_p)·(1+X)^{ℓ(a)}, truncated at X^xtrunc.
pub fn lp_alpha(symbols: &SymbolLevels, n: u32, xtrunc: usize) -> Result<LAlpha> {
    let p = symbols.p;
    if n < 2 {
        return Err(Error::Invalid("level exponent must be at least 2".into()));
    }
    if symbols.top() < n {
        return Err(Error::Level { have: symbols.top(), need: n });
    }
    let exps = cyclotomic_exponents(p, n);
    let order = (p as usize).pow(n - 1);
    // rational weights of α^{−n} and α^{−(n+1)} per exponent
    let mut hi = vec![BigRational::zero(); order];
    let mut lo = vec![BigRational::zero(); order];
    for (a, l) in exps.iter().enumerate() {
        let Some(l) = l else { continue };
        let b = BigInt::from(a);
        hi[*l as usize] += symbols.get(&b, n as i64)?;
        lo[*l as usize] += symbols.get(&b, n as i64 - 1)?;
    }
    let mut sum_hi = vec![BigRational::zero(); xtrunc];
    let mut sum_lo = vec![BigRational::zero(); xtrunc];
    for l in 0..order {
        if hi[l].is_zero() && lo[l].is_zero() {
            continue;
        }
        for (j, c) in binomials(&BigInt::from(l), xtrunc).into_iter().enumerate() {
            if c.is_zero() {
                break;
            }
            let c = BigRational::from_integer(c);
            sum_hi[j] += &hi[l] * &c;
            sum_lo[j] += &lo[l] * &c;
        }
    }
    let alpha = QuadRational::sqrt_neg_p(p);
    let (ah, al) = (alpha.powi(-(n as i64)), alpha.powi(-(n as i64) - 1));
    let coeffs: Vec<QuadRational> = (0..xtrunc)
        .map(|j| &ah * &QuadRational::rational(sum_hi[j].clone()) - &al * &QuadRational::rational(sum_lo[j].clone()))
        .collect();
    let floor = symbols.valuation_floor();
    let ledger: Vec<Option<HalfInt>> = (0..xtrunc).map(|j| coefficient_precision(p, n, j, floor)).collect();
    let series = TruncatedSeries::new(
        coeffs
            .iter()
            .zip(&ledger)
            .map(|(c, e)| {
                let x = PadicElement::exact(c.clone());
                match e {
                    Some(e) => x.with_precision(p, *e),
                    None => x,
                }
            })
            .collect(),
        xtrunc,
    );
    Ok(LAlpha { p, n, exact: TruncatedSeries::new(coeffs, xtrunc), ledger, series })
}

/// (L⁻, L⁺) with (L⁻, L⁺)·M_log = (L_α, L_β).
#[derive(Clone, Debug)]
pub struct SignedPair {
    pub minus: TruncatedSeries<PadicElement>,
    pub plus: TruncatedSeries<PadicElement>,
    /// Level exponent of the Riemann sums, if built from symbols.
    pub level: Option<u32>,
}

impl SignedPair {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "level": self.level,
            "minus": self.minus.to_json(),
            "plus": self.plus.to_json(),
        })
    }
}

/// Working precision for the half-logarithms: a few digits beyond the best
/// coefficient of the inputs.
pub fn log_target(l_alpha: &TruncatedSeries<PadicElement>, fallback: i64) -> i64 {
    l_alpha.coeffs().iter().filter_map(|c| c.abs_precision()).map(|h| h.ceil()).max().unwrap_or(fallback) + 4
}

/// L⁺ = (L_α − L_β)/((α − β)·log⁻), L⁻ = (βL_α − αL_β)/((β − α)·log⁺).
pub fn signed_decompose(
    l_alpha: &TruncatedSeries<PadicElement>,
    l_beta: &TruncatedSeries<PadicElement>,
    logm: &LogMatrix,
) -> Result<SignedPair> {
    let p = logm.p;
    let trunc = l_alpha.trunc_order().min(l_beta.trunc_order());
    for j in 0..trunc {
        if !l_beta.coeff(j).agrees_with(&l_alpha.coeff(j).conj()) {
            return Err(Error::Invalid(format!("inconsistent input: L_β is not the conjugate of L_α at X^{j}")));
        }
    }
    let alpha = PadicElement::sqrt_neg_p(p);
    let beta = -alpha.clone();
    let diff = alpha.clone() - &beta;
    let plus = l_alpha.sub(l_beta).divide(&logm.log_minus.scale(&diff))?;
    let minus = l_alpha.scale(&beta).sub(&l_beta.scale(&alpha)).divide(&logm.log_plus.scale(&-diff))?;
    for (name, s) in [("L⁺", &plus), ("L⁻", &minus)] {
        for (j, c) in s.coeffs().iter().enumerate() {
            if c.im_part().is_certified_nonzero() {
                return Err(Error::Invalid(format!("inconsistent input: {name} has a nonzero imaginary part at X^{j}")));
            }
        }
    }
    Ok(SignedPair { minus: minus.map(|c| c.re_part()), plus: plus.map(|c| c.re_part()), level: None })
}

/// Coefficients of (L⁻, L⁺)·M_log that disagree with (L_α, L_β) at their precision.
pub fn round_trip_mismatches(
    pair: &SignedPair,
    l_alpha: &TruncatedSeries<PadicElement>,
    l_beta: &TruncatedSeries<PadicElement>,
    logm: &LogMatrix,
) -> Vec<usize> {
    let (a, b) = logm.apply(&pair.minus, &pair.plus);
    let trunc = a.trunc_order().min(l_alpha.trunc_order());
    (0..trunc).filter(|&j| !a.coeff(j).agrees_with(l_alpha.coeff(j)) || !b.coeff(j).agrees_with(l_beta.coeff(j))).collect()
}

/// Signed pair of a fixture at level n from its symbol tables.
pub fn signed_from_symbols(symbols: &SymbolLevels, n: u32, xtrunc: usize) -> Result<(LAlpha, SignedPair)> {
    let la = lp_alpha(symbols, n, xtrunc)?;
    let logm = LogMatrix::new(symbols.p, xtrunc, log_target(&la.series, n as i64))?;
    let mut pair = signed_decompose(&la.series, &la.beta(), &logm)?;
    pair.level = Some(n);
    Ok((la, pair))
}
