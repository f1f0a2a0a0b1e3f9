//! End-to-end check of the signed BSD-type statements at the level of
//! p-adic valuations, with the signed p-adic L-functions standing in for the
//! characteristic series of the signed Selmer groups.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::curve::CurveFixture;
use crate::dieudonne::DieudonneData;
use crate::error::{Error, Result};
use crate::heights::{reg_pm, strict_mw, HeightContext};
use crate::lfunction::{round_trip_mismatches, signed_from_symbols, log_target, LAlpha, SignedPair, SymbolContext, SymbolLevels, SymbolStore};
use crate::padic::{HalfInt, PadicElement, UnitVerdict, Valuation};
use crate::quad::{vp_int, QuadRational};
use crate::series::LogMatrix;

pub const REPORT_SCHEMA: &str = "ssbsd-verification-report/1";

pub const SUBSTITUTION: &str = "characteristic series of the signed Selmer groups replaced by the signed p-adic L-functions L_p^+ and L_p^- (equivalent under the signed main conjecture)";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Undecidable,
    /// Reported but not part of the outcome.
    Info,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub verdict: Verdict,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub required_level: Option<u32>,
}

impl Check {
    fn new(verdict: Verdict, detail: impl Into<String>) -> Self {
        Check { verdict, detail: detail.into(), required_level: None }
    }
}

/// ord_X as a certified value or a lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Order {
    pub at_least: usize,
    pub certified: bool,
}

impl Serialize for Order {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.certified {
            s.serialize_str(&self.at_least.to_string())
        } else {
            s.serialize_str(&format!(">={}", self.at_least))
        }
    }
}

fn order_of(series: &crate::series::TruncatedSeries<PadicElement>) -> Order {
    for (i, c) in series.coeffs().iter().enumerate() {
        match c.valuation() {
            Valuation::Infinite => continue,
            Valuation::Exact(_) => return Order { at_least: i, certified: true },
            Valuation::AtLeast(_) => return Order { at_least: i, certified: false },
        }
    }
    Order { at_least: series.trunc_order(), certified: false }
}

/// (ord₊, ord₋, ρ, verdict on ρ ≥ r).
pub fn check_order(sp: &SignedPair, r: usize) -> (Order, Order, Order, Check) {
    let (op, om) = (order_of(&sp.plus), order_of(&sp.minus));
    let lo = op.at_least.min(om.at_least);
    let certified = (op.certified && op.at_least == lo) || (om.certified && om.at_least == lo);
    let rho = Order { at_least: lo, certified };
    let check = if lo >= r {
        let eq = if certified && lo == r { "; rho = r certified" } else { "" };
        Check::new(Verdict::Pass, format!("rho >= {lo} >= r = {r}{eq}"))
    } else if certified {
        Check::new(Verdict::Fail, format!("rho = {lo} < r = {r}"))
    } else {
        Check::new(Verdict::Undecidable, format!("rho >= {lo}; a coefficient below X^{r} is zero only to working precision"))
    };
    (op, om, rho, check)
}

/// Ш, Tam and #E(Q)_tors as claimed by a fixture.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Invariants {
    pub sha: u64,
    pub tamagawa: u64,
    pub torsion: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mutation {
    Sha,
    Tamagawa,
    Torsion,
}

impl Invariants {
    pub fn of(fx: &CurveFixture) -> Self {
        Invariants { sha: fx.sha_order, tamagawa: fx.tamagawa_product, torsion: fx.torsion_order }
    }

    /// One invariant multiplied by p.
    pub fn mutated(&self, which: Mutation, p: u32) -> Self {
        let mut m = self.clone();
        match which {
            Mutation::Sha => m.sha *= p as u64,
            Mutation::Tamagawa => m.tamagawa *= p as u64,
            Mutation::Torsion => m.torsion *= p as u64,
        }
        m
    }

    pub fn ratio(&self) -> BigRational {
        BigRational::new(BigInt::from(self.sha) * BigInt::from(self.tamagawa), BigInt::from(self.torsion).pow(2))
    }
}

/// log_p κ(γ) for γ ↦ 1 + p.
pub fn log_kappa(p: u32, prec: i64) -> Result<PadicElement> {
    PadicElement::from_rational_mod(p, &BigRational::from_integer(BigInt::from(1 + p as i64)), HalfInt::int(prec)).log_p()
}

/// (R₊, R₋) = (log_p κ(γ))^{−r}·(Reg₊, Reg₋)·Ш·Tam/tors²; without the
/// regulator and logarithm factors when r = 0.
pub fn rhs_leading(p: u32, inv: &Invariants, regs: Option<(&PadicElement, &PadicElement)>, r: u32, prec: i64) -> Result<(PadicElement, PadicElement)> {
    let base = PadicElement::exact(QuadRational::rational(inv.ratio()).with_prime(p));
    if r == 0 {
        return Ok((base.clone(), base));
    }
    let (rp, rm) = regs.ok_or_else(|| Error::Invalid("regulators are required for r >= 1".into()))?;
    let lk = log_kappa(p, prec)?.pow(r);
    Ok((base.clone().checked_div(&lk)? * rp, base.checked_div(&lk)? * rm))
}

/// Compares the X^r coefficient of one signed series with its prediction.
/// Passing needs the valuation decided with `digits` certified digits.
fn compare_one(series: &crate::series::TruncatedSeries<PadicElement>, rhs: &PadicElement, r: usize, digits: i64, n: Option<u32>) -> Check {
    if r >= series.trunc_order() {
        return Check::new(Verdict::Undecidable, format!("X-truncation {} does not reach X^{r}", series.trunc_order()));
    }
    let c = series.coeff(r);
    let want = rhs.valuation();
    let got = c.valuation();
    let need_level = |target: HalfInt| -> Option<u32> {
        // each level adds one half-unit of absolute precision
        let have = c.abs_precision()?;
        n.map(|n| n + (target - have).twice().max(1) as u32)
    };
    match c.unit_equal(rhs) {
        UnitVerdict::Unequal => Check::new(Verdict::Fail, format!("v(L*) = {got}, predicted {want}")),
        UnitVerdict::EqualUpToUnit => {
            let ok = match (got, c.abs_precision()) {
                (Valuation::Exact(v), Some(prec)) => prec - v >= HalfInt::int(digits),
                _ => true,
            };
            if ok {
                Check::new(Verdict::Pass, format!("v(L*) = {got} = predicted {want}"))
            } else {
                let mut ch = Check::new(Verdict::Undecidable, format!("v(L*) = {got} = predicted {want}, fewer than {digits} certified digits"));
                if let Valuation::Exact(v) = got {
                    ch.required_level = need_level(v + HalfInt::int(digits));
                }
                ch
            }
        }
        UnitVerdict::Undecidable => {
            let mut ch = Check::new(Verdict::Undecidable, format!("v(L*) {got}, predicted {want}"));
            if let Valuation::Exact(w) = want {
                ch.required_level = need_level(w + HalfInt::int(digits));
            }
            ch
        }
    }
}

/// Per sign (plus, minus): valuation of the X^r coefficient against R±.
pub fn compare_leading(sp: &SignedPair, rhs: &(PadicElement, PadicElement), r: usize, digits: i64) -> (Check, Check) {
    (compare_one(&sp.plus, &rhs.0, r, digits, sp.level), compare_one(&sp.minus, &rhs.1, r, digits, sp.level))
}

/// χ = p^{v(leading)}, returned as the exponent.
pub fn euler_char(leading: &PadicElement) -> Result<HalfInt> {
    leading.valuation().decided().ok_or_else(|| Error::Undecidable(format!("valuation of the leading coefficient {leading}")))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignPair<T> {
    pub plus: T,
    pub minus: T,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RhsBreakdown {
    pub log_kappa_power: String,
    pub reg_plus: String,
    pub reg_minus: String,
    pub sha: i64,
    pub tamagawa: i64,
    pub torsion_squared: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableSummary {
    pub level: u32,
    pub digest: String,
    pub terms: usize,
    pub check_terms: usize,
    pub digits: u32,
    pub denominator_bound: u64,
    pub max_residual: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Ledger {
    pub levels_tried: Vec<u32>,
    pub l_alpha: Vec<String>,
    pub plus: Vec<String>,
    pub minus: Vec<String>,
    pub symbol_floor: i64,
    pub height_precision: i64,
    pub symbol_tables: Vec<TableSummary>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Undecidable,
    HypothesisNotMet,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 2,
            Outcome::Undecidable => 3,
            Outcome::HypothesisNotMet => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Hypothesis {
    pub name: String,
    pub met: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema: String,
    pub substitution: String,
    pub label: String,
    pub p: u32,
    pub r: u32,
    pub invariants: Invariants,
    pub outcome: Outcome,
    pub hypotheses: Vec<Hypothesis>,
    pub level: Option<u32>,
    pub xtrunc: usize,
    pub ord_plus: Option<Order>,
    pub ord_minus: Option<Order>,
    pub rho: Option<Order>,
    pub leading_valuations: Option<SignPair<String>>,
    pub rhs_valuations: Option<SignPair<String>>,
    pub rhs_breakdown: Option<RhsBreakdown>,
    /// Exponents k of χ± = p^k.
    pub euler_char_pm: Option<SignPair<String>>,
    pub checks: BTreeMap<String, Check>,
    pub ledger: Option<Ledger>,
    pub series: Option<serde_json::Value>,
}

impl VerificationReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report json") + "\n"
    }

    pub fn exit_code(&self) -> i32 {
        self.outcome.exit_code()
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Fixed level exponent; otherwise levels are raised until decided.
    pub level: Option<u32>,
    pub min_level: u32,
    pub max_level: u32,
    pub xtrunc: usize,
    /// Height precision; the fixture's precision when absent.
    pub prec: Option<i64>,
    pub store: SymbolStore,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { level: None, min_level: 3, max_level: 6, xtrunc: 6, prec: None, store: SymbolStore::default() }
    }
}

struct HeightData {
    reg_plus: PadicElement,
    reg_minus: PadicElement,
    gram_symmetric: bool,
}

/// Heights and symbol tables of one fixture, shared by reports on its
/// claimed invariants and on mutations of them.
pub struct Prepared {
    fx: CurveFixture,
    prec: i64,
    hypotheses: Vec<Hypothesis>,
    heights: Option<HeightData>,
    symbols: Option<(SymbolContext, SymbolLevels)>,
    store: SymbolStore,
}

fn hypothesis(name: &str, met: bool, detail: impl Into<String>) -> Hypothesis {
    Hypothesis { name: name.into(), met, detail: detail.into() }
}

/// Runs the hypothesis checks and, if they hold, the height computations.
pub fn prepare(fx: &CurveFixture, opts: &VerifyOptions) -> Result<Prepared> {
    let prec = opts.prec.unwrap_or(fx.precision);
    let mut prepared = Prepared { fx: fx.clone(), prec, hypotheses: Vec::new(), heights: None, symbols: None, store: opts.store.clone() };
    match fx.validate() {
        Ok(()) => prepared.hypotheses.push(hypothesis("good supersingular reduction with a_p = 0", true, format!("p = {}", fx.p))),
        Err(Error::Hypothesis(m)) => {
            prepared.hypotheses.push(hypothesis("good supersingular reduction with a_p = 0", false, m));
            return Ok(prepared);
        }
        Err(e) => return Err(e),
    }
    match SymbolContext::from_fixture(fx) {
        Ok(mut ctx) => {
            prepared.hypotheses.push(hypothesis("semistable conductor", true, format!("W_N sign {}", ctx.epsilon)));
            let levels = SymbolLevels::build(&mut ctx, 0, &opts.store)?;
            prepared.symbols = Some((ctx, levels));
        }
        Err(Error::Hypothesis(m)) => {
            prepared.hypotheses.push(hypothesis("semistable conductor", false, m));
            return Ok(prepared);
        }
        Err(e) => return Err(e),
    }
    if fx.rank == 0 {
        return Ok(prepared);
    }
    let hc = HeightContext::from_fixture(fx, prec)?;
    let gens = fx.generators()?;
    let gram = hc.gram(&gens)?;
    let logs = gens.iter().map(|g| hc.formal_log(g)).collect::<Result<Vec<_>>>()?;
    match strict_mw(&logs, &gram.eta) {
        Ok(s) if s.regulator.is_certified_nonzero() => {
            prepared.hypotheses.push(hypothesis("Reg_p^str != 0", true, format!("strict rank {}, v(Reg_p^str) = {}", s.strict_rank, val_string(&s.regulator, fx.p))))
        }
        Ok(s) => {
            prepared.hypotheses.push(hypothesis("Reg_p^str != 0", false, format!("Reg_p^str = {}", s.regulator)));
            return Ok(prepared);
        }
        Err(e) => {
            prepared.hypotheses.push(hypothesis("Reg_p^str != 0", false, e.to_string()));
            return Ok(prepared);
        }
    }
    let d = DieudonneData::from_fixture(fx)?;
    let (reg_plus, reg_minus) = reg_pm(&d, &gram, 1)?;
    let nonsingular = reg_plus.is_certified_nonzero() && reg_minus.is_certified_nonzero();
    prepared.hypotheses.push(hypothesis(
        "height pairings at N+ and N- nonsingular",
        nonsingular,
        format!("v(Reg_N+) = {}, v(Reg_N-) = {}", val_string(&reg_plus, fx.p), val_string(&reg_minus, fx.p)),
    ));
    if nonsingular {
        prepared.heights = Some(HeightData { reg_plus, reg_minus, gram_symmetric: gram.is_symmetric() });
    }
    Ok(prepared)
}

/// Exact elements built without a prime (empty products) get one attached.
fn at_p(x: &PadicElement, p: u32) -> PadicElement {
    match x.as_exact() {
        Some(q) => PadicElement::exact(q.clone().with_prime(p)),
        None => x.clone(),
    }
}

fn val_string(x: &PadicElement, p: u32) -> String {
    at_p(x, p).valuation().to_string()
}

impl Prepared {
    pub fn fixture(&self) -> &CurveFixture {
        &self.fx
    }

    pub fn hypotheses_met(&self) -> bool {
        self.hypotheses.iter().all(|h| h.met)
    }

    fn levels_up_to(&mut self, n: u32) -> Result<&SymbolLevels> {
        let (ctx, levels) = self.symbols.as_mut().ok_or_else(|| Error::Invalid("no symbol context".into()))?;
        if levels.top() < n {
            *levels = SymbolLevels::build(ctx, n, &self.store)?;
        }
        Ok(levels)
    }

    fn bare_report(&self, inv: &Invariants, xtrunc: usize) -> VerificationReport {
        VerificationReport {
            schema: REPORT_SCHEMA.into(),
            substitution: SUBSTITUTION.into(),
            label: self.fx.label.clone(),
            p: self.fx.p,
            r: self.fx.rank,
            invariants: inv.clone(),
            outcome: Outcome::HypothesisNotMet,
            hypotheses: self.hypotheses.clone(),
            level: None,
            xtrunc,
            ord_plus: None,
            ord_minus: None,
            rho: None,
            leading_valuations: None,
            rhs_valuations: None,
            rhs_breakdown: None,
            euler_char_pm: None,
            checks: BTreeMap::new(),
            ledger: None,
            series: None,
        }
    }

    /// The report for the given invariants (the fixture's, or a mutation).
    pub fn report(&mut self, inv: &Invariants, opts: &VerifyOptions) -> Result<VerificationReport> {
        let mut rep = self.bare_report(inv, opts.xtrunc);
        if !self.hypotheses_met() {
            return Ok(rep);
        }
        let p = self.fx.p;
        let r = self.fx.rank;
        let regs = self.heights.as_ref().map(|h| (&h.reg_plus, &h.reg_minus));
        let rhs = rhs_leading(p, inv, regs, r, self.prec)?;
        let digits = if r == 0 { 2 } else { 1 };
        let xtrunc = opts.xtrunc.max(r as usize + 2);
        rep.xtrunc = xtrunc;
        let levels: Vec<u32> = match opts.level {
            Some(n) => vec![n],
            None => (opts.min_level..=opts.max_level.max(opts.min_level)).collect(),
        };
        let mut tried = Vec::new();
        let mut last = None;
        for n in levels {
            tried.push(n);
            let lv = self.levels_up_to(n)?;
            let (la, pair) = signed_from_symbols(lv, n, xtrunc)?;
            let (_, _, _, order) = check_order(&pair, r as usize);
            let (cp, cm) = compare_leading(&pair, &rhs, r as usize, digits);
            let checks = [&order, &cp, &cm];
            let decided = checks.iter().all(|c| c.verdict != Verdict::Undecidable) || checks.iter().any(|c| c.verdict == Verdict::Fail);
            last = Some((la, pair));
            if decided {
                break;
            }
        }
        let (la, pair) = last.ok_or_else(|| Error::Invalid("empty level range".into()))?;
        let n = pair.level.unwrap_or(0);
        rep.level = Some(n);
        let lv = self.levels_up_to(n)?.clone();
        self.fill(&mut rep, inv, &rhs, &la, &pair, &lv, digits, tried)?;
        Ok(rep)
    }

    #[allow(clippy::too_many_arguments)]
    fn fill(
        &mut self,
        rep: &mut VerificationReport,
        inv: &Invariants,
        rhs: &(PadicElement, PadicElement),
        la: &LAlpha,
        pair: &SignedPair,
        lv: &SymbolLevels,
        digits: i64,
        tried: Vec<u32>,
    ) -> Result<()> {
        let p = self.fx.p;
        let r = self.fx.rank as usize;
        let (op, om, rho, order) = check_order(pair, r);
        rep.ord_plus = Some(op);
        rep.ord_minus = Some(om);
        rep.rho = Some(rho);
        rep.checks.insert("order".into(), order);
        let eq_r = if rho.certified && rho.at_least == r {
            Check::new(Verdict::Info, "rho = r certified")
        } else {
            Check::new(Verdict::Info, format!("rho = r not certified (rho {})", serde_json::to_string(&rho).unwrap_or_default()))
        };
        rep.checks.insert("order_equals_rank".into(), eq_r);
        let same = if op.certified && om.certified {
            Check::new(Verdict::Info, if op.at_least == om.at_least { "ord+ = ord-" } else { "ord+ != ord-" })
        } else {
            Check::new(Verdict::Info, "ord+ or ord- not certified")
        };
        rep.checks.insert("order_sign_independence".into(), same);

        let (cp, cm) = compare_leading(pair, rhs, r, digits);
        rep.checks.insert("leading_plus".into(), cp);
        rep.checks.insert("leading_minus".into(), cm);
        let lead = |s: &crate::series::TruncatedSeries<PadicElement>| if r < s.trunc_order() { s.coeff(r).clone() } else { PadicElement::zero() };
        let (lp, lm) = (at_p(&lead(&pair.plus), p), at_p(&lead(&pair.minus), p));
        rep.leading_valuations = Some(SignPair { plus: val_string(&lp, p), minus: val_string(&lm, p) });
        rep.rhs_valuations = Some(SignPair { plus: val_string(&rhs.0, p), minus: val_string(&rhs.1, p) });
        let v = |n: u64| vp_int(&BigInt::from(n), p);
        rep.rhs_breakdown = Some(RhsBreakdown {
            log_kappa_power: if r == 0 { "0".into() } else { format!("-{r}") },
            reg_plus: self.heights.as_ref().map(|h| val_string(&h.reg_plus, p)).unwrap_or_else(|| "none".into()),
            reg_minus: self.heights.as_ref().map(|h| val_string(&h.reg_minus, p)).unwrap_or_else(|| "none".into()),
            sha: v(inv.sha),
            tamagawa: v(inv.tamagawa),
            torsion_squared: 2 * v(inv.torsion),
        });
        let chi = |x: &PadicElement| euler_char(x).map(|e| e.to_string()).unwrap_or_else(|_| "undecided".into());
        rep.euler_char_pm = Some(SignPair { plus: chi(&lp), minus: chi(&lm) });

        if r == 0 {
            let target = vp_int(&BigInt::from(inv.sha), p) + vp_int(&BigInt::from(inv.tamagawa), p) - 2 * vp_int(&BigInt::from(inv.torsion), p);
            let target = HalfInt::int(target);
            let check = match (euler_char(&lp), euler_char(&lm)) {
                (Ok(a), Ok(b)) if a == target && b == target => Check::new(Verdict::Pass, format!("chi+ = chi- = p^{target}")),
                (Ok(a), Ok(b)) => Check::new(Verdict::Fail, format!("chi+ = p^{a}, chi- = p^{b}, p-part of Sha*Tam/tors^2 = p^{target}")),
                _ => Check::new(Verdict::Undecidable, "leading valuation undecided"),
            };
            rep.checks.insert("euler_characteristic".into(), check);

            let (ctx, _) = self.symbols.as_mut().expect("symbols");
            let central = ctx.modular_symbol(0, 1)?;
            let alpha = QuadRational::sqrt_neg_p(p);
            let factor = (QuadRational::one() - alpha.inv().expect("α ≠ 0")).pow(2);
            let want = &factor * &QuadRational::rational(central.clone());
            let got = la.series.coeff(0);
            let check = if got.agrees_with(&PadicElement::exact(want.clone())) {
                Check::new(Verdict::Pass, format!("L_alpha(0) = (1 - 1/alpha)^2 * {central}"))
            } else {
                Check::new(Verdict::Fail, format!("L_alpha(0) = {got}, expected {want}"))
            };
            rep.checks.insert("interpolation".into(), check);
        }

        let mut negative = Vec::new();
        for (name, s) in [("plus", &pair.plus), ("minus", &pair.minus)] {
            for (j, c) in s.coeffs().iter().enumerate() {
                if let Valuation::Exact(v) = c.valuation() {
                    if v < HalfInt::int(0) {
                        negative.push(format!("{name} X^{j}: v = {v}"));
                    }
                }
            }
        }
        rep.checks.insert(
            "integrality".into(),
            if negative.is_empty() {
                Check::new(Verdict::Pass, "no certified coefficient has negative valuation")
            } else {
                Check::new(Verdict::Fail, negative.join(", "))
            },
        );

        let logm = LogMatrix::new(p, pair.plus.trunc_order(), log_target(&la.series, la.n as i64))?;
        let bad = round_trip_mismatches(pair, &la.series, &la.beta(), &logm);
        rep.checks.insert(
            "round_trip".into(),
            if bad.is_empty() {
                Check::new(Verdict::Pass, "(L-, L+) * M_log = (L_alpha, L_beta) within precision")
            } else {
                Check::new(Verdict::Fail, format!("mismatch at X^{bad:?}"))
            },
        );
        if let Some(h) = &self.heights {
            rep.checks.insert(
                "gram_symmetry".into(),
                Check::new(if h.gram_symmetric { Verdict::Pass } else { Verdict::Fail }, "height Gram matrices symmetric"),
            );
        }

        let prec_strings = |s: &crate::series::TruncatedSeries<PadicElement>| {
            s.coeffs().iter().map(|c| c.abs_precision().map(|h| h.to_string()).unwrap_or_else(|| "exact".into())).collect()
        };
        rep.ledger = Some(Ledger {
            levels_tried: tried,
            l_alpha: la.ledger.iter().map(|e| e.map(|h| h.to_string()).unwrap_or_else(|| "exact".into())).collect(),
            plus: prec_strings(&pair.plus),
            minus: prec_strings(&pair.minus),
            symbol_floor: lv.valuation_floor(),
            height_precision: self.prec,
            symbol_tables: lv
                .tables
                .iter()
                .map(|t| TableSummary {
                    level: t.level,
                    digest: t.digest.clone(),
                    terms: t.params.terms,
                    check_terms: t.params.check_terms,
                    digits: t.params.digits,
                    denominator_bound: t.params.denominator_bound,
                    max_residual: t.params.max_residual.clone(),
                })
                .collect(),
        });
        rep.series = Some(pair.to_json());
        rep.outcome = outcome_of(&rep.checks);
        Ok(())
    }
}

fn outcome_of(checks: &BTreeMap<String, Check>) -> Outcome {
    let verdicts: Vec<Verdict> = checks.values().map(|c| c.verdict).collect();
    if verdicts.contains(&Verdict::Fail) {
        Outcome::Fail
    } else if verdicts.contains(&Verdict::Undecidable) {
        Outcome::Undecidable
    } else {
        Outcome::Pass
    }
}

/// Full pipeline on the fixture's own invariants.
pub fn verify(fx: &CurveFixture, opts: &VerifyOptions) -> Result<VerificationReport> {
    let mut prepared = prepare(fx, opts)?;
    prepared.report(&Invariants::of(fx), opts)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::TruncatedSeries;

    fn fixture(label: &str) -> CurveFixture {
        CurveFixture::load(format!("{}/../../fixtures/{label}.json", env!("CARGO_MANIFEST_DIR"))).unwrap()
    }

    fn x_pow(p: u32, k: usize, trunc: usize) -> TruncatedSeries<PadicElement> {
        TruncatedSeries::<PadicElement>::x_power(k, trunc).map(|c| at_p(c, p))
    }

    #[test]
    fn synthetic_order() {
        let sp = SignedPair { plus: x_pow(5, 2, 6), minus: x_pow(5, 3, 6), level: None };
        let (op, om, rho, check) = check_order(&sp, 2);
        assert_eq!(op, Order { at_least: 2, certified: true });
        assert_eq!(om, Order { at_least: 3, certified: true });
        assert_eq!(rho, Order { at_least: 2, certified: true });
        assert_eq!(check.verdict, Verdict::Pass);
        assert_eq!(check_order(&sp, 3).3.verdict, Verdict::Fail);

        // a coefficient that is zero only to working precision leaves ρ open
        let fuzzy = TruncatedSeries::new(vec![PadicElement::zero_mod(5, HalfInt::int(4)), PadicElement::from_i64(1)], 4);
        let sp = SignedPair { plus: fuzzy.clone(), minus: fuzzy, level: Some(3) };
        let (_, _, rho, check) = check_order(&sp, 1);
        assert_eq!(rho, Order { at_least: 0, certified: false });
        assert_eq!(check.verdict, Verdict::Undecidable);
        assert_eq!(serde_json::to_string(&rho).unwrap(), "\">=0\"");
    }

    #[test]
    fn euler_characteristic_exponents() {
        let unit = PadicElement::from_rational_mod(5, &BigRational::new(3.into(), 7.into()), HalfInt::int(6));
        assert_eq!(euler_char(&unit).unwrap(), HalfInt::int(0));
        let sq = PadicElement::from_rational_mod(5, &BigRational::from_integer(BigInt::from(50)), HalfInt::int(6));
        assert_eq!(euler_char(&sq).unwrap(), HalfInt::int(2));
        assert!(euler_char(&PadicElement::zero_mod(5, HalfInt::int(3))).is_err());
    }

    #[test]
    fn rank_zero_fixtures_pass() {
        for label in ["14a1", "15a1", "34a1", "37b1"] {
            let rep = verify(&fixture(label), &VerifyOptions::default()).unwrap();
            assert_eq!(rep.outcome, Outcome::Pass, "{label}: {:#?}", rep.checks);
            assert_eq!(rep.level, Some(3));
            assert_eq!(rep.rho, Some(Order { at_least: 0, certified: true }));
            for c in ["euler_characteristic", "interpolation", "integrality", "round_trip", "leading_plus", "leading_minus"] {
                assert_eq!(rep.checks[c].verdict, Verdict::Pass, "{label} {c}");
            }
        }
    }

    #[test]
    fn rank_one_at_level_four() {
        let opts = VerifyOptions { level: Some(4), ..Default::default() };
        let rep = verify(&fixture("53a1"), &opts).unwrap();
        assert_eq!(rep.outcome, Outcome::Pass, "{:#?}", rep.checks);
        assert_eq!(rep.rho, Some(Order { at_least: 1, certified: true }));
        let lead = rep.leading_valuations.clone().unwrap();
        assert_eq!(Some(&lead), rep.rhs_valuations.as_ref());
        assert_eq!(lead.plus, "0");
        assert_eq!(rep.exit_code(), 0);
    }

    #[test]
    fn mutated_invariants_fail() {
        for label in ["14a1", "53a1"] {
            let fx = fixture(label);
            let opts = VerifyOptions::default();
            let mut prepared = prepare(&fx, &opts).unwrap();
            let inv = Invariants::of(&fx);
            assert_eq!(prepared.report(&inv, &opts).unwrap().outcome, Outcome::Pass);
            for m in [Mutation::Sha, Mutation::Tamagawa, Mutation::Torsion] {
                let rep = prepared.report(&inv.mutated(m, fx.p), &opts).unwrap();
                assert_eq!(rep.outcome, Outcome::Fail, "{label} {m:?}");
                assert_eq!(rep.exit_code(), 2);
            }
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let fx = fixture("53a1");
        let dir = tempfile::tempdir().unwrap();
        let opts = VerifyOptions { store: SymbolStore::in_dir(dir.path()), ..Default::default() };
        let a = verify(&fx, &opts).unwrap().to_json_string();
        let b = verify(&fx, &opts).unwrap().to_json_string();
        let c = verify(&fx, &VerifyOptions::default()).unwrap().to_json_string();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn verdicts_are_monotone_in_precision() {
        let fx = fixture("43a1");
        let mut prepared = prepare(&fx, &VerifyOptions::default()).unwrap();
        let inv = Invariants::of(&fx);
        let mut seen: BTreeMap<String, Verdict> = BTreeMap::new();
        for n in 3..=5 {
            let rep = prepared.report(&inv, &VerifyOptions { level: Some(n), ..Default::default() }).unwrap();
            for (k, c) in &rep.checks {
                if let Some(prev) = seen.get(k) {
                    if *prev != Verdict::Undecidable {
                        assert_eq!(*prev, c.verdict, "{k} changed at n = {n}");
                    }
                }
                seen.insert(k.clone(), c.verdict);
            }
        }
        assert_eq!(seen["leading_plus"], Verdict::Pass);
    }

    #[test]
    fn starved_level_reports_requirement() {
        let opts = VerifyOptions { level: Some(3), ..Default::default() };
        let rep = verify(&fixture("43a1"), &opts).unwrap();
        assert_eq!(rep.outcome, Outcome::Undecidable);
        assert_eq!(rep.exit_code(), 3);
        let c = &rep.checks["leading_plus"];
        assert_eq!(c.verdict, Verdict::Undecidable);
        assert!(c.required_level.unwrap() > 3);
    }

    #[test]
    fn hypothesis_failures_stop_early() {
        let mut fx = fixture("14a1");
        fx.p = 3;
        let rep = verify(&fx, &VerifyOptions::default()).unwrap();
        assert_eq!(rep.outcome, Outcome::HypothesisNotMet);
        assert_eq!(rep.exit_code(), 4);
        assert!(rep.checks.is_empty());
    }
}
