//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

use std::time::{Duration, Instant};

use num_traits::{One, Zero};

use ssbsd::dieudonne::Vector;
use ssbsd::heights::{bernardi_sigma, sigma_ode_residual, HeightContext};
use ssbsd::selftest::{dieudonne_suite, log_matrix_suite};
use ssbsd::verifier::{prepare, Invariants, Mutation, Order, Outcome, VerificationReport, Verdict, VerifyOptions};
use ssbsd::{Curve, CurveFixture, HalfInt, PadicElement, Point};

const RANK_ZERO: [&str; 4] = ["14a1", "15a1", "34a1", "37b1"];
const RANK_ONE: [&str; 2] = ["53a1", "43a1"];

type Outcome_ = Result<String, String>;

fn fixture(label: &str) -> CurveFixture {
    CurveFixture::load(format!("{}/../../fixtures/{label}.json", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn within(t: Instant, budget: Duration) -> Result<Duration, String> {
    let e = t.elapsed();
    if e <= budget { Ok(e) } else { Err(format!("took {e:.1?}, budget {budget:?}")) }
}

fn identity_suite() -> Outcome_ {
    let t = Instant::now();
    let rep = dieudonne_suite(20, &[5, 7, 13], 20, 20);
    let e = within(t, Duration::from_secs(10))?;
    if !rep.passed() {
        return Err(format!("{} of {} cases: {:?}", rep.failures.len(), rep.cases, &rep.failures[..rep.failures.len().min(3)]));
    }
    Ok(format!("{} cases at N = 20, p in {{5, 7, 13}} x 20 data, {e:.1?}", rep.cases))
}

fn log_matrix() -> Outcome_ {
    let t = Instant::now();
    let rep = log_matrix_suite(20, &[5, 7, 13], 20, 10, 10);
    let e = within(t, Duration::from_secs(5))?;
    if !rep.passed() {
        return Err(format!("{:?}", rep.failures));
    }
    Ok(format!("{} cases, round trip mod p^18 to X^10, {e:.1?}", rep.cases))
}

fn close(a: &PadicElement, b: &PadicElement, p: u32, n: i64) -> bool {
    (a - b).with_precision(p, HalfInt::int(n)).is_zero()
}

fn heights_one(label: &str) -> Result<Duration, String> {
    let t = Instant::now();
    let fx = fixture(label);
    let n = fx.precision;
    let e = fx.curve();
    let (sigma, _) = bernardi_sigma(&e, 40).map_err(|x| x.to_string())?;
    let res = sigma_ode_residual(&e, &sigma).map_err(|x| x.to_string())?;
    if !res.coeffs().iter().all(|c| c.is_zero()) {
        return Err(format!("{label}: sigma residual nonzero"));
    }
    let ctx = HeightContext::from_fixture(&fx, n).map_err(|x| x.to_string())?;
    let (o, i) = (PadicElement::zero, PadicElement::one);
    let nus: [Vector<PadicElement>; 3] = [[i(), o()], [o(), i()], [i(), i()]];
    for g in fx.generators().map_err(|x| x.to_string())? {
        let base = ctx.local_heights(&g).map_err(|x| x.to_string())?;
        for k in [2i64, 3] {
            let hk = ctx.local_heights(&e.mul(k, &g)).map_err(|x| x.to_string())?;
            for nu in &nus {
                if !close(&hk.h(nu), &(&base.h(nu) * &PadicElement::from_i64(k * k)), fx.p, n - 2) {
                    return Err(format!("{label}: h({k}P) != {}h(P) mod p^{}", k * k, n - 2));
                }
            }
        }
    }
    let gens = fx.generators().map_err(|x| x.to_string())?;
    let mut pts = gens.clone();
    pts.extend(gens.iter().map(|g| e.mul(2, g)));
    if !ctx.gram(&pts).map_err(|x| x.to_string())?.is_symmetric() {
        return Err(format!("{label}: Gram matrix not symmetric"));
    }
    within(t, Duration::from_secs(120)).map_err(|m| format!("{label}: {m}"))
}

fn torsion_translation() -> Result<(), String> {
    // y² + xy = x³ − x has the 2-torsion point (0, 0) and P = (1, 0) of infinite order
    let e = Curve::new([1, 0, 0, -1, 0]);
    let rat = |n: i64| num_rational::BigRational::from_integer(n.into());
    let t = Point::new(rat(0), rat(0));
    let pt = Point::new(rat(1), rat(0));
    let ctx = HeightContext::new(e.clone(), 7, vec![5, 13], 12).map_err(|x| x.to_string())?;
    let a = ctx.local_heights(&pt).map_err(|x| x.to_string())?;
    let b = ctx.local_heights(&e.add(&pt, &t)).map_err(|x| x.to_string())?;
    if close(&a.h_omega, &b.h_omega, 7, 10) && close(&a.h_eta, &b.h_eta, 7, 10) {
        Ok(())
    } else {
        Err("h(P + T) != h(P)".into())
    }
}

fn heights() -> Outcome_ {
    let mut times = Vec::new();
    for label in RANK_ONE {
        times.push(format!("{label} {:.1?}", heights_one(label)?));
    }
    torsion_translation()?;
    Ok(format!("sigma residual 0 to z^40, quadratic mod p^(N-2), symmetric, torsion-invariant; {}", times.join(", ")))
}

struct Runs {
    reports: Vec<(VerificationReport, Duration)>,
    mutations: Vec<(String, Mutation, Outcome)>,
}

fn run_all() -> Runs {
    let mut reports = Vec::new();
    let mut mutations = Vec::new();
    for label in RANK_ZERO.iter().chain(RANK_ONE.iter()) {
        let fx = fixture(label);
        let opts = match *label {
            "53a1" => VerifyOptions { level: Some(4), ..Default::default() },
            l if RANK_ZERO.contains(&l) => VerifyOptions { level: Some(3), ..Default::default() },
            _ => VerifyOptions::default(),
        };
        let t = Instant::now();
        let mut prepared = prepare(&fx, &opts).unwrap();
        let inv = Invariants::of(&fx);
        let rep = prepared.report(&inv, &opts).unwrap();
        reports.push((rep, t.elapsed()));
        for m in [Mutation::Sha, Mutation::Tamagawa, Mutation::Torsion] {
            let rep = prepared.report(&inv.mutated(m, fx.p), &opts).unwrap();
            mutations.push((label.to_string(), m, rep.outcome));
        }
    }
    Runs { reports, mutations }
}

fn check(rep: &VerificationReport, name: &str) -> Result<(), String> {
    match rep.checks.get(name) {
        Some(c) if c.verdict == Verdict::Pass => Ok(()),
        Some(c) => Err(format!("{} {name}: {:?} ({})", rep.label, c.verdict, c.detail)),
        None => Err(format!("{} {name}: not run", rep.label)),
    }
}

fn end_to_end(runs: &Runs, r: u32, min_curves: usize, budget: Duration) -> Outcome_ {
    let exact = Some(Order { at_least: r as usize, certified: true });
    let mut done = Vec::new();
    for (rep, t) in runs.reports.iter().filter(|(rep, _)| rep.r == r) {
        if rep.outcome == Outcome::HypothesisNotMet {
            return Err(format!("{}: hypotheses not met", rep.label));
        }
        if rep.ord_plus != exact || rep.ord_minus != exact {
            return Err(format!("{}: ord+ {:?}, ord- {:?}", rep.label, rep.ord_plus, rep.ord_minus));
        }
        for c in ["order", "leading_plus", "leading_minus"] {
            check(rep, c)?;
        }
        if *t > budget {
            return Err(format!("{}: took {t:.1?}", rep.label));
        }
        let v = rep.leading_valuations.as_ref().unwrap();
        done.push(format!("{} n={} v={}/{} {t:.1?}", rep.label, rep.level.unwrap(), v.plus, v.minus));
    }
    if done.len() < min_curves {
        return Err(format!("only {} curves", done.len()));
    }
    Ok(done.join("; "))
}

fn every(runs: &Runs, rank_zero_only: bool, name: &str) -> Outcome_ {
    let mut n = 0;
    for (rep, _) in runs.reports.iter().filter(|(rep, _)| !rank_zero_only || rep.r == 0) {
        check(rep, name)?;
        n += 1;
    }
    Ok(format!("{n} fixtures"))
}

fn mutation(runs: &Runs) -> Outcome_ {
    let missed: Vec<String> = runs.mutations.iter().filter(|(_, _, o)| *o != Outcome::Fail).map(|(l, m, o)| format!("{l} {m:?} -> {o:?}")).collect();
    if missed.is_empty() { Ok(format!("{} corruptions all fail", runs.mutations.len())) } else { Err(missed.join(", ")) }
}

fn main() {
    let mut results: Vec<(&str, Outcome_)> = vec![
        ("Dieudonne identity suite", identity_suite()),
        ("logarithm matrix suite", log_matrix()),
        ("height suite", heights()),
    ];
    let runs = run_all();
    results.push(("rank 0 end to end", end_to_end(&runs, 0, 2, Duration::from_secs(300))));
    results.push(("rank 1 end to end", end_to_end(&runs, 1, 1, Duration::from_secs(1800))));
    results.push(("interpolation at X = 0", every(&runs, true, "interpolation")));
    results.push(("integrality", every(&runs, false, "integrality")));
    results.push(("mutation sensitivity", mutation(&runs)));
    results.push(("Euler characteristic", every(&runs, true, "euler_characteristic")));

    let mut failed = 0;
    for (i, (name, r)) in results.iter().enumerate() {
        match r {
            Ok(d) => println!("[{}] PASS {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("[{}] FAIL {name}: {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
