use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ssbsd::lfunction::{log_target, round_trip_mismatches, signed_decompose, signed_from_symbols, SymbolContext, SymbolLevels, SymbolStore};
use ssbsd::selftest::{dieudonne_suite, log_matrix_suite};
use ssbsd::verifier::{prepare, Invariants, Mutation, VerificationReport, VerifyOptions};
use ssbsd::{CurveFixture, LogMatrix, TruncatedSeries};

#[derive(Parser)]
#[command(name = "ssbsd", version, about = "Signed p-adic BSD checks for elliptic curves with a_p = 0")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MutateArg {
    Sha,
    Tamagawa,
    Torsion,
}

#[derive(Subcommand)]
enum Command {
    /// Verify a curve fixture. Exit status: 0 pass, 2 fail, 3 undecidable,
    /// 4 hypotheses not met, 1 error.
    Verify {
        fixture: PathBuf,
        /// Level exponent n of the Riemann sums (default: raised until decided).
        #[arg(long)]
        level: Option<u32>,
        #[arg(long, default_value_t = 6)]
        max_level: u32,
        /// X-adic truncation of the series.
        #[arg(long, default_value_t = 6)]
        xtrunc: usize,
        /// p-adic working precision of the heights (default: the fixture's).
        #[arg(long)]
        prec: Option<i64>,
        /// Directory for cached modular-symbol tables.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        #[arg(long)]
        rebuild_cache: bool,
        /// Write the JSON report here ("-" for stdout).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Multiply one claimed invariant by p before comparing.
        #[arg(long, value_enum)]
        mutate: Option<MutateArg>,
    },
    /// Run the randomized Dieudonné and logarithm-matrix identity suites.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// Working precision N.
        #[arg(long, default_value_t = 20)]
        prec: i64,
    },
    /// Signed decomposition of L_alpha. INPUT is a curve fixture, or JSON
    /// {"p": .., "l_alpha": series, "l_beta": series (optional, default the conjugate)}.
    Decompose {
        input: PathBuf,
        #[arg(long, default_value_t = 4)]
        level: u32,
        #[arg(long, default_value_t = 6)]
        xtrunc: usize,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
}

fn store(cache_dir: Option<PathBuf>, rebuild: bool) -> SymbolStore {
    SymbolStore { dir: cache_dir, rebuild }
}

fn summary(rep: &VerificationReport) -> String {
    let mut out = format!("{} p={} r={} level={}\n", rep.label, rep.p, rep.r, rep.level.map(|n| n.to_string()).unwrap_or_else(|| "-".into()));
    for h in &rep.hypotheses {
        out += &format!("  hypothesis {:<45} {} ({})\n", h.name, if h.met { "met" } else { "NOT MET" }, h.detail);
    }
    for (name, c) in &rep.checks {
        let need = c.required_level.map(|n| format!(" [needs n >= {n}]")).unwrap_or_default();
        out += &format!("  {:<24} {:<11} {}{}\n", name, format!("{:?}", c.verdict).to_lowercase(), c.detail, need);
    }
    out + &format!("outcome: {}\n", serde_json::to_value(rep.outcome).unwrap().as_str().unwrap_or_default())
}

fn run(cli: Cli) -> Result<u8, ssbsd::Error> {
    match cli.command {
        Command::Verify { fixture, level, max_level, xtrunc, prec, cache_dir, rebuild_cache, report, mutate } => {
            let fx = CurveFixture::load(&fixture)?;
            let opts = VerifyOptions { level, max_level, xtrunc, prec, store: store(cache_dir, rebuild_cache), ..Default::default() };
            let mut prepared = prepare(&fx, &opts)?;
            let mut inv = Invariants::of(&fx);
            if let Some(m) = mutate {
                let m = match m {
                    MutateArg::Sha => Mutation::Sha,
                    MutateArg::Tamagawa => Mutation::Tamagawa,
                    MutateArg::Torsion => Mutation::Torsion,
                };
                inv = inv.mutated(m, fx.p);
            }
            let rep = prepared.report(&inv, &opts)?;
            match report.as_deref() {
                Some(p) if p.as_os_str() == "-" => print!("{}", rep.to_json_string()),
                Some(p) => {
                    std::fs::write(p, rep.to_json_string())?;
                    print!("{}", summary(&rep));
                }
                None => print!("{}", summary(&rep)),
            }
            Ok(rep.exit_code() as u8)
        }
        Command::Selftest { seed, count, prec } => {
            let primes = [5, 7, 13];
            let suites = [dieudonne_suite(seed, &primes, count, prec), log_matrix_suite(seed, &primes, prec, 10, count.min(5))];
            let mut ok = true;
            for s in &suites {
                println!("{:<12} {} cases, {} failures", s.name, s.cases, s.failures.len());
                for f in &s.failures {
                    println!("  {f}");
                }
                ok &= s.passed();
            }
            Ok(if ok { 0 } else { 2 })
        }
        Command::Decompose { input, level, xtrunc, cache_dir } => {
            let text = std::fs::read_to_string(&input)?;
            let v: serde_json::Value = serde_json::from_str(&text)?;
            let out = if v.get("a_invariants").is_some() {
                let fx = CurveFixture::load(&input)?;
                fx.validate()?;
                let mut ctx = SymbolContext::from_fixture(&fx)?;
                let lv = SymbolLevels::build(&mut ctx, level, &store(cache_dir, false))?;
                let (la, pair) = signed_from_symbols(&lv, level, xtrunc)?;
                serde_json::json!({ "p": fx.p, "l_alpha": la.series.to_json(), "signed": pair.to_json() })
            } else {
                let p = v["p"].as_u64().ok_or_else(|| ssbsd::Error::Parse("missing prime \"p\"".into()))? as u32;
                let la = TruncatedSeries::from_json(&v["l_alpha"], p)?;
                let lb = match v.get("l_beta") {
                    Some(s) => TruncatedSeries::from_json(s, p)?,
                    None => la.conj(),
                };
                let logm = LogMatrix::new(p, la.trunc_order(), log_target(&la, 10))?;
                let pair = signed_decompose(&la, &lb, &logm)?;
                let bad = round_trip_mismatches(&pair, &la, &lb, &logm);
                serde_json::json!({ "p": p, "signed": pair.to_json(), "round_trip_mismatches": bad })
            };
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
