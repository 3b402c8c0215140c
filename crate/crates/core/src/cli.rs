//! The `dlab` command line.
//!
//! Exit codes: `0` success, `2` invalid input (including unknown flags),
//! `1` a failed numeric check or an I/O problem.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arith::{euler_phi, factorize, is_prime};
use crate::cache::{DiskCache, CACHE_DIR_ENV};
use crate::chars::{build_character_table, orthogonality_defect, CharacterTable};
use crate::error::{Error, Result};
use crate::expsum::{self, lemma2_defect, lemma3_report, Branch, Polynomial};
use crate::lfun::{self, LVector, Method};
use crate::meanval::{self, Compute, LSource, MeanValueQuery, SweepParams, Target};
use crate::report;
use crate::specfun::ShiftParam;

#[derive(Debug, Parser)]
#[command(name = "dlab", version, about = "Mean values of shifted Dirichlet L-functions at s = 1")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Cache directory for character tables and L-value vectors.
    #[arg(long, global = true, env = CACHE_DIR_ENV)]
    pub cache_dir: Option<PathBuf>,

    /// Recompute everything even when a cache directory is configured.
    #[arg(long, global = true)]
    pub no_cache: bool,

    /// Worker threads for sweeps (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    /// Seed for sampled polynomials.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Describe the character group mod q.
    Chars(CharsArgs),
    /// Print L(1, chi, a) for every non-principal character mod q.
    Lvalue(LvalueArgs),
    /// Exponential-sum diagnostics mod a prime p.
    Expsum(ExpsumArgs),
    /// Check one identity or evaluate one mean value.
    Verify(VerifyArgs),
    /// Evaluate a mean value over many moduli.
    Sweep(SweepArgs),
    /// Inspect or clear the cache.
    Cache(CacheArgs),
}

#[derive(Debug, Args)]
pub struct CharsArgs {
    #[arg(long)]
    pub q: u64,
    /// Also print the values of this character on the units.
    #[arg(long)]
    pub index: Option<usize>,
}

#[derive(Debug, Args)]
pub struct LvalueArgs {
    #[arg(long)]
    pub q: u64,
    /// Shift, as an integer, `num/den`, or an exact decimal.
    #[arg(long, default_value = "0")]
    pub a: ShiftParam,
    #[arg(long, default_value = "closed_direct")]
    pub method: Method,
    /// Truncation point for the truncated route (default 10^4 q).
    #[arg(long)]
    pub cutoff: Option<u64>,
    /// Print a single character.
    #[arg(long)]
    pub index: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExpsumArgs {
    #[arg(long)]
    pub p: u64,
    /// Coefficients `a0,a1,...,ak`; sampled from `--seed` when absent.
    #[arg(long)]
    pub f: Option<Polynomial>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VerifyTarget {
    Orthogonality,
    Lemma1,
    Lemma2,
    Lemma3,
    CrossTerms,
    Thm2Identity,
    Lemma4,
    Eq1,
    Thm1,
    Thm2,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub target: VerifyTarget,
    /// Modulus (a prime for the exponential-sum targets).
    #[arg(long, visible_alias = "p")]
    pub q: u64,
    #[arg(long, default_value = "1")]
    pub a: ShiftParam,
    #[arg(long)]
    pub k: Option<u64>,
    #[arg(long)]
    pub f: Option<Polynomial>,
    #[arg(long, default_value = "closed_direct")]
    pub method: Method,
    /// Write the mean-value report to a .csv or .json file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub target: Target,
    /// Moduli as ranges and lists, e.g. `3..50,64,81`.
    #[arg(long, conflicts_with = "primes", required_unless_present = "primes")]
    pub moduli: Option<String>,
    /// Like `--moduli`, keeping only primes.
    #[arg(long)]
    pub primes: Option<String>,
    #[arg(long, default_value = "1")]
    pub a: ShiftParam,
    #[arg(long)]
    pub k: Option<u64>,
    #[arg(long)]
    pub f: Option<Polynomial>,
    #[arg(long, default_value = "closed_direct")]
    pub method: Method,
    /// Output file, .csv or .json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CacheArgs {
    #[arg(value_enum, default_value = "stats")]
    pub action: CacheAction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CacheAction {
    Stats,
    Clear,
}

/// Parses `3..50,64,81` into an ascending list; ranges are inclusive.
pub fn parse_moduli(list: &str) -> Result<Vec<u64>> {
    let bad = || Error::InvalidArgument(format!("bad modulus list {list:?}"));
    let mut out = Vec::new();
    for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: u64 = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
            if hi.saturating_sub(lo) > crate::chars::MAX_MODULUS {
                return Err(bad());
            }
            out.extend(lo..=hi);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn source(cfg: &RunConfig) -> Result<Box<dyn LSource>> {
    match (&cfg.cache_dir, cfg.no_cache) {
        (Some(dir), false) => Ok(Box::new(DiskCache::open(dir)?)),
        _ => Ok(Box::new(Compute)),
    }
}

fn polynomial_or_sample(f: &Option<Polynomial>, p: u64, seed: u64) -> Polynomial {
    f.clone().unwrap_or_else(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        expsum::random_polynomial(&mut rng, p, 4)
    })
}

fn breach(check: &str, deviation: f64, tolerance: f64) -> Result<()> {
    if deviation < tolerance {
        Ok(())
    } else {
        Err(Error::ToleranceBreach {
            check: check.to_string(),
            deviation,
            tolerance,
        })
    }
}

/// Largest deviation between the two closed routes, and the largest excess of
/// a closed value over the truncated route's rigorous envelope (`<= 0` when
/// every value lies inside it).
pub fn lemma1_check(t: &CharacterTable, a: &ShiftParam) -> Result<(f64, f64)> {
    let direct = lfun::l_vector(t, a, Method::ClosedDirect)?;
    let via_tail = lfun::l_vector(t, a, Method::ClosedLemma1)?;
    let trunc = lfun::l_vector(t, a, Method::Truncated)?;
    let excess = |v: &LVector| {
        t.nonprincipal()
            .map(|j| (v.get(j).unwrap() - trunc.get(j).unwrap()).norm() - trunc.error_bounds[j])
            .fold(f64::NEG_INFINITY, f64::max)
    };
    Ok((direct.max_deviation(&via_tail), excess(&direct).max(excess(&via_tail))))
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(&cfg, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_validation() {
                2
            } else {
                1
            }
        }
    }
}

pub fn execute(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    match &cfg.command {
        Command::Chars(args) => chars_cmd(args, out),
        Command::Lvalue(args) => lvalue_cmd(cfg, args, out),
        Command::Expsum(args) => expsum_cmd(cfg, args, out),
        Command::Verify(args) => verify_cmd(cfg, args, out),
        Command::Sweep(args) => sweep_cmd(cfg, args, out),
        Command::Cache(args) => cache_cmd(cfg, args, out),
    }
}

fn chars_cmd(args: &CharsArgs, out: &mut dyn Write) -> Result<()> {
    let t = build_character_table(args.q)?;
    writeln!(out, "q = {}  phi = {}  exponent = {}", t.modulus(), t.len(), t.exponent_modulus())?;
    for c in t.components() {
        writeln!(
            out,
            "  component {:>6}  generator {:>6}  order {:>6}",
            c.prime_power, c.generator, c.order
        )?;
    }
    if t.len() <= 400 {
        writeln!(out, "orthogonality defect = {:e}", orthogonality_defect(&t))?;
    }
    if let Some(j) = args.index {
        t.check_index(j)?;
        writeln!(out, "character {j}: tuple {:?}, conjugate {}", t.tuple(j), t.conjugate(j))?;
        for n in t.units() {
            let v = t.value(j, n as i64);
            writeln!(out, "  chi({n}) = {:.15} {:+.15}i", v.re, v.im)?;
        }
    }
    Ok(())
}

fn lvalue_cmd(cfg: &RunConfig, args: &LvalueArgs, out: &mut dyn Write) -> Result<()> {
    let src = source(cfg)?;
    let t = src.table(args.q)?;
    let v = match (args.method, args.cutoff) {
        (Method::Truncated, Some(n)) => std::sync::Arc::new(lfun::l_vector_truncated(&t, &args.a, n)?),
        (_, Some(_)) => {
            return Err(Error::InvalidArgument("--cutoff applies only to the truncated method".into()))
        }
        (m, None) => src.l_vector(&t, &args.a, m)?,
    };
    if args.a.is_below_one() && !args.a.is_zero() {
        log::warn!("a = {} < 1 lies outside the range of the mean-value formulas", args.a);
    }
    let chars: Vec<usize> = match args.index {
        Some(j) => {
            t.check_nonprincipal(j)?;
            vec![j]
        }
        None => t.nonprincipal().collect(),
    };
    writeln!(out, "# q = {}  a = {}  method = {}", args.q, args.a, v.method)?;
    for j in chars {
        let z = v.get(j).expect("non-principal");
        writeln!(
            out,
            "{j}\t{:?}\t{:.15}\t{:.15}\t{:.3e}",
            t.tuple(j),
            z.re,
            z.im,
            v.error_bounds[j]
        )?;
    }
    Ok(())
}

fn expsum_cmd(cfg: &RunConfig, args: &ExpsumArgs, out: &mut dyn Write) -> Result<()> {
    let f = polynomial_or_sample(&args.f, args.p, cfg.seed);
    let r = lemma3_report(args.p, &f)?;
    writeln!(out, "p = {}  f = {}  degree = {}", r.p, f, r.degree)?;
    for e in &r.entries {
        let branch = match e.branch {
            Branch::Generic => "generic",
            Branch::Degenerate => "degenerate",
        };
        writeln!(
            out,
            "x = {:>5}  {branch:<10}  |sum| = {:.6}  bound = {:.6}  ratio = {:.4}{}",
            e.x,
            e.modulus,
            e.bound,
            e.normalized,
            if e.within_bound { "" } else { "  VIOLATION" }
        )?;
    }
    writeln!(
        out,
        "degenerate x: {} (count ok: {}, size ok: {})  max |sum|/sqrt(p) = {:.4}",
        r.degenerate_count, r.degenerate_count_ok, r.degenerate_size_ok, r.max_normalized
    )?;
    let t = build_character_table(args.p)?;
    writeln!(out, "squared-sum identity defect = {:e}", lemma2_defect(&t, &f)?)?;
    Ok(())
}

fn verify_cmd(cfg: &RunConfig, args: &VerifyArgs, out: &mut dyn Write) -> Result<()> {
    let q = args.q;
    let a = args.a;
    let phi = || -> Result<f64> { Ok(euler_phi(&factorize(q)?) as f64) };
    match args.target {
        VerifyTarget::Orthogonality => {
            let t = build_character_table(q)?;
            let d = orthogonality_defect(&t);
            writeln!(out, "orthogonality defect = {d:e}")?;
            breach("orthogonality", d, 1e-9 * t.len() as f64)
        }
        VerifyTarget::Lemma1 => {
            let t = build_character_table(q)?;
            let (routes, excess) = lemma1_check(&t, &a)?;
            writeln!(out, "closed-route deviation = {routes:e}")?;
            writeln!(out, "excess over truncation envelope = {excess:e}")?;
            breach("closed-route agreement", routes, 1e-9)?;
            breach("truncation envelope", excess, 0.0 + f64::MIN_POSITIVE)
        }
        VerifyTarget::Lemma2 => {
            let f = polynomial_or_sample(&args.f, q, cfg.seed);
            let t = build_character_table(q)?;
            let d = lemma2_defect(&t, &f)?;
            writeln!(out, "f = {f}  squared-sum identity defect = {d:e}")?;
            breach("squared-sum identity", d, 1e-7 * q as f64)
        }
        VerifyTarget::Lemma3 => {
            let f = polynomial_or_sample(&args.f, q, cfg.seed);
            let r = lemma3_report(q, &f)?;
            writeln!(
                out,
                "f = {f}  degenerate = {}  max |sum|/sqrt(p) = {:.6}  holds = {}",
                r.degenerate_count,
                r.max_normalized,
                r.holds()
            )?;
            for v in r.violations() {
                writeln!(out, "violation at x = {}: |sum| = {} > {}", v.x, v.modulus, v.bound)?;
            }
            if r.holds() {
                Ok(())
            } else {
                Err(Error::ToleranceBreach {
                    check: "completed-sum bound".into(),
                    deviation: r.max_normalized,
                    tolerance: r.degree as f64,
                })
            }
        }
        VerifyTarget::CrossTerms => {
            let k = args.k.ok_or_else(|| Error::InvalidArgument("--k is required".into()))?;
            let t = build_character_table(q)?;
            let ct = meanval::cross_terms(&t, k, &a)?;
            writeln!(out, "lhs        = {:.15} {:+.3e}i", ct.lhs.re, ct.lhs.im)?;
            writeln!(out, "unshifted  = {:.15}  predicted {:.15}", ct.unshifted.re, ct.predicted.unshifted)?;
            writeln!(out, "M1         = {:.15}  predicted {:.15}", ct.m1.re, ct.predicted.m1)?;
            writeln!(out, "M2         = {:.15}  predicted {:.15}", ct.m2.re, ct.predicted.m2)?;
            writeln!(out, "M3         = {:.15}  predicted {:.15}", ct.m3.re, ct.predicted.m3)?;
            writeln!(out, "recombination defect = {:e}", ct.recombination_defect)?;
            breach("recombination", ct.recombination_defect, 1e-8 * phi()?)
        }
        VerifyTarget::Thm2Identity => {
            let f = polynomial_or_sample(&args.f, q, cfg.seed);
            let src = source(cfg)?;
            let t = src.table(q)?;
            let l = src.l_vector(&t, &a, args.method)?;
            let direct = meanval::thm2_lhs_direct(&t, &f, &l)?;
            let dec = meanval::thm2_lhs_decomposed(&t, &f, &l)?;
            writeln!(out, "f = {f}  direct = {direct:.15}  decomposed = {dec:.15}")?;
            breach("decomposition", (direct - dec).abs(), 1e-6 * (q * q) as f64)
        }
        VerifyTarget::Lemma4 | VerifyTarget::Eq1 | VerifyTarget::Thm1 | VerifyTarget::Thm2 => {
            let query = match args.target {
                VerifyTarget::Lemma4 => {
                    let n = a.as_integer().ok_or_else(|| {
                        Error::InvalidQuery(format!("lemma4 needs an integer a, got {a}"))
                    })?;
                    MeanValueQuery::lemma4(q, n)
                }
                VerifyTarget::Eq1 => MeanValueQuery::eq1(q, a),
                VerifyTarget::Thm1 => MeanValueQuery::thm1(
                    q,
                    args.k.ok_or_else(|| Error::InvalidArgument("--k is required".into()))?,
                    a,
                ),
                _ => {
                    if !is_prime(q) {
                        return Err(Error::InvalidQuery(format!("thm2 needs a prime modulus, got {q}")));
                    }
                    MeanValueQuery::thm2(q, polynomial_or_sample(&args.f, q, cfg.seed), a)
                }
            }
            .with_method(args.method);
            let src = source(cfg)?;
            let r = meanval::evaluate(&query, src.as_ref())?;
            writeln!(out, "target = {}  q = {}  a = {}", query.target, q, a)?;
            writeln!(out, "lhs                 = {:.15} {:+.3e}i", r.lhs.re, r.lhs.im)?;
            writeln!(out, "paper_main          = {:.15}", r.paper_main)?;
            if let Some(o) = r.oracle_main {
                writeln!(out, "oracle_main         = {o:.15}")?;
            }
            writeln!(out, "residual            = {:.6e}", r.residual)?;
            writeln!(out, "normalized_residual = {:.6e}", r.normalized_residual)?;
            writeln!(out, "route_agreement     = {:.3e}", r.route_agreement)?;
            writeln!(out, "tension             = {}", r.tension)?;
            for n in &r.notes {
                writeln!(out, "note: {n}")?;
            }
            if let Some(path) = &args.out {
                report::emit_report(&r, path)?;
            }
            breach("realness", r.lhs_imag_abs, 1e-8 * phi()?.max(r.lhs.re.abs()))
        }
    }
}

fn sweep_cmd(cfg: &RunConfig, args: &SweepArgs, out: &mut dyn Write) -> Result<()> {
    // Fail on an unwritable format before doing any work.
    report::Format::from_path(&args.out)?;
    let moduli = match (&args.moduli, &args.primes) {
        (Some(m), _) => parse_moduli(m)?,
        (None, Some(p)) => parse_moduli(p)?.into_iter().filter(|&n| is_prime(n)).collect(),
        (None, None) => Vec::new(),
    };
    let mut params = SweepParams::new(args.a);
    params.k = args.k;
    params.method = args.method;
    params.f = match (args.target, &args.f) {
        (Target::Thm2, None) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            // Leading coefficient 1 keeps the sample valid for every prime.
            let mut f = expsum::random_polynomial(&mut rng, 1 << 20, 4).coeffs().to_vec();
            *f.last_mut().unwrap() = 1;
            Some(Polynomial::new(f)?)
        }
        (_, f) => f.clone(),
    };
    let src = source(cfg)?;
    let series = meanval::residual_sweep(args.target, &moduli, &params, src.as_ref(), cfg.jobs)?;
    report::emit_series(&series, &args.out)?;
    writeln!(
        out,
        "{}: {} rows, {} skipped -> {}",
        series.target,
        series.reports.len(),
        series.skipped.len(),
        args.out.display()
    )?;
    if let Some(fit) = series.fit {
        writeln!(
            out,
            "fit |residual| ~ C q^beta: beta = {:.4}  C = {:.4e}  ({} points)",
            fit.exponent, fit.constant, fit.points
        )?;
    }
    writeln!(out, "max |normalized residual| = {:.6e}", series.max_abs_normalized)?;
    writeln!(out, "tension at {} of {} moduli: {:?}", series.tension_moduli.len(), series.reports.len(), series.tension_moduli)?;
    Ok(())
}

fn cache_cmd(cfg: &RunConfig, args: &CacheArgs, out: &mut dyn Write) -> Result<()> {
    let dir = cfg.cache_dir.as_ref().ok_or_else(|| {
        Error::InvalidArgument(format!("no cache directory; pass --cache-dir or set {CACHE_DIR_ENV}"))
    })?;
    let cache = DiskCache::open(dir)?;
    match args.action {
        CacheAction::Stats => {
            let (tables, lvalues) = cache.stats()?;
            writeln!(out, "{}: {tables} tables, {lvalues} L-value vectors", cache.root().display())?;
        }
        CacheAction::Clear => {
            let n = cache.clear()?;
            writeln!(out, "removed {n} entries from {}", cache.root().display())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("dlab").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn moduli_lists() {
        assert_eq!(parse_moduli("3..6,10, 4").unwrap(), vec![3, 4, 5, 6, 10]);
        assert_eq!(parse_moduli("").unwrap(), Vec::<u64>::new());
        assert_eq!(parse_moduli("5..=7").unwrap(), vec![5, 6, 7]);
        assert!(parse_moduli("x..3").is_err());
        assert!(parse_moduli("1..1000000000").is_err());
    }

    #[test]
    fn lvalue_anchor() {
        let (code, out, _) = run_capture(&["lvalue", "--q", "4", "--a", "1", "--no-cache"]);
        assert_eq!(code, 0);
        assert!(out.contains("0.34657359"), "{out}");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_capture(&["--help"]).0, 0);
        assert_eq!(run_capture(&["lvalue", "--q", "4", "--bogus"]).0, 2);
        assert_eq!(run_capture(&["lvalue", "--q", "0", "--no-cache"]).0, 2);
        assert_eq!(run_capture(&["verify", "--target", "thm1", "--q", "5", "--k", "5", "--no-cache"]).0, 2);
        let (code, out, _) = run_capture(&["verify", "--target", "lemma2", "--p", "13", "--f", "1,0,3,2"]);
        assert_eq!(code, 0);
        assert!(out.contains("defect"));
    }
}
