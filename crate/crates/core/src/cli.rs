//! Command-line front end. Results go to stdout, diagnostics and `--stats`
//! counters to stderr.

use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::census::{run_census, CensusConfig, DEFAULT_EPSILON};
use crate::error::Error;
use crate::factor::{
    factor_mersenne_with_stats, Budget, FactorStats, Factorization, DEFAULT_RHO_ITERATIONS,
    DEFAULT_TRIAL_BOUND,
};
use crate::storage::{
    export_report, import_known_factors, open_cache, render_report, save_cache, FactorCache,
    Report, VerificationReport,
};
use crate::structure::primitive_prime_divisors;
use crate::theorems::{
    classify_index, verify_identities_with, verify_range, verify_structure, IdentityOptions,
    SubSuite,
};
use crate::MersenneIndex;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Environment variable supplying a default `--cache` path.
pub const CACHE_ENV: &str = "MERSENNE_OMEGA_CACHE";

#[derive(Debug, Parser)]
#[command(
    name = "mersenne-omega",
    version,
    about = "Prime factor structure of Mersenne numbers 2^n - 1"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Factor cache file (JSON); created if missing. Defaults to $MERSENNE_OMEGA_CACHE.
    #[arg(long, global = true, value_name = "PATH")]
    pub cache: Option<PathBuf>,
    /// Print rho iteration and cache counters to stderr.
    #[arg(long, global = true)]
    pub stats: bool,
    /// Total Pollard rho iterations allowed per factorization.
    #[arg(long, global = true, value_name = "N", default_value_t = DEFAULT_RHO_ITERATIONS)]
    pub budget_rho: u64,
    /// Trial division bound per cyclotomic part.
    #[arg(long, global = true, value_name = "N", default_value_t = DEFAULT_TRIAL_BOUND)]
    pub trial_bound: u64,
    /// Soft wall-clock limit per factorization, in milliseconds.
    #[arg(long, global = true, value_name = "MS")]
    pub wall_ms: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Factor M_n, one "prime^exp" per line.
    Factor { n: MersenneIndex },
    /// ω(M_n) for one index or a range.
    Omega {
        #[arg(required_unless_present = "range", conflicts_with = "range")]
        n: Option<MersenneIndex>,
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        range: Option<Vec<MersenneIndex>>,
    },
    /// Primitive prime divisors and primitive part of M_n.
    Primitive { n: MersenneIndex },
    /// Classification report for M_n as JSON.
    Classify { n: MersenneIndex },
    /// Identity suites and per-index structure checks up to --max.
    Verify {
        #[arg(long)]
        max: MersenneIndex,
        /// Upper end of the perfect-power sweep.
        #[arg(long, default_value_t = 200)]
        perfect_power_max: MersenneIndex,
        /// Upper end of the cyclotomic product check.
        #[arg(long, default_value_t = 200)]
        cyclotomic_max: MersenneIndex,
        /// Write the full report as JSON.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Census CSV over [--min, --max].
    Census {
        #[arg(long)]
        min: MersenneIndex,
        #[arg(long)]
        max: MersenneIndex,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        /// CSV destination; stdout when omitted.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Merge a "n factor" text file into the cache.
    Import { file: PathBuf },
}

struct Context {
    budget: Budget,
    cache: FactorCache,
    cache_path: Option<PathBuf>,
    stats: FactorStats,
    show_stats: bool,
}

impl Context {
    fn factor(&self, n: MersenneIndex) -> Result<Factorization, Error> {
        factor_mersenne_with_stats(n, &self.budget, &self.cache, Some(&self.stats))
    }
}

fn error_exit(err: &Error) -> i32 {
    match err {
        Error::Io { .. } | Error::CacheParse { .. } => EXIT_IO,
        Error::CacheVerification(_) => EXIT_VERIFY,
        Error::Incomplete { .. } => EXIT_PARTIAL,
        Error::InvalidArgument(_) | Error::DivisorForm { .. } => EXIT_USAGE,
    }
}

/// Parses `argv` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match run(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            error_exit(&e)
        }
    }
}

fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Error> {
    let g = cli.global;
    let budget = Budget::new(g.budget_rho, g.trial_bound, g.wall_ms)?;
    let cache_path = g
        .cache
        .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from));
    let cache = match &cache_path {
        Some(p) => open_cache(p)?,
        None => FactorCache::new(),
    };
    let ctx = Context {
        budget,
        cache,
        cache_path,
        stats: FactorStats::default(),
        show_stats: g.stats,
    };

    let code = match cli.command {
        Command::Factor { n } => cmd_factor(&ctx, n, out, err)?,
        Command::Omega { n, range } => {
            let (a, b) = match (n, range.as_deref()) {
                (Some(n), _) => (n, n),
                (None, Some([a, b])) => (*a, *b),
                _ => unreachable!("clap enforces one of <n> or --range A B"),
            };
            cmd_omega(&ctx, a, b, out)?
        }
        Command::Primitive { n } => cmd_primitive(&ctx, n, out, err)?,
        Command::Classify { n } => cmd_classify(&ctx, n, out, err)?,
        Command::Verify {
            max,
            perfect_power_max,
            cyclotomic_max,
            out: path,
        } => cmd_verify(&ctx, max, perfect_power_max, cyclotomic_max, path, out)?,
        Command::Census {
            min,
            max,
            epsilon,
            out: path,
        } => cmd_census(&ctx, min, max, epsilon, path, out, err)?,
        Command::Import { file } => cmd_import(&ctx, &file, out, err)?,
    };

    if let Some(p) = &ctx.cache_path {
        save_cache(&ctx.cache, p)?;
    }
    if ctx.show_stats {
        let s = &ctx.stats;
        let _ = writeln!(
            err,
            "stats: rho_iterations={} rho_attempts={} cache_hits={} factorizations={}",
            s.rho_iterations(),
            s.rho_attempts.load(std::sync::atomic::Ordering::Relaxed),
            s.cache_hits(),
            s.factorizations.load(std::sync::atomic::Ordering::Relaxed),
        );
    }
    Ok(code)
}

fn io_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn cmd_factor(
    ctx: &Context,
    n: MersenneIndex,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Error> {
    let f = ctx.factor(n)?;
    for (p, e) in &f.factors {
        writeln!(out, "{p}^{e}").map_err(io_err)?;
    }
    if f.is_complete() {
        let _ = writeln!(err, "status: complete");
        Ok(EXIT_OK)
    } else {
        writeln!(out, "{} (composite cofactor)", f.cofactor).map_err(io_err)?;
        let _ = writeln!(err, "status: partial");
        Ok(EXIT_PARTIAL)
    }
}

fn cmd_omega(
    ctx: &Context,
    a: MersenneIndex,
    b: MersenneIndex,
    out: &mut dyn Write,
) -> Result<i32, Error> {
    if a == 0 || a > b {
        return Err(Error::InvalidArgument(format!(
            "range [{a}, {b}] must satisfy 1 <= A <= B"
        )));
    }
    let mut code = EXIT_OK;
    for n in a..=b {
        let f = ctx.factor(n)?;
        if f.is_complete() {
            writeln!(out, "{n}\t{}", f.omega()).map_err(io_err)?;
        } else {
            writeln!(out, "{n}\t≥{} (partial)", f.omega_lower_bound()).map_err(io_err)?;
            code = EXIT_PARTIAL;
        }
    }
    Ok(code)
}

fn cmd_primitive(
    ctx: &Context,
    n: MersenneIndex,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Error> {
    let f = ctx.factor(n)?;
    if !f.is_complete() {
        let _ = writeln!(
            err,
            "M_{n} is only partially factored (cofactor {}); primitivity undecidable",
            f.cofactor
        );
        return Ok(EXIT_PARTIAL);
    }
    let r = primitive_prime_divisors(n, &f)?;
    let primes = if r.primitive_primes.is_empty() {
        "(none)".to_string()
    } else {
        r.primitive_primes
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    writeln!(out, "primitive primes: {primes}").map_err(io_err)?;
    writeln!(out, "primitive part: {}", r.primitive_part).map_err(io_err)?;
    Ok(EXIT_OK)
}

fn cmd_classify(
    ctx: &Context,
    n: MersenneIndex,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Error> {
    let f = ctx.factor(n)?;
    if !f.is_complete() {
        let form = classify_index(n);
        let _ = writeln!(
            err,
            "M_{n} is only partially factored; reporting the index form only"
        );
        let text = serde_json::to_string_pretty(&form).expect("serializable");
        writeln!(out, "{text}").map_err(io_err)?;
        return Ok(EXIT_PARTIAL);
    }
    let report = verify_structure(n, &f)?;
    write!(
        out,
        "{}",
        render_report(&Report::ClassificationJson(&report))
    )
    .map_err(io_err)?;
    Ok(if report.consistent {
        EXIT_OK
    } else {
        EXIT_VERIFY
    })
}

fn suite_line(s: &SubSuite) -> String {
    let mut line = format!(
        "{}: passed {}, failed {}, inconclusive {}, skipped {}",
        s.name, s.passed, s.failed, s.inconclusive, s.skipped
    );
    if let Some(c) = &s.first_counterexample {
        line.push_str(&format!(" (first counterexample: {c})"));
    }
    line
}

fn cmd_verify(
    ctx: &Context,
    max: MersenneIndex,
    perfect_power_max: MersenneIndex,
    cyclotomic_max: MersenneIndex,
    path: Option<PathBuf>,
    out: &mut dyn Write,
) -> Result<i32, Error> {
    let identities = verify_identities_with(
        IdentityOptions {
            max_n: max,
            perfect_power_max: perfect_power_max.max(max),
        },
        &ctx.budget,
        &ctx.cache,
    )?;
    let range = verify_range(max, cyclotomic_max, &ctx.budget, &ctx.cache)?;
    let report = VerificationReport {
        identities,
        range: Some(range),
    };
    let range = report.range.as_ref().expect("set above");
    for s in report.identities.suites.iter().chain(range.suites.iter()) {
        writeln!(out, "{}", suite_line(s)).map_err(io_err)?;
    }
    let roster: Vec<String> = range.omega_one.iter().map(|n| n.to_string()).collect();
    writeln!(out, "omega(M_n) = 1 for n in {{{}}}", roster.join(", ")).map_err(io_err)?;
    if let Some(p) = path {
        export_report(&Report::SuiteJson(&report), p)?;
    }
    Ok(if report.failures() > 0 {
        EXIT_VERIFY
    } else if report.inconclusive() > 0 {
        EXIT_PARTIAL
    } else {
        EXIT_OK
    })
}

fn fmt_fraction(f: Option<f64>) -> String {
    f.map(|v| format!("{v:.6}"))
        .unwrap_or_else(|| "n/a".to_string())
}

fn fmt_list(v: &[MersenneIndex]) -> String {
    let items: Vec<String> = v.iter().map(|n| n.to_string()).collect();
    format!("[{}]", items.join(", "))
}

#[allow(clippy::too_many_arguments)]
fn cmd_census(
    ctx: &Context,
    min: MersenneIndex,
    max: MersenneIndex,
    epsilon: f64,
    path: Option<PathBuf>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Error> {
    let config = CensusConfig {
        n_min: min,
        n_max: max,
        epsilon,
        budget: ctx.budget.clone(),
        cache_path: ctx.cache_path.clone(),
    };
    let report = run_census(&config, &ctx.cache)?;
    let csv = Report::CensusCsv(&report.records);
    // summary goes wherever the CSV does not
    let summary_sink: &mut dyn Write = match &path {
        Some(p) => {
            export_report(&csv, p)?;
            out
        }
        None => {
            write!(out, "{}", render_report(&csv)).map_err(io_err)?;
            err
        }
    };
    let s = &report.summary;
    let lines = [
        format!("records: {}", s.records),
        format!("epsilon: {}", s.epsilon),
        format!("lemma6_fraction: {}", fmt_fraction(s.lemma6_fraction)),
        format!(
            "hw_two_sided_fraction: {}",
            fmt_fraction(s.hw_two_sided_fraction)
        ),
        format!(
            "final_inequality_fraction: {}",
            fmt_fraction(s.final_inequality_fraction)
        ),
        format!("incomplete: {}", fmt_list(&s.incomplete)),
        format!(
            "deterministic_violations: {}",
            fmt_list(&s.deterministic_violations)
        ),
        format!(
            "weak_divisor_bound_violations: {}",
            fmt_list(&s.weak_divisor_violations)
        ),
        format!(
            "naive_bound_witnesses: {}",
            fmt_list(&s.naive_bound_witnesses)
        ),
        format!("asymptotic_claim: {}", s.asymptotic_claim),
    ];
    for l in lines {
        writeln!(summary_sink, "{l}").map_err(io_err)?;
    }
    Ok(if !s.deterministic_violations.is_empty() {
        EXIT_VERIFY
    } else if !s.incomplete.is_empty() {
        EXIT_PARTIAL
    } else {
        EXIT_OK
    })
}

fn cmd_import(
    ctx: &Context,
    file: &PathBuf,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Error> {
    if ctx.cache_path.is_none() {
        let _ = writeln!(err, "error: import needs --cache PATH (or ${CACHE_ENV})");
        return Ok(EXIT_USAGE);
    }
    let summary = import_known_factors(file, &ctx.cache)?;
    writeln!(out, "accepted: {}", summary.accepted).map_err(io_err)?;
    writeln!(out, "rejected: {}", summary.rejected.len()).map_err(io_err)?;
    writeln!(out, "changed entries: {}", fmt_list(&summary.changed)).map_err(io_err)?;
    for r in &summary.rejected {
        let _ = writeln!(err, "line {}: '{}': {}", r.line, r.text, r.reason);
    }
    Ok(EXIT_OK)
}
