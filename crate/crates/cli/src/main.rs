//! `gpp`: closures, solvers, oracles and generators from the command line.
//!
//! Results go to standard output as one JSON object. Errors go to standard
//! error as one JSON line, with exit code 2 (validation), 3 (capacity),
//! 4 (mode mismatch) or 5 (internal).

mod examples;
mod num;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gpp_core::closure::DEFAULT_CLOSURE_CAP;
use gpp_core::generators::{random_instance, WeightSign};
use gpp_core::model::{instance_to_json, language_to_json, load_instance, load_language};
use gpp_core::oracle::{
    brute_force_argmin, brute_force_reduce, windowed_dp, DEFAULT_MAX_STATES, DEFAULT_MAX_WORDS,
};
use gpp_core::solver::minimize_nonpositive_in;
use gpp_core::{
    cap_bar_closure, semiring_argmin, semiring_sum, star_closure, ClosureConfig, Error, Instance,
    Language, LogSumExp, MinPlus, MinPlusExact, NonPositivePlan, Result, Selective, Semiring,
    SolveResult, SolveStats, SumPlan, SumProduct,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::value::RawValue;

use examples::{Example, ExampleArgs};
use num::json_number;

#[derive(Parser)]
#[command(
    name = "gpp",
    version,
    about = "Exact inference over suffix-pattern chain energies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report closure sizes and the Hasse edge bound of a language.
    Closure(ClosureArgs),
    /// Minimize an energy or compute a partition function.
    Solve(SolveArgs),
    /// Reference value by enumeration or a windowed dynamic program.
    Oracle(OracleArgs),
    /// Sweep the chain length and report operation counts.
    Bench(BenchArgs),
    /// Print an example language, or an instance with `--n`.
    Gen(GenArgs),
}

#[derive(Args)]
struct ClosureArgs {
    #[arg(long)]
    language: PathBuf,
    /// Also build the star closure.
    #[arg(long)]
    star: bool,
    /// Include the Hasse diagram of the intersection closure.
    #[arg(long)]
    hasse: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Min,
    Partition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SemiringArg {
    Minplus,
    Sumprod,
    Logsumexp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    Auto,
    NegDp,
    Semiring,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long, value_enum)]
    semiring: Option<SemiringArg>,
    /// Also report a minimizing word (mode min).
    #[arg(long)]
    argmin: bool,
    /// Exact rational arithmetic (mode min).
    #[arg(long)]
    exact: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    query: QueryArgs,
    #[arg(long, value_enum, default_value_t = Algorithm::Auto)]
    algorithm: Algorithm,
    /// Report wall-clock time; otherwise `wall_ms` is 0.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    query: QueryArgs,
    #[arg(long, default_value_t = DEFAULT_MAX_WORDS)]
    max_words: u64,
    /// Use the windowed dynamic program instead of enumeration.
    #[arg(long)]
    windowed: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
    max_states: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SignArg {
    Nonpositive,
    Mixed,
}

impl From<SignArg> for WeightSign {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Nonpositive => WeightSign::NonPositive,
            SignArg::Mixed => WeightSign::Mixed,
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    /// Language file; defaults to the `--example` language.
    #[arg(long, conflicts_with = "example")]
    language: Option<PathBuf>,
    #[arg(long, value_enum)]
    example: Option<Example>,
    #[command(flatten)]
    params: ExampleArgs,
    /// Chain lengths, comma separated.
    #[arg(long, default_value = "64,128")]
    n: String,
    #[arg(long, value_enum, default_value_t = SemiringArg::Sumprod)]
    semiring: SemiringArg,
    /// `semiring` runs the summation; `neg-dp` the non-positive minimizer.
    #[arg(long, value_enum, default_value_t = Algorithm::Semiring)]
    algorithm: Algorithm,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    density: f64,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    example: Example,
    #[command(flatten)]
    params: ExampleArgs,
    /// Emit an instance of this length with seeded random weights.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = SignArg::Nonpositive)]
    sign: SignArg,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
}

// ---------------------------------------------------------------------------
// Output records

#[derive(Serialize)]
struct ClosureOut {
    size: usize,
    reported_size: usize,
    includes_epsilon: bool,
    includes_bottom: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    star_size: Option<usize>,
    hasse_edges: u64,
    bound: u64,
    bound_satisfied: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    hasse: Option<serde_json::Value>,
}

#[derive(Serialize)]
struct StatsOut {
    closure_size: usize,
    star_size: usize,
    hasse_edges: usize,
    oplus_ops: u64,
    otimes_ops: u64,
    wall_ms: Box<RawValue>,
}

#[derive(Serialize)]
struct SolveOut {
    value: Box<RawValue>,
    /// Exact value as `p/q`, in exact mode only.
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    argmin: Option<Vec<u32>>,
    stats: StatsOut,
}

#[derive(Serialize)]
struct OracleOut {
    value: Box<RawValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    argmin: Option<Vec<u32>>,
    method: &'static str,
}

#[derive(Serialize)]
struct BenchRun {
    n: usize,
    closure_size: usize,
    star_size: usize,
    oplus_ops: u64,
    otimes_ops: u64,
    total_ops: u64,
}

#[derive(Serialize)]
struct BenchRatio {
    from: usize,
    to: usize,
    n_ratio: Box<RawValue>,
    ops_ratio: Box<RawValue>,
}

#[derive(Serialize)]
struct BenchOut {
    semiring: &'static str,
    algorithm: &'static str,
    runs: Vec<BenchRun>,
    ratios: Vec<BenchRatio>,
}

/// A computed value ready for output.
struct Rendered {
    value: f64,
    exact: Option<String>,
    argmin: Option<Vec<u32>>,
    stats: SolveStats,
}

fn render<S: Semiring>(s: &S, r: SolveResult<S::Value>, exact: Option<String>) -> Rendered {
    Rendered {
        value: s.to_f64(&r.value),
        exact,
        argmin: r.argmin,
        stats: r.stats,
    }
}

fn exact_text<T: std::fmt::Display>(v: &Option<T>) -> String {
    match v {
        Some(r) => r.to_string(),
        None => "inf".into(),
    }
}

// ---------------------------------------------------------------------------
// Commands

fn closure_config() -> Result<ClosureConfig> {
    let cap = match std::env::var("GPP_CLOSURE_CAP") {
        Ok(text) => text.trim().parse().map_err(|_| Error::Validation {
            path: "GPP_CLOSURE_CAP".into(),
            message: format!("not a nonnegative integer: {text:?}"),
        })?,
        Err(_) => DEFAULT_CLOSURE_CAP,
    };
    Ok(ClosureConfig { cap })
}

fn cmd_closure(args: &ClosureArgs) -> Result<String> {
    let cfg = closure_config()?;
    let lang = load_language(&args.language)?;
    let d = lang.domain_size();
    let mut cap_bar = cap_bar_closure(d, lang.predicates(), &cfg)?;
    let report = cap_bar.report()?;
    let star_size = if args.star {
        Some(star_closure(d, lang.predicates(), &cfg)?.len())
    } else {
        None
    };
    let out = ClosureOut {
        size: report.size,
        reported_size: report.reported_size,
        includes_epsilon: report.includes_epsilon,
        includes_bottom: report.includes_bottom,
        star_size,
        hasse_edges: report.hasse_edges,
        bound: report.bound,
        bound_satisfied: report.bound_satisfied,
        hasse: args
            .hasse
            .then(|| cap_bar.diagram().expect("built by report").to_json()),
    };
    Ok(to_json(&out))
}

fn mode_error(msg: &str) -> Error {
    Error::Mode(msg.into())
}

fn check_query(q: &QueryArgs) -> Result<()> {
    match q.mode {
        Mode::Min => {
            if matches!(q.semiring, Some(s) if s != SemiringArg::Minplus) {
                return Err(mode_error("mode min runs in minplus"));
            }
        }
        Mode::Partition => {
            if q.semiring == Some(SemiringArg::Minplus) {
                return Err(mode_error("mode partition needs sumprod or logsumexp"));
            }
            if q.argmin {
                return Err(mode_error("--argmin applies to mode min"));
            }
            if q.exact {
                return Err(mode_error("--exact applies to mode min"));
            }
        }
    }
    Ok(())
}

fn min_value<S: Selective>(
    inst: &Instance,
    s: &S,
    neg_dp: bool,
    argmin: bool,
    cfg: &ClosureConfig,
) -> Result<SolveResult<S::Value>> {
    if neg_dp {
        minimize_nonpositive_in(inst, s, cfg)
    } else if argmin {
        semiring_argmin(inst, s, cfg)
    } else {
        semiring_sum(inst, s, cfg)
    }
}

fn solve(args: &SolveArgs, inst: &Instance, cfg: &ClosureConfig) -> Result<Rendered> {
    let q = &args.query;
    check_query(q)?;
    match q.mode {
        Mode::Min => {
            let neg_dp = match args.algorithm {
                Algorithm::NegDp => {
                    if !inst.all_nonpositive() {
                        return Err(mode_error(
                            "--algorithm neg-dp needs every weight to be non-positive",
                        ));
                    }
                    if q.argmin {
                        return Err(mode_error("--algorithm neg-dp does not report an argmin"));
                    }
                    true
                }
                Algorithm::Semiring => false,
                Algorithm::Auto => inst.all_nonpositive() && !q.argmin,
            };
            if q.exact {
                let r = min_value(inst, &MinPlusExact, neg_dp, q.argmin, cfg)?;
                let text = exact_text(&r.value);
                Ok(render(&MinPlusExact, r, Some(text)))
            } else {
                let r = min_value(inst, &MinPlus, neg_dp, q.argmin, cfg)?;
                Ok(render(&MinPlus, r, None))
            }
        }
        Mode::Partition => {
            if args.algorithm == Algorithm::NegDp {
                return Err(mode_error("--algorithm neg-dp applies to mode min"));
            }
            match q.semiring.unwrap_or(SemiringArg::Sumprod) {
                SemiringArg::Logsumexp => Ok(render(
                    &LogSumExp,
                    semiring_sum(inst, &LogSumExp, cfg)?,
                    None,
                )),
                _ => Ok(render(
                    &SumProduct,
                    semiring_sum(inst, &SumProduct, cfg)?,
                    None,
                )),
            }
        }
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<String> {
    let cfg = closure_config()?;
    let inst = load_instance(&args.query.instance)?;
    let start = Instant::now();
    let r = solve(args, &inst, &cfg)?;
    let wall_ms = if args.timing {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    let st = r.stats;
    Ok(to_json(&SolveOut {
        value: json_number(r.value),
        exact: r.exact,
        argmin: r.argmin,
        stats: StatsOut {
            closure_size: st.closure_size,
            star_size: st.star_size,
            hasse_edges: st.hasse_edges,
            oplus_ops: st.oplus_ops,
            otimes_ops: st.otimes_ops,
            wall_ms: json_number(wall_ms),
        },
    }))
}

fn oracle_min<S: Selective>(
    args: &OracleArgs,
    inst: &Instance,
    s: &S,
) -> Result<(S::Value, Option<Vec<u32>>)> {
    if args.windowed {
        if args.query.argmin {
            return Err(mode_error("--windowed does not report an argmin"));
        }
        Ok((windowed_dp(inst, s, args.max_states)?, None))
    } else {
        let (v, x) = brute_force_argmin(inst, s, args.max_words)?;
        Ok((v, args.query.argmin.then_some(x)))
    }
}

fn oracle_sum<S: Semiring>(args: &OracleArgs, inst: &Instance, s: &S) -> Result<f64> {
    let v = if args.windowed {
        windowed_dp(inst, s, args.max_states)?
    } else {
        brute_force_reduce(inst, s, args.max_words)?
    };
    Ok(s.to_f64(&v))
}

fn cmd_oracle(args: &OracleArgs) -> Result<String> {
    let q = &args.query;
    check_query(q)?;
    let inst = load_instance(&q.instance)?;
    let (value, exact, argmin) = match q.mode {
        Mode::Min if q.exact => {
            let (v, x) = oracle_min(args, &inst, &MinPlusExact)?;
            (MinPlusExact.to_f64(&v), Some(exact_text(&v)), x)
        }
        Mode::Min => {
            let (v, x) = oracle_min(args, &inst, &MinPlus)?;
            (v, None, x)
        }
        Mode::Partition => {
            let v = match q.semiring.unwrap_or(SemiringArg::Sumprod) {
                SemiringArg::Logsumexp => oracle_sum(args, &inst, &LogSumExp)?,
                _ => oracle_sum(args, &inst, &SumProduct)?,
            };
            (v, None, None)
        }
    };
    Ok(to_json(&OracleOut {
        value: json_number(value),
        exact,
        argmin,
        method: if args.windowed {
            "windowed"
        } else {
            "enumeration"
        },
    }))
}

fn bench_runs<S: Semiring>(
    args: &BenchArgs,
    lang: &Language,
    lengths: &[usize],
    s: &S,
    cfg: &ClosureConfig,
) -> Result<Vec<BenchRun>> {
    let sign = if args.algorithm == Algorithm::NegDp {
        WeightSign::NonPositive
    } else {
        WeightSign::Mixed
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let neg = (args.algorithm == Algorithm::NegDp)
        .then(|| NonPositivePlan::build(lang, cfg))
        .transpose()?;
    let sum = (args.algorithm != Algorithm::NegDp)
        .then(|| SumPlan::build(lang, cfg))
        .transpose()?;
    lengths
        .iter()
        .map(|&n| {
            let inst = random_instance(&mut rng, lang, n, sign, args.density)?;
            let st = match (&neg, &sum) {
                (Some(plan), _) => plan.run(&inst, &MinPlus)?.stats,
                (_, Some(plan)) => plan.run(&inst, s, false)?.result.stats,
                _ => unreachable!("one plan is built"),
            };
            Ok(BenchRun {
                n,
                closure_size: st.closure_size,
                star_size: st.star_size,
                oplus_ops: st.oplus_ops,
                otimes_ops: st.otimes_ops,
                total_ops: st.total_ops(),
            })
        })
        .collect()
}

fn cmd_bench(args: &BenchArgs) -> Result<String> {
    let cfg = closure_config()?;
    if !(0.0..=1.0).contains(&args.density) {
        return Err(Error::Validation {
            path: "--density".into(),
            message: "must lie in [0, 1]".into(),
        });
    }
    let lang = match &args.language {
        Some(path) => load_language(path)?,
        None => args.params.build(args.example.unwrap_or(Example::Ex1))?,
    };
    let lengths: Vec<usize> = examples::parse_groups(&args.n, "--n")?.concat();
    if lengths.is_empty() || lengths.contains(&0) {
        return Err(Error::Validation {
            path: "--n".into(),
            message: "lengths must be positive".into(),
        });
    }
    let (runs, semiring) = if args.algorithm == Algorithm::NegDp {
        (
            bench_runs(args, &lang, &lengths, &MinPlus, &cfg)?,
            "minplus",
        )
    } else {
        match args.semiring {
            SemiringArg::Minplus => (
                bench_runs(args, &lang, &lengths, &MinPlus, &cfg)?,
                "minplus",
            ),
            SemiringArg::Sumprod => (
                bench_runs(args, &lang, &lengths, &SumProduct, &cfg)?,
                "sumprod",
            ),
            SemiringArg::Logsumexp => (
                bench_runs(args, &lang, &lengths, &LogSumExp, &cfg)?,
                "logsumexp",
            ),
        }
    };
    let ratios = runs
        .windows(2)
        .map(|w| BenchRatio {
            from: w[0].n,
            to: w[1].n,
            n_ratio: json_number(w[1].n as f64 / w[0].n as f64),
            ops_ratio: json_number(w[1].total_ops as f64 / w[0].total_ops.max(1) as f64),
        })
        .collect();
    Ok(to_json(&BenchOut {
        semiring,
        algorithm: if args.algorithm == Algorithm::NegDp {
            "neg-dp"
        } else {
            "semiring"
        },
        runs,
        ratios,
    }))
}

fn cmd_gen(args: &GenArgs) -> Result<String> {
    if !(0.0..=1.0).contains(&args.density) {
        return Err(Error::Validation {
            path: "--density".into(),
            message: "must lie in [0, 1]".into(),
        });
    }
    let lang = args.params.build(args.example)?;
    let value = match args.n {
        None => language_to_json(&lang),
        Some(n) => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            instance_to_json(&random_instance(
                &mut rng,
                &lang,
                n,
                args.sign.into(),
                args.density,
            )?)
        }
    };
    Ok(to_json(&value))
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("output records serialize")
}

// ---------------------------------------------------------------------------
// Errors

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation { .. } | Error::Io(_) => 2,
        Error::Capacity { .. } => 3,
        Error::Mode(_) => 4,
        Error::UndefinedOperation(_) => 5,
    }
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::Validation { .. } => "validation",
        Error::Io(_) => "io",
        Error::Capacity { .. } => "capacity",
        Error::Mode(_) => "mode",
        Error::UndefinedOperation(_) => "internal",
    }
}

#[derive(Serialize)]
struct Diagnostic<'a> {
    error: &'a str,
    code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<&'a str>,
    message: String,
}

fn report(error: &str, code: u8, path: Option<&str>, message: String) -> ExitCode {
    let d = Diagnostic {
        error,
        code,
        path,
        message: message.replace('\n', " "),
    };
    eprintln!("{}", to_json(&d));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let body = text.split("\n\nUsage:").next().unwrap_or_default();
            let msg = body
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(" ")
                .trim_start_matches("error: ")
                .to_string();
            return report("usage", 2, None, msg);
        }
    };
    let out = match &cli.command {
        Command::Closure(a) => cmd_closure(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match out {
        Ok(json) => {
            // A closed pipe downstream is not an error of this command.
            let _ = writeln!(std::io::stdout().lock(), "{json}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let path = match &e {
                Error::Validation { path, .. } => Some(path.as_str()),
                _ => None,
            };
            report(kind(&e), exit_code(&e), path, e.to_string())
        }
    }
}
