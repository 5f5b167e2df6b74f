//! Command-line front end.
//!
//! Exit codes: 0 success, 2 bad input or flags, 3 computation error,
//! 4 plan or result mismatch.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde_json::json;

use crate::error::Error;
use crate::experiments::{run_fig1_sweep, run_table3, to_json, write_csv, RatioReport};
use crate::pipeline::{multiply, reduce, verify, Method};
use crate::poly::{format_poly, format_unipoly, parse_poly, parse_unipoly, MultiPoly, UniPoly};
use crate::reduce::Plan;
use crate::ring::RingSpec;
use crate::unimul::{multiply as uni_multiply, BackendChoice, BackendKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

const TABLE3_TUPLES: [[u64; 4]; 4] = [[100, 100, 100, 100], [70, 80, 90, 100], [40, 60, 80, 100], [10, 40, 70, 100]];

#[derive(Debug, Parser)]
#[command(name = "polyred", version, about = "Sparse multivariate polynomial multiplication by reduction to one variable")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct RingArgs {
    /// Work over GF(q) instead of the integers; q must be prime.
    #[arg(long)]
    pub modulus: Option<u64>,
    /// Number of variables; inferred from the largest index in the input if absent.
    #[arg(long)]
    pub nvars: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MethodArgs {
    /// sks, iks, crt, hybrid or direct.
    #[arg(long, default_value = "hybrid")]
    pub method: Method,
    /// Explicit pairwise coprime CRT bases (only with --method crt).
    #[arg(long, value_delimiter = ',')]
    pub bases: Option<Vec<u64>>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Multiply two polynomials read from files ("-" for stdin).
    Multiply {
        f: PathBuf,
        g: PathBuf,
        #[command(flatten)]
        method: MethodArgs,
        #[arg(long, default_value = "auto")]
        backend: BackendKind,
        #[command(flatten)]
        ring: RingArgs,
        /// Also print the statistics as JSON.
        #[arg(long)]
        stats: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Print the univariate images of f and g and the plan that inverts them.
    Reduce {
        f: PathBuf,
        g: PathBuf,
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        ring: RingArgs,
        /// Also print the product of the two images.
        #[arg(long)]
        product: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Map a univariate polynomial back to n variables with a plan.
    Recover {
        h: PathBuf,
        /// Plan record, e.g. "method=iks n=3 exponents=1,16,256".
        #[arg(long, conflicts_with = "plan_file", required_unless_present = "plan_file")]
        plan: Option<String>,
        /// File holding a plan record, such as the output of `reduce`.
        #[arg(long)]
        plan_file: Option<PathBuf>,
        #[arg(long)]
        modulus: Option<u64>,
    },
    /// Check the product against direct multiplication.
    Verify {
        f: PathBuf,
        g: PathBuf,
        /// A method name, or "all" for the four reductions and direct.
        #[arg(long, default_value = "all")]
        method: String,
        #[arg(long, value_delimiter = ',')]
        bases: Option<Vec<u64>>,
        #[arg(long, default_value = "auto")]
        backend: BackendKind,
        #[command(flatten)]
        ring: RingArgs,
    },
    /// Degree-ratio experiments.
    #[command(subcommand)]
    Bench(Bench),
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Random monomials per polynomial before merging.
    #[arg(long, default_value_t = 10_000)]
    pub terms: usize,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub modulus: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Bench {
    /// Fully random instances, one row group per degree tuple.
    Table3 {
        /// Degree tuple such as 10,40,70,100; repeatable.
        #[arg(long)]
        tuple: Vec<String>,
        #[command(flatten)]
        common: BenchArgs,
    },
    /// Partially random instances with |k_1 - k_2| <= L, sweeping L.
    Sweep {
        #[arg(long, default_value = "100,100,100,100")]
        tuple: String,
        /// Inclusive range a..b or a single value.
        #[arg(long = "L", default_value = "1..64")]
        l: String,
        #[command(flatten)]
        common: BenchArgs,
    },
}

/// Failure of a command with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }

    fn compute(e: Error) -> Self {
        let code = match e {
            Error::NegativeExponent | Error::ExponentOutOfRange => EXIT_MISMATCH,
            _ => EXIT_COMPUTE,
        };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = Result<(), Failure>;

fn io_fail(e: io::Error) -> Failure {
    Failure { code: EXIT_COMPUTE, message: format!("write failed: {e}") }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| Failure::input(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
    }
}

fn ring_of(modulus: Option<u64>) -> Result<RingSpec, Failure> {
    match modulus {
        None => Ok(RingSpec::Integers),
        Some(q) => RingSpec::prime_field(q).map_err(|e| Failure::input(e.to_string())),
    }
}

/// Largest `N` in any `xN` token, at least 1.
fn infer_nvars(texts: &[&str]) -> usize {
    let mut best = 1;
    for t in texts {
        let b = t.as_bytes();
        for (i, &c) in b.iter().enumerate() {
            if c == b'x' {
                let digits: String = b[i + 1..].iter().take_while(|d| d.is_ascii_digit()).map(|&d| d as char).collect();
                if let Ok(v) = digits.parse::<usize>() {
                    best = best.max(v);
                }
            }
        }
    }
    best
}

fn load_pair(f: &Path, g: &Path, ring: &RingArgs) -> Result<(MultiPoly, MultiPoly), Failure> {
    let rs = ring_of(ring.modulus)?;
    let (tf, tg) = (read_input(f)?, read_input(g)?);
    let n = ring.nvars.unwrap_or_else(|| infer_nvars(&[&tf, &tg]));
    let parse = |text: &str, path: &Path| parse_poly(text, n, rs).map_err(|e| Failure::input(format!("{}: {e}", path.display())));
    Ok((parse(&tf, f)?, parse(&tg, g)?))
}

fn method_of(args: &MethodArgs) -> Result<Method, Failure> {
    match (&args.method, &args.bases) {
        (Method::Crt { .. }, Some(b)) => Ok(Method::Crt { bases: Some(b.iter().map(|&x| BigUint::from(x)).collect()) }),
        (_, Some(_)) => Err(Failure::input("--bases requires --method crt")),
        (m, None) => Ok(m.clone()),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_multiply(
    f: &Path,
    g: &Path,
    method: &MethodArgs,
    backend: BackendKind,
    ring: &RingArgs,
    stats: bool,
    format: Format,
    out: &mut dyn Write,
) -> CmdResult {
    let (f, g) = load_pair(f, g, ring)?;
    let method = method_of(method)?;
    let (h, st) = multiply(&f, &g, &method, &BackendChoice::new(backend)).map_err(Failure::compute)?;
    match format {
        Format::Json => {
            let v = json!({ "h": format_poly(&h), "stats": st.to_json() });
            writeln!(out, "{v}").map_err(io_fail)
        }
        _ => {
            writeln!(out, "{}", format_poly(&h)).map_err(io_fail)?;
            if stats {
                writeln!(out, "{}", st.to_json()).map_err(io_fail)?;
            }
            Ok(())
        }
    }
}

fn cmd_reduce(f: &Path, g: &Path, method: &MethodArgs, ring: &RingArgs, product: bool, format: Format, out: &mut dyn Write) -> CmdResult {
    let (f, g) = load_pair(f, g, ring)?;
    let method = method_of(method)?;
    if method == Method::Direct {
        return Err(Failure::input("the direct method has no reduction; pick sks, iks, crt or hybrid"));
    }
    let r = reduce(&f, &g, &method).map_err(Failure::compute)?;
    let h_x = if product { Some(uni_multiply(&r.f_x, &r.g_x, &BackendChoice::default()).map_err(Failure::compute)?) } else { None };
    let plan = r.plan.to_record();
    match format {
        Format::Json => {
            let v = json!({
                "f_x": format_unipoly(&r.f_x),
                "g_x": format_unipoly(&r.g_x),
                "h_x": h_x.as_ref().map(format_unipoly),
                "plan": plan,
            });
            writeln!(out, "{v}").map_err(io_fail)
        }
        _ => {
            writeln!(out, "f_x = {}", format_unipoly(&r.f_x)).map_err(io_fail)?;
            writeln!(out, "g_x = {}", format_unipoly(&r.g_x)).map_err(io_fail)?;
            if let Some(h) = &h_x {
                writeln!(out, "h_x = {}", format_unipoly(h)).map_err(io_fail)?;
            }
            writeln!(out, "plan = {plan}").map_err(io_fail)
        }
    }
}

/// Accepts a bare record or any text with a `plan = ...` or `method=...` line.
fn extract_plan(text: &str) -> &str {
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("plan") {
            if let Some(rec) = rest.trim_start().strip_prefix('=') {
                return rec.trim();
            }
        }
        if line.starts_with("method=") {
            return line;
        }
    }
    text.trim()
}

fn cmd_recover(h: &Path, plan: Option<&str>, plan_file: Option<&Path>, modulus: Option<u64>, out: &mut dyn Write) -> CmdResult {
    let rs = ring_of(modulus)?;
    let record = match (plan, plan_file) {
        (Some(p), _) => p.to_string(),
        (None, Some(path)) => read_input(path)?,
        (None, None) => return Err(Failure::input("either --plan or --plan-file is required")),
    };
    let plan = Plan::from_record(extract_plan(&record)).map_err(|e| Failure::input(e.to_string()))?;
    let text = read_input(h)?;
    // accept the `h_x = ...` line printed by `reduce --product`
    let body = text.lines().find_map(|l| l.trim().strip_prefix("h_x").and_then(|r| r.trim_start().strip_prefix('='))).unwrap_or(&text);
    let h_x: UniPoly = parse_unipoly(body, rs).map_err(|e| Failure::input(format!("{}: {e}", h.display())))?;
    let poly = plan.recover(&h_x).map_err(|e| Failure { code: EXIT_MISMATCH, message: e.to_string() })?;
    writeln!(out, "{}", format_poly(&poly)).map_err(io_fail)
}

fn cmd_verify(
    f: &Path,
    g: &Path,
    method: &str,
    bases: Option<&[u64]>,
    backend: BackendKind,
    ring: &RingArgs,
    out: &mut dyn Write,
) -> CmdResult {
    let (f, g) = load_pair(f, g, ring)?;
    let crt_bases = bases.map(|b| b.iter().map(|&x| BigUint::from(x)).collect::<Vec<_>>());
    let methods = if method == "all" {
        vec![Method::Sks, Method::Iks, Method::Crt { bases: crt_bases }, Method::Hybrid, Method::Direct]
    } else {
        let m = method.parse::<Method>().map_err(Failure::input)?;
        vec![method_of(&MethodArgs { method: m, bases: bases.map(<[u64]>::to_vec) })?]
    };
    let mut all_ok = true;
    for m in &methods {
        let v = verify(&f, &g, m, &BackendChoice::new(backend)).map_err(Failure::compute)?;
        all_ok &= v.ok;
        writeln!(out, "{}: {v}", m.name()).map_err(io_fail)?;
    }
    if all_ok {
        Ok(())
    } else {
        Err(Failure { code: EXIT_MISMATCH, message: "verification failed".into() })
    }
}

fn parse_tuple(s: &str) -> Result<Vec<u64>, Failure> {
    let t: Vec<u64> = s
        .split(',')
        .map(|x| x.trim().parse::<u64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::input(format!("bad degree tuple `{s}`")))?;
    if t.is_empty() || t.contains(&0) {
        return Err(Failure::input(format!("degree tuple `{s}` needs positive entries")));
    }
    Ok(t)
}

fn parse_range(s: &str) -> Result<Vec<u64>, Failure> {
    let bad = || Failure::input(format!("bad L range `{s}` (expected a..b or a single value)"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse::<u64>().map_err(|_| bad())?, b.trim().parse::<u64>().map_err(|_| bad())?),
        None => {
            let v = s.trim().parse::<u64>().map_err(|_| bad())?;
            (v, v)
        }
    };
    if a == 0 || a > b {
        return Err(bad());
    }
    Ok((a..=b).collect())
}

fn emit_reports(reports: &[RatioReport], args: &BenchArgs, out: &mut dyn Write) -> CmdResult {
    let mut buf = Vec::new();
    match args.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, &to_json(reports)).map_err(|e| Failure::input(e.to_string()))?;
            buf.push(b'\n');
        }
        Format::Csv => write_csv(reports, &mut buf).map_err(|e| Failure::input(e.to_string()))?,
        Format::Text => {
            for r in reports {
                let t: Vec<String> = r.degrees.iter().map(ToString::to_string).collect();
                let l = r.l.map_or_else(|| "-".to_string(), |l| l.to_string());
                buf.extend(
                    format!(
                        "tuple=({}) L={l} T={} trials={} ratio_iks={:.4} ratio_hr={:.4} pred_iks={:.4} pred_hr={:.4}\n",
                        t.join(","),
                        r.terms,
                        r.trials.len(),
                        r.mean_ratio_iks,
                        r.mean_ratio_hr,
                        r.mean_pred_iks,
                        r.mean_pred_hr
                    )
                    .bytes(),
                );
            }
        }
    }
    match &args.out {
        Some(path) => fs::write(path, buf).map_err(|e| Failure::input(format!("{}: {e}", path.display()))),
        None => out.write_all(&buf).map_err(io_fail),
    }
}

fn cmd_bench(bench: &Bench, out: &mut dyn Write) -> CmdResult {
    match bench {
        Bench::Table3 { tuple, common } => {
            let tuples = if tuple.is_empty() {
                TABLE3_TUPLES.iter().map(|t| t.to_vec()).collect()
            } else {
                tuple.iter().map(|t| parse_tuple(t)).collect::<Result<Vec<_>, _>>()?
            };
            let ring = ring_of(common.modulus)?;
            let reports = run_table3(&tuples, common.terms, common.trials, common.seed, ring).map_err(|e| Failure::input(e.to_string()))?;
            emit_reports(&reports, common, out)
        }
        Bench::Sweep { tuple, l, common } => {
            let tuple = parse_tuple(tuple)?;
            let ls = parse_range(l)?;
            let ring = ring_of(common.modulus)?;
            let reports =
                run_fig1_sweep(&tuple, &ls, common.terms, common.trials, common.seed, ring).map_err(|e| Failure::input(e.to_string()))?;
            emit_reports(&reports, common, out)
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> CmdResult {
    match &cli.command {
        Command::Multiply { f, g, method, backend, ring, stats, format } => {
            cmd_multiply(f, g, method, *backend, ring, *stats, *format, out)
        }
        Command::Reduce { f, g, method, ring, product, format } => cmd_reduce(f, g, method, ring, *product, *format, out),
        Command::Recover { h, plan, plan_file, modulus } => cmd_recover(h, plan.as_deref(), plan_file.as_deref(), *modulus, out),
        Command::Verify { f, g, method, bases, backend, ring } => cmd_verify(f, g, method, bases.as_deref(), *backend, ring, out),
        Command::Bench(b) => cmd_bench(b, out),
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nvars_inference() {
        assert_eq!(infer_nvars(&["x1^7*x2^7*x3^7", "x2^3"]), 3);
        assert_eq!(infer_nvars(&["5", ""]), 1);
        assert_eq!(infer_nvars(&["x12 + x1"]), 12);
    }

    #[test]
    fn ranges_and_tuples() {
        assert_eq!(parse_range("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_range("7").unwrap(), vec![7]);
        assert!(parse_range("0..3").is_err());
        assert!(parse_range("5..2").is_err());
        assert_eq!(parse_tuple("10,40,70,100").unwrap(), vec![10, 40, 70, 100]);
        assert!(parse_tuple("10,0").is_err());
        assert!(parse_tuple("a,b").is_err());
    }

    #[test]
    fn plan_extraction() {
        let text = "f_x = x^1911\ng_x = x^2184\nplan = method=iks n=3 exponents=1,16,256\n";
        assert_eq!(extract_plan(text), "method=iks n=3 exponents=1,16,256");
        assert_eq!(extract_plan("method=sks n=1 base=3\n"), "method=sks n=1 base=3");
    }

    #[test]
    fn usage_errors_exit_2() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["polyred", "multiply"], &mut o, &mut e), EXIT_INPUT);
        assert_eq!(run(["polyred", "--help"], &mut o, &mut e), EXIT_OK);
    }
}
