//! `loewner-cert`: constants, gap solving, certificates, counterexample search and property
//! suites from the command line.
//!
//! [`run`] does all the work and returns the exit code with the text destined for stdout and
//! stderr, so the binary is a thin wrapper and tests can drive it in-process.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use loewner_core::certify::{
    certify_jensen, certify_order, find_order_violation, verify_classical, Certificate, CertifyOptions,
    ClassicalParams, FileHash, SolverMeta, Statement, DEFAULT_TOL,
};
use loewner_core::constants::{beta, kantorovich};
use loewner_core::gaps::{build_gap_problem, solve_bruteforce, solve_multistart, GapKind, SolverOptions};
use loewner_core::io::{read_family, read_matrix, MatrixFile};
use loewner_core::suites::{run_suite, Suite, SuiteReport, AGREEMENT_TOL, ORACLE_SAMPLES};
use loewner_core::{json, Error, HermitianMatrix, ScalarFunction};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Clone, Parser)]
#[command(name = "loewner-cert", version, about = "Operator-order constants and eigenvalue-slack certificates")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Print a JSON report instead of text
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Certify one of the order statements by eigenvalue slack
    Certify(CertifyArgs),
    /// Solve a gap problem, optionally checking against the brute-force oracle
    Gap(GapArgs),
    /// Generalized Kantorovich constant K(m, M, p)
    Kantorovich {
        #[arg(long, allow_hyphen_values = true)]
        m: f64,
        #[arg(long = "M", allow_hyphen_values = true)]
        big_m: f64,
        #[arg(long, allow_hyphen_values = true)]
        p: f64,
    },
    /// max over [m, M] of a_f t + b_f - alpha f(t)
    Beta {
        #[arg(long)]
        f: String,
        #[arg(long, allow_hyphen_values = true)]
        m: f64,
        #[arg(long = "M", allow_hyphen_values = true)]
        big_m: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
    },
    /// Random search for A <= B with f(A) not <= f(B)
    Violation {
        #[arg(long, default_value = "power:3")]
        f: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Run randomized property suites
    Fuzz {
        /// Suite name or "all"
        #[arg(long, default_value = "all")]
        suite: String,
        /// Instances per suite (suite default when omitted)
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1e-10)]
    pub step_tol: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions { restarts: self.restarts, max_iter: self.max_iter, step_tol: self.step_tol, seed: self.seed }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub statement: String,
    #[arg(long)]
    pub f: Option<String>,
    /// Matrix file; repeat once per map for the Jensen statements
    #[arg(long = "A")]
    pub a: Vec<PathBuf>,
    #[arg(long = "B")]
    pub b: Vec<PathBuf>,
    /// Map family file
    #[arg(long)]
    pub maps: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<f64>,
    #[arg(long = "M", allow_hyphen_values = true)]
    pub big_m: Option<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GapArgs {
    /// gamma, delta, eta, theta, vartheta or chebyshev
    #[arg(long)]
    pub kind: String,
    #[arg(long)]
    pub f: String,
    #[arg(long = "A")]
    pub a: Vec<PathBuf>,
    #[arg(long = "B")]
    pub b: Vec<PathBuf>,
    #[arg(long)]
    pub maps: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Also run the brute-force oracle and report agreement
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, default_value_t = ORACLE_SAMPLES)]
    pub oracle_samples: usize,
}

/// Exit code and captured output of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(code: i32, stdout: String) -> Self {
        Self { code, stdout, stderr: String::new() }
    }

    fn error(e: &Error) -> Self {
        Self { code: EXIT_ERROR, stdout: String::new(), stderr: format!("error: {e}\n") }
    }
}

pub fn run(config: &RunConfig) -> Outcome {
    let result = match &config.command {
        Command::Certify(args) => run_certify(args, config.json),
        Command::Gap(args) => run_gap(args, config.json),
        Command::Kantorovich { m, big_m, p } => run_kantorovich(*m, *big_m, *p, config.json),
        Command::Beta { f, m, big_m, alpha } => run_beta(f, *m, *big_m, *alpha, config.json),
        Command::Violation { f, dim, trials, seed } => run_violation(f, *dim, *trials, *seed, config.json),
        Command::Fuzz { suite, trials, seed } => run_fuzz(suite, *trials, *seed, config.json),
    };
    result.unwrap_or_else(|e| Outcome::error(&e))
}

/// Parses `args` (including the program name) and runs them.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match RunConfig::try_parse_from(args) {
        Ok(config) => run(&config),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome { code, stdout: String::new(), stderr: text }
            } else {
                Outcome::ok(code, text)
            }
        }
    }
}

/// Shortest round-trip decimal, in exponent form outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn json_line<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = json::to_string(value);
    s.push('\n');
    s
}

fn parse_function(spec: &str) -> Result<ScalarFunction, Error> {
    spec.parse()
}

fn hash_file(path: &Path) -> Result<FileHash, Error> {
    let bytes = fs::read(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    Ok(FileHash { path: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) })
}

struct Loaded {
    a: Vec<HermitianMatrix>,
    b: Vec<HermitianMatrix>,
    hashes: Vec<FileHash>,
}

fn load(a: &[PathBuf], b: &[PathBuf], maps: Option<&PathBuf>) -> Result<Loaded, Error> {
    let mut hashes = Vec::new();
    let mut read_all = |paths: &[PathBuf]| -> Result<Vec<HermitianMatrix>, Error> {
        paths
            .iter()
            .map(|p| {
                hashes.push(hash_file(p)?);
                read_matrix(p)
            })
            .collect()
    };
    let a = read_all(a)?;
    let b = read_all(b)?;
    if let Some(m) = maps {
        hashes.push(hash_file(m)?);
    }
    Ok(Loaded { a, b, hashes })
}

fn exactly_one<'a>(name: &str, list: &'a [HermitianMatrix]) -> Result<&'a HermitianMatrix, Error> {
    match list {
        [x] => Ok(x),
        _ => Err(Error::BadDimensions(format!("expected exactly one --{name} matrix, got {}", list.len()))),
    }
}

fn require<T: Copy>(name: &str, v: Option<T>) -> Result<T, Error> {
    v.ok_or_else(|| Error::HypothesisViolated(format!("--{name} is required for this statement")))
}

fn certificate_text(c: &Certificate) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "statement: {}", c.statement);
    let _ = writeln!(s, "result: {}", if c.pass { "pass" } else { "fail" });
    let _ = writeln!(s, "slack: {}", num(c.slack));
    let _ = writeln!(s, "tol: {}", num(c.tol));
    for (k, v) in &c.constants {
        let _ = writeln!(s, "{k}: {}", num(*v));
    }
    if let Some(f) = &c.inputs.function {
        let _ = writeln!(s, "function: {f}");
    }
    if let Some(m) = &c.solver {
        let _ = writeln!(
            s,
            "solver: {} seed={} restarts={} iterations={} converged={}",
            m.solver, m.seed, m.restarts, m.iterations, m.converged
        );
    }
    for h in &c.inputs.file_hashes {
        let _ = writeln!(s, "sha256 {}: {}", h.path, h.sha256);
    }
    s
}

fn run_certify(args: &CertifyArgs, as_json: bool) -> Result<Outcome, Error> {
    let statement: Statement = args.statement.parse()?;
    let loaded = load(&args.a, &args.b, args.maps.as_ref())?;
    let f = args.f.as_deref().map(parse_function).transpose()?;
    let interval = match (args.m, args.big_m) {
        (Some(m), Some(big_m)) => Some((m, big_m)),
        (None, None) => None,
        _ => return Err(Error::HypothesisViolated("--m and --M must be given together".into())),
    };
    let opts = CertifyOptions { solver: args.solver.options(), tol: args.tol };

    let mut cert = if statement == Statement::GammaOrder {
        let f = require("f", f)?;
        certify_order(exactly_one("A", &loaded.a)?, exactly_one("B", &loaded.b)?, &f, &opts)?
    } else if let Some(kind) = statement.jensen_kind() {
        let f = require("f", f)?;
        let path = args
            .maps
            .as_ref()
            .ok_or_else(|| Error::HypothesisViolated("--maps is required for this statement".into()))?;
        let family = read_family(path)?;
        if loaded.a.len() != family.len() {
            return Err(Error::DimensionMismatch { expected: family.len(), found: loaded.a.len() });
        }
        certify_jensen(kind, &family, &loaded.a, &loaded.b, &f, &opts)?
    } else {
        let classical = statement.classical().expect("every statement is covered");
        let params = ClassicalParams { p: args.p, alpha: args.alpha, f, interval };
        verify_classical(classical, exactly_one("A", &loaded.a)?, exactly_one("B", &loaded.b)?, &params, args.tol)?
    };
    cert.inputs.file_hashes = loaded.hashes;

    let code = if cert.pass { EXIT_PASS } else { EXIT_FAIL };
    let out = if as_json { json_line(&cert) } else { certificate_text(&cert) };
    Ok(Outcome::ok(code, out))
}

#[derive(Serialize)]
struct Agreement {
    oracle_value: f64,
    difference: f64,
    tol: f64,
    agree: bool,
    samples: usize,
}

#[derive(Serialize)]
struct GapReport {
    kind: GapKind,
    function: String,
    value: f64,
    maximizer_re: Vec<f64>,
    maximizer_im: Vec<f64>,
    solver: SolverMeta,
    agreement: Option<Agreement>,
    file_hashes: Vec<FileHash>,
}

fn run_gap(args: &GapArgs, as_json: bool) -> Result<Outcome, Error> {
    let kind: GapKind = args.kind.parse()?;
    let f = parse_function(&args.f)?;
    let loaded = load(&args.a, &args.b, args.maps.as_ref())?;
    let family = args.maps.as_ref().map(read_family).transpose()?;
    let p = build_gap_problem(kind, &f, family.as_ref(), &loaded.a, &loaded.b)?;
    let opts = args.solver.options();
    let r = solve_multistart(&p, &opts)?;
    let agreement = if args.oracle {
        let o = solve_bruteforce(&p, args.oracle_samples, opts.seed)?;
        let difference = r.value - o.value;
        Some(Agreement {
            oracle_value: o.value,
            difference,
            tol: AGREEMENT_TOL,
            agree: difference.abs() <= AGREEMENT_TOL,
            samples: args.oracle_samples,
        })
    } else {
        None
    };
    let report = GapReport {
        kind,
        function: f.to_string(),
        value: r.value,
        maximizer_re: r.maximizer.iter().map(|z| z.re).collect(),
        maximizer_im: r.maximizer.iter().map(|z| z.im).collect(),
        solver: SolverMeta::from_run(&r, &opts),
        agreement,
        file_hashes: loaded.hashes,
    };
    let code = match &report.agreement {
        Some(a) if !a.agree => EXIT_FAIL,
        _ => EXIT_PASS,
    };
    if as_json {
        return Ok(Outcome::ok(code, json_line(&report)));
    }
    let mut s = String::new();
    let _ = writeln!(s, "{}: {}", kind.name(), num(report.value));
    let join = |v: &[f64]| v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" ");
    let _ = writeln!(s, "maximizer_re: {}", join(&report.maximizer_re));
    let _ = writeln!(s, "maximizer_im: {}", join(&report.maximizer_im));
    let m = &report.solver;
    let _ = writeln!(
        s,
        "solver: {} seed={} restarts={} iterations={} converged={}",
        m.solver, m.seed, m.restarts, m.iterations, m.converged
    );
    if let Some(a) = &report.agreement {
        let _ = writeln!(s, "oracle: {} difference: {} agree: {}", num(a.oracle_value), num(a.difference), a.agree);
    }
    Ok(Outcome::ok(code, s))
}

fn run_kantorovich(m: f64, big_m: f64, p: f64, as_json: bool) -> Result<Outcome, Error> {
    #[derive(Serialize)]
    struct Report {
        #[serde(rename = "K")]
        k: f64,
        m: f64,
        #[serde(rename = "M")]
        big_m: f64,
        p: f64,
    }
    let k = kantorovich(m, big_m, p)?;
    let out = if as_json { json_line(&Report { k, m, big_m, p }) } else { format!("{}\n", num(k)) };
    Ok(Outcome::ok(EXIT_PASS, out))
}

fn run_beta(f: &str, m: f64, big_m: f64, alpha: f64, as_json: bool) -> Result<Outcome, Error> {
    #[derive(Serialize)]
    struct Report {
        function: String,
        alpha: f64,
        beta: f64,
        argmax: f64,
        a_f: f64,
        b_f: f64,
        m: f64,
        #[serde(rename = "M")]
        big_m: f64,
    }
    let func = parse_function(f)?;
    let b = beta(&func, m, big_m, alpha)?;
    let out = if as_json {
        json_line(&Report {
            function: func.to_string(),
            alpha,
            beta: b.beta,
            argmax: b.argmax,
            a_f: b.chord.a_f,
            b_f: b.chord.b_f,
            m,
            big_m,
        })
    } else {
        format!("{}\n", num(b.beta))
    };
    Ok(Outcome::ok(EXIT_PASS, out))
}

fn run_violation(f: &str, dim: usize, trials: usize, seed: u64, as_json: bool) -> Result<Outcome, Error> {
    #[derive(Serialize)]
    struct Report {
        function: String,
        dim: usize,
        trials: usize,
        seed: u64,
        found: bool,
        trial: Option<usize>,
        witness: Option<f64>,
        #[serde(rename = "A")]
        a: Option<MatrixFile>,
        #[serde(rename = "B")]
        b: Option<MatrixFile>,
    }
    let func = parse_function(f)?;
    if dim == 0 {
        return Err(Error::BadDimensions("--dim must be positive".into()));
    }
    let v = find_order_violation(&func, dim, trials, seed);
    let report = Report {
        function: func.to_string(),
        dim,
        trials,
        seed,
        found: v.is_some(),
        trial: v.as_ref().map(|v| v.trial),
        witness: v.as_ref().map(|v| v.witness),
        a: v.as_ref().map(|v| MatrixFile::from_hermitian(&v.a)),
        b: v.as_ref().map(|v| MatrixFile::from_hermitian(&v.b)),
    };
    let code = if report.found { EXIT_PASS } else { EXIT_FAIL };
    if as_json {
        return Ok(Outcome::ok(code, json_line(&report)));
    }
    let mut s = String::new();
    match &v {
        Some(v) => {
            let _ = writeln!(s, "violation found at trial {}", v.trial);
            let _ = writeln!(s, "lambda_min(f(B) - f(A)): {}", num(v.witness));
            let _ = writeln!(s, "A: {}", json::to_string(&MatrixFile::from_hermitian(&v.a)));
            let _ = writeln!(s, "B: {}", json::to_string(&MatrixFile::from_hermitian(&v.b)));
        }
        None => {
            let _ = writeln!(s, "no violation in {trials} trials");
        }
    }
    Ok(Outcome::ok(code, s))
}

fn fuzz_table(reports: &[SuiteReport]) -> String {
    let mut s = String::new();
    let _ =
        writeln!(s, "{:<10} {:>7} {:>7} {:>7} {:>7} {:>24}", "suite", "trials", "checks", "passed", "failed", "worst");
    for r in reports {
        let _ = writeln!(
            s,
            "{:<10} {:>7} {:>7} {:>7} {:>7} {:>24}",
            r.suite.name(),
            r.trials,
            r.checks,
            r.passed,
            r.failed,
            num(r.worst)
        );
    }
    for r in reports {
        if let Some(f) = &r.first_failure {
            let _ = writeln!(s, "{} first failure: {f}", r.suite.name());
        }
    }
    let total: usize = reports.iter().map(|r| r.checks).sum();
    let passed: usize = reports.iter().map(|r| r.passed).sum();
    let _ = writeln!(s, "{passed}/{total} checks passed");
    s
}

fn run_fuzz(suite: &str, trials: Option<usize>, seed: u64, as_json: bool) -> Result<Outcome, Error> {
    #[derive(Serialize)]
    struct Report<'a> {
        seed: u64,
        pass: bool,
        suites: &'a [SuiteReport],
    }
    let suites: Vec<Suite> = if suite == "all" { Suite::ALL.to_vec() } else { vec![suite.parse()?] };
    let reports: Vec<SuiteReport> = suites.into_iter().map(|s| run_suite(s, trials, seed)).collect();
    let pass = reports.iter().all(SuiteReport::ok);
    let out = if as_json { json_line(&Report { seed, pass, suites: &reports }) } else { fuzz_table(&reports) };
    Ok(Outcome::ok(if pass { EXIT_PASS } else { EXIT_FAIL }, out))
}
