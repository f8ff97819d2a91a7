//! Randomized property suites. Each suite draws its instances from its own seeded stream,
//! so a suite's report depends only on `(suite, trials, seed)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::certify::{
    certify_order, find_order_violation, verify_classical, verify_sandwich_pointwise, CertifyOptions, ClassicalParams,
    ClassicalStatement, DEFAULT_TOL,
};
use crate::error::{Error, Result};
use crate::gaps::{build_gap_problem, solve_bruteforce, solve_multistart, GapKind, GapProblem, SolverOptions};
use crate::hermitian::{calc, dominated_pair_in, HermitianMatrix};
use crate::maps::{unital_family_from, MapFamily};
use crate::sampling::{self, random_hermitian_in, random_unit_vector, SeededRng};
use crate::scalarfn::{Interval, Monotonicity, ScalarFunction};

pub const GRADIENT_TOL: f64 = 1e-12;
pub const SANDWICH_TOL: f64 = 1e-8;
pub const NONNEGATIVE_TOL: f64 = 1e-10;
pub const AGREEMENT_TOL: f64 = 1e-5;
pub const ONE_SIDED_TOL: f64 = 1e-7;
pub const ORACLE_SAMPLES: usize = 20_000;
pub const SANDWICH_VECTORS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Gradient,
    Sandwich,
    Chebyshev,
    Eta,
    Gamma,
    Classical,
    Violation,
    Solver,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Gradient,
        Suite::Sandwich,
        Suite::Chebyshev,
        Suite::Eta,
        Suite::Gamma,
        Suite::Classical,
        Suite::Violation,
        Suite::Solver,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Gradient => "gradient",
            Suite::Sandwich => "sandwich",
            Suite::Chebyshev => "chebyshev",
            Suite::Eta => "eta",
            Suite::Gamma => "gamma",
            Suite::Classical => "classical",
            Suite::Violation => "violation",
            Suite::Solver => "solver",
        }
    }

    /// Trial count used when none is given.
    pub fn default_trials(&self) -> usize {
        match self {
            Suite::Gradient => 10_000,
            Suite::Sandwich => 500,
            Suite::Chebyshev => 1000,
            Suite::Eta => 200,
            Suite::Gamma => 200,
            Suite::Classical => 200,
            Suite::Violation => 10_000,
            Suite::Solver => 100,
        }
    }

    fn stream(&self) -> u64 {
        Suite::ALL.iter().position(|s| s == self).unwrap() as u64
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| Error::Parse(format!("unknown suite '{s}'")))
    }
}

/// Outcome of one suite. `worst` is the smallest margin seen, where a margin is the amount
/// by which a check cleared its bound (negative beyond `-tol` means a failure).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub trials: usize,
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
    pub worst: f64,
    pub tol: f64,
    pub first_failure: Option<String>,
}

impl SuiteReport {
    fn new(suite: Suite, trials: usize, tol: f64) -> Self {
        Self { suite, trials, checks: 0, passed: 0, failed: 0, worst: f64::INFINITY, tol, first_failure: None }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0 && self.checks > 0
    }

    fn record(&mut self, margin: f64, what: impl FnOnce() -> String) {
        self.checks += 1;
        if margin.is_nan() || margin < -self.tol {
            self.failed += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(what());
            }
        } else {
            self.passed += 1;
        }
        if margin.is_nan() || margin < self.worst {
            self.worst = margin;
        }
    }

    fn error(&mut self, e: Error, what: &str) {
        self.checks += 1;
        self.failed += 1;
        if self.first_failure.is_none() {
            self.first_failure = Some(format!("{what}: {e}"));
        }
    }
}

/// One representative of every function family, with both default and widened domains.
pub fn family_representatives() -> Vec<ScalarFunction> {
    vec![
        ScalarFunction::power(2.0).unwrap(),
        ScalarFunction::power(2.0).unwrap().with_domain(Interval::real_line()).unwrap(),
        ScalarFunction::power(4.0).unwrap().with_domain(Interval::real_line()).unwrap(),
        ScalarFunction::power(3.0).unwrap(),
        ScalarFunction::power(1.5).unwrap(),
        ScalarFunction::power(0.0).unwrap(),
        ScalarFunction::power(-0.5).unwrap(),
        ScalarFunction::power(-1.0).unwrap(),
        ScalarFunction::power(-2.0).unwrap(),
        ScalarFunction::exp(),
        ScalarFunction::neglog(),
        ScalarFunction::affine(2.0, -1.0).unwrap(),
        ScalarFunction::affine(-1.5, 0.5).unwrap(),
    ]
}

/// A random admissible function from any family.
pub fn random_function<R: Rng + ?Sized>(rng: &mut R) -> ScalarFunction {
    match rng.random_range(0..7) {
        0 => ScalarFunction::power(rng.random_range(1.0..4.0)).unwrap(),
        1 => {
            let p = [2.0, 4.0][rng.random_range(0..2)];
            ScalarFunction::power(p).unwrap().with_domain(Interval::real_line()).unwrap()
        }
        2 => ScalarFunction::power(rng.random_range(-2.0..=0.0)).unwrap(),
        3 => ScalarFunction::exp(),
        4 => ScalarFunction::neglog(),
        5 => ScalarFunction::affine(rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.0)).unwrap(),
        _ => ScalarFunction::power(rng.random_range(1..=3) as f64).unwrap(),
    }
}

fn random_function_where<R: Rng + ?Sized>(rng: &mut R, keep: impl Fn(&ScalarFunction) -> bool) -> ScalarFunction {
    loop {
        let f = random_function(rng);
        if keep(&f) {
            return f;
        }
    }
}

fn operands(rng: &mut SeededRng, count: usize, n: usize, f: &ScalarFunction) -> Vec<HermitianMatrix> {
    let (lo, hi) = f.domain().finite_window();
    (0..count).map(|_| random_hermitian_in(rng, n, lo, hi)).collect()
}

/// A unital family `C^n -> C^k` with `count` maps and `n` drawn from `n_range`.
fn random_family(rng: &mut SeededRng, k: usize, n_lo: usize, n_hi: usize) -> MapFamily {
    let count = rng.random_range(1..=3);
    let n_min = k.div_ceil(count).max(n_lo);
    let n = rng.random_range(n_min..=n_hi.max(n_min));
    unital_family_from(rng, count, n, k)
}

fn gradient(trials: usize, seed: u64) -> SuiteReport {
    let mut rep = SuiteReport::new(Suite::Gradient, trials, 0.0);
    let mut rng = sampling::stream_rng(seed, Suite::Gradient.stream());
    for f in family_representatives() {
        let (lo, hi) = f.domain().finite_window();
        for _ in 0..trials {
            let s = rng.random_range(lo..=hi);
            let t = rng.random_range(lo..=hi);
            let (fs, ft, ds) = (f.eval(s).unwrap(), f.eval(t).unwrap(), f.deriv(s).unwrap());
            let scale = 1.0 + fs.abs() + ft.abs() + (ds * (t - s)).abs();
            let margin = (ft - fs - ds * (t - s)) / scale + GRADIENT_TOL;
            rep.record(margin, || format!("{f}: s={s}, t={t}"));
        }
    }
    rep
}

fn sandwich(trials: usize, seed: u64) -> SuiteReport {
    let mut rep = SuiteReport::new(Suite::Sandwich, trials, SANDWICH_TOL);
    let mut rng = sampling::stream_rng(seed, Suite::Sandwich.stream());
    for trial in 0..trials {
        let f = random_function(&mut rng);
        let k = rng.random_range(2..=6);
        let fam = random_family(&mut rng, k, 2, 6);
        let a = operands(&mut rng, fam.len(), fam.input_dim(), &f);
        let b = operands(&mut rng, fam.len(), fam.input_dim(), &f);
        for _ in 0..SANDWICH_VECTORS {
            let x = random_unit_vector(&mut rng, k);
            match verify_sandwich_pointwise(&fam, &a, &b, &f, &x, SANDWICH_TOL) {
                Ok(s) => {
                    let margin = (s.middle - s.lower).min(s.upper - s.middle);
                    rep.record(margin, || format!("trial {trial}, {f}: {s:?}"));
                }
                Err(e) => rep.error(e, &format!("trial {trial}, {f}")),
            }
        }
    }
    rep
}

fn nonnegative_gap(rep: &mut SuiteReport, p: Result<GapProblem>, opts: &SolverOptions, what: impl Fn() -> String) {
    match p.and_then(|p| solve_multistart(&p, opts)) {
        Ok(r) => rep.record(r.value, || format!("{}: value {}", what(), r.value)),
        Err(e) => rep.error(e, &what()),
    }
}

fn chebyshev(trials: usize, seed: u64) -> SuiteReport {
    let mut rep = SuiteReport::new(Suite::Chebyshev, trials, NONNEGATIVE_TOL);
    let mut rng = sampling::stream_rng(seed, Suite::Chebyshev.stream());
    for trial in 0..trials {
        let f = random_function(&mut rng);
        let n = rng.random_range(1..=4);
        let a = operands(&mut rng, 1, n, &f);
        let opts = SolverOptions { seed: rng.random(), ..Default::default() };
        let p = build_gap_problem(GapKind::Chebyshev, &f, None, &a, &[]);
        nonnegative_gap(&mut rep, p, &opts, || format!("trial {trial}, {f}, n={n}"));
    }
    rep
}

fn eta(trials: usize, seed: u64) -> SuiteReport {
    let mut rep = SuiteReport::new(Suite::Eta, trials, NONNEGATIVE_TOL);
    let mut rng = sampling::stream_rng(seed, Suite::Eta.stream());
    for trial in 0..trials {
        let f = random_function(&mut rng);
        let k = rng.random_range(1..=4);
        let fam = random_family(&mut rng, k, 1, 4);
        let a = operands(&mut rng, fam.len(), fam.input_dim(), &f);
        let opts = SolverOptions { seed: rng.random(), ..Default::default() };
        let p = build_gap_problem(GapKind::Eta, &f, Some(&fam), &a, &[]);
        nonnegative_gap(&mut rep, p, &opts, || format!("trial {trial}, {f}, k={k}"));
    }
    rep
}

fn gamma(trials: usize, seed: u64) -> SuiteReport {
    let mut rep = SuiteReport::new(Suite::Gamma, trials, 0.0);
    let mut rng = sampling::stream_rng(seed, Suite::Gamma.stream());
    for trial in 0..trials {
        let n = rng.random_range(1..=4);
        let mode = trial % 3;
        let f = match mode {
            0 => random_function(&mut rng),
            1 => random_function_where(&mut rng, |f| f.monotonicity() == Monotonicity::Increasing),
            _ => random_function_where(&mut rng, |f| f.monotonicity() == Monotonicity::Decreasing),
        };
        let (lo, hi) = f.domain().finite_window();
        let (a, b) = match mode {
            0 => (random_hermitian_in(&mut rng, n, lo, hi), random_hermitian_in(&mut rng, n, lo, hi)),
            1 => {
                let (big, small) = dominated_pair_in(&mut rng, n, lo, hi);
                (small, big)
            }
            _ => dominated_pair_in(&mut rng, n, lo, hi),
        };
        let opts =
            CertifyOptions { solver: SolverOptions { seed: rng.random(), ..Default::default() }, tol: DEFAULT_TOL };
        match certify_order(&a, &b, &f, &opts) {
            Ok(c) => {
                let what = || format!("trial {trial}, {f}, mode {mode}: slack {}, tol {}", c.slack, c.tol);
                // normalized so that both checks fail exactly when the margin drops below 0
                rep.record(c.slack + c.tol, what);
                if mode != 0 {
                    let g = c.constant("gamma").unwrap();
                    rep.record(g + NONNEGATIVE_TOL, || format!("trial {trial}, {f}, mode {mode}: gamma {g}"));
                }
            }
            Err(e) => rep.error(e, &format!("trial {trial}, {f}")),
        }
    }
    rep
}

fn classical(trials: usize, seed: u64) -> SuiteReport {
    let mut rep = SuiteReport::new(Suite::Classical, trials, 0.0);
    let mut rng = sampling::stream_rng(seed, Suite::Classical.stream());
    let check = |rep: &mut SuiteReport,
                 st: ClassicalStatement,
                 a: &HermitianMatrix,
                 b: &HermitianMatrix,
                 params: ClassicalParams,
                 what: String| {
        match verify_classical(st, a, b, &params, DEFAULT_TOL) {
            Ok(c) => rep.record(c.slack + c.tol, || format!("{what}: slack {}, tol {}", c.slack, c.tol)),
            Err(e) => rep.error(e, &what),
        }
    };

    let witness_b = HermitianMatrix::from_real_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
    let witness_a = HermitianMatrix::from_real_rows(&[vec![2.0, 1.0], vec![1.0, 1.0]]).unwrap();
    for p in [1.5, 2.0, 3.0] {
        let params = ClassicalParams { p: Some(p), ..Default::default() };
        check(&mut rep, ClassicalStatement::Furuta, &witness_a, &witness_b, params, format!("furuta witness, p={p}"));
    }

    for trial in 0..trials {
        let n = rng.random_range(1..=5);
        let m = rng.random_range(0.2..1.0);
        let big_m = m + rng.random_range(0.5..3.0);

        let (a, b) = dominated_pair_in(&mut rng, n, m, big_m);
        let p = [1.5, 2.0, 3.0][trial % 3];
        let params = ClassicalParams { p: Some(p), ..Default::default() };
        check(&mut rep, ClassicalStatement::Furuta, &a, &b, params, format!("furuta trial {trial}, p={p}"));

        let (big, small) = dominated_pair_in(&mut rng, n, 0.0, big_m);
        let p = [0.3, 0.5, 0.9][trial % 3];
        let params = ClassicalParams { p: Some(p), ..Default::default() };
        check(
            &mut rep,
            ClassicalStatement::LownerHeinz,
            &small,
            &big,
            params,
            format!("lowner-heinz trial {trial}, p={p}"),
        );

        for (st, want) in [
            (ClassicalStatement::AlphaBetaIncreasing, Monotonicity::Increasing),
            (ClassicalStatement::AlphaBetaDecreasing, Monotonicity::Decreasing),
        ] {
            let f = random_function_where(&mut rng, |f| {
                f.monotonicity() == want && f.domain().contains(m) && f.domain().contains(big_m)
            });
            let alpha = rng.random_range(0.25..3.0);
            let (a, b) = dominated_pair_in(&mut rng, n, m, big_m);
            let params =
                ClassicalParams { f: Some(f), alpha: Some(alpha), interval: Some((m, big_m)), ..Default::default() };
            check(&mut rep, st, &a, &b, params, format!("{st:?} trial {trial}, {f}, alpha={alpha}"));
        }
    }
    rep
}

fn violation(trials: usize, seed: u64) -> SuiteReport {
    let mut rep = SuiteReport::new(Suite::Violation, trials, 0.0);
    let cube = ScalarFunction::power(3.0).unwrap();
    match find_order_violation(&cube, 2, trials, seed) {
        Some(v) => rep.record(-v.witness, || unreachable!()),
        None => rep.record(f64::NEG_INFINITY, || format!("no violation in {trials} trials")),
    }
    let a = HermitianMatrix::from_real_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
    let b = HermitianMatrix::from_real_rows(&[vec![2.0, 1.0], vec![1.0, 1.0]]).unwrap();
    let order = b.sub(&a).unwrap().min_eigenvalue();
    rep.record(order, || format!("witness pair is not ordered: {order}"));
    let w = calc(&cube, &b).unwrap().sub(&calc(&cube, &a).unwrap()).unwrap().min_eigenvalue();
    rep.record(-w, || format!("witness lambda_min {w} is not negative"));
    rep
}

fn random_gap_problem(rng: &mut SeededRng, kind: GapKind, k: usize) -> Result<(GapProblem, String)> {
    let f = random_function(rng);
    let (p, label) = match kind {
        GapKind::Gamma | GapKind::Chebyshev => {
            let a = operands(rng, 1, k, &f);
            let b = operands(rng, 1, k, &f);
            (build_gap_problem(kind, &f, None, &a, &b)?, format!("{} {f} k={k}", kind.name()))
        }
        _ => {
            let fam = random_family(rng, k, 1, 3);
            let a = operands(rng, fam.len(), fam.input_dim(), &f);
            let b = operands(rng, fam.len(), fam.input_dim(), &f);
            let label = format!("{} {f} k={k} maps={} n={}", kind.name(), fam.len(), fam.input_dim());
            (build_gap_problem(kind, &f, Some(&fam), &a, &b)?, label)
        }
    };
    Ok((p, label))
}

fn solver(trials: usize, seed: u64) -> SuiteReport {
    let mut rep = SuiteReport::new(Suite::Solver, trials, 0.0);
    let mut rng = sampling::stream_rng(seed, Suite::Solver.stream());
    let high_dim = trials.div_ceil(10);
    for kind in GapKind::ALL {
        for trial in 0..trials + high_dim {
            let small = trial < trials;
            let k = if small { rng.random_range(1..=3) } else { rng.random_range(4..=6) };
            let opts = SolverOptions { seed: rng.random(), ..Default::default() };
            let oracle_seed = rng.random();
            let (p, label) = match random_gap_problem(&mut rng, kind, k) {
                Ok(x) => x,
                Err(e) => {
                    rep.error(e, kind.name());
                    continue;
                }
            };
            let ms = solve_multistart(&p, &opts);
            let bf = solve_bruteforce(&p, ORACLE_SAMPLES, oracle_seed);
            match (ms, bf) {
                (Ok(ms), Ok(bf)) => {
                    let diff = ms.value - bf.value;
                    let margin = if small { AGREEMENT_TOL - diff.abs() } else { ONE_SIDED_TOL + diff };
                    rep.record(margin, || format!("{label}: multistart {} vs oracle {}", ms.value, bf.value));
                }
                (Err(e), _) | (_, Err(e)) => rep.error(e, &label),
            }
        }
    }
    rep
}

/// Runs `suite` with `trials` instances (the suite default when `None`).
pub fn run_suite(suite: Suite, trials: Option<usize>, seed: u64) -> SuiteReport {
    let trials = trials.unwrap_or_else(|| suite.default_trials());
    match suite {
        Suite::Gradient => gradient(trials, seed),
        Suite::Sandwich => sandwich(trials, seed),
        Suite::Chebyshev => chebyshev(trials, seed),
        Suite::Eta => eta(trials, seed),
        Suite::Gamma => gamma(trials, seed),
        Suite::Classical => classical(trials, seed),
        Suite::Violation => violation(trials, seed),
        Suite::Solver => solver(trials, seed),
    }
}

pub fn run_all(trials: Option<usize>, seed: u64) -> Vec<SuiteReport> {
    Suite::ALL.into_iter().map(|s| run_suite(s, trials, seed)).collect()
}
