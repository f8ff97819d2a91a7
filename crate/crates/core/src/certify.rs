//! Eigenvalue-slack certificates for the order statements.
//!
//! A certificate asserts that some difference `X` is positive semidefinite and records
//! `slack = lambda_min(X)` together with every constant and solver setting that went into
//! `X`, so a reported gap constant can be reproduced bit for bit from its seed.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::constants::{beta, kantorovich};
use crate::error::{Error, Result};
use crate::gaps::{build_gap_problem, solve_multistart, GapKind, GapResult, SolverOptions};
use crate::hermitian::{calc, calc_symbol, dominated_pair_in, loewner_leq, HermitianMatrix, Symbol};
use crate::maps::{check_unital_family, MapFamily};
use crate::matrix;
use crate::sampling;
use crate::scalarfn::ScalarFunction;

/// Default absolute tolerance on eigenvalue slack, before norm scaling.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Threshold below which `find_order_violation` reports a witness.
pub const VIOLATION_THRESHOLD: f64 = -1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statement {
    GammaOrder,
    DeltaForward,
    EtaChoi,
    ThetaReverse,
    VarthetaReverse,
    Furuta,
    LownerHeinz,
    AlphaBetaIncreasing,
    AlphaBetaDecreasing,
}

impl Statement {
    pub const ALL: [Statement; 9] = [
        Statement::GammaOrder,
        Statement::DeltaForward,
        Statement::EtaChoi,
        Statement::ThetaReverse,
        Statement::VarthetaReverse,
        Statement::Furuta,
        Statement::LownerHeinz,
        Statement::AlphaBetaIncreasing,
        Statement::AlphaBetaDecreasing,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Statement::GammaOrder => "gamma-order",
            Statement::DeltaForward => "delta-forward",
            Statement::EtaChoi => "eta-choi",
            Statement::ThetaReverse => "theta-reverse",
            Statement::VarthetaReverse => "vartheta-reverse",
            Statement::Furuta => "furuta",
            Statement::LownerHeinz => "lowner-heinz",
            Statement::AlphaBetaIncreasing => "alpha-beta-increasing",
            Statement::AlphaBetaDecreasing => "alpha-beta-decreasing",
        }
    }

    pub fn jensen_kind(&self) -> Option<JensenKind> {
        match self {
            Statement::DeltaForward => Some(JensenKind::DeltaForward),
            Statement::EtaChoi => Some(JensenKind::EtaChoi),
            Statement::ThetaReverse => Some(JensenKind::ThetaReverse),
            Statement::VarthetaReverse => Some(JensenKind::VarthetaReverse),
            _ => None,
        }
    }

    pub fn classical(&self) -> Option<ClassicalStatement> {
        match self {
            Statement::Furuta => Some(ClassicalStatement::Furuta),
            Statement::LownerHeinz => Some(ClassicalStatement::LownerHeinz),
            Statement::AlphaBetaIncreasing => Some(ClassicalStatement::AlphaBetaIncreasing),
            Statement::AlphaBetaDecreasing => Some(ClassicalStatement::AlphaBetaDecreasing),
            _ => None,
        }
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Statement::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown statement '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct InputsDigest {
    pub dims: Vec<usize>,
    pub function: Option<String>,
    pub seeds: Vec<u64>,
    pub file_hashes: Vec<FileHash>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverMeta {
    pub solver: String,
    pub seed: u64,
    pub restarts: usize,
    pub max_iter: usize,
    pub step_tol: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SolverMeta {
    pub fn from_run(r: &GapResult, opts: &SolverOptions) -> Self {
        Self {
            solver: r.solver.name().to_string(),
            seed: r.seed,
            restarts: r.restarts,
            max_iter: opts.max_iter,
            step_tol: opts.step_tol,
            iterations: r.iterations,
            converged: r.converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub statement: Statement,
    pub inputs: InputsDigest,
    pub constants: BTreeMap<String, f64>,
    /// `lambda_min` of the difference asserted to be PSD.
    pub slack: f64,
    pub pass: bool,
    /// Effective tolerance after norm scaling.
    pub tol: f64,
    pub solver: Option<SolverMeta>,
}

impl Certificate {
    fn new(
        statement: Statement,
        inputs: InputsDigest,
        constants: BTreeMap<String, f64>,
        slack: f64,
        tol: f64,
        solver: Option<SolverMeta>,
    ) -> Self {
        Self { statement, inputs, constants, slack, pass: slack >= -tol, tol, solver }
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.get(name).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub solver: SolverOptions,
    pub tol: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { solver: SolverOptions::default(), tol: DEFAULT_TOL }
    }
}

fn scaled_tol(tol: f64, reference: &HermitianMatrix) -> f64 {
    tol * (1.0 + reference.frobenius_norm())
}

fn constants<const N: usize>(pairs: [(&str, f64); N]) -> BTreeMap<String, f64> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// `f(B) <= f(A) + gamma I` with `gamma` from the multistart solver.
pub fn certify_order(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    f: &ScalarFunction,
    opts: &CertifyOptions,
) -> Result<Certificate> {
    let p = build_gap_problem(GapKind::Gamma, f, None, std::slice::from_ref(a), std::slice::from_ref(b))?;
    let run = solve_multistart(&p, &opts.solver)?;
    let mut cert = certify_order_with_constant(a, b, f, run.value, opts.tol)?;
    cert.inputs.seeds.push(opts.solver.seed);
    cert.solver = Some(SolverMeta::from_run(&run, &opts.solver));
    Ok(cert)
}

/// `f(B) <= f(A) + gamma I` for a caller-supplied `gamma`.
pub fn certify_order_with_constant(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    f: &ScalarFunction,
    gamma: f64,
    tol: f64,
) -> Result<Certificate> {
    let fa = calc(f, a)?;
    let fb = calc(f, b)?;
    let slack = fa.shift(gamma).sub(&fb)?.min_eigenvalue();
    let inputs = InputsDigest { dims: vec![a.dim(), b.dim()], function: Some(f.to_string()), ..Default::default() };
    Ok(Certificate::new(
        Statement::GammaOrder,
        inputs,
        constants([("gamma", gamma)]),
        slack,
        scaled_tol(tol, &fa),
        None,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum JensenKind {
    /// `f(sum Phi_i(B_i)) <= sum Phi_i(f(A_i)) + delta I`
    DeltaForward,
    /// `f(sum Phi_i(A_i)) <= sum Phi_i(f(A_i)) + eta I`
    EtaChoi,
    /// `sum Phi_i(f(A_i)) <= f(sum Phi_i(B_i)) + theta I`
    ThetaReverse,
    /// `sum Phi_i(f(A_i)) <= f(sum Phi_i(A_i)) + vartheta I`
    VarthetaReverse,
}

impl JensenKind {
    pub fn gap_kind(&self) -> GapKind {
        match self {
            JensenKind::DeltaForward => GapKind::Delta,
            JensenKind::EtaChoi => GapKind::Eta,
            JensenKind::ThetaReverse => GapKind::Theta,
            JensenKind::VarthetaReverse => GapKind::Vartheta,
        }
    }

    pub fn statement(&self) -> Statement {
        match self {
            JensenKind::DeltaForward => Statement::DeltaForward,
            JensenKind::EtaChoi => Statement::EtaChoi,
            JensenKind::ThetaReverse => Statement::ThetaReverse,
            JensenKind::VarthetaReverse => Statement::VarthetaReverse,
        }
    }

    fn same_operands(&self) -> bool {
        matches!(self, JensenKind::EtaChoi | JensenKind::VarthetaReverse)
    }

    fn reverse(&self) -> bool {
        matches!(self, JensenKind::ThetaReverse | JensenKind::VarthetaReverse)
    }
}

/// Jensen-type certificate over a unital family. `b_list` is ignored for the `eta` and
/// `vartheta` statements, which use `B_i = A_i`.
pub fn certify_jensen(
    kind: JensenKind,
    family: &MapFamily,
    a_list: &[HermitianMatrix],
    b_list: &[HermitianMatrix],
    f: &ScalarFunction,
    opts: &CertifyOptions,
) -> Result<Certificate> {
    let gap_kind = kind.gap_kind();
    let p = build_gap_problem(gap_kind, f, Some(family), a_list, b_list)?;
    let run = solve_multistart(&p, &opts.solver)?;
    let c = run.value;

    let bs = if kind.same_operands() { a_list } else { b_list };
    let mapped_f = family.sum_apply_with(a_list, |a| calc(f, a))?;
    let f_of_sum = calc(f, &family.sum_apply(bs)?)?;
    let diff = if kind.reverse() { f_of_sum.shift(c).sub(&mapped_f)? } else { mapped_f.shift(c).sub(&f_of_sum)? };
    let slack = diff.min_eigenvalue();

    let mut dims = vec![family.input_dim(), family.output_dim(), family.len()];
    dims.extend(a_list.iter().map(HermitianMatrix::dim));
    let inputs =
        InputsDigest { dims, function: Some(f.to_string()), seeds: vec![opts.solver.seed], file_hashes: vec![] };
    Ok(Certificate::new(
        kind.statement(),
        inputs,
        constants([(gap_kind.name(), c)]),
        slack,
        scaled_tol(opts.tol, &mapped_f),
        Some(SolverMeta::from_run(&run, &opts.solver)),
    ))
}

/// The three quadratic-form quantities bracketing the Jensen difference at one unit vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichPoint {
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
    pub ok: bool,
}

/// Evaluates, at the unit vector `x` and with `T = sum Phi_i(B_i)`:
/// - lower: `<sum Phi_i(A_i) x,x><f'(T)x,x> - <f'(T)T x,x>`
/// - middle: `<sum Phi_i(f(A_i)) x,x> - <f(T)x,x>`
/// - upper: `<sum Phi_i(f'(A_i)A_i) x,x> - <sum Phi_i(f'(A_i)) x,x><T x,x>`
pub fn verify_sandwich_pointwise(
    family: &MapFamily,
    a_list: &[HermitianMatrix],
    b_list: &[HermitianMatrix],
    f: &ScalarFunction,
    x: &[Complex64],
    tol: f64,
) -> Result<SandwichPoint> {
    let norm = matrix::norm(x);
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NotUnitVector { norm });
    }
    if x.len() != family.output_dim() {
        return Err(Error::DimensionMismatch { expected: family.output_dim(), found: x.len() });
    }
    let check = check_unital_family(family)?;
    if !check.unital {
        return Err(Error::NotUnitalFamily { defect: check.defect });
    }
    let t = family.sum_apply(b_list)?;
    let s = family.sum_apply(a_list)?;
    let mapped_f = family.sum_apply_with(a_list, |a| calc(f, a))?;
    let mapped_tderiv = family.sum_apply_with(a_list, |a| calc_symbol(f, a, Symbol::TDeriv))?;
    let mapped_deriv = family.sum_apply_with(a_list, |a| calc_symbol(f, a, Symbol::Deriv))?;
    let f_t = calc(f, &t)?;
    let deriv_t = calc_symbol(f, &t, Symbol::Deriv)?;
    let tderiv_t = calc_symbol(f, &t, Symbol::TDeriv)?;

    let lower = s.quad_form(x) * deriv_t.quad_form(x) - tderiv_t.quad_form(x);
    let middle = mapped_f.quad_form(x) - f_t.quad_form(x);
    let upper = mapped_tderiv.quad_form(x) - mapped_deriv.quad_form(x) * t.quad_form(x);
    Ok(SandwichPoint { lower, middle, upper, ok: lower <= middle + tol && middle <= upper + tol })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassicalStatement {
    /// `0 <= B <= A`, `sigma(A) in [m, M]`, `p >= 1`: `B^p <= K(m, M, p) A^p`.
    Furuta,
    /// `0 <= A <= B`, `p in [0, 1]`: `A^p <= B^p`.
    LownerHeinz,
    /// `B <= A`, spectra in `[m, M]`, `f` increasing convex: `f(B) <= alpha f(A) + beta I`.
    AlphaBetaIncreasing,
    /// `B <= A`, spectra in `[m, M]`, `f` decreasing convex: `f(A) <= alpha f(B) + beta I`.
    AlphaBetaDecreasing,
}

impl ClassicalStatement {
    pub fn statement(&self) -> Statement {
        match self {
            ClassicalStatement::Furuta => Statement::Furuta,
            ClassicalStatement::LownerHeinz => Statement::LownerHeinz,
            ClassicalStatement::AlphaBetaIncreasing => Statement::AlphaBetaIncreasing,
            ClassicalStatement::AlphaBetaDecreasing => Statement::AlphaBetaDecreasing,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ClassicalParams {
    pub p: Option<f64>,
    pub alpha: Option<f64>,
    pub f: Option<ScalarFunction>,
    /// `[m, M]`; inferred from the spectra when absent.
    pub interval: Option<(f64, f64)>,
}

fn hypothesis(msg: impl Into<String>) -> Error {
    Error::HypothesisViolated(msg.into())
}

fn power_of(a: &HermitianMatrix, p: f64) -> HermitianMatrix {
    a.map_spectrum(|t| t.max(0.0).powf(p))
}

fn hull(ops: &[&HermitianMatrix]) -> (f64, f64) {
    ops.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| {
        let e = a.eigenvalues();
        (lo.min(e[0]), hi.max(e[e.len() - 1]))
    })
}

fn check_spectra_in(ops: &[(&str, &HermitianMatrix)], m: f64, big_m: f64, tol: f64) -> Result<()> {
    for (name, a) in ops {
        let e = a.eigenvalues();
        if e[0] < m - tol || e[e.len() - 1] > big_m + tol {
            return Err(hypothesis(format!(
                "spectrum of {name} [{}, {}] is not inside [{m}, {big_m}]",
                e[0],
                e[e.len() - 1]
            )));
        }
    }
    Ok(())
}

/// Certificates for the classical statements. Every hypothesis is checked first and a
/// violation is reported as [`Error::HypothesisViolated`].
pub fn verify_classical(
    statement: ClassicalStatement,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    params: &ClassicalParams,
    tol: f64,
) -> Result<Certificate> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let htol = tol * (1.0 + a.frobenius_norm().max(b.frobenius_norm()));
    let mut inputs = InputsDigest { dims: vec![a.dim(), b.dim()], ..Default::default() };

    match statement {
        ClassicalStatement::Furuta => {
            let p = params.p.ok_or_else(|| hypothesis("furuta needs an exponent p"))?;
            if !(p >= 1.0) {
                return Err(hypothesis(format!("furuta needs p >= 1, got {p}")));
            }
            if b.min_eigenvalue() < -htol {
                return Err(hypothesis("B is not positive semidefinite"));
            }
            if !loewner_leq(b, a, htol)?.holds {
                return Err(hypothesis("B <= A does not hold"));
            }
            let (m, big_m) = params.interval.unwrap_or_else(|| hull(&[a]));
            if !(m > 0.0) || m > big_m {
                return Err(hypothesis(format!("need 0 < m <= M, got [{m}, {big_m}]")));
            }
            check_spectra_in(&[("A", a)], m, big_m, htol)?;
            let k = if big_m - m <= 1e-12 * big_m { 1.0 } else { kantorovich(m, big_m, p)? };
            let ap = power_of(a, p);
            let bp = power_of(b, p);
            let slack = ap.scale(k).sub(&bp)?.min_eigenvalue();
            let tol = scaled_tol(tol, &ap.scale(k));
            Ok(Certificate::new(
                Statement::Furuta,
                inputs,
                constants([("K", k), ("m", m), ("M", big_m), ("p", p)]),
                slack,
                tol,
                None,
            ))
        }
        ClassicalStatement::LownerHeinz => {
            let p = params.p.ok_or_else(|| hypothesis("lowner-heinz needs an exponent p"))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(hypothesis(format!("lowner-heinz needs p in [0, 1], got {p}")));
            }
            if a.min_eigenvalue() < -htol {
                return Err(hypothesis("A is not positive semidefinite"));
            }
            if !loewner_leq(a, b, htol)?.holds {
                return Err(hypothesis("A <= B does not hold"));
            }
            let ap = power_of(a, p);
            let bp = power_of(b, p);
            let slack = bp.sub(&ap)?.min_eigenvalue();
            Ok(Certificate::new(
                Statement::LownerHeinz,
                inputs,
                constants([("p", p)]),
                slack,
                scaled_tol(tol, &bp),
                None,
            ))
        }
        ClassicalStatement::AlphaBetaIncreasing | ClassicalStatement::AlphaBetaDecreasing => {
            let increasing = statement == ClassicalStatement::AlphaBetaIncreasing;
            let f = params.f.ok_or_else(|| hypothesis("alpha-beta statements need a function"))?;
            let alpha = params.alpha.ok_or_else(|| hypothesis("alpha-beta statements need alpha"))?;
            if !(alpha > 0.0) {
                return Err(Error::NonPositiveAlpha(alpha));
            }
            let (m, big_m) = params.interval.unwrap_or_else(|| hull(&[a, b]));
            if !(m > 0.0 && m < big_m) {
                return Err(hypothesis(format!("need 0 < m < M, got [{m}, {big_m}]")));
            }
            check_spectra_in(&[("A", a), ("B", b)], m, big_m, htol)?;
            if !f.domain().contains(m) || !f.domain().contains(big_m) {
                return Err(hypothesis(format!("[{m}, {big_m}] is not inside the domain {}", f.domain())));
            }
            // f' is nondecreasing, so its sign on [m, M] is settled at one endpoint
            if increasing && f.deriv(m)? < 0.0 {
                return Err(hypothesis(format!("{f} is not increasing on [{m}, {big_m}]")));
            }
            if !increasing && f.deriv(big_m)? > 0.0 {
                return Err(hypothesis(format!("{f} is not decreasing on [{m}, {big_m}]")));
            }
            if !loewner_leq(b, a, htol)?.holds {
                return Err(hypothesis("B <= A does not hold"));
            }
            let br = beta(&f, m, big_m, alpha)?;
            let fa = calc(&f, a)?;
            let fb = calc(&f, b)?;
            let (lhs, rhs) = if increasing { (fb, fa) } else { (fa, fb) };
            let bound = rhs.scale(alpha).shift(br.beta);
            let slack = bound.sub(&lhs)?.min_eigenvalue();
            inputs.function = Some(f.to_string());
            Ok(Certificate::new(
                statement.statement(),
                inputs,
                constants([
                    ("alpha", alpha),
                    ("beta", br.beta),
                    ("a_f", br.chord.a_f),
                    ("b_f", br.chord.b_f),
                    ("m", m),
                    ("M", big_m),
                ]),
                slack,
                scaled_tol(tol, &bound),
                None,
            ))
        }
    }
}

/// A pair `A <= B` with `lambda_min(f(B) - f(A)) < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderViolation {
    pub a: HermitianMatrix,
    pub b: HermitianMatrix,
    /// `lambda_min(f(B) - f(A))`
    pub witness: f64,
    pub trial: usize,
}

/// Random search for a failure of `A <= B => f(A) <= f(B)` with spectra in a finite window
/// of `f`'s domain.
pub fn find_order_violation(f: &ScalarFunction, n: usize, trials: usize, seed: u64) -> Option<OrderViolation> {
    let (lo, hi) = f.domain().finite_window();
    let mut rng = sampling::rng(seed);
    for trial in 0..trials {
        let (big, small) = dominated_pair_in(&mut rng, n, lo, hi);
        let (Ok(fb), Ok(fa)) = (calc(f, &big), calc(f, &small)) else {
            continue;
        };
        let witness = fb.sub(&fa).expect("same dim").min_eigenvalue();
        if witness < VIOLATION_THRESHOLD {
            return Some(OrderViolation { a: small, b: big, witness, trial });
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{random_unital_family, PositiveLinearMap};
    use crate::sampling::{random_hermitian_in, rng};
    use crate::scalarfn::Interval;
    use approx::assert_abs_diff_eq;

    fn rows(r: &[&[f64]]) -> HermitianMatrix {
        HermitianMatrix::from_real_rows(&r.iter().map(|x| x.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn sq() -> ScalarFunction {
        ScalarFunction::power(2.0).unwrap()
    }

    fn id_family(n: usize) -> MapFamily {
        MapFamily::single(PositiveLinearMap::identity(n))
    }

    #[test]
    fn order_equal_operands() {
        let mut r = rng(1);
        let a = random_hermitian_in(&mut r, 3, 0.1, 2.0);
        for f in [sq(), ScalarFunction::exp(), ScalarFunction::neglog()] {
            let c = certify_order(&a, &a, &f, &CertifyOptions::default()).unwrap();
            let g = c.constant("gamma").unwrap();
            assert!(g >= -1e-10);
            assert_abs_diff_eq!(c.slack, g, epsilon = 1e-10);
            assert!(c.pass);
        }
    }

    #[test]
    fn order_hand_example() {
        let a = HermitianMatrix::diag(&[0.0, 1.0]);
        let b = HermitianMatrix::diag(&[1.0, 2.0]);
        let c = certify_order(&a, &b, &sq(), &CertifyOptions::default()).unwrap();
        assert_abs_diff_eq!(c.constant("gamma").unwrap(), 4.0, epsilon = 1e-6);
        assert_abs_diff_eq!(c.slack, 1.0, epsilon = 1e-6);
        assert!(c.pass);
        let meta = c.solver.as_ref().unwrap();
        assert_eq!((meta.seed, meta.restarts), (42, 64));
    }

    #[test]
    fn order_identity_function_is_tight() {
        let mut r = rng(2);
        let id = ScalarFunction::affine(1.0, 0.0).unwrap();
        for n in 1..=4 {
            let a = random_hermitian_in(&mut r, n, -2.0, 2.0);
            let b = random_hermitian_in(&mut r, n, -2.0, 2.0);
            let c = certify_order(&a, &b, &id, &CertifyOptions::default()).unwrap();
            assert_abs_diff_eq!(c.constant("gamma").unwrap(), b.sub(&a).unwrap().max_eigenvalue(), epsilon = 1e-9);
            assert_abs_diff_eq!(c.slack, 0.0, epsilon = 1e-9);
            assert!(c.pass);
        }
    }

    #[test]
    fn order_slack_is_affine_in_constant() {
        let mut r = rng(3);
        let a = random_hermitian_in(&mut r, 3, 0.0, 2.0);
        let b = random_hermitian_in(&mut r, 3, 0.0, 2.0);
        let base = certify_order_with_constant(&a, &b, &sq(), 0.7, DEFAULT_TOL).unwrap();
        for c in [-1.0, 0.25, 3.0] {
            let shifted = certify_order_with_constant(&a, &b, &sq(), 0.7 + c, DEFAULT_TOL).unwrap();
            assert_abs_diff_eq!(shifted.slack - base.slack, c, epsilon = 1e-12);
        }
    }

    #[test]
    fn pass_iff_slack_within_tol() {
        let a = HermitianMatrix::diag(&[0.0, 1.0]);
        let b = HermitianMatrix::diag(&[1.0, 2.0]);
        let bad = certify_order_with_constant(&a, &b, &sq(), 2.0, DEFAULT_TOL).unwrap();
        assert!(!bad.pass);
        assert_abs_diff_eq!(bad.slack, -1.0, epsilon = 1e-12);
        let ok = certify_order_with_constant(&a, &b, &sq(), 3.0, DEFAULT_TOL).unwrap();
        assert!(ok.pass);
    }

    #[test]
    fn order_rejects_spectrum_outside_domain() {
        let a = HermitianMatrix::diag(&[-1.0, 1.0]);
        let r = certify_order(&a, &a, &ScalarFunction::neglog(), &CertifyOptions::default());
        assert!(matches!(r, Err(Error::SpectrumOutsideDomain { .. })));
    }

    #[test]
    fn jensen_examples() {
        let mut r = rng(4);
        let a = random_hermitian_in(&mut r, 3, -1.0, 1.0);
        let c = certify_jensen(
            JensenKind::EtaChoi,
            &id_family(3),
            std::slice::from_ref(&a),
            &[],
            &ScalarFunction::exp(),
            &CertifyOptions::default(),
        )
        .unwrap();
        assert!(c.pass && c.slack >= -1e-10);
        assert_abs_diff_eq!(c.slack, c.constant("eta").unwrap(), epsilon = 1e-10);

        let d = HermitianMatrix::diag(&[0.0, 1.0]);
        let c = certify_jensen(
            JensenKind::DeltaForward,
            &id_family(2),
            std::slice::from_ref(&d),
            std::slice::from_ref(&d),
            &sq(),
            &CertifyOptions::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(c.constant("delta").unwrap(), 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(c.slack, 0.5, epsilon = 1e-9);
        assert!(c.pass);

        let c = certify_jensen(
            JensenKind::ThetaReverse,
            &id_family(3),
            std::slice::from_ref(&a),
            std::slice::from_ref(&a),
            &ScalarFunction::exp(),
            &CertifyOptions::default(),
        )
        .unwrap();
        assert!(c.pass && c.slack >= -1e-10);
    }

    #[test]
    fn jensen_random_families_pass() {
        let opts =
            CertifyOptions { solver: SolverOptions { restarts: 16, ..Default::default() }, ..Default::default() };
        let mut r = rng(5);
        let kinds =
            [JensenKind::DeltaForward, JensenKind::EtaChoi, JensenKind::ThetaReverse, JensenKind::VarthetaReverse];
        for (i, kind) in kinds.into_iter().cycle().take(16).enumerate() {
            let f = [sq(), ScalarFunction::exp(), ScalarFunction::neglog()][i % 3];
            let (lo, hi) = f.domain().finite_window();
            let fam = random_unital_family(1 + i % 3, 3, 2, i as u64).unwrap();
            let a: Vec<_> = (0..fam.len()).map(|_| random_hermitian_in(&mut r, 3, lo, hi)).collect();
            let b: Vec<_> = (0..fam.len()).map(|_| random_hermitian_in(&mut r, 3, lo, hi)).collect();
            let c = certify_jensen(kind, &fam, &a, &b, &f, &opts).unwrap();
            assert!(c.pass, "{kind:?} {f}: slack {}", c.slack);
        }
    }

    #[test]
    fn jensen_rejects_non_unital() {
        let fam = MapFamily::new(vec![PositiveLinearMap::identity(2), PositiveLinearMap::identity(2)]).unwrap();
        let a = HermitianMatrix::identity(2);
        let r = certify_jensen(JensenKind::EtaChoi, &fam, &[a.clone(), a], &[], &sq(), &CertifyOptions::default());
        assert!(matches!(r, Err(Error::NotUnitalFamily { .. })));
    }

    #[test]
    fn sandwich_hand_example() {
        let d = HermitianMatrix::diag(&[0.0, 1.0]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let x = [Complex64::new(h, 0.0), Complex64::new(h, 0.0)];
        let s = verify_sandwich_pointwise(
            &id_family(2),
            std::slice::from_ref(&d),
            std::slice::from_ref(&d),
            &sq(),
            &x,
            1e-8,
        )
        .unwrap();
        assert_abs_diff_eq!(s.lower, -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.middle, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.upper, 0.5, epsilon = 1e-12);
        assert!(s.ok);
    }

    #[test]
    fn sandwich_affine_collapses() {
        let mut r = rng(6);
        let f = ScalarFunction::affine(2.0, -1.0).unwrap();
        let fam = random_unital_family(2, 3, 3, 8).unwrap();
        let a: Vec<_> = (0..2).map(|_| random_hermitian_in(&mut r, 3, -1.0, 1.0)).collect();
        let b: Vec<_> = (0..2).map(|_| random_hermitian_in(&mut r, 3, -1.0, 1.0)).collect();
        let x = sampling::random_unit_vector(&mut r, 3);
        let s = verify_sandwich_pointwise(&fam, &a, &b, &f, &x, 1e-10).unwrap();
        assert_abs_diff_eq!(s.lower, s.middle, epsilon = 1e-12);
        assert_abs_diff_eq!(s.middle, s.upper, epsilon = 1e-12);
        assert!(s.ok);
    }

    #[test]
    fn sandwich_scalar_is_two_sided_gradient_inequality() {
        let f = ScalarFunction::exp();
        let x = [Complex64::new(1.0, 0.0)];
        for (a, b) in [(0.3, -1.2), (-2.0, 1.0), (0.5, 0.5)] {
            let s = verify_sandwich_pointwise(
                &id_family(1),
                &[HermitianMatrix::diag(&[a])],
                &[HermitianMatrix::diag(&[b])],
                &f,
                &x,
                1e-12,
            )
            .unwrap();
            // t = a, s = b in f'(s)(t-s) <= f(t)-f(s) <= f'(t)(t-s)
            assert_abs_diff_eq!(s.lower, b.exp() * (a - b), epsilon = 1e-14);
            assert_abs_diff_eq!(s.middle, a.exp() - b.exp(), epsilon = 1e-14);
            assert_abs_diff_eq!(s.upper, a.exp() * (a - b), epsilon = 1e-14);
            assert!(s.ok);
        }
    }

    #[test]
    fn sandwich_rejects_non_unit() {
        let d = HermitianMatrix::diag(&[0.0, 1.0]);
        let x = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        let r = verify_sandwich_pointwise(
            &id_family(2),
            std::slice::from_ref(&d),
            std::slice::from_ref(&d),
            &sq(),
            &x,
            1e-8,
        );
        assert!(matches!(r, Err(Error::NotUnitVector { .. })));
    }

    #[test]
    fn furuta_witness_pair() {
        let b = rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let a = rows(&[&[2.0, 1.0], &[1.0, 1.0]]);
        let params = ClassicalParams { p: Some(3.0), ..Default::default() };
        let c = verify_classical(ClassicalStatement::Furuta, &a, &b, &params, DEFAULT_TOL).unwrap();
        let s5 = 5f64.sqrt();
        let (m, big_m) = ((3.0 - s5) / 2.0, (3.0 + s5) / 2.0);
        assert_abs_diff_eq!(c.constant("m").unwrap(), m, epsilon = 1e-12);
        assert_abs_diff_eq!(c.constant("M").unwrap(), big_m, epsilon = 1e-12);
        assert_abs_diff_eq!(c.constant("K").unwrap(), kantorovich(m, big_m, 3.0).unwrap(), epsilon = 1e-9);
        assert!(c.pass, "slack {}", c.slack);
    }

    #[test]
    fn classical_random_instances() {
        for seed in 0..10 {
            let (a, b) = crate::hermitian::random_dominated_pair(3, 1.0, 3.0, seed).unwrap();
            let p = ClassicalParams { p: Some(2.0), ..Default::default() };
            assert!(verify_classical(ClassicalStatement::Furuta, &a, &b, &p, DEFAULT_TOL).unwrap().pass);
            let p = ClassicalParams { p: Some(0.5), ..Default::default() };
            assert!(verify_classical(ClassicalStatement::LownerHeinz, &b, &a, &p, DEFAULT_TOL).unwrap().pass);
            let p =
                ClassicalParams { f: Some(sq()), alpha: Some(1.0), interval: Some((1.0, 3.0)), ..Default::default() };
            let c = verify_classical(ClassicalStatement::AlphaBetaIncreasing, &a, &b, &p, DEFAULT_TOL).unwrap();
            assert_abs_diff_eq!(c.constant("beta").unwrap(), 1.0, epsilon = 1e-9);
            assert!(c.pass);
            let p = ClassicalParams { f: Some(ScalarFunction::neglog()), alpha: Some(1.5), ..Default::default() };
            assert!(verify_classical(ClassicalStatement::AlphaBetaDecreasing, &a, &b, &p, DEFAULT_TOL).unwrap().pass);
        }
    }

    #[test]
    fn classical_hypotheses_are_checked() {
        let (a, b) = crate::hermitian::random_dominated_pair(2, 1.0, 3.0, 4).unwrap();
        let p = ClassicalParams { p: Some(2.0), ..Default::default() };
        // order reversed
        let r = verify_classical(ClassicalStatement::Furuta, &b.shift(5.0), &b, &p, DEFAULT_TOL);
        assert!(r.is_ok());
        let r = verify_classical(ClassicalStatement::Furuta, &b, &a.shift(1.0), &p, DEFAULT_TOL);
        assert!(matches!(r, Err(Error::HypothesisViolated(_))));
        let r =
            verify_classical(ClassicalStatement::Furuta, &a, &b, &ClassicalParams { p: Some(0.5), ..p }, DEFAULT_TOL);
        assert!(matches!(r, Err(Error::HypothesisViolated(_))));
        let r = verify_classical(
            ClassicalStatement::LownerHeinz,
            &a,
            &b,
            &ClassicalParams { p: Some(0.5), ..p },
            DEFAULT_TOL,
        );
        assert!(matches!(r, Err(Error::HypothesisViolated(_))));
        // decreasing function offered to the increasing statement
        let wrong = ClassicalParams { f: Some(ScalarFunction::neglog()), alpha: Some(1.0), ..Default::default() };
        let r = verify_classical(ClassicalStatement::AlphaBetaIncreasing, &a, &b, &wrong, DEFAULT_TOL);
        assert!(matches!(r, Err(Error::HypothesisViolated(_))));
        // interval too small for the spectra
        let tight =
            ClassicalParams { f: Some(sq()), alpha: Some(1.0), interval: Some((1.5, 2.0)), ..Default::default() };
        let r = verify_classical(ClassicalStatement::AlphaBetaIncreasing, &a, &b, &tight, DEFAULT_TOL);
        assert!(matches!(r, Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn cube_is_not_order_preserving() {
        let cube = ScalarFunction::power(3.0).unwrap();
        let v = find_order_violation(&cube, 2, 10_000, 1).expect("a violation");
        assert!(v.witness < VIOLATION_THRESHOLD);
        assert!(loewner_leq(&v.a, &v.b, 1e-12).unwrap().holds);

        let a = rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let b = rows(&[&[2.0, 1.0], &[1.0, 1.0]]);
        let diff = calc(&cube, &b).unwrap().sub(&calc(&cube, &a).unwrap()).unwrap();
        assert!(diff.sub(&rows(&[&[9.0, 4.0], &[4.0, 1.0]])).unwrap().frobenius_norm() < 1e-12);
        assert_abs_diff_eq!(diff.min_eigenvalue(), 5.0 - 32f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn operator_monotone_functions_have_no_violation() {
        assert!(find_order_violation(&ScalarFunction::affine(2.0, 1.0).unwrap(), 3, 500, 2).is_none());
        assert!(find_order_violation(&ScalarFunction::power(1.0).unwrap(), 3, 500, 3).is_none());
        let on_line = sq().with_domain(Interval::nonnegative()).unwrap();
        assert!(find_order_violation(&on_line, 2, 2000, 4).is_some());
    }

    #[test]
    fn statement_names_roundtrip() {
        for s in Statement::ALL {
            assert_eq!(s.name().parse::<Statement>().unwrap(), s);
        }
    }
}
