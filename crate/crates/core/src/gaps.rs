//! Gap constants as maxima of `F(x) = <Cx,x> - <Sx,x><Dx,x>` over the complex unit sphere.
//!
//! Every additive constant (gamma, delta, eta, theta, vartheta) and the Chebyshev functional
//! share this objective; only the three matrices differ. Two solvers are provided:
//! [`solve_multistart`], a projected-gradient ascent with seeded restarts, and
//! [`solve_bruteforce`], a sampling and pattern-search oracle that shares no code with it
//! beyond the objective. Both return attained values, i.e. lower bounds on the true maximum.

use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{calc_symbol, HermitianMatrix, Symbol};
use crate::maps::{check_unital_family, MapFamily};
use crate::matrix;
use crate::sampling;
use crate::scalarfn::ScalarFunction;

/// Environment variable capping the restart pool size.
pub const THREADS_ENV: &str = "LOEWNER_CERT_THREADS";

const GRID: usize = 2000;
const REFINE_TOP: usize = 10;
const PATTERN_MAX_EVALS: usize = 60_000;
const POLISH_TOP: usize = 4;
const POLISH_FACTOR: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GapKind {
    Gamma,
    Delta,
    Eta,
    Theta,
    Vartheta,
    Chebyshev,
}

impl GapKind {
    pub const ALL: [GapKind; 6] =
        [GapKind::Gamma, GapKind::Delta, GapKind::Eta, GapKind::Theta, GapKind::Vartheta, GapKind::Chebyshev];

    pub fn name(&self) -> &'static str {
        match self {
            GapKind::Gamma => "gamma",
            GapKind::Delta => "delta",
            GapKind::Eta => "eta",
            GapKind::Theta => "theta",
            GapKind::Vartheta => "vartheta",
            GapKind::Chebyshev => "chebyshev",
        }
    }
}

impl std::str::FromStr for GapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GapKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| Error::Parse(format!("unknown gap kind '{s}'")))
    }
}

/// `F(x) = <Cx,x> - <Sx,x><Dx,x>`
#[derive(Debug, Clone, PartialEq)]
pub struct GapProblem {
    pub c: HermitianMatrix,
    pub s: HermitianMatrix,
    pub d: HermitianMatrix,
    pub kind: GapKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Multistart,
    BruteForce,
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::Multistart => "multistart",
            SolverKind::BruteForce => "brute-force",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapResult {
    /// `F(maximizer)`
    pub value: f64,
    /// Unit vector attaining `value`.
    pub maximizer: Vec<Complex64>,
    pub solver: SolverKind,
    pub iterations: usize,
    pub restarts: usize,
    /// Multistart: whether some restart met the gradient tolerance. Always true for the oracle.
    pub converged: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub step_tol: f64,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { restarts: 64, max_iter: 500, step_tol: 1e-10, seed: 42 }
    }
}

impl GapProblem {
    pub fn new(kind: GapKind, c: HermitianMatrix, s: HermitianMatrix, d: HermitianMatrix) -> Result<Self> {
        for m in [&s, &d] {
            if m.dim() != c.dim() {
                return Err(Error::DimensionMismatch { expected: c.dim(), found: m.dim() });
            }
        }
        Ok(Self { c, s, d, kind })
    }

    pub fn dim(&self) -> usize {
        self.c.dim()
    }

    pub fn objective(&self, x: &[Complex64]) -> f64 {
        self.c.quad_form(x) - self.s.quad_form(x) * self.d.quad_form(x)
    }

    /// Objective and the tangent-space projection of the ambient gradient
    /// `2Cx - 2<Dx,x>Sx - 2<Sx,x>Dx`.
    pub fn value_and_tangent_gradient(&self, x: &[Complex64]) -> (f64, Vec<Complex64>) {
        let cx = self.c.as_matrix().matvec(x);
        let sx = self.s.as_matrix().matvec(x);
        let dx = self.d.as_matrix().matvec(x);
        let qc = matrix::inner(x, &cx).re;
        let qs = matrix::inner(x, &sx).re;
        let qd = matrix::inner(x, &dx).re;
        let mut g: Vec<Complex64> = (0..x.len()).map(|i| (cx[i] - sx[i] * qd - dx[i] * qs) * 2.0).collect();
        let radial = matrix::inner(x, &g).re;
        for (gi, xi) in g.iter_mut().zip(x) {
            *gi -= xi * radial;
        }
        (qc - qs * qd, g)
    }

    fn lipschitz_guess(&self) -> f64 {
        2.0 * (self.c.frobenius_norm() + 3.0 * self.s.frobenius_norm() * self.d.frobenius_norm())
    }
}

fn operand<'a>(list: &'a [HermitianMatrix], what: &str) -> Result<&'a HermitianMatrix> {
    list.first().ok_or_else(|| Error::BadDimensions(format!("missing operand {what}")))
}

fn require_unital(family: Option<&MapFamily>) -> Result<&MapFamily> {
    let family = family.ok_or_else(|| Error::BadDimensions("this gap kind needs a map family".into()))?;
    let check = check_unital_family(family)?;
    if !check.unital {
        return Err(Error::NotUnitalFamily { defect: check.defect });
    }
    Ok(family)
}

/// Assembles `(C, S, D)` for `kind`.
///
/// - `gamma`: `C = f'(B)B`, `S = A`, `D = f'(B)` from `a_list[0]`, `b_list[0]`.
/// - `delta`: with `T = sum Phi_i(B_i)`: `C = f'(T)T`, `S = sum Phi_i(A_i)`, `D = f'(T)`.
/// - `eta`: `delta` with `B_i = A_i`.
/// - `theta`: `C = sum Phi_i(f'(A_i)A_i)`, `S = sum Phi_i(f'(A_i))`, `D = T`.
/// - `vartheta`: `theta` with `B_i = A_i`.
/// - `chebyshev`: `C = f'(A)A`, `S = A`, `D = f'(A)` from `a_list[0]`.
///
/// `family` is only consulted by the Jensen kinds; `b_list` is ignored where `B_i = A_i`.
pub fn build_gap_problem(
    kind: GapKind,
    f: &ScalarFunction,
    family: Option<&MapFamily>,
    a_list: &[HermitianMatrix],
    b_list: &[HermitianMatrix],
) -> Result<GapProblem> {
    match kind {
        GapKind::Gamma => {
            let a = operand(a_list, "A")?;
            let b = operand(b_list, "B")?;
            if a.dim() != b.dim() {
                return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
            }
            // spectrum of A must also be in the domain even though f(A) is not part of F
            calc_symbol(f, a, Symbol::Value)?;
            GapProblem::new(kind, calc_symbol(f, b, Symbol::TDeriv)?, a.clone(), calc_symbol(f, b, Symbol::Deriv)?)
        }
        GapKind::Chebyshev => {
            let a = operand(a_list, "A")?;
            GapProblem::new(kind, calc_symbol(f, a, Symbol::TDeriv)?, a.clone(), calc_symbol(f, a, Symbol::Deriv)?)
        }
        GapKind::Delta | GapKind::Eta => {
            let family = require_unital(family)?;
            let bs = if kind == GapKind::Eta { a_list } else { b_list };
            for x in a_list.iter().chain(bs) {
                calc_symbol(f, x, Symbol::Value)?;
            }
            let t = family.sum_apply(bs)?;
            let s = family.sum_apply(a_list)?;
            GapProblem::new(kind, calc_symbol(f, &t, Symbol::TDeriv)?, s, calc_symbol(f, &t, Symbol::Deriv)?)
        }
        GapKind::Theta | GapKind::Vartheta => {
            let family = require_unital(family)?;
            let bs = if kind == GapKind::Vartheta { a_list } else { b_list };
            for x in bs {
                calc_symbol(f, x, Symbol::Value)?;
            }
            let t = family.sum_apply(bs)?;
            calc_symbol(f, &t, Symbol::Value)?;
            let c = family.sum_apply_with(a_list, |a| calc_symbol(f, a, Symbol::TDeriv))?;
            let s = family.sum_apply_with(a_list, |a| calc_symbol(f, a, Symbol::Deriv))?;
            GapProblem::new(kind, c, s, t)
        }
    }
}

fn restart_pool() -> &'static ThreadPool {
    static POOL: OnceLock<ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).unwrap_or(0);
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool")
    })
}

struct Ascent {
    value: f64,
    x: Vec<Complex64>,
    iterations: usize,
    converged: bool,
}

fn retract(x: &[Complex64], g: &[Complex64], step: f64) -> Vec<Complex64> {
    let mut y: Vec<Complex64> = x.iter().zip(g).map(|(a, b)| a + b * step).collect();
    matrix::normalize(&mut y);
    y
}

/// Armijo ascent along the tangent gradient, retracting by renormalization. Trial steps
/// follow the Barzilai-Borwein estimate when it is usable, otherwise the last step doubled.
fn ascend(p: &GapProblem, mut x: Vec<Complex64>, max_iter: usize, step_tol: f64) -> Ascent {
    let (mut fx, mut g) = p.value_and_tangent_gradient(&x);
    let lip = p.lipschitz_guess();
    let base = if lip > 0.0 { 1.0 / lip } else { 1.0 };
    let mut step = base;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let gn2 = g.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if gn2.sqrt() <= step_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let noise = 8.0 * f64::EPSILON * (1.0 + fx.abs());
        let mut accepted = None;
        for _ in 0..80 {
            let y = retract(&x, &g, step);
            let fy = p.objective(&y);
            if fy >= fx + 1e-4 * step * gn2 - noise {
                accepted = Some((y, fy));
                break;
            }
            step *= 0.5;
        }
        let Some((y, _)) = accepted else { break };
        let (fy, gy) = p.value_and_tangent_gradient(&y);
        let (mut ss, mut sy) = (0.0, 0.0);
        for i in 0..y.len() {
            let d = y[i] - x[i];
            ss += d.norm_sqr();
            sy -= (d.conj() * (gy[i] - g[i])).re;
        }
        step =
            if sy > 0.0 && ss > 0.0 { (ss / sy).clamp(1e-6 * base, 1e6 * base) } else { (2.0 * step).min(1e6 * base) };
        (x, fx, g) = (y, fy, gy);
    }
    if !converged {
        converged = matrix::norm(&g) <= step_tol;
    }
    Ascent { value: fx, x, iterations, converged }
}

/// Projected-gradient ascent from `opts.restarts` seeded starts, run on the restart pool
/// (sized by `LOEWNER_CERT_THREADS`). The best value wins, earliest restart on ties, so the
/// result does not depend on the pool size.
pub fn solve_multistart(p: &GapProblem, opts: &SolverOptions) -> Result<GapResult> {
    solve_multistart_in(restart_pool(), p, opts)
}

pub fn solve_multistart_in(pool: &ThreadPool, p: &GapProblem, opts: &SolverOptions) -> Result<GapResult> {
    if opts.restarts == 0 {
        return Err(Error::BadDimensions("restarts must be at least 1".into()));
    }
    let k = p.dim();
    let mut runs: Vec<Ascent> = pool.install(|| {
        (0..opts.restarts)
            .into_par_iter()
            .map(|r| {
                let mut rng = sampling::stream_rng(opts.seed, r as u64);
                let x0 = sampling::random_unit_vector(&mut rng, k);
                ascend(p, x0, opts.max_iter, opts.step_tol)
            })
            .collect()
    });
    // polish the leading restarts with a longer budget; ties keep restart order
    let mut order: Vec<usize> = (0..runs.len()).collect();
    order.sort_by(|&i, &j| runs[j].value.total_cmp(&runs[i].value).then(i.cmp(&j)));
    for &i in order.iter().take(POLISH_TOP) {
        if runs[i].converged {
            continue;
        }
        let more = ascend(p, runs[i].x.clone(), POLISH_FACTOR * opts.max_iter, opts.step_tol);
        if more.value >= runs[i].value {
            let r = &mut runs[i];
            r.iterations += more.iterations;
            (r.value, r.x, r.converged) = (more.value, more.x, more.converged);
        }
    }
    let iterations = runs.iter().map(|r| r.iterations).sum();
    let converged = runs.iter().any(|r| r.converged);
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.value > runs[best].value {
            best = i;
        }
    }
    let winner = &runs[best];
    Ok(GapResult {
        value: winner.value,
        maximizer: winner.x.clone(),
        solver: SolverKind::Multistart,
        iterations,
        restarts: opts.restarts,
        converged,
        seed: opts.seed,
    })
}

/// Greedy coordinate pattern search on the sphere: perturb one coordinate by `+-h` or
/// `+-ih`, renormalize, keep improvements, halve `h` after a sweep without one.
fn pattern_search(p: &GapProblem, mut x: Vec<Complex64>) -> (f64, Vec<Complex64>, usize) {
    let dirs =
        [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)];
    let mut fx = p.objective(&x);
    let mut h = 0.05;
    let mut evals = 0;
    let mut sweeps = 0;
    while h > 1e-11 && evals < PATTERN_MAX_EVALS {
        sweeps += 1;
        let mut improved = false;
        for j in 0..x.len() {
            for dir in dirs {
                let mut y = x.clone();
                y[j] += dir * h;
                matrix::normalize(&mut y);
                let fy = p.objective(&y);
                evals += 1;
                if fy > fx {
                    x = y;
                    fx = fy;
                    improved = true;
                }
            }
        }
        if improved {
            h = (h * 1.5).min(0.25);
        } else {
            h *= 0.5;
        }
    }
    (fx, x, sweeps)
}

/// Exhaustive sweep of `x = (cos t, e^{i phi} sin t)` on a `GRID x GRID` lattice.
fn sweep_two_dim(p: &GapProblem) -> (f64, Vec<Complex64>) {
    struct Coeffs {
        m11: f64,
        m22: f64,
        re12: f64,
        im12: f64,
    }
    let coeffs = |h: &HermitianMatrix| {
        let m = h.as_matrix();
        Coeffs { m11: m[(0, 0)].re, m22: m[(1, 1)].re, re12: m[(0, 1)].re, im12: m[(0, 1)].im }
    };
    let (cc, sc, dc) = (coeffs(&p.c), coeffs(&p.s), coeffs(&p.d));
    let phis: Vec<(f64, f64)> = (0..GRID)
        .map(|j| {
            let phi = std::f64::consts::TAU * j as f64 / GRID as f64;
            (phi.cos(), phi.sin())
        })
        .collect();
    let off = |c: &Coeffs| -> Vec<f64> { phis.iter().map(|(cs, sn)| c.re12 * cs - c.im12 * sn).collect() };
    let (oc, os, od) = (off(&cc), off(&sc), off(&dc));

    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    for i in 0..GRID {
        let t = std::f64::consts::FRAC_PI_2 * i as f64 / (GRID - 1) as f64;
        let (ct, st) = (t.cos(), t.sin());
        let (u, v, w2) = (ct * ct, st * st, 2.0 * ct * st);
        let (ac, as_, ad) = (cc.m11 * u + cc.m22 * v, sc.m11 * u + sc.m22 * v, dc.m11 * u + dc.m22 * v);
        for j in 0..GRID {
            let val = (ac + w2 * oc[j]) - (as_ + w2 * os[j]) * (ad + w2 * od[j]);
            if val > best.0 {
                best = (val, i, j);
            }
        }
    }
    let t = std::f64::consts::FRAC_PI_2 * best.1 as f64 / (GRID - 1) as f64;
    let phi = std::f64::consts::TAU * best.2 as f64 / GRID as f64;
    let x = vec![Complex64::new(t.cos(), 0.0), Complex64::from_polar(t.sin(), phi)];
    (p.objective(&x), x)
}

/// Sampling oracle: `samples` Gaussian unit vectors (plus the full 2-D lattice sweep when the
/// dimension is 2), the best candidates polished by pattern search. The value is attained, so
/// it is a certified lower bound on the maximum.
pub fn solve_bruteforce(p: &GapProblem, samples: usize, seed: u64) -> Result<GapResult> {
    if samples == 0 {
        return Err(Error::BadDimensions("samples must be at least 1".into()));
    }
    let k = p.dim();
    if k == 1 {
        let x = vec![Complex64::new(1.0, 0.0)];
        return Ok(GapResult {
            value: p.objective(&x),
            maximizer: x,
            solver: SolverKind::BruteForce,
            iterations: 0,
            restarts: 0,
            converged: true,
            seed,
        });
    }
    let mut rng = sampling::rng(seed);
    let mut pool: Vec<(f64, Vec<Complex64>)> = Vec::with_capacity(REFINE_TOP + 1);
    let offer = |val: f64, x: Vec<Complex64>, pool: &mut Vec<(f64, Vec<Complex64>)>| {
        if pool.len() < REFINE_TOP || val > pool[pool.len() - 1].0 {
            let at = pool.iter().position(|(v, _)| val > *v).unwrap_or(pool.len());
            pool.insert(at, (val, x));
            pool.truncate(REFINE_TOP);
        }
    };
    if k == 2 {
        let (val, x) = sweep_two_dim(p);
        offer(val, x, &mut pool);
    }
    for _ in 0..samples {
        let x = sampling::random_unit_vector(&mut rng, k);
        let val = p.objective(&x);
        offer(val, x, &mut pool);
    }

    let mut best: Option<(f64, Vec<Complex64>)> = None;
    let mut sweeps = 0;
    let candidates = pool.len();
    for (_, x) in pool {
        let (val, x, n) = pattern_search(p, x);
        sweeps += n;
        if best.as_ref().is_none_or(|(b, _)| val > *b) {
            best = Some((val, x));
        }
    }
    let (value, maximizer) = best.expect("at least one candidate");
    Ok(GapResult {
        value,
        maximizer,
        solver: SolverKind::BruteForce,
        iterations: sweeps,
        restarts: candidates,
        converged: true,
        seed,
    })
}
