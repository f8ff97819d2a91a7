//! Differentiable convex scalar functions with closed-form derivatives.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real interval; infinite endpoints are always open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::BadInterval { lo, hi });
        }
        Ok(Self { lo, hi, lo_closed: lo_closed && lo.is_finite(), hi_closed: hi_closed && hi.is_finite() })
    }

    pub fn real_line() -> Self {
        Self { lo: f64::NEG_INFINITY, hi: f64::INFINITY, lo_closed: false, hi_closed: false }
    }

    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, true, true)
    }

    /// `[0, inf)`
    pub fn nonnegative() -> Self {
        Self { lo: 0.0, hi: f64::INFINITY, lo_closed: true, hi_closed: false }
    }

    /// `(0, inf)`
    pub fn positive() -> Self {
        Self { lo: 0.0, hi: f64::INFINITY, lo_closed: false, hi_closed: false }
    }

    pub fn contains(&self, t: f64) -> bool {
        let above = if self.lo_closed { t >= self.lo } else { t > self.lo };
        let below = if self.hi_closed { t <= self.hi } else { t < self.hi };
        above && below
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        let lo_ok = self.lo > other.lo || (self.lo == other.lo && (other.lo_closed || !self.lo_closed));
        let hi_ok = self.hi < other.hi || (self.hi == other.hi && (other.hi_closed || !self.hi_closed));
        lo_ok && hi_ok
    }

    /// Snaps `t` onto a closed endpoint when it is within `tol` of it.
    /// Returns `None` when `t` is neither inside nor close to a closed endpoint.
    pub fn clamp_within(&self, t: f64, tol: f64) -> Option<f64> {
        if self.contains(t) {
            return Some(t);
        }
        if self.lo_closed && t < self.lo && self.lo - t <= tol {
            return Some(self.lo);
        }
        if self.hi_closed && t > self.hi && t - self.hi <= tol {
            return Some(self.hi);
        }
        None
    }

    /// A finite closed window inside the interval, used by the random instance generators.
    pub fn finite_window(&self) -> (f64, f64) {
        let lo = if self.lo.is_finite() {
            if self.lo_closed {
                self.lo
            } else {
                self.lo + 0.1
            }
        } else if self.hi.is_finite() {
            self.hi - 4.0
        } else {
            -2.0
        };
        let hi = if self.hi.is_finite() {
            if self.hi_closed {
                self.hi
            } else {
                self.hi - 0.1
            }
        } else {
            lo + 4.0
        };
        if hi > lo {
            (lo, hi)
        } else {
            let mid = 0.5 * (self.lo + self.hi);
            (mid - 0.25 * (self.hi - self.lo), mid + 0.25 * (self.hi - self.lo))
        }
    }
}

fn fmt_endpoint(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{},{}{}",
            if self.lo_closed { '[' } else { '(' },
            fmt_endpoint(self.lo),
            fmt_endpoint(self.hi),
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

fn parse_endpoint(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        other => other.parse::<f64>().map_err(|_| Error::Parse(format!("bad interval endpoint '{other}'"))),
    }
}

impl FromStr for Interval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("bad interval '{s}', expected e.g. (0,inf) or [1,3]"));
        if s.len() < 3 {
            return Err(bad());
        }
        let lo_closed = match s.as_bytes()[0] {
            b'[' => true,
            b'(' => false,
            _ => return Err(bad()),
        };
        let hi_closed = match s.as_bytes()[s.len() - 1] {
            b']' => true,
            b')' => false,
            _ => return Err(bad()),
        };
        let (lo, hi) = s[1..s.len() - 1].split_once(',').ok_or_else(bad)?;
        let lo = parse_endpoint(lo)?;
        let hi = parse_endpoint(hi)?;
        if (lo.is_infinite() && lo_closed) || (hi.is_infinite() && hi_closed) {
            return Err(bad());
        }
        Interval::new(lo, hi, lo_closed, hi_closed)
    }
}

/// The closed-form families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    /// `t^p` with `p >= 1` or `p <= 0`.
    Power {
        p: f64,
    },
    Exp,
    /// `-ln t`
    NegLog,
    /// `a*t + b`
    Affine {
        a: f64,
        b: f64,
    },
}

/// Monotonicity class on the declared domain. Constant functions count as increasing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Neither,
}

/// A differentiable convex function on an interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarFunction {
    family: Family,
    domain: Interval,
    monotonicity: Monotonicity,
}

fn is_even_positive_integer(p: f64) -> bool {
    p > 0.0 && p.fract() == 0.0 && (p / 2.0).fract() == 0.0 && p < 1e9
}

fn small_integer(p: f64) -> Option<i32> {
    (p.fract() == 0.0 && p.abs() < 1e9).then_some(p as i32)
}

impl Family {
    fn default_domain(&self) -> Interval {
        match *self {
            Family::Power { p } if p >= 1.0 => Interval::nonnegative(),
            Family::Power { .. } | Family::NegLog => Interval::positive(),
            Family::Exp | Family::Affine { .. } => Interval::real_line(),
        }
    }

    fn admits(&self, domain: &Interval) -> Result<()> {
        let positive_only = |what: &str| {
            if Interval::positive().contains(domain.lo) || (domain.lo == 0.0 && !domain.lo_closed) {
                Ok(())
            } else {
                Err(Error::InvalidFunction(format!("{what} requires a domain inside (0,inf), got {domain}")))
            }
        };
        match *self {
            Family::Power { p } => {
                if !p.is_finite() {
                    return Err(Error::InvalidFunction(format!("power exponent must be finite, got {p}")));
                }
                if is_even_positive_integer(p) {
                    Ok(())
                } else if p >= 1.0 {
                    if domain.lo >= 0.0 {
                        Ok(())
                    } else {
                        Err(Error::InvalidFunction(format!("power:{p} requires a domain inside [0,inf), got {domain}")))
                    }
                } else if p <= 0.0 {
                    positive_only(&format!("power:{p}"))
                } else {
                    Err(Error::InvalidFunction(format!("power:{p} is not convex (need p >= 1 or p <= 0)")))
                }
            }
            Family::NegLog => positive_only("neglog"),
            Family::Exp => Ok(()),
            Family::Affine { a, b } => {
                if a.is_finite() && b.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidFunction("affine coefficients must be finite".into()))
                }
            }
        }
    }

    fn monotonicity_on(&self, domain: &Interval) -> Monotonicity {
        match *self {
            Family::Power { p } => {
                if p <= 0.0 {
                    if p == 0.0 {
                        Monotonicity::Increasing
                    } else {
                        Monotonicity::Decreasing
                    }
                } else if domain.lo >= 0.0 {
                    Monotonicity::Increasing
                } else if domain.hi <= 0.0 {
                    Monotonicity::Decreasing
                } else {
                    Monotonicity::Neither
                }
            }
            Family::Exp => Monotonicity::Increasing,
            Family::NegLog => Monotonicity::Decreasing,
            Family::Affine { a, .. } => {
                if a >= 0.0 {
                    Monotonicity::Increasing
                } else {
                    Monotonicity::Decreasing
                }
            }
        }
    }
}

impl ScalarFunction {
    pub fn new(family: Family, domain: Interval) -> Result<Self> {
        family.admits(&domain)?;
        let monotonicity = family.monotonicity_on(&domain);
        Ok(Self { family, domain, monotonicity })
    }

    /// `family` on its default domain.
    pub fn from_family(family: Family) -> Result<Self> {
        Self::new(family, family.default_domain())
    }

    pub fn power(p: f64) -> Result<Self> {
        Self::from_family(Family::Power { p })
    }

    pub fn exp() -> Self {
        Self::from_family(Family::Exp).expect("exp is admitted on the real line")
    }

    pub fn neglog() -> Self {
        Self::from_family(Family::NegLog).expect("neglog is admitted on (0,inf)")
    }

    pub fn affine(a: f64, b: f64) -> Result<Self> {
        Self::from_family(Family::Affine { a, b })
    }

    pub fn with_domain(self, domain: Interval) -> Result<Self> {
        Self::new(self.family, domain)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn domain(&self) -> &Interval {
        &self.domain
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotonicity
    }

    fn check(&self, t: f64) -> Result<()> {
        if self.domain.contains(t) {
            Ok(())
        } else {
            Err(Error::Domain { value: t, domain: self.domain.to_string() })
        }
    }

    /// Evaluation without the domain check; callers have validated `t`.
    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        match self.family {
            Family::Power { p } => match small_integer(p) {
                Some(k) => t.powi(k),
                None => t.powf(p),
            },
            Family::Exp => t.exp(),
            Family::NegLog => -t.ln(),
            Family::Affine { a, b } => a * t + b,
        }
    }

    pub(crate) fn deriv_unchecked(&self, t: f64) -> f64 {
        match self.family {
            Family::Power { p } => {
                if p == 0.0 {
                    0.0
                } else {
                    match small_integer(p - 1.0) {
                        Some(k) => p * t.powi(k),
                        None => p * t.powf(p - 1.0),
                    }
                }
            }
            Family::Exp => t.exp(),
            Family::NegLog => -1.0 / t,
            Family::Affine { a, .. } => a,
        }
    }

    /// `t * f'(t)`, the symbol of `f'(A) A`.
    pub(crate) fn tderiv_unchecked(&self, t: f64) -> f64 {
        match self.family {
            Family::Power { p } => match small_integer(p) {
                Some(k) => p * t.powi(k),
                None => p * t.powf(p),
            },
            Family::NegLog => -1.0,
            _ => t * self.deriv_unchecked(t),
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.eval_unchecked(t))
    }

    /// `f'(t)`; at a closed finite endpoint this is the one-sided derivative.
    pub fn deriv(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.deriv_unchecked(t))
    }

    pub fn tderiv(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.tderiv_unchecked(t))
    }

    /// `f(s) + f'(s)(t - s) <= f(t) + tol`.
    pub fn check_gradient_inequality(&self, s: f64, t: f64, tol: f64) -> Result<bool> {
        let fs = self.eval(s)?;
        let ft = self.eval(t)?;
        let ds = self.deriv_unchecked(s);
        Ok(fs + ds * (t - s) <= ft + tol)
    }
}

impl fmt::Display for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Power { p } => write!(f, "power:{p}")?,
            Family::Exp => write!(f, "exp")?,
            Family::NegLog => write!(f, "neglog")?,
            Family::Affine { a, b } => write!(f, "affine:{a},{b}")?,
        }
        if self.domain != self.family.default_domain() {
            write!(f, ";dom={}", self.domain)?;
        }
        Ok(())
    }
}

fn parse_number(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{s}'")))
}

/// Parses `power:3`, `exp`, `neglog`, `affine:2,-1`, optionally followed by
/// `;dom=(0,inf)` (a space also works as the separator).
impl FromStr for ScalarFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = match s.find([';', ' ']) {
            Some(i) => (&s[..i], s[i + 1..].trim()),
            None => (s, ""),
        };
        let (name, args) = head.split_once(':').unwrap_or((head, ""));
        let family = match name.trim() {
            "power" => Family::Power { p: parse_number(args)? },
            "exp" if args.is_empty() => Family::Exp,
            "neglog" if args.is_empty() => Family::NegLog,
            "affine" => {
                let (a, b) =
                    args.split_once(',').ok_or_else(|| Error::Parse(format!("affine needs 'a,b', got '{args}'")))?;
                Family::Affine { a: parse_number(a)?, b: parse_number(b)? }
            }
            _ => return Err(Error::Parse(format!("unknown function '{head}'"))),
        };
        let domain = if rest.is_empty() {
            family.default_domain()
        } else {
            let dom =
                rest.strip_prefix("dom=").ok_or_else(|| Error::Parse(format!("expected 'dom=...', got '{rest}'")))?;
            dom.parse::<Interval>()?
        };
        ScalarFunction::new(family, domain)
    }
}

impl Serialize for ScalarFunction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ScalarFunction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
