//! Chord coefficients, the chord-minus-function constant `beta`, and the generalized
//! Kantorovich constant `K(m, M, p)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalarfn::ScalarFunction;

/// Exponents within this distance of 0 or 1 use the limit value `K = 1`.
pub const KANTOROVICH_LIMIT_BAND: f64 = 1e-9;

/// The chord of `f` over `[m, M]`: `t -> a_f t + b_f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChordCoefficients {
    pub a_f: f64,
    pub b_f: f64,
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
}

impl ChordCoefficients {
    pub fn at(&self, t: f64) -> f64 {
        self.a_f * t + self.b_f
    }
}

fn check_interval(f: &ScalarFunction, m: f64, big_m: f64) -> Result<()> {
    if !(m < big_m) || !m.is_finite() || !big_m.is_finite() {
        return Err(Error::BadInterval { lo: m, hi: big_m });
    }
    for t in [m, big_m] {
        if !f.domain().contains(t) {
            return Err(Error::Domain { value: t, domain: f.domain().to_string() });
        }
    }
    Ok(())
}

pub fn chord_coeffs(f: &ScalarFunction, m: f64, big_m: f64) -> Result<ChordCoefficients> {
    check_interval(f, m, big_m)?;
    let fm = f.eval(m)?;
    let f_big = f.eval(big_m)?;
    let width = big_m - m;
    Ok(ChordCoefficients { a_f: (f_big - fm) / width, b_f: (big_m * fm - m * f_big) / width, m, big_m })
}

/// `beta` and the point of `[m, M]` where it is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaResult {
    pub beta: f64,
    pub argmax: f64,
    pub chord: ChordCoefficients,
}

/// `max_{m <= t <= M} a_f t + b_f - alpha f(t)`.
///
/// The objective is concave, so its derivative `a_f - alpha f'(t)` is nonincreasing and the
/// maximizer is either an endpoint or the root of the derivative, found by bisection.
pub fn beta(f: &ScalarFunction, m: f64, big_m: f64, alpha: f64) -> Result<BetaResult> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::NonPositiveAlpha(alpha));
    }
    let chord = chord_coeffs(f, m, big_m)?;
    let g = |t: f64| chord.at(t) - alpha * f.eval_unchecked(t);
    let slope = |t: f64| chord.a_f - alpha * f.deriv_unchecked(t);

    let stationary = if slope(m) <= 0.0 {
        m
    } else if slope(big_m) >= 0.0 {
        big_m
    } else {
        let (mut lo, mut hi) = (m, big_m);
        while hi - lo > 1e-12 * (1.0 + lo.abs()) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if slope(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };

    let (argmax, beta) = [stationary, m, big_m]
        .into_iter()
        .map(|t| (t, g(t)))
        .fold((stationary, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best });
    Ok(BetaResult { beta, argmax, chord })
}

/// `K(m, M, p) = (m M^p - M m^p) / ((p-1)(M-m)) * ((p-1)/p * (M^p - m^p)/(m M^p - M m^p))^p`,
/// with the continuous value 1 at `p = 0` and `p = 1`.
pub fn kantorovich(m: f64, big_m: f64, p: f64) -> Result<f64> {
    if !(m > 0.0 && m < big_m && big_m.is_finite()) {
        return Err(Error::BadInterval { lo: m, hi: big_m });
    }
    if !p.is_finite() {
        return Err(Error::Parse(format!("exponent must be finite, got {p}")));
    }
    if p.abs() <= KANTOROVICH_LIMIT_BAND || (p - 1.0).abs() <= KANTOROVICH_LIMIT_BAND {
        return Ok(1.0);
    }
    let mp = m.powf(p);
    let big_mp = big_m.powf(p);
    let cross = m * big_mp - big_m * mp;
    let lead = cross / ((p - 1.0) * (big_m - m));
    let base = (p - 1.0) / p * (big_mp - mp) / cross;
    Ok(lead * base.powf(p))
}
