//! Principal-branch complex arithmetic and pointwise evaluation of the
//! sub-ideal transfer function `H(s) = exp(-alpha (s + beta)^q)` and the
//! non-causal reference gain `M(i w) = exp(-mu |w|)`.
//!
//! Everything here is a pure function of immutable values. Gains are
//! computed in log space; `transfer_eval` flushes to an exact zero once the
//! log-gain drops below the smallest normal `f64`, so callers that need
//! tiny gains should go through [`log_gain`].

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexValue = Complex64;

/// Default lower bound on `q` for sequence constructions.
pub const DEFAULT_Q_BAR: f64 = 0.5;

/// `ln(f64::MIN_POSITIVE)`; log-gains below this flush to zero.
pub const LN_MIN_POSITIVE: f64 = -708.396_418_532_264_1;

/// Parameters `(alpha, beta, q)` of one sub-ideal filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFilterParams")]
pub struct FilterParams {
    alpha: f64,
    beta: f64,
    q: f64,
}

#[derive(Deserialize)]
struct RawFilterParams {
    alpha: f64,
    beta: f64,
    q: f64,
}

impl TryFrom<RawFilterParams> for FilterParams {
    type Error = Error;
    fn try_from(raw: RawFilterParams) -> Result<Self> {
        FilterParams::new(raw.alpha, raw.beta, raw.q)
    }
}

impl FilterParams {
    /// Rejects anything outside `alpha > 0`, `beta > 0`, `0 < q < 1`.
    pub fn new(alpha: f64, beta: f64, q: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be positive and finite, got {alpha}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParameter(format!("beta must be positive and finite, got {beta}")));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!("q must lie in (0, 1), got {q}")));
        }
        Ok(Self { alpha, beta, q })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `alpha * cos(q pi / 2)`: the rate `c` in `|H(i w)| <= exp(-c |w|^q)`.
    pub fn envelope_rate(&self) -> f64 {
        self.alpha * (self.q * FRAC_PI_2).cos()
    }

    /// Enforces `q >= q_bar` for sequence constructions.
    pub fn check_q_bar(&self, q_bar: f64) -> Result<()> {
        if !(q_bar > 0.0 && q_bar < 1.0) {
            return Err(Error::InvalidParameter(format!("q_bar must lie in (0, 1), got {q_bar}")));
        }
        if self.q < q_bar {
            return Err(Error::InvalidParameter(format!("q = {} is below q_bar = {q_bar}", self.q)));
        }
        Ok(())
    }
}

impl fmt::Display for FilterParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "alpha={}, beta={}, q={}", self.alpha, self.beta, self.q)
    }
}

/// Decay rate `mu` of the reference filter `M(i w) = exp(-mu |w|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawReferenceParams")]
pub struct ReferenceParams {
    mu: f64,
}

#[derive(Deserialize)]
struct RawReferenceParams {
    mu: f64,
}

impl TryFrom<RawReferenceParams> for ReferenceParams {
    type Error = Error;
    fn try_from(raw: RawReferenceParams) -> Result<Self> {
        ReferenceParams::new(raw.mu)
    }
}

impl ReferenceParams {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidParameter(format!("mu must be positive and finite, got {mu}")));
        }
        Ok(Self { mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// Principal argument in `(-pi, pi]`.
///
/// The negative real axis maps to `+pi` regardless of the sign of the zero
/// imaginary part.
pub fn principal_arg(z: ComplexValue) -> Result<f64> {
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::Domain("argument of zero is undefined".into()));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite complex value {z}")));
    }
    if z.im == 0.0 && z.re < 0.0 {
        return Ok(std::f64::consts::PI);
    }
    Ok(z.im.atan2(z.re))
}

/// Principal branch `|z|^q (cos(q Arg z) + i sin(q Arg z))` for `0 < q <= 1`.
pub fn principal_pow(z: ComplexValue, q: f64) -> Result<ComplexValue> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::Domain(format!("exponent must lie in (0, 1], got {q}")));
    }
    let theta = principal_arg(z)?;
    let modulus = z.re.hypot(z.im).powf(q);
    let (sin, cos) = (q * theta).sin_cos();
    Ok(ComplexValue::new(modulus * cos, modulus * sin))
}

/// `(s + beta)^q` on the closed right half-plane.
fn shifted_power(p: &FilterParams, s: ComplexValue) -> Result<ComplexValue> {
    if !(s.re >= 0.0) || !s.im.is_finite() || !s.re.is_finite() {
        return Err(Error::Domain(format!("transfer function is evaluated on Re s >= 0 only, got s = {s}")));
    }
    principal_pow(ComplexValue::new(s.re + p.beta, s.im), p.q)
}

/// `H(s) = exp(-alpha (s + beta)^q)` for `Re s >= 0`.
///
/// Returns exactly zero when the log-gain underflows the normal range.
pub fn transfer_eval(p: &FilterParams, s: ComplexValue) -> Result<ComplexValue> {
    let w = shifted_power(p, s)?;
    let log_modulus = -p.alpha * w.re;
    if log_modulus < LN_MIN_POSITIVE {
        return Ok(ComplexValue::new(0.0, 0.0));
    }
    let (sin, cos) = (-p.alpha * w.im).sin_cos();
    let r = log_modulus.exp();
    Ok(ComplexValue::new(r * cos, r * sin))
}

/// Frequency response on the imaginary axis, `H(i omega)`.
pub fn frequency_response(p: &FilterParams, omega: f64) -> ComplexValue {
    // Re(i omega) = 0 is always admissible.
    transfer_eval(p, ComplexValue::new(0.0, omega)).expect("imaginary axis lies in the closed right half-plane")
}

/// `ln |H(i omega)| = -alpha |i omega + beta|^q cos(q Arg(i omega + beta))`.
pub fn log_gain(p: &FilterParams, omega: f64) -> f64 {
    let theta = omega.atan2(p.beta);
    -p.alpha * p.beta.hypot(omega).powf(p.q) * (p.q * theta).cos()
}

/// Unwrapped phase of `H(i omega)`: `-alpha |i omega + beta|^q sin(q Arg(i omega + beta))`.
pub fn phase(p: &FilterParams, omega: f64) -> f64 {
    let theta = omega.atan2(p.beta);
    -p.alpha * p.beta.hypot(omega).powf(p.q) * (p.q * theta).sin()
}

/// `M(i omega) = exp(-mu |omega|)`.
pub fn reference_gain(r: &ReferenceParams, omega: f64) -> f64 {
    (-r.mu * omega.abs()).exp()
}
