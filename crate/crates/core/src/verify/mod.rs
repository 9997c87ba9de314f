//! Numerical checks of the filter family's properties.
//!
//! Pointwise checks take a supremum over a dense grid that is doubled until
//! it stops moving. Integral checks use [`crate::quadrature`] on a finite
//! range whose end is fixed by a closed-form tail bound, using
//! `-log|H(iw)| >= alpha cos(q π/2) |w|^q`. Divergent integrals are handled
//! by growth profiles rather than by trying to compute infinity.

mod report;
pub mod signals;

use std::f64::consts::{FRAC_PI_2, LN_10};

use serde::Serialize;

use crate::complex::{frequency_response, log_gain, principal_pow, ComplexValue, FilterParams, ReferenceParams};
use crate::error::{Error, Result};
use crate::filtering::{convolve_fft_kernel, kernel_for_rate};
use crate::quadrature::{find_cutoff, integrate, stretched_exp_tail_bound};
use crate::spectral::{SampledSignal, DEFAULT_RESOLUTION_FACTOR, DEFAULT_TAIL_EPS};

pub use crate::quadrature::{QuadratureConfig, TailStrategy};
pub use report::{
    run_battery, CheckKind, CheckRecord, Comparator, Threshold, Thresholds, Verdict, VerificationReport, VerifyConfig,
};

/// Relative change at which a doubled sup grid counts as converged.
pub const SUP_GRID_TOL: f64 = 1e-3;
const MAX_GRID_DOUBLINGS: usize = 20;

/// Log-integrand level treated as evidence of divergence (`ln 1e100`).
pub const DIVERGENCE_LOG_THRESHOLD: f64 = 230.258_509_299_404_6;

fn dense_sup(omega: f64, grid_density: usize, f: impl Fn(f64) -> f64) -> Result<f64> {
    if !(omega.is_finite() && omega >= 0.0) {
        return Err(Error::InvalidParameter(format!("Omega must be finite and non-negative, got {omega}")));
    }
    if omega == 0.0 {
        return Ok(f(0.0));
    }
    let sup_on = |n: usize| (0..=n).map(|k| f(omega * k as f64 / n as f64)).fold(0.0, f64::max);
    let mut n = grid_density.max(2);
    let mut sup = sup_on(n);
    for _ in 0..MAX_GRID_DOUBLINGS {
        n *= 2;
        let next = sup_on(n);
        let settled = (next - sup).abs() <= SUP_GRID_TOL * next.abs();
        sup = next;
        if settled {
            break;
        }
    }
    Ok(sup)
}

/// `sup |H(iw) - 1|` over `|w| <= Omega`. Conjugate symmetry reduces this to `[0, Omega]`.
pub fn check_identity_approx(p: &FilterParams, omega: f64, grid_density: usize) -> Result<f64> {
    dense_sup(omega, grid_density, |w| (frequency_response(p, w) - 1.0).norm())
}

/// Pointwise `|H(iw) - 1|`.
pub fn identity_error_curve(p: &FilterParams, omegas: &[f64]) -> Vec<f64> {
    omegas.iter().map(|&w| (frequency_response(p, w) - 1.0).norm()).collect()
}

/// `sup |H(iw) - exp(-i alpha w)|` over `|w| <= Omega`.
pub fn delay_proximity(p: &FilterParams, omega: f64) -> Result<f64> {
    dense_sup(omega, 256, |w| (frequency_response(p, w) - ComplexValue::from_polar(1.0, -p.alpha() * w)).norm())
}

fn dt_l2_distance(a: &[f64], b: &[f64], dt: f64) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() * dt).sqrt()
}

/// `‖y - x‖` (discrete L2 with `dt` weight) for each filter, where `y` is `x`
/// filtered with the causal kernel at the signal's sampling rate.
pub fn check_output_convergence(seq: &[FilterParams], x: &SampledSignal) -> Result<Vec<f64>> {
    seq.iter()
        .map(|p| {
            let kernel = kernel_for_rate(p, x.dt(), DEFAULT_TAIL_EPS, DEFAULT_RESOLUTION_FACTOR)?;
            let y = convolve_fft_kernel(&kernel, x)?;
            Ok(dt_l2_distance(y.values(), x.values(), x.dt()))
        })
        .collect()
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ln ∫_a^b exp(g)`, shifting by the sampled maximum so that huge or tiny
/// integrands stay representable.
fn log_integral(g: &impl Fn(f64) -> f64, a: f64, b: f64, qc: &QuadratureConfig) -> Result<f64> {
    const SAMPLES: usize = 128;
    let pts: Vec<f64> = (0..=SAMPLES).map(|k| a + (b - a) * k as f64 / SAMPLES as f64).collect();
    let shift = pts.iter().map(|&w| g(w)).fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return if shift == f64::NEG_INFINITY {
            Ok(shift)
        } else {
            Err(Error::QuadratureNonConvergence(format!("non-finite log integrand on [{a}, {b}]")))
        };
    }
    let breaks: Vec<f64> = pts.iter().step_by(16).copied().collect();
    let r = integrate(|w| (g(w) - shift).exp(), a, b, &breaks, qc)?;
    Ok(if r.value > 0.0 { shift + r.value.ln() } else { f64::NEG_INFINITY })
}

/// Result of the smoothing-integral check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothingIntegral {
    pub finite: bool,
    /// The integral, or the partial integral at which divergence was declared.
    /// `+inf` if it exceeds the `f64` range; `log_value` is always usable.
    pub value: f64,
    pub log_value: f64,
    /// Where the integration stopped: tail cutoff, or the divergent truncation.
    pub truncation: f64,
}

/// `∫_R exp(|w|^rho) |H(iw)|^n dw`.
///
/// Finite cases are certified by a tail bound: for `rho < q` the integrand is
/// below `exp(-(n c / 2) w^q)` past `(2 / (n c))^(1/(q - rho))`, and for
/// `rho = q` with `n c > 1` below `exp(-(n c - 1) w^q)`, where
/// `c = alpha cos(q π/2)`. Otherwise partial integrals over doubling
/// truncations are followed until their log passes
/// [`DIVERGENCE_LOG_THRESHOLD`], which declares divergence.
pub fn smoothing_integral(p: &FilterParams, rho: f64, n: u32, qc: &QuadratureConfig) -> Result<SmoothingIntegral> {
    qc.validate()?;
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let nf = f64::from(n);
    let g = |w: f64| w.powf(rho) + nf * log_gain(p, w);
    let (q, c) = (p.q(), p.envelope_rate());
    let tail_rate = if rho < q {
        Some(((2.0 / (nf * c)).powf(1.0 / (q - rho)).max(1.0), nf * c / 2.0))
    } else if rho == q && nf * c > 1.0 {
        Some((1.0, nf * c - 1.0))
    } else {
        None
    };
    let ln2 = std::f64::consts::LN_2;

    if let Some((w_start, k)) = tail_rate {
        let cutoff = find_cutoff(w_start, qc.abs_tol / 10.0, |w| stretched_exp_tail_bound(k, q, w))?;
        let mut log_half = log_integral(&g, 0.0, 1.0_f64.min(cutoff), qc)?;
        let mut lo = 1.0;
        while lo < cutoff {
            let hi = (2.0 * lo).min(cutoff);
            log_half = log_sum_exp(log_half, log_integral(&g, lo, hi, qc)?);
            lo = hi;
        }
        let log_value = ln2 + log_half;
        return Ok(SmoothingIntegral { finite: true, value: log_value.exp(), log_value, truncation: cutoff });
    }

    let mut log_half = log_integral(&g, 0.0, 1.0, qc)?;
    let mut hi = 1.0;
    while hi < 1e300 {
        if ln2 + log_half > DIVERGENCE_LOG_THRESHOLD {
            let log_value = ln2 + log_half;
            return Ok(SmoothingIntegral { finite: false, value: log_value.exp(), log_value, truncation: hi });
        }
        log_half = log_sum_exp(log_half, log_integral(&g, hi, 2.0 * hi, qc)?);
        hi *= 2.0;
    }
    Err(Error::QuadratureNonConvergence(format!(
        "smoothing integral (rho = {rho}, n = {n}) neither certified finite nor divergent up to w = 1e300"
    )))
}

/// Integral over `[a, b] ⊂ [0, ∞)`: plain on `[0, 1]` (with breakpoints at
/// negative decades), in the variable `u = ln w` above 1 (breakpoints at decades).
fn integrate_half_line(f: &impl Fn(f64) -> f64, a: f64, b: f64, qc: &QuadratureConfig) -> Result<f64> {
    let mut total = 0.0;
    if a < 1.0 {
        let hi = b.min(1.0);
        let breaks: Vec<f64> = (1..=12).map(|k| 10f64.powi(-k)).collect();
        total += integrate(f, a, hi, &breaks, qc)?.value;
    }
    if b > 1.0 {
        let (ua, ub) = (a.max(1.0).ln(), b.ln());
        let breaks: Vec<f64> = (1..=300).map(|k| f64::from(k) * LN_10).take_while(|&u| u < ub).collect();
        total += integrate(|u: f64| f(u.exp()) * u.exp(), ua, ub, &breaks, qc)?.value;
    }
    Ok(total)
}

fn generalized_binomial(q: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |c, j| c * (q - j as f64) / (j as f64 + 1.0))
}

/// `∫_W^∞ Re((iw + beta)^q) / (1 + w^2) dw` from the binomial expansion in
/// `beta / w` and the geometric series in `1 / w^2`; needs `W > max(1, beta)`.
fn pw_unit_tail(beta: f64, q: f64, big_w: f64) -> f64 {
    let mut total = 0.0;
    for k in 0..200 {
        let coeff = generalized_binomial(q, k) * beta.powi(k as i32) * ((q - k as f64) * FRAC_PI_2).cos();
        let mut row = 0.0;
        for m in 0..200 {
            let e = k as f64 + 2.0 * m as f64 + 1.0 - q;
            let term = coeff * if m % 2 == 0 { 1.0 } else { -1.0 } * big_w.powf(-e) / e;
            row += term;
            if term.abs() <= 1e-18 * row.abs().max(f64::MIN_POSITIVE) {
                break;
            }
        }
        total += row;
        if k > 2 && row.abs() <= 1e-18 * total.abs() {
            break;
        }
    }
    total
}

/// `∫_R |log|H(iw)|| / (1 + w^2) dw`. The integrand is linear in alpha, so the
/// alpha = 1 integral is computed and scaled.
pub fn paley_wiener_integral(p: &FilterParams, qc: &QuadratureConfig) -> Result<f64> {
    qc.validate()?;
    let (beta, q) = (p.beta(), p.q());
    let big_w = 1e4_f64.max(100.0 * beta);
    let f = |w: f64| principal_pow(ComplexValue::new(beta, w), q).map(|z| z.re).unwrap_or(f64::NAN) / (1.0 + w * w);
    let head = integrate_half_line(&f, 0.0, big_w, qc)?;
    Ok(p.alpha() * 2.0 * (head + pw_unit_tail(beta, q, big_w)))
}

/// `∫_{|w| <= T} |log|H(iw)||^delta / (1 + w^2) dw` for each truncation `T`.
/// Any `delta > 0`; `delta = 1` gives partial Paley–Wiener integrals.
pub fn partial_log_integrals(p: &FilterParams, delta: f64, truncations: &[f64], qc: &QuadratureConfig) -> Result<Vec<f64>> {
    qc.validate()?;
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    if truncations.first().is_some_and(|&t| !(t > 0.0)) || truncations.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("truncations must be positive and strictly increasing".into()));
    }
    let f = |w: f64| (-log_gain(p, w)).powf(delta) / (1.0 + w * w);
    let mut acc = 0.0;
    let mut lo = 0.0;
    truncations
        .iter()
        .map(|&t| {
            acc += 2.0 * integrate_half_line(&f, lo, t, qc)?;
            lo = t;
            Ok(acc)
        })
        .collect()
}

/// Partial integrals of `|log|H||^delta / (1 + w^2)` from 0 up to each
/// truncation, for `delta > 1`. Growth without saturation is the sub-ideal
/// divergence signature; see [`decade_increments`] and friends.
pub fn subideal_divergence_profile(p: &FilterParams, delta: f64, truncations: &[f64], qc: &QuadratureConfig) -> Result<Vec<f64>> {
    if !(delta > 1.0) {
        return Err(Error::Domain(format!("the divergence profile needs delta > 1, got {delta}")));
    }
    partial_log_integrals(p, delta, truncations, qc)
}

/// Successive differences of a profile.
pub fn decade_increments(profile: &[f64]) -> Vec<f64> {
    profile.windows(2).map(|w| w[1] - w[0]).collect()
}

/// `max / min - 1` of the increments: small when they approach a constant
/// (logarithmic divergence).
pub fn log_signature_spread(increments: &[f64]) -> f64 {
    let max = increments.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = increments.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min - 1.0
    } else {
        f64::INFINITY
    }
}

/// Largest `|r / target - 1|` over successive increment ratios `r`.
pub fn power_signature_deviation(increments: &[f64], target: f64) -> f64 {
    increments.windows(2).map(|w| (w[1] / w[0] / target - 1.0).abs()).fold(0.0, f64::max)
}

/// `(∫_R (f - g)^2)^(1/2)` for even `f`, `g`, cutting the range where
/// `tail_bound(W)` (a bound on `∫_W^∞ (f - g)^2`) drops below `abs_tol / 10`.
pub fn l2_distance_between(
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    tail_bound: impl Fn(f64) -> f64,
    qc: &QuadratureConfig,
) -> Result<f64> {
    qc.validate()?;
    let cutoff = find_cutoff(1.0, qc.abs_tol / 10.0, tail_bound)?;
    let d2 = |w: f64| (f(w) - g(w)).powi(2);
    Ok((2.0 * integrate_half_line(&d2, 0.0, cutoff, qc)?).sqrt())
}

/// `‖|H(iw)| - exp(-mu |w|)‖_L2`.
pub fn l2_gain_distance(p: &FilterParams, r: &ReferenceParams, qc: &QuadratureConfig) -> Result<f64> {
    let (c, q, mu) = (p.envelope_rate(), p.q(), r.mu());
    l2_distance_between(
        |w| log_gain(p, w).exp(),
        |w| (-mu * w).exp(),
        |w| stretched_exp_tail_bound(2.0 * c, q, w) + (-2.0 * mu * w).exp() / (2.0 * mu),
        qc,
    )
}

/// `‖exp(-mu |w|)‖_L2 = mu^(-1/2)`.
pub fn reference_norm(r: &ReferenceParams) -> f64 {
    r.mu().recip().sqrt()
}

/// `ln(|H(iw)| / |M(iw)|)`.
pub fn log_gain_ratio(p: &FilterParams, r: &ReferenceParams, omega: f64) -> f64 {
    log_gain(p, omega) + r.mu() * omega.abs()
}

/// `|H(iw)| / |M(iw)|`, formed in log space.
pub fn gain_ratio(p: &FilterParams, r: &ReferenceParams, omega: f64) -> f64 {
    log_gain_ratio(p, r, omega).exp()
}

/// Fraction of the energy of `h` at `t < 0`.
pub fn causality_defect(h: &SampledSignal) -> Result<f64> {
    if !(h.t0() < 0.0) {
        return Err(Error::Domain("causality defect needs samples at t < 0".into()));
    }
    let total = h.energy();
    if !(total > 0.0) {
        return Err(Error::Degenerate("impulse response has zero energy".into()));
    }
    let negative: f64 = h.values().iter().enumerate().filter(|&(j, _)| h.time(j) < 0.0).map(|(_, v)| v * v).sum::<f64>() * h.dt();
    Ok(negative / total)
}
