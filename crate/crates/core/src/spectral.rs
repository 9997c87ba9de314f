//! Frequency grids, sampled spectra and sampled signals, and the FFT bridge
//! between them.
//!
//! Transforms follow the convention
//!
//! ```text
//! X(i w) = ∫ exp(-i w t) x(t) dt,      x(t) = (1 / 2π) ∫ exp(i w t) X(i w) dw
//! ```
//!
//! discretised on a symmetric grid `w_k = (k - n/2) dw`, `k = 0..n`, and a time
//! grid with `dt * dw = 2π / n`. The forward sum is scaled by `dt`, the inverse
//! by `dw / 2π`, so both approximate the integrals rather than the raw DFT.

use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::Serialize;

use crate::complex::{frequency_response, ComplexValue, FilterParams};
use crate::error::{Error, Result};

/// Default cap on grid size.
pub const DEFAULT_MAX_SAMPLES: usize = 1 << 24;

/// Default multiple of `alpha` the time window has to cover.
pub const DEFAULT_RESOLUTION_FACTOR: f64 = 16.0;

pub const DEFAULT_TAIL_EPS: f64 = 1e-12;

/// Uniform frequency grid over `[-omega_max, omega_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyGrid {
    omega_max: f64,
    n: usize,
}

impl FrequencyGrid {
    /// `n` must be a power of two, at least 8.
    pub fn new(omega_max: f64, n: usize) -> Result<Self> {
        if !(omega_max.is_finite() && omega_max > 0.0) {
            return Err(Error::InvalidParameter(format!("omega_max must be positive, got {omega_max}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("sample count must be a power of two >= 8, got {n}")));
        }
        Ok(Self { omega_max, n })
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn d_omega(&self) -> f64 {
        2.0 * self.omega_max / self.n as f64
    }

    /// Time step of the conjugate grid, `π / omega_max`.
    pub fn dt(&self) -> f64 {
        PI / self.omega_max
    }

    /// First sample time of the centred conjugate time grid, `-n dt / 2`.
    pub fn t0(&self) -> f64 {
        -((self.n / 2) as f64) * self.dt()
    }

    pub fn omega(&self, k: usize) -> f64 {
        (k as f64 - (self.n / 2) as f64) * self.d_omega()
    }

    pub fn omegas(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.omega(k))
    }

    /// Same frequency band, twice the samples (twice the time window).
    pub fn doubled(&self) -> Result<Self> {
        Self::new(self.omega_max, self.n * 2)
    }

    /// Twice the band and twice the samples: halves `dt` at a fixed time window.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.omega_max * 2.0, self.n * 2)
    }
}

/// Complex frequency-response samples aligned with a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSamples {
    grid: FrequencyGrid,
    values: Vec<ComplexValue>,
    hermitian: bool,
}

impl SpectrumSamples {
    pub fn new(grid: FrequencyGrid, values: Vec<ComplexValue>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!("{} spectrum values for a grid of {}", values.len(), grid.len())));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidParameter("spectrum contains non-finite values".into()));
        }
        let hermitian = is_hermitian(&values);
        Ok(Self { grid, values, hermitian })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[ComplexValue] {
        &self.values
    }

    /// True when `values[-w] = conj(values[w])` to 1e-12 for every paired bin.
    ///
    /// The `-omega_max` bin has no partner on the grid and is not checked.
    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }
}

const HERMITIAN_TOL: f64 = 1e-12;

fn is_hermitian(values: &[ComplexValue]) -> bool {
    let n = values.len();
    let half = n / 2;
    if values[half].im.abs() > HERMITIAN_TOL {
        return false;
    }
    (1..half).all(|k| (values[k] - values[n - k].conj()).norm() <= HERMITIAN_TOL)
}

/// Uniformly sampled real signal, `t_j = t0 + j dt`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledSignal {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
}

impl SampledSignal {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidParameter("t0 must be finite".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("signal contains non-finite samples".into()));
        }
        Ok(Self { t0, dt, values })
    }

    pub fn zeros(t0: f64, dt: f64, len: usize) -> Result<Self> {
        Self::new(t0, dt, vec![0.0; len])
    }

    /// Samples of `f` at `t0 + j dt`.
    pub fn from_fn(t0: f64, dt: f64, len: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(t0, dt, (0..len).map(|j| f(t0 + j as f64 * dt)).collect())
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }

    /// `sum x_j^2 dt`.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.dt
    }

    pub fn l2_norm(&self) -> f64 {
        self.energy().sqrt()
    }

    /// `sum x_j dt`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dt
    }

    /// Mirror image `x(-t)` on the reflected time grid.
    pub fn time_reversed(&self) -> Self {
        let last = self.time(self.len().saturating_sub(1));
        let mut values = self.values.clone();
        values.reverse();
        Self { t0: -last, dt: self.dt, values }
    }
}

/// Picks a grid for truncating the inverse transform of `p`.
///
/// `omega_max` is the smallest frequency where the closed-form envelope
/// `exp(-alpha cos(q π/2) w^q)` drops to `tail_eps`, rounded up to three
/// significant digits. The time window `n π / omega_max` must cover both
/// `resolution_factor * alpha` and twice the `exp(-beta t)` decay time to
/// `tail_eps`; `n` is the next power of two meeting that.
pub fn auto_grid(p: &FilterParams, tail_eps: f64, resolution_factor: f64) -> Result<FrequencyGrid> {
    auto_grid_capped(p, tail_eps, resolution_factor, DEFAULT_MAX_SAMPLES)
}

pub fn auto_grid_capped(p: &FilterParams, tail_eps: f64, resolution_factor: f64, max_samples: usize) -> Result<FrequencyGrid> {
    if !(tail_eps > 0.0 && tail_eps < 1.0) {
        return Err(Error::InvalidParameter(format!("tail_eps must lie in (0, 1), got {tail_eps}")));
    }
    if !(resolution_factor.is_finite() && resolution_factor > 0.0) {
        return Err(Error::InvalidParameter(format!("resolution_factor must be positive, got {resolution_factor}")));
    }
    let log_eps = -tail_eps.ln();
    let omega_max = round_up_3_digits((log_eps / p.envelope_rate()).powf(1.0 / p.q()));
    let span = (resolution_factor * p.alpha()).max(2.0 * log_eps / p.beta());
    let n = samples_for_span(span, omega_max, max_samples)?;
    FrequencyGrid::new(omega_max, n)
}

/// Grid whose time step is exactly `dt` (band `π / dt`), with the same
/// time-window rule as [`auto_grid`]. Used to build kernels for sampled data.
pub fn grid_for_rate(p: &FilterParams, dt: f64, tail_eps: f64, resolution_factor: f64) -> Result<FrequencyGrid> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if !(tail_eps > 0.0 && tail_eps < 1.0) {
        return Err(Error::InvalidParameter(format!("tail_eps must lie in (0, 1), got {tail_eps}")));
    }
    let omega_max = PI / dt;
    let span = (resolution_factor * p.alpha()).max(2.0 * -tail_eps.ln() / p.beta());
    let n = samples_for_span(span, omega_max, DEFAULT_MAX_SAMPLES)?;
    FrequencyGrid::new(omega_max, n)
}

fn samples_for_span(span: f64, omega_max: f64, max_samples: usize) -> Result<usize> {
    let required = (span * omega_max / PI).ceil();
    if !required.is_finite() || required > max_samples as f64 {
        return Err(Error::GridOverflow { required: required.min(u64::MAX as f64) as u64, cap: max_samples });
    }
    let n = (required as usize).max(8).next_power_of_two();
    if n > max_samples {
        return Err(Error::GridOverflow { required: n as u64, cap: max_samples });
    }
    Ok(n)
}

fn round_up_3_digits(x: f64) -> f64 {
    let e = x.log10().floor() as i32 - 2;
    if e < 0 {
        let scale = 10f64.powi(-e);
        (x * scale).ceil() / scale
    } else {
        let scale = 10f64.powi(e);
        (x / scale).ceil() * scale
    }
}

/// `values[k] = H(i w_k)`.
pub fn sample_frequency_response(p: &FilterParams, grid: &FrequencyGrid) -> SpectrumSamples {
    let n = grid.len();
    let half = n / 2;
    let mut values = vec![ComplexValue::new(0.0, 0.0); n];
    for k in half..n {
        values[k] = frequency_response(p, grid.omega(k));
    }
    for k in 1..half {
        values[k] = values[n - k].conj();
    }
    values[0] = frequency_response(p, grid.omega(0));
    SpectrumSamples { grid: *grid, values, hermitian: true }
}

/// Result of an inverse transform: the real part plus the largest discarded
/// imaginary component, for diagnostics.
#[derive(Debug, Clone)]
pub struct InverseTransform {
    pub signal: SampledSignal,
    pub imag_residue: f64,
}

/// `x(t_j) = (dw / 2π) Σ_k X_k exp(i w_k t_j)` on `t_j = t0 + j dt`, `dt = π / omega_max`.
///
/// The unpaired `-omega_max` bin enters through its real part, which keeps
/// the output exactly real for Hermitian input.
pub fn inverse_transform(spectrum: &SpectrumSamples, t0: f64) -> InverseTransform {
    let grid = spectrum.grid();
    let n = grid.len();
    let dt = grid.dt();
    let scale = grid.d_omega() / (2.0 * PI);
    let mut buf: Vec<ComplexValue> = spectrum
        .values()
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let v = if k == 0 { ComplexValue::new(v.re, 0.0) } else { v };
            v * origin_phase(grid, k, t0)
        })
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let mut imag_residue: f64 = 0.0;
    let values = buf
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let v = v * scale * alternating(j);
            imag_residue = imag_residue.max(v.im.abs());
            v.re
        })
        .collect();
    InverseTransform { signal: SampledSignal { t0, dt, values }, imag_residue }
}

/// `X(i w_k) = dt Σ_j x_j exp(-i w_k t_j)`.
///
/// Requires `x.len() == grid.len()` and `n dt dw = 2π` to 1e-9 relative.
pub fn forward_transform(x: &SampledSignal, grid: &FrequencyGrid) -> Result<SpectrumSamples> {
    let n = grid.len();
    if x.len() != n {
        return Err(Error::ShapeMismatch(format!("signal has {} samples, grid has {n}", x.len())));
    }
    let product = n as f64 * x.dt() * grid.d_omega();
    if ((product - 2.0 * PI) / (2.0 * PI)).abs() > 1e-9 {
        return Err(Error::ShapeMismatch(format!("n dt dw = {product}, expected 2π")));
    }
    let mut buf: Vec<ComplexValue> =
        x.values().iter().enumerate().map(|(j, &v)| ComplexValue::new(v * alternating(j), 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let values = buf
        .into_iter()
        .enumerate()
        .map(|(k, v)| v * x.dt() * origin_phase(grid, k, x.t0()).conj())
        .collect();
    SpectrumSamples::new(*grid, values)
}

/// `exp(i w_k t0)`. The whole-sample part of `t0` is reduced modulo `n`
/// in integer arithmetic so long windows do not lose phase accuracy.
fn origin_phase(grid: &FrequencyGrid, k: usize, t0: f64) -> ComplexValue {
    let n = grid.len() as i64;
    let steps = (t0 / grid.dt()).round();
    let frac = t0 - steps * grid.dt();
    let index = (k as i64 - n / 2) * (steps as i64 % n);
    let whole = 2.0 * PI * index.rem_euclid(n) as f64 / n as f64;
    ComplexValue::from_polar(1.0, whole + grid.omega(k) * frac)
}

/// `(-1)^j`, from the half-grid frequency shift.
fn alternating(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Impulse response `h = F^{-1} H` on the grid's centred time window.
pub fn impulse_response(p: &FilterParams, grid: &FrequencyGrid) -> Result<SampledSignal> {
    Ok(impulse_response_detailed(p, grid)?.signal)
}

pub fn impulse_response_detailed(p: &FilterParams, grid: &FrequencyGrid) -> Result<InverseTransform> {
    let spectrum = sample_frequency_response(p, grid);
    let out = inverse_transform(&spectrum, grid.t0());
    let peak = out.signal.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(Error::Degenerate(format!("impulse response of {p} vanishes on the grid")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::transfer_eval;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fig3() -> FilterParams {
        FilterParams::new(6.3925, 0.1, 0.9).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(FrequencyGrid::new(1.0, 4).is_err());
        assert!(FrequencyGrid::new(1.0, 12).is_err());
        assert!(FrequencyGrid::new(0.0, 16).is_err());
        let g = FrequencyGrid::new(10.0, 16).unwrap();
        assert_eq!(g.omega(8), 0.0);
        assert_eq!(g.omega(0), -10.0);
        assert_relative_eq!(g.d_omega() * g.dt() * 16.0, 2.0 * PI, max_relative = 1e-15);
    }

    #[test]
    fn auto_grid_matches_root_finding_oracle() {
        // Bisection on the closed-form envelope, independent of the power formula.
        let p = fig3();
        let target = 1e-12f64;
        let bound = |w: f64| (-6.3925 * (0.45 * PI).cos() * w.powf(0.9)).exp();
        let (mut lo, mut hi) = (1.0, 1000.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if bound(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // mpmath root: 39.952928544516800
        assert_relative_eq!(hi, 39.952_928_544_516_8, max_relative = 1e-12);
        let g = auto_grid(&p, target, DEFAULT_RESOLUTION_FACTOR).unwrap();
        assert_eq!(g.omega_max(), 40.0);
        assert!(bound(g.omega_max()) <= target);
        // window 2 ln(1e12) / 0.1 = 552.6 s at dt = π/40 needs 7037 samples
        assert_eq!(g.len(), 8192);
    }

    #[test]
    fn auto_grid_rejects_and_overflows() {
        let p = fig3();
        assert!(auto_grid(&p, 1.0, 16.0).is_err());
        assert!(auto_grid(&p, 0.0, 16.0).is_err());
        let tiny_beta = FilterParams::new(1.0, 1e-4, 0.999).unwrap();
        assert!(matches!(auto_grid(&tiny_beta, 1e-12, 16.0), Err(Error::GridOverflow { .. })));
        assert!(matches!(auto_grid_capped(&p, 1e-12, 16.0, 1024), Err(Error::GridOverflow { .. })));
    }

    #[test]
    fn auto_grid_tightening_eps_widens_band() {
        let p = fig3();
        let loose = auto_grid(&p, 1e-8, 16.0).unwrap();
        let tight = auto_grid(&p, 1e-12, 16.0).unwrap();
        assert!(tight.omega_max() > loose.omega_max());
    }

    #[test]
    fn sampled_response_examples() {
        let p = fig3();
        let g = FrequencyGrid::new(40.0, 64).unwrap();
        let s = sample_frequency_response(&p, &g);
        assert!(s.is_hermitian());
        let dc = s.values()[32];
        assert_relative_eq!(dc.re, (-6.3925 * 0.1f64.powf(0.9)).exp(), max_relative = 1e-14);
        for k in 1..32 {
            assert_eq!(s.values()[k], s.values()[64 - k].conj());
        }
        for k in 0..64 {
            let direct = transfer_eval(&p, ComplexValue::new(0.0, g.omega(k))).unwrap();
            assert!((direct - s.values()[k]).norm() < 1e-15);
        }

        let fig1 = FilterParams::new(6.36649, 0.01, 0.99).unwrap();
        let g = FrequencyGrid::new(200.0, 16).unwrap();
        let s = sample_frequency_response(&fig1, &g);
        // w_12 = 100
        assert_relative_eq!(s.values()[12].norm(), 6.704_438_785e-5, max_relative = 1e-6);
    }

    #[test]
    fn hermitian_flag_detects_asymmetry() {
        let g = FrequencyGrid::new(1.0, 8).unwrap();
        let mut v = vec![ComplexValue::new(1.0, 0.0); 8];
        assert!(SpectrumSamples::new(g, v.clone()).unwrap().is_hermitian());
        v[2] = ComplexValue::new(1.0, 0.5);
        assert!(!SpectrumSamples::new(g, v).unwrap().is_hermitian());
        assert!(SpectrumSamples::new(g, vec![ComplexValue::new(0.0, 0.0); 4]).is_err());
    }

    /// Brute-force O(n^2) inverse sum straight from the definition.
    fn brute_inverse(spectrum: &SpectrumSamples, t: f64) -> ComplexValue {
        let g = spectrum.grid();
        let mut acc = ComplexValue::new(0.0, 0.0);
        for (k, v) in spectrum.values().iter().enumerate() {
            let v = if k == 0 { ComplexValue::new(v.re, 0.0) } else { *v };
            acc += v * ComplexValue::from_polar(1.0, g.omega(k) * t);
        }
        acc * g.d_omega() / (2.0 * PI)
    }

    #[test]
    fn inverse_matches_brute_force_sum() {
        let p = FilterParams::new(1.0, 0.5, 0.7).unwrap();
        let g = FrequencyGrid::new(30.0, 256).unwrap();
        let spectrum = sample_frequency_response(&p, &g);
        let h = impulse_response(&p, &g).unwrap();
        for j in (0..256).step_by(7) {
            let brute = brute_inverse(&spectrum, h.time(j));
            assert!((brute.re - h.values()[j]).abs() < 1e-12, "j={j}");
            assert!(brute.im.abs() < 1e-12);
        }
    }

    #[test]
    fn impulse_response_fig3_properties() {
        let p = fig3();
        let g = auto_grid(&p, DEFAULT_TAIL_EPS, DEFAULT_RESOLUTION_FACTOR).unwrap();
        let out = impulse_response_detailed(&p, &g).unwrap();
        let h = &out.signal;
        let peak = h.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(out.imag_residue <= 1e-10 * peak);
        assert_relative_eq!(h.t0(), -(4096.0 * PI / 40.0), max_relative = 1e-15);
        assert_relative_eq!(h.integral(), 0.447_191_631_916_190_2, max_relative = 1e-6);

        let (jmax, _) = h.values().iter().enumerate().fold((0, f64::MIN), |acc, (j, &v)| if v > acc.1 { (j, v) } else { acc });
        assert!(h.time(jmax) > 0.0);
        // the response is nearly zero on [0, 1] ahead of the bulk around t ~ 6
        let early = h
            .values()
            .iter()
            .enumerate()
            .filter(|(j, _)| (0.0..=1.0).contains(&h.time(*j)))
            .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
        assert!(early < 1e-3 * peak, "{early} vs {peak}");
    }

    #[test]
    fn doubling_n_keeps_common_samples() {
        let p = fig3();
        let g = auto_grid(&p, DEFAULT_TAIL_EPS, DEFAULT_RESOLUTION_FACTOR).unwrap();
        let h1 = impulse_response(&p, &g).unwrap();
        let h2 = impulse_response(&p, &g.doubled().unwrap()).unwrap();
        let peak = h1.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // h2 has n/2 extra samples on each side of the same time points
        let offset = g.len() / 2;
        for j in 0..g.len() {
            assert_relative_eq!(h1.time(j), h2.time(j + offset), max_relative = 1e-12, epsilon = 1e-12);
            assert!((h1.values()[j] - h2.values()[j + offset]).abs() <= 1e-8 * peak);
        }
    }

    #[test]
    fn forward_examples() {
        let g = FrequencyGrid::new(32.0, 256).unwrap();
        let dt = g.dt();
        let zero = SampledSignal::zeros(g.t0(), dt, 256).unwrap();
        assert!(forward_transform(&zero, &g).unwrap().values().iter().all(|v| v.norm() == 0.0));

        // unit-area impulse at t = 0 (index n/2)
        let mut v = vec![0.0; 256];
        v[128] = 1.0 / dt;
        let x = SampledSignal::new(g.t0(), dt, v).unwrap();
        for val in forward_transform(&x, &g).unwrap().values() {
            assert!((val - 1.0).norm() < 1e-12);
        }

        // Gaussian: sqrt(2π) exp(-w^2 / 2)
        let x = SampledSignal::from_fn(g.t0(), dt, 256, |t| (-t * t / 2.0).exp()).unwrap();
        let spec = forward_transform(&x, &g).unwrap();
        for k in 0..256 {
            let w = g.omega(k);
            if w.abs() <= 5.0 {
                let expect = (2.0 * PI).sqrt() * (-w * w / 2.0).exp();
                assert!((spec.values()[k] - expect).norm() <= 1e-6 * expect, "w={w}");
            }
        }
    }

    #[test]
    fn forward_shape_checks() {
        let g = FrequencyGrid::new(32.0, 256).unwrap();
        let short = SampledSignal::zeros(0.0, g.dt(), 128).unwrap();
        assert!(matches!(forward_transform(&short, &g), Err(Error::ShapeMismatch(_))));
        let wrong_dt = SampledSignal::zeros(0.0, g.dt() * 1.01, 256).unwrap();
        assert!(matches!(forward_transform(&wrong_dt, &g), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn time_reversal_reflects_grid() {
        let x = SampledSignal::new(-1.0, 0.5, vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let r = x.time_reversed();
        assert_eq!(r.t0(), -1.0);
        assert_eq!(r.values(), &[5.0, 4.0, 3.0, 2.0, 1.0]);
    }

    fn band_limited(seed: u64, g: &FrequencyGrid) -> SampledSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = g.len();
        let modes: Vec<(f64, f64, f64)> =
            (0..6).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(0.0..0.8 * g.omega_max()), rng.random_range(0.0..6.28))).collect();
        let envelope = g.dt() * n as f64 / 8.0;
        SampledSignal::from_fn(g.t0(), g.dt(), n, |t| {
            let w = (-(t / envelope).powi(2)).exp();
            modes.iter().map(|(a, f, ph)| a * (f * t + ph).cos()).sum::<f64>() * w
        })
        .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn forward_inverse_round_trip(seed in any::<u64>(), t0_shift in -3i32..3) {
            let g = FrequencyGrid::new(20.0, 512).unwrap();
            let x = band_limited(seed, &g);
            let x = SampledSignal::new(x.t0() + t0_shift as f64 * g.dt(), x.dt(), x.into_values()).unwrap();
            let spec = forward_transform(&x, &g).unwrap();
            let back = inverse_transform(&spec, x.t0()).signal;
            let scale = x.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (a, b) in x.values().iter().zip(back.values()) {
                // the -omega_max bin is folded to its real part; band-limited input keeps it ~0
                prop_assert!((a - b).abs() <= 1e-10 * scale);
            }
            // discrete Parseval
            let lhs = x.energy();
            let rhs = spec.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * g.d_omega() / (2.0 * PI);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs);
        }

        #[test]
        fn impulse_response_is_real(a in 0.5f64..8.0, b in 0.05f64..2.0, q in 0.5f64..0.95) {
            let p = FilterParams::new(a, b, q).unwrap();
            let g = FrequencyGrid::new(20.0, 1024).unwrap();
            let out = impulse_response_detailed(&p, &g).unwrap();
            let peak = out.signal.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(out.imag_residue <= 1e-10 * peak);
            let dc = (-a * b.powf(q)).exp();
            prop_assert!((out.signal.integral() - dc).abs() <= 1e-6 * dc);
        }
    }
}
