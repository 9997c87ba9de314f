//! Causal convolution of sampled signals with a sampled impulse response.
//!
//! The continuous output `y(t) = ∫_{-∞}^{t} h(t - τ) x(τ) dτ` is discretised by
//! a left-point Riemann sum, `y_j = dt Σ_{k>=0} h_k x_{j-k}`, so no future
//! input sample ever enters `y_j`. Output has the same length and time
//! origin as the input.
//!
//! Kernels computed numerically carry a small amount of negative-time
//! leakage. [`CausalKernel::prepare`] clips it and records the clipped
//! energy fraction, so the applied filter is exactly causal.
//!
//! [`kernel_for_rate`] picks how a kernel is made for data sampled at `dt`.
//! When the band `π / dt` reaches the point where the gain envelope is below
//! `tail_eps`, the kernel is the impulse response on that band. Otherwise the
//! band edge cuts through a non-negligible response, the band-limited inverse
//! rings on both sides of `t = 0`, and clipping that ringing distorts the
//! passband. Such rates use the bilinear map
//! `s = (2 / dt)(1 - z^-1)/(1 + z^-1)`, which sends the closed unit disc onto
//! the closed right half-plane: the kernel is causal by construction, keeps
//! the DC gain exactly and tends to the identity as `alpha -> 0`.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::complex::{ComplexValue, FilterParams};
use crate::error::{Error, Result};
use crate::spectral::{grid_for_rate, impulse_response, SampledSignal};

/// Trailing kernel samples below this fraction of the peak are dropped.
pub const KERNEL_TRUNCATION: f64 = 1e-15;

const RATE_TOL: f64 = 1e-9;
const ALIGN_TOL: f64 = 1e-6;

/// Causal part of an impulse response: `values[k]` is `h(k dt)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CausalKernel {
    values: Vec<f64>,
    dt: f64,
    clipped_energy_fraction: f64,
    source_len: usize,
}

impl CausalKernel {
    /// Clips `t < 0`, aligns lag 0 with `t = 0` and drops the negligible tail.
    ///
    /// The kernel time grid must contain `t = 0` (up to 1e-6 of a sample).
    pub fn prepare(h: &SampledSignal) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::Degenerate("empty impulse response".into()));
        }
        let dt = h.dt();
        let offset = h.t0() / dt;
        if (offset - offset.round()).abs() > ALIGN_TOL {
            return Err(Error::ShapeMismatch(format!("kernel time grid (t0 = {}, dt = {dt}) does not contain t = 0", h.t0())));
        }
        let offset = offset.round() as i64;

        let total: f64 = h.values().iter().map(|v| v * v).sum();
        let mut clipped = 0.0;
        let mut values = Vec::new();
        if offset > 0 {
            values.resize(offset as usize, 0.0);
        }
        for (j, &v) in h.values().iter().enumerate() {
            if offset + (j as i64) < 0 {
                clipped += v * v;
            } else {
                values.push(v);
            }
        }
        let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let keep = values.iter().rposition(|v| v.abs() >= KERNEL_TRUNCATION * peak && *v != 0.0).map_or(1, |i| i + 1);
        values.truncate(keep.max(1));
        if values.is_empty() {
            values.push(0.0);
        }
        let clipped_energy_fraction = if total > 0.0 { clipped / total } else { 0.0 };
        Ok(Self { values, dt, clipped_energy_fraction, source_len: h.len() })
    }

    /// Kernel taken as-is, `values[k] = h(k dt)`.
    pub fn from_causal_samples(dt: f64, values: Vec<f64>) -> Result<Self> {
        let h = SampledSignal::new(0.0, dt, values)?;
        Self::prepare(&h)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Energy share of the source samples at `t < 0`.
    pub fn clipped_energy_fraction(&self) -> f64 {
        self.clipped_energy_fraction
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    pub fn as_signal(&self) -> SampledSignal {
        SampledSignal::new(0.0, self.dt, self.values.clone()).expect("kernel samples are finite")
    }

    fn check_rate(&self, x: &SampledSignal) -> Result<()> {
        if ((self.dt - x.dt()) / x.dt()).abs() > RATE_TOL {
            return Err(Error::RateMismatch { kernel_dt: self.dt, signal_dt: x.dt() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMethod {
    /// Impulse response on the band `[-π/dt, π/dt]`, clipped to `t >= 0`.
    BandLimited,
    /// Bilinear discretisation of `H`.
    Bilinear,
}

/// [`KernelMethod::BandLimited`] iff `gain_bound(p, π / dt) <= tail_eps`.
pub fn kernel_method_for_rate(p: &FilterParams, dt: f64, tail_eps: f64) -> KernelMethod {
    let nyquist = std::f64::consts::PI / dt;
    if -p.envelope_rate() * nyquist.powf(p.q()) <= tail_eps.ln() {
        KernelMethod::BandLimited
    } else {
        KernelMethod::Bilinear
    }
}

/// Kernel for filtering data sampled at `dt`, by [`kernel_method_for_rate`].
pub fn kernel_for_rate(p: &FilterParams, dt: f64, tail_eps: f64, resolution_factor: f64) -> Result<CausalKernel> {
    kernel_with_method(p, dt, tail_eps, resolution_factor, kernel_method_for_rate(p, dt, tail_eps))
}

pub fn kernel_with_method(
    p: &FilterParams,
    dt: f64,
    tail_eps: f64,
    resolution_factor: f64,
    method: KernelMethod,
) -> Result<CausalKernel> {
    let grid = grid_for_rate(p, dt, tail_eps, resolution_factor)?;
    match method {
        KernelMethod::BandLimited => CausalKernel::prepare(&impulse_response(p, &grid)?),
        KernelMethod::Bilinear => bilinear_kernel(p, dt, grid.len()),
    }
}

/// Taylor coefficients of `G(w) = H((2/dt)(1 - w)/(1 + w))`, divided by `dt`.
///
/// `G` is sampled at the half-shifted angles `(m + 1/2) 2π / n`, which skip
/// `w = -1`: there `G` drops to 0 within a neighbourhood that is far
/// narrower than a bin when `alpha` is small. Coefficients decay like
/// `exp(-beta k dt)`, so the `n` from [`grid_for_rate`] bounds the wrap-around.
fn bilinear_kernel(p: &FilterParams, dt: f64, n: usize) -> Result<CausalKernel> {
    let step = std::f64::consts::TAU / n as f64;
    let mut buf: Vec<ComplexValue> = (0..n)
        .map(|m| crate::complex::frequency_response(p, 2.0 / dt * (0.5 * step * (m as f64 + 0.5)).tan()))
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / (n as f64 * dt);
    let values = buf
        .iter()
        .enumerate()
        .map(|(k, z)| (z * ComplexValue::from_polar(scale, 0.5 * step * k as f64)).re)
        .collect();
    CausalKernel::from_causal_samples(dt, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvolutionMode {
    Direct,
    Fft,
    Stream { chunk: usize },
}

pub fn convolve(kernel: &CausalKernel, x: &SampledSignal, mode: ConvolutionMode) -> Result<SampledSignal> {
    match mode {
        ConvolutionMode::Direct => convolve_direct_kernel(kernel, x),
        ConvolutionMode::Fft => convolve_fft_kernel(kernel, x),
        ConvolutionMode::Stream { chunk } => {
            kernel.check_rate(x)?;
            if chunk == 0 {
                return Err(Error::InvalidParameter("stream chunk size must be positive".into()));
            }
            let mut state = StreamState::new(kernel.clone());
            let mut out = Vec::with_capacity(x.len());
            for c in x.values().chunks(chunk) {
                out.extend(state.push(c));
            }
            SampledSignal::new(x.t0(), x.dt(), out)
        }
    }
}

/// `y_j = dt Σ_k h_k x_{j-k}` by direct summation.
pub fn convolve_direct(h: &SampledSignal, x: &SampledSignal) -> Result<SampledSignal> {
    check_rates(h, x)?;
    convolve_direct_kernel(&CausalKernel::prepare(h)?, x)
}

/// Same contract as [`convolve_direct`], via overlap-add FFT blocks.
pub fn convolve_fft(h: &SampledSignal, x: &SampledSignal) -> Result<SampledSignal> {
    check_rates(h, x)?;
    convolve_fft_kernel(&CausalKernel::prepare(h)?, x)
}

fn check_rates(h: &SampledSignal, x: &SampledSignal) -> Result<()> {
    if ((h.dt() - x.dt()) / x.dt()).abs() > RATE_TOL {
        return Err(Error::RateMismatch { kernel_dt: h.dt(), signal_dt: x.dt() });
    }
    Ok(())
}

pub fn convolve_direct_kernel(kernel: &CausalKernel, x: &SampledSignal) -> Result<SampledSignal> {
    kernel.check_rate(x)?;
    let h = kernel.values();
    let xs = x.values();
    let y = (0..xs.len())
        .map(|j| {
            let taps = h.len().min(j + 1);
            let acc: f64 = (0..taps).map(|k| h[k] * xs[j - k]).sum();
            acc * kernel.dt
        })
        .collect();
    SampledSignal::new(x.t0(), x.dt(), y)
}

pub fn convolve_fft_kernel(kernel: &CausalKernel, x: &SampledSignal) -> Result<SampledSignal> {
    kernel.check_rate(x)?;
    let n = x.len();
    if n == 0 {
        return SampledSignal::new(x.t0(), x.dt(), Vec::new());
    }
    let k = kernel.len();
    let block = k.max(1024).min(n);
    let fft_size = (block + k - 1).next_power_of_two();
    let mut planner = FftPlanner::new();
    let forward: Arc<dyn Fft<f64>> = planner.plan_fft_forward(fft_size);
    let inverse: Arc<dyn Fft<f64>> = planner.plan_fft_inverse(fft_size);

    let scale = kernel.dt / fft_size as f64;
    let mut kernel_spec = vec![ComplexValue::new(0.0, 0.0); fft_size];
    for (slot, &v) in kernel_spec.iter_mut().zip(kernel.values()) {
        slot.re = v * scale;
    }
    forward.process(&mut kernel_spec);

    let mut y = vec![0.0; n];
    let mut buf = vec![ComplexValue::new(0.0, 0.0); fft_size];
    for start in (0..n).step_by(block) {
        let end = (start + block).min(n);
        buf.iter_mut().for_each(|v| *v = ComplexValue::new(0.0, 0.0));
        for (slot, &v) in buf.iter_mut().zip(&x.values()[start..end]) {
            slot.re = v;
        }
        forward.process(&mut buf);
        buf.iter_mut().zip(&kernel_spec).for_each(|(a, b)| *a *= b);
        inverse.process(&mut buf);
        let stop = (start + fft_size).min(n);
        for (out, v) in y[start..stop].iter_mut().zip(&buf) {
            *out += v.re;
        }
    }
    SampledSignal::new(x.t0(), x.dt(), y)
}

/// Streaming causal convolution. Holds the last `len(kernel) - 1` inputs.
///
/// Single owner: `push` takes `&mut self`.
#[derive(Debug, Clone)]
pub struct StreamState {
    kernel: CausalKernel,
    history: Vec<f64>,
}

impl StreamState {
    pub fn new(kernel: CausalKernel) -> Self {
        let history = vec![0.0; kernel.len() - 1];
        Self { kernel, history }
    }

    pub fn kernel(&self) -> &CausalKernel {
        &self.kernel
    }

    pub fn history(&self) -> &[f64] {
        &self.history
    }

    pub fn dt(&self) -> f64 {
        self.kernel.dt
    }

    /// Filters one chunk and returns an output chunk of the same length.
    pub fn push(&mut self, chunk: &[f64]) -> Vec<f64> {
        let h = self.kernel.values();
        let lag = h.len() - 1;
        let mut buf = Vec::with_capacity(lag + chunk.len());
        buf.extend_from_slice(&self.history);
        buf.extend_from_slice(chunk);
        let out = (0..chunk.len())
            .map(|i| {
                let j = lag + i;
                let acc: f64 = (0..h.len()).map(|k| h[k] * buf[j - k]).sum();
                acc * self.kernel.dt
            })
            .collect();
        self.history.copy_from_slice(&buf[buf.len() - lag..]);
        out
    }
}

/// Free-function form of [`StreamState::push`].
pub fn stream_push(state: &mut StreamState, chunk: &[f64]) -> Vec<f64> {
    state.push(chunk)
}
