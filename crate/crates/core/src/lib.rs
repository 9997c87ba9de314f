//! Sub-ideal causal smoothing filters.
//!
//! The filter family is `H(s) = exp(-alpha (s + beta)^q)` with `alpha, beta > 0`
//! and `0 < q < 1`. Its impulse responses are causal, its gain decays like
//! `exp(-c |w|^q)`, and with `alpha = mu / cos(q π/2)` the gain envelope
//! approaches the non-causal reference `exp(-mu |w|)` as `q -> 1`.
//!
//! Modules:
//! * [`complex`]: principal-branch powers and pointwise transfer functions.
//! * [`design`]: identity and matched filter sequences.
//! * [`spectral`]: grids, sampled spectra and signals, FFT transforms.
//! * [`filtering`]: causal convolution (direct, overlap-add FFT, streaming).
//! * [`quadrature`]: adaptive Gauss–Kronrod integration used by [`verify`].
//! * [`verify`]: numerical checks of the approximation, smoothing,
//!   sub-ideality and reference-matching properties, with JSON reports.
//! * [`io`]: CSV formats for signals and spectra.

pub mod complex;
pub mod design;
pub mod error;
pub mod filtering;
pub mod io;
pub mod quadrature;
pub mod spectral;
pub mod verify;

pub use complex::{
    frequency_response, log_gain, principal_arg, principal_pow, reference_gain, transfer_eval, ComplexValue,
    FilterParams, ReferenceParams,
};
pub use error::{Error, Result};
pub use spectral::{FrequencyGrid, SampledSignal, SpectrumSamples};

pub const ARTIFACT_VERSION: &str = concat!("subideal ", env!("CARGO_PKG_VERSION"));
