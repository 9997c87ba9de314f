//! Fixed test signals for the output-convergence check.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::spectral::SampledSignal;

pub const SIGNAL_DT: f64 = 0.05;
pub const SIGNAL_LEN: usize = 1600;
pub const SIGNAL_ONSET: f64 = 10.0;
pub const NOISE_TONES: usize = 24;
pub const NOISE_MAX_OMEGA: f64 = 4.0;

/// Unit Gaussian pulse (σ = 1) centred at t = 10 on [0, 80).
pub fn gaussian_pulse() -> SampledSignal {
    SampledSignal::from_fn(0.0, SIGNAL_DT, SIGNAL_LEN, |t| (-0.5 * (t - SIGNAL_ONSET).powi(2)).exp())
        .expect("fixed grid is valid")
}

/// Unit step switching on at t = 10.
pub fn step() -> SampledSignal {
    SampledSignal::from_fn(0.0, SIGNAL_DT, SIGNAL_LEN, |t| if t >= SIGNAL_ONSET { 1.0 } else { 0.0 })
        .expect("fixed grid is valid")
}

/// Sum of random tones below `NOISE_MAX_OMEGA` rad/s, scaled to unit RMS.
pub fn band_limited_noise(seed: u64) -> SampledSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tones: Vec<(f64, f64, f64)> = (0..NOISE_TONES)
        .map(|_| {
            let amp: f64 = StandardNormal.sample(&mut rng);
            let omega = rng.random_range(0.05..NOISE_MAX_OMEGA);
            let phase = rng.random_range(0.0..2.0 * PI);
            (amp, omega, phase)
        })
        .collect();
    let raw = SampledSignal::from_fn(0.0, SIGNAL_DT, SIGNAL_LEN, |t| {
        tones.iter().map(|&(a, w, ph)| a * (w * t + ph).sin()).sum()
    })
    .expect("fixed grid is valid");
    let rms = (raw.values().iter().map(|v| v * v).sum::<f64>() / raw.len() as f64).sqrt();
    let values = raw.values().iter().map(|v| v / rms).collect();
    SampledSignal::new(0.0, SIGNAL_DT, values).expect("fixed grid is valid")
}
