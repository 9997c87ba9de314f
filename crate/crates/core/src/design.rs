//! Constructors for the two filter sequences with testable limits:
//!
//! * identity sequences: fixed `(beta, q)`, `alpha -> 0`, so `H(i w) -> 1`
//!   uniformly on bounded frequency sets;
//! * matched sequences: `q -> 1` with `alpha = mu / cos(q pi / 2)`, whose
//!   gain envelope `exp(-mu |w|^q)` approaches the reference gain
//!   `exp(-mu |w|)`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::complex::{FilterParams, DEFAULT_Q_BAR};
use crate::error::{Error, Result};

/// `mu / cos(q pi / 2)`.
pub fn matched_alpha(mu: f64, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!("q must lie in (0, 1), got {q}")));
    }
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
    }
    Ok(mu / (q * FRAC_PI_2).cos())
}

/// Envelope `exp(-alpha cos(q pi / 2) |w|^q)`, which dominates `|H(i w)|`.
pub fn gain_bound(p: &FilterParams, omega: f64) -> f64 {
    (-p.envelope_rate() * omega.abs().powf(p.q())).exp()
}

/// How `beta` is tied to `q` along a matched sequence.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaSchedule {
    /// `beta = 1 - q`, as used for the gain-decay figure.
    #[default]
    OneMinusQ,
    /// `beta = (1 - q)^2`. Drives `alpha * beta -> 0`, which the L2 limit needs.
    OneMinusQSquared,
}

impl BetaSchedule {
    pub fn beta(self, q: f64) -> f64 {
        match self {
            BetaSchedule::OneMinusQ => 1.0 - q,
            BetaSchedule::OneMinusQSquared => (1.0 - q) * (1.0 - q),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceSpec {
    IdentitySequence { beta: f64, q: f64, alphas: Vec<f64> },
    MatchedSequence { mu: f64, qs: Vec<f64>, #[serde(default)] beta_schedule: BetaSchedule },
}

impl SequenceSpec {
    pub fn build(&self) -> Result<Vec<FilterParams>> {
        self.build_with_q_bar(DEFAULT_Q_BAR)
    }

    pub fn build_with_q_bar(&self, q_bar: f64) -> Result<Vec<FilterParams>> {
        match self {
            SequenceSpec::IdentitySequence { beta, q, alphas } => identity_sequence(*q, *beta, alphas, q_bar),
            SequenceSpec::MatchedSequence { mu, qs, beta_schedule } => matched_sequence(*mu, qs, *beta_schedule, q_bar),
        }
    }
}

/// Fixed `(beta, q)` with a strictly decreasing list of positive `alpha`.
pub fn make_identity_sequence(q: f64, beta: f64, alphas: &[f64]) -> Result<Vec<FilterParams>> {
    identity_sequence(q, beta, alphas, DEFAULT_Q_BAR)
}

/// Matched sequence with `beta = 1 - q`.
pub fn make_matched_sequence(mu: f64, qs: &[f64]) -> Result<Vec<FilterParams>> {
    matched_sequence(mu, qs, BetaSchedule::OneMinusQ, DEFAULT_Q_BAR)
}

pub fn make_matched_sequence_with(mu: f64, qs: &[f64], schedule: BetaSchedule) -> Result<Vec<FilterParams>> {
    matched_sequence(mu, qs, schedule, DEFAULT_Q_BAR)
}

fn identity_sequence(q: f64, beta: f64, alphas: &[f64], q_bar: f64) -> Result<Vec<FilterParams>> {
    if alphas.is_empty() {
        return Err(Error::InvalidParameter("alpha list is empty".into()));
    }
    if alphas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter("alpha list must be strictly decreasing".into()));
    }
    alphas
        .iter()
        .map(|&alpha| {
            let p = FilterParams::new(alpha, beta, q)?;
            p.check_q_bar(q_bar)?;
            Ok(p)
        })
        .collect()
}

fn matched_sequence(mu: f64, qs: &[f64], schedule: BetaSchedule, q_bar: f64) -> Result<Vec<FilterParams>> {
    if qs.is_empty() {
        return Err(Error::InvalidParameter("q list is empty".into()));
    }
    if qs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("q list must be strictly increasing".into()));
    }
    qs.iter()
        .map(|&q| {
            if !(q < 1.0) {
                return Err(Error::InvalidParameter(format!("q must be below 1, got {q}")));
            }
            let p = FilterParams::new(matched_alpha(mu, q)?, schedule.beta(q), q)?;
            p.check_q_bar(q_bar)?;
            Ok(p)
        })
        .collect()
}
