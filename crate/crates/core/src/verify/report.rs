//! Verification battery and its JSON report.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::signals;
use super::{
    causality_defect, check_identity_approx, check_output_convergence, decade_increments, l2_gain_distance,
    log_gain_ratio, log_signature_spread, paley_wiener_integral, power_signature_deviation, reference_norm,
    smoothing_integral, subideal_divergence_profile, QuadratureConfig,
};
use crate::complex::{frequency_response, FilterParams, ReferenceParams};
use crate::design::{make_identity_sequence, make_matched_sequence_with, BetaSchedule};
use crate::error::{Error, Result};
use crate::spectral::{auto_grid, impulse_response, DEFAULT_RESOLUTION_FACTOR, DEFAULT_TAIL_EPS};
use crate::ARTIFACT_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    A1,
    A2,
    B,
    Pw,
    C,
    D,
    Causality,
    Ratio,
}

impl CheckKind {
    pub const ALL: [CheckKind; 8] =
        [CheckKind::A1, CheckKind::A2, CheckKind::B, CheckKind::Pw, CheckKind::C, CheckKind::D, CheckKind::Causality, CheckKind::Ratio];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::A1 => "a1",
            CheckKind::A2 => "a2",
            CheckKind::B => "b",
            CheckKind::Pw => "pw",
            CheckKind::C => "c",
            CheckKind::D => "d",
            CheckKind::Causality => "causality",
            CheckKind::Ratio => "ratio",
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CheckKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown check {s:?}; expected one of a1, a2, b, pw, c, d, causality, ratio")))
    }
}

/// Limits the battery judges against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Largest allowed `sup |H - 1|` for the last (smallest alpha) filter.
    pub a1_max: f64,
    /// Final over first output error for the Gaussian pulse must be below this.
    pub a2_final_fraction: f64,
    pub pw_max: f64,
    /// Allowed relative deviation of the alpha-doubled Paley–Wiener value from twice the original.
    pub pw_linearity: f64,
    /// Relative agreement of smoothing integrals when `max_subdivisions` doubles.
    pub quadrature_consistency: f64,
    /// Tolerance of both divergence signatures.
    pub signature_tol: f64,
    /// Last matched distance must be below this fraction of `‖M_mu‖`.
    pub d_fraction: f64,
    pub causality_max: f64,
    /// Allowed `|Σ h dt - H(0)|`.
    pub dc_tol: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            a1_max: 1e-3,
            a2_final_fraction: 1.0 / 3.0,
            pw_max: 1e300,
            pw_linearity: 1e-10,
            quadrature_consistency: 1e-6,
            signature_tol: 0.1,
            d_fraction: 0.2,
            causality_max: 1e-4,
            dc_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub params: FilterParams,
    pub reference: ReferenceParams,
    pub quadrature: QuadratureConfig,
    pub thresholds: Thresholds,
    pub checks: Vec<CheckKind>,
    /// Band for the identity check.
    pub a1_omega: f64,
    pub ratio_omega: f64,
    pub seed: u64,
    pub tail_eps: f64,
    pub resolution_factor: f64,
    pub d_qs: Vec<f64>,
    pub d_beta_schedule: BetaSchedule,
}

impl VerifyConfig {
    /// Defaults for everything but the filter and reference.
    pub fn new(params: FilterParams, reference: ReferenceParams) -> Self {
        Self {
            params,
            reference,
            quadrature: QuadratureConfig::default(),
            thresholds: Thresholds::default(),
            checks: CheckKind::ALL.to_vec(),
            a1_omega: 1.0,
            ratio_omega: 100.0,
            seed: 0,
            tail_eps: DEFAULT_TAIL_EPS,
            resolution_factor: DEFAULT_RESOLUTION_FACTOR,
            d_qs: vec![0.9, 0.99, 0.999],
            d_beta_schedule: BetaSchedule::OneMinusQSquared,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.quadrature.validate()?;
        if self.checks.is_empty() {
            return Err(Error::InvalidParameter("no checks selected".into()));
        }
        if !(self.a1_omega.is_finite() && self.a1_omega >= 0.0) {
            return Err(Error::InvalidParameter(format!("a1_omega must be non-negative, got {}", self.a1_omega)));
        }
        if !self.ratio_omega.is_finite() {
            return Err(Error::InvalidParameter(format!("ratio omega must be finite, got {}", self.ratio_omega)));
        }
        if !(self.tail_eps > 0.0 && self.tail_eps < 1.0) {
            return Err(Error::InvalidParameter(format!("tail_eps must lie in (0, 1), got {}", self.tail_eps)));
        }
        if !(self.resolution_factor.is_finite() && self.resolution_factor > 0.0) {
            return Err(Error::InvalidParameter(format!("resolution_factor must be positive, got {}", self.resolution_factor)));
        }
        if self.d_qs.len() < 2 || self.d_qs.iter().any(|&q| !(q > 0.0 && q < 1.0)) {
            return Err(Error::InvalidParameter("d_qs needs at least two values in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "strictly_decreasing")]
    StrictlyDecreasing,
    #[serde(rename = "is_true")]
    IsTrue,
    #[serde(rename = "is_false")]
    IsFalse,
}

/// One judged criterion: `observed <comparator> value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub quantity: String,
    pub comparator: Comparator,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    pub observed: Value,
    pub passed: bool,
}

impl Threshold {
    fn compare(quantity: &str, observed: f64, comparator: Comparator, limit: f64) -> Self {
        let passed = match comparator {
            Comparator::Le => observed <= limit,
            Comparator::Lt => observed < limit,
            Comparator::Ge => observed >= limit,
            _ => unreachable!("scalar comparator expected"),
        };
        Self { quantity: quantity.into(), comparator, value: Some(limit), observed: json!(observed), passed }
    }

    pub fn le(quantity: &str, observed: f64, limit: f64) -> Self {
        Self::compare(quantity, observed, Comparator::Le, limit)
    }

    pub fn lt(quantity: &str, observed: f64, limit: f64) -> Self {
        Self::compare(quantity, observed, Comparator::Lt, limit)
    }

    pub fn ge(quantity: &str, observed: f64, limit: f64) -> Self {
        Self::compare(quantity, observed, Comparator::Ge, limit)
    }

    pub fn strictly_decreasing(quantity: &str, observed: &[f64]) -> Self {
        let passed = observed.windows(2).all(|w| w[1] < w[0]);
        Self { quantity: quantity.into(), comparator: Comparator::StrictlyDecreasing, value: None, observed: json!(observed), passed }
    }

    pub fn flag(quantity: &str, observed: bool, expected: bool) -> Self {
        let comparator = if expected { Comparator::IsTrue } else { Comparator::IsFalse };
        Self { quantity: quantity.into(), comparator, value: None, observed: json!(observed), passed: observed == expected }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The computation itself failed; counts as not passing.
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub params: Value,
    pub values: Value,
    pub threshold: Vec<Threshold>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl CheckRecord {
    fn judged(kind: CheckKind, params: Value, values: Value, threshold: Vec<Threshold>) -> Self {
        let verdict = if threshold.iter().all(|t| t.passed) { Verdict::Pass } else { Verdict::Fail };
        Self { name: kind.name().into(), params, values, threshold, verdict, error: None }
    }

    fn failed(kind: CheckKind, params: Value, err: &Error) -> Self {
        Self {
            name: kind.name().into(),
            params,
            values: Value::Null,
            threshold: Vec::new(),
            verdict: Verdict::Error,
            error: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub artifact_version: String,
    pub config: VerifyConfig,
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict == Verdict::Pass)
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn decades(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 10f64.powi(k)).collect()
}

/// Runs the selected checks concurrently; records come back in selection order.
pub fn run_battery(cfg: &VerifyConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let mut kinds = cfg.checks.clone();
    kinds.dedup();
    let checks = std::thread::scope(|scope| {
        let handles: Vec<_> = kinds.iter().map(|&k| scope.spawn(move || run_check(k, cfg))).collect();
        handles.into_iter().map(|h| h.join().expect("check thread panicked")).collect()
    });
    Ok(VerificationReport { artifact_version: ARTIFACT_VERSION.into(), config: cfg.clone(), checks })
}

fn run_check(kind: CheckKind, cfg: &VerifyConfig) -> CheckRecord {
    let (params, outcome) = match kind {
        CheckKind::A1 => check_a1(cfg),
        CheckKind::A2 => check_a2(cfg),
        CheckKind::B => check_b(cfg),
        CheckKind::Pw => check_pw(cfg),
        CheckKind::C => check_c(cfg),
        CheckKind::D => check_d(cfg),
        CheckKind::Causality => check_causality(cfg),
        CheckKind::Ratio => check_ratio(cfg),
    };
    match outcome {
        Ok((values, threshold)) => CheckRecord::judged(kind, params, values, threshold),
        Err(e) => CheckRecord::failed(kind, params, &e),
    }
}

type Outcome = (Value, Result<(Value, Vec<Threshold>)>);

fn check_a1(cfg: &VerifyConfig) -> Outcome {
    let p = cfg.params;
    let alphas: Vec<f64> = (0..=20).map(|k| p.alpha() * 0.5f64.powi(k)).collect();
    let params = json!({"alphas": alphas, "beta": p.beta(), "q": p.q(), "Omega": cfg.a1_omega, "grid_density": 256});
    let run = || {
        let seq = make_identity_sequence(p.q(), p.beta(), &alphas)?;
        let sups = seq.iter().map(|f| check_identity_approx(f, cfg.a1_omega, 256)).collect::<Result<Vec<f64>>>()?;
        let last = *sups.last().expect("non-empty");
        let thresholds = vec![
            Threshold::strictly_decreasing("sup_error[10..]", &sups[10..]),
            Threshold::le("sup_error[last]", last, cfg.thresholds.a1_max),
        ];
        Ok((json!({"sup_error": sups}), thresholds))
    };
    (params, run())
}

fn check_a2(cfg: &VerifyConfig) -> Outcome {
    let p = cfg.params;
    let a0 = p.alpha().min(0.4);
    let alphas: Vec<f64> = (0..4).map(|k| a0 * 0.5f64.powi(k)).collect();
    let params = json!({
        "alphas": alphas, "beta": p.beta(), "q": p.q(), "seed": cfg.seed,
        "signals": ["gaussian", "step", "noise"], "dt": signals::SIGNAL_DT, "len": signals::SIGNAL_LEN,
    });
    let run = || {
        let seq = make_identity_sequence(p.q(), p.beta(), &alphas)?;
        let g = check_output_convergence(&seq, &signals::gaussian_pulse())?;
        let s = check_output_convergence(&seq, &signals::step())?;
        let n = check_output_convergence(&seq, &signals::band_limited_noise(cfg.seed))?;
        let thresholds = vec![
            Threshold::strictly_decreasing("gaussian_error", &g),
            Threshold::lt("gaussian_error[last] / gaussian_error[0]", g[3] / g[0], cfg.thresholds.a2_final_fraction),
            Threshold::strictly_decreasing("step_error", &s),
            Threshold::strictly_decreasing("noise_error", &n),
        ];
        Ok((json!({"gaussian_error": g, "step_error": s, "noise_error": n}), thresholds))
    };
    (params, run())
}

fn check_b(cfg: &VerifyConfig) -> Outcome {
    let p = cfg.params;
    let (rho_lo, rho_hi) = (p.q() / 2.0, (1.0 + p.q()) / 2.0);
    let params = json!({"rho_finite": rho_lo, "rho_divergent": rho_hi, "n": 1, "filter": p});
    let run = || {
        let lo = smoothing_integral(&p, rho_lo, 1, &cfg.quadrature)?;
        let lo2 = smoothing_integral(&p, rho_lo, 1, &cfg.quadrature.with_doubled_subdivisions())?;
        let hi = smoothing_integral(&p, rho_hi, 1, &cfg.quadrature)?;
        let drift = ((lo2.log_value - lo.log_value).exp_m1()).abs();
        let thresholds = vec![
            Threshold::flag("finite(rho_finite)", lo.finite, true),
            Threshold::flag("finite(rho_divergent)", hi.finite, false),
            Threshold::le("relative change under subdivision doubling", drift, cfg.thresholds.quadrature_consistency),
        ];
        Ok((json!({"rho_finite": lo, "rho_divergent": hi, "rho_finite_doubled": lo2}), thresholds))
    };
    (params, run())
}

fn check_pw(cfg: &VerifyConfig) -> Outcome {
    let p = cfg.params;
    let params = json!({"filter": p});
    let run = || {
        let v = paley_wiener_integral(&p, &cfg.quadrature)?;
        let doubled = paley_wiener_integral(&FilterParams::new(2.0 * p.alpha(), p.beta(), p.q())?, &cfg.quadrature)?;
        let linearity = (doubled / (2.0 * v) - 1.0).abs();
        let thresholds = vec![
            Threshold::le("paley_wiener_integral", v, cfg.thresholds.pw_max),
            Threshold::le("|pw(2 alpha) / (2 pw(alpha)) - 1|", linearity, cfg.thresholds.pw_linearity),
        ];
        Ok((json!({"paley_wiener_integral": v, "alpha_doubled": doubled}), thresholds))
    };
    (params, run())
}

fn check_c(cfg: &VerifyConfig) -> Outcome {
    let p = cfg.params;
    let delta_log = 1.0 / p.q();
    let delta_pow = 2f64.max(1.5 / p.q());
    let target = 10f64.powf(delta_pow * p.q() - 1.0);
    let truncations = decades(0, 7);
    let params = json!({
        "filter": p, "Omega0": 0.0, "truncations": truncations,
        "delta_log": delta_log, "delta_power": delta_pow, "judged_decades": [3, 6],
    });
    let run = || {
        let log_prof = subideal_divergence_profile(&p, delta_log, &truncations, &cfg.quadrature)?;
        let pow_prof = subideal_divergence_profile(&p, delta_pow, &truncations, &cfg.quadrature)?;
        let log_inc = decade_increments(&log_prof);
        let pow_inc = decade_increments(&pow_prof);
        let spread = log_signature_spread(&log_inc[3..]);
        let deviation = power_signature_deviation(&pow_inc[3..], target);
        let thresholds = vec![
            Threshold::le("log signature spread (max/min - 1 of decade increments 3..6)", spread, cfg.thresholds.signature_tol),
            Threshold::le("power signature deviation (|ratio / 10^(delta q - 1) - 1|)", deviation, cfg.thresholds.signature_tol),
        ];
        Ok((
            json!({
                "log_profile": log_prof, "log_increments": log_inc,
                "power_profile": pow_prof, "power_increments": pow_inc, "power_target_ratio": target,
            }),
            thresholds,
        ))
    };
    (params, run())
}

fn check_d(cfg: &VerifyConfig) -> Outcome {
    let r = cfg.reference;
    let params = json!({"mu": r.mu(), "qs": cfg.d_qs, "beta_schedule": cfg.d_beta_schedule});
    let run = || {
        let seq = make_matched_sequence_with(r.mu(), &cfg.d_qs, cfg.d_beta_schedule)?;
        let d = seq.iter().map(|f| l2_gain_distance(f, &r, &cfg.quadrature)).collect::<Result<Vec<f64>>>()?;
        let norm = reference_norm(&r);
        let thresholds = vec![
            Threshold::strictly_decreasing("l2_gain_distance", &d),
            Threshold::lt("l2_gain_distance[last]", *d.last().expect("non-empty"), cfg.thresholds.d_fraction * norm),
        ];
        Ok((json!({"l2_gain_distance": d, "reference_norm": norm}), thresholds))
    };
    (params, run())
}

fn check_causality(cfg: &VerifyConfig) -> Outcome {
    let p = cfg.params;
    let params = json!({"filter": p, "tail_eps": cfg.tail_eps, "resolution_factor": cfg.resolution_factor});
    let run = || {
        let grid = auto_grid(&p, cfg.tail_eps, cfg.resolution_factor)?;
        let refined = grid.refined()?;
        let h = impulse_response(&p, &grid)?;
        let defect = causality_defect(&h)?;
        let defect_refined = causality_defect(&impulse_response(&p, &refined)?)?;
        let dc = h.integral();
        let h0 = frequency_response(&p, 0.0).re;
        let thresholds = vec![
            Threshold::le("causality_defect", defect, cfg.thresholds.causality_max),
            Threshold::le("causality_defect(refined)", defect_refined, defect + 1e-20),
            Threshold::le("|sum(h) dt - H(0)|", (dc - h0).abs(), cfg.thresholds.dc_tol),
        ];
        Ok((
            json!({
                "omega_max": grid.omega_max(), "samples": grid.len(),
                "refined_omega_max": refined.omega_max(), "refined_samples": refined.len(),
                "causality_defect": defect, "causality_defect_refined": defect_refined,
                "dc_sum": dc, "h0": h0,
            }),
            thresholds,
        ))
    };
    (params, run())
}

fn check_ratio(cfg: &VerifyConfig) -> Outcome {
    let (p, r) = (cfg.params, cfg.reference);
    let probes = [1e2, 1e3, 1e4];
    let params = json!({"filter": p, "mu": r.mu(), "omega": cfg.ratio_omega, "probes": probes});
    let log_ratios: Vec<f64> = probes.iter().map(|&w| log_gain_ratio(&p, &r, w)).collect();
    let min = log_ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let lr = log_gain_ratio(&p, &r, cfg.ratio_omega);
    let values = json!({"gain_ratio": lr.exp(), "log_gain_ratio": lr, "probe_log_ratios": log_ratios});
    (params, Ok((values, vec![Threshold::ge("min log gain ratio over probes", min, 0.0)])))
}
