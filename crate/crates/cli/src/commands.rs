use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use serde_json::{json, Value};
use subideal::design::matched_alpha;
use subideal::filtering::{convolve, kernel_for_rate, kernel_method_for_rate, ConvolutionMode};
use subideal::io::{read_signal_csv, SpectrumRow};
use subideal::spectral::{auto_grid, impulse_response_detailed, FrequencyGrid, DEFAULT_RESOLUTION_FACTOR};
use subideal::verify::{causality_defect, identity_error_curve, run_battery, VerifyConfig};
use subideal::{frequency_response, log_gain, reference_gain, FilterParams, ReferenceParams, SampledSignal};

use crate::args::{AlphaArg, ApplyOpts, FiguresOpts, FilterOpts, Format, FreqzOpts, ImpulseOpts, Mode, VerifyOpts};
use crate::output::{render_signal, render_table, write_file, CliError, CliResult, Destination, Metadata};

fn resolve_filter(opts: &FilterOpts) -> CliResult<(FilterParams, Option<ReferenceParams>, Value)> {
    let reference = opts.mu.map(ReferenceParams::new).transpose()?;
    let (alpha, source) = match opts.alpha {
        AlphaArg::Value(a) => (a, "value"),
        AlphaArg::FromMatched => {
            let r = reference.ok_or_else(|| CliError::usage("--alpha from-matched needs --mu"))?;
            (matched_alpha(r.mu(), opts.q)?, "from-matched")
        }
    };
    let p = FilterParams::new(alpha, opts.beta, opts.q)?;
    let config = json!({
        "alpha": p.alpha(), "alpha_source": source, "beta": p.beta(), "q": p.q(),
        "mu": reference.map(|r| r.mu()),
    });
    Ok((p, reference, config))
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        b.extend(e);
    }
    base
}

fn check_tail_eps(tail_eps: f64) -> CliResult<()> {
    if tail_eps > 0.0 && tail_eps < 1.0 {
        Ok(())
    } else {
        Err(CliError::usage(format!("--tail-eps must lie in (0, 1), got {tail_eps}")))
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 || lo == hi {
        return vec![lo];
    }
    (0..n).map(|k| if k + 1 == n { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 }).collect()
}

pub fn freqz(opts: &FreqzOpts) -> CliResult<()> {
    let (p, reference, filter_config) = resolve_filter(&opts.filter)?;
    check_tail_eps(opts.tail_eps)?;
    let omega_max = match opts.omega_max {
        Some(w) => w,
        None => auto_grid(&p, opts.tail_eps, DEFAULT_RESOLUTION_FACTOR)?.omega_max(),
    };
    if !(opts.omega_min.is_finite() && omega_max.is_finite() && opts.omega_min <= omega_max) {
        return Err(CliError::usage(format!("need finite --omega-min <= --omega-max, got [{}, {omega_max}]", opts.omega_min)));
    }
    if opts.samples == 0 {
        return Err(CliError::usage("--samples must be positive"));
    }
    let omegas = linspace(opts.omega_min, omega_max, opts.samples);
    let rows: Vec<SpectrumRow> = omegas.iter().map(|&w| SpectrumRow::from_filter(&p, w)).collect();

    let mut header: Vec<String> = ["omega", "re", "im", "gain", "phase_rad"].map(String::from).to_vec();
    let mut columns = vec![
        omegas.clone(),
        rows.iter().map(|r| r.re).collect(),
        rows.iter().map(|r| r.im).collect(),
        rows.iter().map(|r| r.gain).collect(),
        rows.iter().map(|r| r.phase_rad).collect(),
    ];
    if let Some(r) = reference {
        header.push("ref_gain".into());
        columns.push(omegas.iter().map(|&w| reference_gain(&r, w)).collect());
    }
    let config = merge(
        filter_config,
        json!({"omega_min": opts.omega_min, "omega_max": omega_max, "samples": opts.samples, "tail_eps": opts.tail_eps, "format": opts.output.format}),
    );
    let meta = Metadata::new("freqz", config);
    let bytes = render_table(opts.output.format, &header, &columns, &meta)?;
    Destination::resolve(&opts.output, &default_name("freqz", opts.output.format)).write(&bytes)
}

fn default_name(stem: &str, format: Format) -> String {
    match format {
        Format::Csv => format!("{stem}.csv"),
        Format::Json => format!("{stem}.json"),
    }
}

fn impulse_grid(p: &FilterParams, opts: &ImpulseOpts) -> CliResult<FrequencyGrid> {
    check_tail_eps(opts.tail_eps)?;
    let auto = auto_grid(p, opts.tail_eps, opts.resolution_factor)?;
    let omega_max = opts.omega_max.unwrap_or(auto.omega_max());
    let n = match opts.samples {
        Some(n) => n,
        None => {
            let span = auto.len() as f64 * auto.dt();
            ((span * omega_max / std::f64::consts::PI).ceil() as usize).max(8).next_power_of_two()
        }
    };
    Ok(FrequencyGrid::new(omega_max, n)?)
}

/// Impulse response plus the metadata entries describing it.
fn impulse_with_metadata(p: &FilterParams, grid: &FrequencyGrid, meta: &mut Metadata) -> CliResult<SampledSignal> {
    let detailed = impulse_response_detailed(p, grid)?;
    let h = detailed.signal;
    let h0 = frequency_response(p, 0.0).re;
    meta.push("grid", json!({"omega_max": grid.omega_max(), "samples": grid.len(), "dt": grid.dt(), "t0": grid.t0()}));
    meta.push("causality_defect", json!(causality_defect(&h)?));
    meta.push("imag_residue", json!(detailed.imag_residue));
    meta.push("dc_sum", json!(h.integral()));
    meta.push("h0", json!(h0));
    Ok(h)
}

pub fn impulse(opts: &ImpulseOpts) -> CliResult<()> {
    let (p, _, filter_config) = resolve_filter(&opts.filter)?;
    let grid = impulse_grid(&p, opts)?;
    let config = merge(
        filter_config,
        json!({
            "omega_max": grid.omega_max(), "samples": grid.len(), "tail_eps": opts.tail_eps,
            "resolution_factor": opts.resolution_factor, "format": opts.output.format,
        }),
    );
    let mut meta = Metadata::new("impulse", config);
    let h = impulse_with_metadata(&p, &grid, &mut meta)?;
    let bytes = render_signal(opts.output.format, &h, &meta)?;
    Destination::resolve(&opts.output, &default_name("impulse", opts.output.format)).write(&bytes)
}

pub fn apply(opts: &ApplyOpts) -> CliResult<()> {
    let (p, _, filter_config) = resolve_filter(&opts.filter)?;
    check_tail_eps(opts.tail_eps)?;
    let mode = match opts.mode {
        Mode::Direct => ConvolutionMode::Direct,
        Mode::Fft => ConvolutionMode::Fft,
        Mode::Stream if opts.chunk == 0 => return Err(CliError::usage("--chunk must be positive")),
        Mode::Stream => ConvolutionMode::Stream { chunk: opts.chunk },
    };
    let file = File::open(&opts.input).map_err(|e| CliError::usage(format!("opening {}: {e}", opts.input.display())))?;
    let x = read_signal_csv(BufReader::new(file))?;
    let kernel = kernel_for_rate(&p, x.dt(), opts.tail_eps, opts.resolution_factor)?;
    let y = convolve(&kernel, &x, mode)?;

    let config = merge(
        filter_config,
        json!({
            "input": opts.input.display().to_string(), "mode": opts.mode,
            "chunk": (opts.mode == Mode::Stream).then_some(opts.chunk),
            "tail_eps": opts.tail_eps, "resolution_factor": opts.resolution_factor, "format": opts.output.format,
        }),
    );
    let mut meta = Metadata::new("apply", config);
    meta.push("input_samples", json!(x.len()));
    meta.push("dt", json!(x.dt()));
    meta.push("kernel_method", json!(kernel_method_for_rate(&p, x.dt(), opts.tail_eps)));
    meta.push("kernel_len", json!(kernel.len()));
    meta.push("kernel_clipped_energy_fraction", json!(kernel.clipped_energy_fraction()));
    let bytes = render_signal(opts.output.format, &y, &meta)?;
    Destination::resolve(&opts.output, &default_name("apply", opts.output.format)).write(&bytes)
}

/// Returns whether every check passed; the report is always written.
pub fn verify(opts: &VerifyOpts) -> CliResult<bool> {
    let (p, reference, _) = resolve_filter(&opts.filter)?;
    check_tail_eps(opts.tail_eps)?;
    // Without --mu the reference is the one matched to alpha.
    let reference = match reference {
        Some(r) => r,
        None => ReferenceParams::new(p.envelope_rate())?,
    };
    let mut cfg = VerifyConfig::new(p, reference);
    if !opts.checks.is_empty() {
        cfg.checks = opts.checks.clone();
    }
    cfg.ratio_omega = opts.omega;
    cfg.seed = opts.seed;
    cfg.tail_eps = opts.tail_eps;
    if let Some(v) = opts.pw_max {
        cfg.thresholds.pw_max = v;
    }
    if let Some(v) = opts.rel_tol {
        cfg.quadrature.rel_tol = v;
    }
    if let Some(v) = opts.abs_tol {
        cfg.quadrature.abs_tol = v;
    }
    let report = run_battery(&cfg)?;
    let mut text = report.to_json();
    text.push('\n');
    Destination::resolve(&opts.output, "verify.json").write(text.as_bytes())?;
    Ok(report.all_passed())
}

pub fn figures(opts: &FiguresOpts) -> CliResult<()> {
    check_tail_eps(opts.tail_eps)?;
    if opts.samples < 2 {
        return Err(CliError::usage("--samples must be at least 2"));
    }
    let dir: PathBuf = opts.output.out.clone().or_else(|| opts.output.out_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let format = opts.output.format;
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };

    // Gain decay against the reference, matched alpha.
    let r = ReferenceParams::new(opts.mu)?;
    let omegas = linspace(0.0, 200.0, opts.samples);
    let fig1: Vec<FilterParams> = [(0.99, 0.01), (0.9, 0.1)]
        .iter()
        .map(|&(q, b)| Ok(FilterParams::new(matched_alpha(opts.mu, q)?, b, q)?))
        .collect::<CliResult<_>>()?;
    let mut header = vec!["omega".to_string(), "reference_gain".to_string()];
    let mut columns = vec![omegas.clone(), omegas.iter().map(|&w| reference_gain(&r, w)).collect()];
    for p in &fig1 {
        header.push(format!("gain_q{}_beta{}", p.q(), p.beta()));
        columns.push(omegas.iter().map(|&w| log_gain(p, w).exp()).collect());
    }
    let config = json!({
        "mu": opts.mu, "omega_min": 0.0, "omega_max": 200.0, "samples": opts.samples,
        "filters": fig1.iter().map(|p| json!({"alpha": p.alpha(), "beta": p.beta(), "q": p.q()})).collect::<Vec<_>>(),
    });
    let bytes = render_table(format, &header, &columns, &Metadata::new("figures fig1_gain", config))?;
    write_file(&dir.join(format!("fig1_gain.{ext}")), &bytes)?;

    // Identity error |H - 1| for two shrinking filters and the reference.
    let r2 = ReferenceParams::new(opts.identity_mu)?;
    let omegas = linspace(-100.0, 100.0, opts.samples);
    let fig2: Vec<FilterParams> = [0.1, 0.05].iter().map(|&a| FilterParams::new(a, a, 0.5)).collect::<Result<_, _>>()?;
    let mut header = vec!["omega".to_string(), "reference_error".to_string()];
    let mut columns = vec![omegas.clone(), omegas.iter().map(|&w| 1.0 - reference_gain(&r2, w)).collect()];
    for p in &fig2 {
        header.push(format!("error_alpha{}_beta{}", p.alpha(), p.beta()));
        columns.push(identity_error_curve(p, &omegas));
    }
    let config = json!({
        "mu": opts.identity_mu, "omega_min": -100.0, "omega_max": 100.0, "samples": opts.samples,
        "filters": fig2.iter().map(|p| json!({"alpha": p.alpha(), "beta": p.beta(), "q": p.q()})).collect::<Vec<_>>(),
    });
    let bytes = render_table(format, &header, &columns, &Metadata::new("figures fig2_identity_error", config))?;
    write_file(&dir.join(format!("fig2_identity_error.{ext}")), &bytes)?;

    // Impulse response.
    let p = FilterParams::new(opts.impulse_alpha, 0.1, 0.9)?;
    let grid = auto_grid(&p, opts.tail_eps, DEFAULT_RESOLUTION_FACTOR)?;
    let config = json!({"alpha": p.alpha(), "beta": p.beta(), "q": p.q(), "tail_eps": opts.tail_eps, "resolution_factor": DEFAULT_RESOLUTION_FACTOR});
    let mut meta = Metadata::new("figures fig3_impulse", config);
    let h = impulse_with_metadata(&p, &grid, &mut meta)?;
    let bytes = render_signal(format, &h, &meta)?;
    write_file(&dir.join(format!("fig3_impulse.{ext}")), &bytes)
}
