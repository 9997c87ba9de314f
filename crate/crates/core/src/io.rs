//! CSV formats.
//!
//! Signal files have the header `t,value`, spectrum files
//! `omega,re,im,gain,phase_rad`. Either may be preceded by metadata lines of
//! the form `# key: value`, which readers skip. Numbers are written in the
//! shortest form that round-trips exactly.

use std::io::{BufRead, BufReader, Read, Write};

use crate::complex::{log_gain, phase, FilterParams};
use crate::error::{Error, Result};
use crate::spectral::SampledSignal;

pub const SIGNAL_HEADER: [&str; 2] = ["t", "value"];
pub const SPECTRUM_HEADER: [&str; 5] = ["omega", "re", "im", "gain", "phase_rad"];

/// Relative tolerance (in units of `dt`) for uniform spacing on load.
pub const SPACING_TOL: f64 = 1e-9;

pub type Metadata = Vec<(String, String)>;

/// Shortest round-trip form; negative zero is written as `0.0`.
pub fn fmt_f64(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:?}")
}

fn write_metadata<W: Write>(w: &mut W, metadata: &[(String, String)]) -> Result<()> {
    for (k, v) in metadata {
        if v.contains('\n') || k.contains('\n') {
            return Err(Error::Format(format!("metadata entry {k:?} spans several lines")));
        }
        writeln!(w, "# {k}: {v}")?;
    }
    Ok(())
}

pub fn write_signal_csv<W: Write>(mut w: W, signal: &SampledSignal, metadata: &[(String, String)]) -> Result<()> {
    write_metadata(&mut w, metadata)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SIGNAL_HEADER)?;
    for (j, v) in signal.values().iter().enumerate() {
        out.write_record([fmt_f64(signal.time(j)), fmt_f64(*v)])?;
    }
    out.flush()?;
    Ok(())
}

/// Splits leading `# key: value` lines from the CSV body.
fn split_metadata<R: Read>(r: R) -> Result<(Metadata, String)> {
    let mut metadata = Vec::new();
    let mut body = String::new();
    let mut in_header = true;
    for line in BufReader::new(r).lines() {
        let line = line?;
        if in_header {
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                let (k, v) = rest.split_once(':').unwrap_or((rest, ""));
                metadata.push((k.trim().to_string(), v.trim().to_string()));
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            in_header = false;
        }
        body.push_str(&line);
        body.push('\n');
    }
    Ok((metadata, body))
}

fn parse_rows(body: &str, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(body.as_bytes());
    let found: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if found != header {
        return Err(Error::Format(format!("expected header {}, found {}", header.join(","), found.join(","))));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|field| {
                field.parse::<f64>().map_err(|_| Error::Format(format!("row {}: cannot parse {field:?} as a number", i + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format(format!("row {}: non-finite value", i + 1)));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_signal_csv<R: Read>(r: R) -> Result<SampledSignal> {
    Ok(read_signal_csv_with_metadata(r)?.0)
}

/// Reads a `t,value` file and checks the time column is uniformly spaced.
pub fn read_signal_csv_with_metadata<R: Read>(r: R) -> Result<(SampledSignal, Metadata)> {
    let (metadata, body) = split_metadata(r)?;
    let rows = parse_rows(&body, &SIGNAL_HEADER)?;
    if rows.len() < 2 {
        return Err(Error::Format(format!("a signal needs at least two samples, found {}", rows.len())));
    }
    let t0 = rows[0][0];
    let dt = (rows[rows.len() - 1][0] - t0) / (rows.len() - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::Format("time column must be increasing".into()));
    }
    for (j, row) in rows.iter().enumerate() {
        let expected = t0 + j as f64 * dt;
        let slack = SPACING_TOL * dt + 4.0 * f64::EPSILON * row[0].abs().max(expected.abs());
        if (row[0] - expected).abs() > slack {
            return Err(Error::Format(format!("non-uniform sampling at row {}: t = {}, expected {expected}", j + 1, row[0])));
        }
    }
    let signal = SampledSignal::new(t0, dt, rows.into_iter().map(|r| r[1]).collect())?;
    Ok((signal, metadata))
}

/// One row of a spectrum file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRow {
    pub omega: f64,
    pub re: f64,
    pub im: f64,
    pub gain: f64,
    pub phase_rad: f64,
}

impl SpectrumRow {
    /// Gain from the log-gain and the unwrapped analytic phase; `re`/`im` are
    /// `gain * (cos phase, sin phase)`.
    pub fn from_filter(p: &FilterParams, omega: f64) -> Self {
        let gain = log_gain(p, omega).exp();
        let phase_rad = phase(p, omega);
        let (sin, cos) = phase_rad.sin_cos();
        Self { omega, re: gain * cos, im: gain * sin, gain, phase_rad }
    }
}

/// Writes spectrum rows, with any extra columns appended after the standard five.
pub fn write_spectrum_csv<W: Write>(
    mut w: W,
    rows: &[SpectrumRow],
    extra_columns: &[(String, Vec<f64>)],
    metadata: &[(String, String)],
) -> Result<()> {
    for (name, col) in extra_columns {
        if col.len() != rows.len() {
            return Err(Error::ShapeMismatch(format!("column {name} has {} rows, expected {}", col.len(), rows.len())));
        }
    }
    write_metadata(&mut w, metadata)?;
    let mut out = csv::Writer::from_writer(w);
    let header: Vec<&str> = SPECTRUM_HEADER.iter().copied().chain(extra_columns.iter().map(|(n, _)| n.as_str())).collect();
    out.write_record(&header)?;
    for (i, r) in rows.iter().enumerate() {
        let mut record = vec![fmt_f64(r.omega), fmt_f64(r.re), fmt_f64(r.im), fmt_f64(r.gain), fmt_f64(r.phase_rad)];
        record.extend(extra_columns.iter().map(|(_, col)| fmt_f64(col[i])));
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads the standard five spectrum columns; extra trailing columns are rejected.
pub fn read_spectrum_csv<R: Read>(r: R) -> Result<(Vec<SpectrumRow>, Metadata)> {
    let (metadata, body) = split_metadata(r)?;
    let rows = parse_rows(&body, &SPECTRUM_HEADER)?
        .into_iter()
        .map(|r| SpectrumRow { omega: r[0], re: r[1], im: r[2], gain: r[3], phase_rad: r[4] })
        .collect();
    Ok((rows, metadata))
}

/// Generic numeric table with a free-form header, for figure datasets.
pub fn write_table_csv<W: Write>(mut w: W, header: &[String], columns: &[Vec<f64>], metadata: &[(String, String)]) -> Result<()> {
    if header.len() != columns.len() {
        return Err(Error::ShapeMismatch(format!("{} headers for {} columns", header.len(), columns.len())));
    }
    let len = columns.first().map_or(0, Vec::len);
    if columns.iter().any(|c| c.len() != len) {
        return Err(Error::ShapeMismatch("table columns differ in length".into()));
    }
    write_metadata(&mut w, metadata)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for i in 0..len {
        out.write_record(columns.iter().map(|c| fmt_f64(c[i])))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a numeric table written by [`write_table_csv`]: header plus columns.
pub fn read_table_csv<R: Read>(r: R) -> Result<(Vec<String>, Vec<Vec<f64>>, Metadata)> {
    let (metadata, body) = split_metadata(r)?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(body.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = parse_rows(&body, &refs)?;
    let mut columns = vec![Vec::with_capacity(rows.len()); header.len()];
    for row in rows {
        for (c, v) in columns.iter_mut().zip(row) {
            c.push(v);
        }
    }
    Ok((header, columns, metadata))
}
