//! CSV and JSON artifacts. CSVs use `.` decimals, LF line endings and a
//! single header row; numbers are written in shortest round-trip form.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::interferometer::{CorrelationTrace, Interferogram};
use crate::noise_montecarlo::{CountRecord, ScalingStudy};
use crate::recovery::RecoveredSpectrum;
use crate::spectral_model::{FrequencyGrid, JointSpectralIntensity, SumFrequencySpectrum};

pub const SPECTRUM_HEADER: &str = "nu_thz,weight";
pub const JSI_HEADER: &str = "nu_s_thz,nu_i_thz,density";
pub const INTERFEROGRAM_HEADER: &str = "t_ps,p";
pub const TRACE_HEADER: &str = "t_ps,g";
pub const RECOVERED_HEADER: &str = "nu_thz,amplitude_abs,amplitude_re,amplitude_im";
pub const COUNTS_HEADER: &str = "t_ps,coincidences,pairs_sent";
pub const SCALING_HEADER: &str = "n_trials,std_height,std_center";

/// Shortest representation that parses back to the same `f64`; exponent
/// form outside `[1e-4, 1e15)` to keep tiny tails readable.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn table<'a>(header: &str, rows: impl Iterator<Item = Vec<String>> + 'a) -> String {
    let mut out = String::with_capacity(64 * 1024);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn spectrum_csv(spectrum: &SumFrequencySpectrum) -> String {
    table(
        SPECTRUM_HEADER,
        spectrum
            .grid()
            .values()
            .zip(spectrum.weights())
            .map(|(nu, w)| vec![fmt_f64(nu), fmt_f64(*w)]),
    )
}

pub fn jsi_csv(jsi: &JointSpectralIntensity) -> String {
    let mut out = String::new();
    out.push_str(JSI_HEADER);
    out.push('\n');
    for (s, nu_s) in jsi.signal_grid().values().enumerate() {
        for (i, nu_i) in jsi.idler_grid().values().enumerate() {
            let _ = writeln!(out, "{},{},{}", fmt_f64(nu_s), fmt_f64(nu_i), fmt_f64(jsi.at(s, i)));
        }
    }
    out
}

pub fn interferogram_csv(p: &Interferogram) -> String {
    table(
        INTERFEROGRAM_HEADER,
        p.grid
            .values()
            .zip(&p.values)
            .map(|(t, v)| vec![fmt_f64(t), fmt_f64(*v)]),
    )
}

pub fn trace_csv(g: &CorrelationTrace) -> String {
    table(
        TRACE_HEADER,
        g.grid
            .values()
            .zip(&g.values)
            .map(|(t, v)| vec![fmt_f64(t), fmt_f64(*v)]),
    )
}

pub fn recovered_csv(r: &RecoveredSpectrum) -> String {
    table(
        RECOVERED_HEADER,
        r.grid
            .values()
            .zip(&r.amplitudes)
            .map(|(nu, a)| vec![fmt_f64(nu), fmt_f64(a.norm()), fmt_f64(a.re), fmt_f64(a.im)]),
    )
}

pub fn counts_csv(records: &[CountRecord]) -> String {
    table(
        COUNTS_HEADER,
        records
            .iter()
            .map(|r| vec![fmt_f64(r.delay), r.coincidences.to_string(), r.pairs_sent.to_string()]),
    )
}

pub fn scaling_csv(study: &ScalingStudy) -> String {
    table(
        SCALING_HEADER,
        study
            .rows
            .iter()
            .map(|r| vec![r.n_trials.to_string(), fmt_f64(r.std_height), fmt_f64(r.std_center)]),
    )
}

/// Parses a CSV with the given header into numeric columns.
pub fn parse_columns(text: &str, header: &str) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let first = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
    if first.trim() != header {
        return Err(Error::Parse(format!(
            "expected header '{header}', found '{}'",
            first.trim()
        )));
    }
    let width = header.split(',').count();
    let mut cols = vec![Vec::new(); width];
    for (row, line) in lines.enumerate() {
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != width {
            return Err(Error::Parse(format!(
                "row {}: expected {width} fields, found {}",
                row + 2,
                fields.len()
            )));
        }
        for (col, f) in fields.iter().enumerate() {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: '{f}' is not a number", row + 2)))?;
            if !v.is_finite() {
                return Err(Error::Parse(format!("row {}: non-finite value", row + 2)));
            }
            cols[col].push(v);
        }
    }
    Ok(cols)
}

/// Reads a `t_ps,g` trace, checking that delays are uniform.
pub fn read_trace_csv(text: &str) -> Result<CorrelationTrace> {
    let mut cols = parse_columns(text, TRACE_HEADER)?;
    let values = cols.pop().expect("two columns");
    let times = cols.pop().expect("two columns");
    CorrelationTrace::from_samples(&times, values)
}

/// Reads a `nu_thz,weight` spectrum on a uniform grid.
pub fn read_spectrum_csv(text: &str) -> Result<SumFrequencySpectrum> {
    let mut cols = parse_columns(text, SPECTRUM_HEADER)?;
    let weights = cols.pop().expect("two columns");
    let nu = cols.pop().expect("two columns");
    if nu.len() < 2 {
        return Err(Error::Parse("spectrum needs at least 2 rows".into()));
    }
    let step = (nu[nu.len() - 1] - nu[0]) / (nu.len() - 1) as f64;
    for (k, v) in nu.iter().enumerate() {
        if (v - (nu[0] + k as f64 * step)).abs() > 1e-6 * step.abs() {
            return Err(Error::Parse(format!("row {}: frequency grid is not uniform", k + 2)));
        }
    }
    let grid = FrequencyGrid::new(nu[0], step, nu.len()).map_err(|e| Error::Parse(e.to_string()))?;
    SumFrequencySpectrum::new(grid, weights).map_err(|e| Error::Parse(e.to_string()))
}
