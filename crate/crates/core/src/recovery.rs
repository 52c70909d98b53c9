//! Inversion of the correlation trace back to the sum-frequency spectrum.
//!
//! The forward model uses the kernel `exp(−i2πνt)`; recovery applies the
//! inverse kernel `exp(+i2πνt)` with no `1/2π` factor, since frequencies
//! are ordinary frequencies:
//!
//! ```text
//! F(ν_k) = step_t · Σ_n G(t_n) exp(+i2π ν_k t_n),   ν_k = k / (count·step_t)
//! ```
//!
//! A real trace gives a Hermitian spectrum with two mirror peaks at `±ν₀`;
//! [`fold_one_sided`] merges them into the physical positive-frequency
//! spectrum.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interferometer::CorrelationTrace;
use crate::spectral_model::{FrequencyGrid, SumFrequencySpectrum};
use crate::transform::{centered_transform, cis_cycles, lowest_bin};

/// Taper applied to the trace before the transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    Rect,
    /// Hann taper with unit gain at the middle of the delay window, which
    /// keeps integrated line areas unchanged for centered traces.
    Hann,
}

impl std::str::FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rect" | "none" => Ok(Window::Rect),
            "hann" => Ok(Window::Hann),
            other => Err(Error::invalid(format!(
                "unknown window '{other}' (expected hann or rect)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RecoveryOptions {
    pub window: Window,
    /// Heterodyne reference in THz. It is snapped to the nearest multiple of
    /// the DFT bin so the shifted output is an exact relabeling of the
    /// baseband bins.
    pub downshift_thz: Option<f64>,
}

/// Two-sided spectrum from the inverse transform.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredSpectrum {
    pub grid: FrequencyGrid,
    pub amplitudes: Vec<Complex64>,
    /// Length of the source delay window, ps.
    pub window_ps: f64,
    pub step_ps: f64,
    /// Delay of the first trace sample, ps.
    pub start_ps: f64,
    /// Applied heterodyne shift in THz (0 for baseband output).
    pub shift_thz: f64,
}

impl RecoveredSpectrum {
    fn bin_width(&self) -> f64 {
        self.grid.step()
    }

    fn shift_bins(&self) -> i64 {
        (self.shift_thz / self.bin_width()).round() as i64
    }

    /// Relabels a downshifted spectrum onto the baseband grid. Bins that
    /// wrapped around the transform period pick up the phase
    /// `exp(−i2π q·t₀/step_t)`.
    pub fn to_baseband(&self) -> RecoveredSpectrum {
        let m = self.shift_bins();
        if m == 0 {
            return self.clone();
        }
        let n = self.amplitudes.len() as i64;
        let k_min = lowest_bin(n as usize);
        let origin_cycles = self.start_ps / self.step_ps;
        let amplitudes = (0..n)
            .map(|j| {
                let want = k_min + j; // baseband bin index
                let k = want - m;
                let q = (k - k_min).div_euclid(n);
                let k_in = k - q * n;
                // S_{k_in} = A(ν_{want - q n}) = A(ν_want) · exp(−i2π q t₀/dt)
                self.amplitudes[(k_in - k_min) as usize] * cis_cycles(q as f64 * origin_cycles)
            })
            .collect();
        RecoveredSpectrum {
            grid: FrequencyGrid::new(k_min as f64 * self.bin_width(), self.bin_width(), n as usize)
                .expect("grid of a valid spectrum"),
            amplitudes,
            shift_thz: 0.0,
            ..*self
        }
    }

    /// `step_ν·Σ|F|²`, the spectral side of Parseval's identity.
    pub fn energy(&self) -> f64 {
        self.bin_width() * self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>()
    }

    /// Largest `|F(ν) − conj(F(−ν))|` over bins with a mirror partner.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.amplitudes.len();
        let zero = n / 2;
        let mut dev: f64 = 0.0;
        for k in 1..n.div_ceil(2) {
            let (pos, neg) = (self.amplitudes[zero + k], self.amplitudes[zero - k]);
            dev = dev.max((pos - neg.conj()).norm());
        }
        dev.max(self.amplitudes[zero].im.abs())
    }
}

/// Recovers the spectrum with a rectangular window and no downshift.
pub fn fourier_recover(trace: &CorrelationTrace) -> RecoveredSpectrum {
    fourier_recover_with(trace, &RecoveryOptions::default())
}

pub fn fourier_recover_with(trace: &CorrelationTrace, options: &RecoveryOptions) -> RecoveredSpectrum {
    let grid = trace.grid;
    let (n, dt, t0) = (grid.count(), grid.step(), grid.start());
    let bin = 1.0 / grid.window();
    let shift = options.downshift_thz.map(|nu| (nu / bin).round() * bin).unwrap_or(0.0);
    let middle = t0 + 0.5 * (n - 1) as f64 * dt;
    let half_span = 0.5 * n as f64 * dt;

    let samples: Vec<Complex64> = trace
        .values
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let t = grid.value(k);
            let taper = match options.window {
                Window::Rect => 1.0,
                Window::Hann => 0.5 * (1.0 + (std::f64::consts::PI * (t - middle) / half_span).cos()),
            };
            let x = Complex64::new(g * taper, 0.0);
            if shift != 0.0 {
                x * cis_cycles(shift * t)
            } else {
                x
            }
        })
        .collect();

    let amplitudes = centered_transform(&samples, t0, dt);
    RecoveredSpectrum {
        grid: FrequencyGrid::new(lowest_bin(n) as f64 * bin + shift, bin, n).expect("n ≥ 2 and bin > 0"),
        amplitudes,
        window_ps: grid.window(),
        step_ps: dt,
        start_ps: t0,
        shift_thz: shift,
    }
}

/// Tolerated Hermitian deviation, relative to the largest amplitude.
pub const HERMITIAN_TOL: f64 = 1e-6;

/// Positive-frequency spectrum `|F(ν)| + |F(−ν)|` on `ν ≥ 0`.
///
/// The DC bin is counted once and an unpaired Nyquist bin is kept at
/// `+count/2` so that the folded mass equals the two-sided mass.
pub fn fold_one_sided(recovered: &RecoveredSpectrum) -> Result<SumFrequencySpectrum> {
    if recovered.shift_thz != 0.0 {
        return Err(Error::invalid(
            "spectrum is downshifted; relabel it with to_baseband() before folding",
        ));
    }
    let scale = recovered.amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let deviation = recovered.hermitian_deviation();
    if deviation > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Asymmetry { deviation });
    }
    let a = &recovered.amplitudes;
    let n = a.len();
    let zero = n / 2;
    let mut weights = Vec::with_capacity(n / 2 + 1);
    weights.push(a[zero].norm());
    for k in 1..n.div_ceil(2) {
        weights.push(a[zero + k].norm() + a[zero - k].norm());
    }
    if n.is_multiple_of(2) {
        // unpaired bin at −n/2
        weights.push(a[0].norm());
    }
    let grid = FrequencyGrid::new(0.0, recovered.grid.step(), weights.len())?;
    SumFrequencySpectrum::new(grid, weights)
}

/// Width of one DFT bin for a delay window of `window` ps.
pub fn resolution_limit(window: f64) -> f64 {
    1.0 / window
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Peak,
    Dip,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    #[serde(rename = "center_thz")]
    pub center: f64,
    /// Peak value, or depth below the baseline for dips.
    pub height: f64,
    #[serde(rename = "fwhm_thz")]
    pub fwhm: f64,
    pub kind: FeatureKind,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PeakReport {
    pub features: Vec<Feature>,
}

impl PeakReport {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Vertex of the parabola through three equally spaced samples, as
/// `(offset in steps from the middle sample, value)`.
pub(crate) fn parabolic_vertex(left: f64, mid: f64, right: f64) -> (f64, f64) {
    let curvature = left - 2.0 * mid + right;
    if curvature >= 0.0 {
        return (0.0, mid);
    }
    let offset = 0.5 * (left - right) / curvature;
    (offset, mid - 0.25 * (left - right) * offset)
}

/// Prominence of the local maximum at `k`: height above the higher of the
/// two lowest points reached before meeting a strictly higher sample.
fn prominence(y: &[f64], k: usize) -> (f64, f64) {
    let mut left_min = y[k];
    for v in y[..k].iter().rev() {
        if *v > y[k] {
            break;
        }
        left_min = left_min.min(*v);
    }
    let mut right_min = y[k];
    for v in &y[k + 1..] {
        if *v > y[k] {
            break;
        }
        right_min = right_min.min(*v);
    }
    let base = left_min.max(right_min);
    (y[k] - base, base)
}

/// Width at `level` around the maximum at `k`, with linear interpolation of
/// the crossings (edges clamp to the grid).
fn width_at(y: &[f64], k: usize, level: f64) -> f64 {
    let mut l = k;
    while l > 0 && y[l] > level {
        l -= 1;
    }
    let left = if y[l] > level {
        l as f64
    } else {
        l as f64 + (level - y[l]) / (y[l + 1] - y[l])
    };
    let mut r = k;
    while r + 1 < y.len() && y[r] > level {
        r += 1;
    }
    let right = if y[r] > level {
        r as f64
    } else {
        (r - 1) as f64 + (y[r - 1] - level) / (y[r - 1] - y[r])
    };
    right - left
}

/// Finds peaks of `spectrum`, or dips below `baseline` when one is given
/// (maxima of `baseline − spectrum`), with prominence of at least
/// `min_prominence`. Centers and heights come from 3-point parabolic
/// refinement; flat tops resolve to their lowest-frequency sample.
pub fn detect_features(
    spectrum: &SumFrequencySpectrum,
    baseline: Option<&SumFrequencySpectrum>,
    min_prominence: f64,
) -> Result<PeakReport> {
    if min_prominence.is_nan() || min_prominence <= 0.0 {
        return Err(Error::invalid(format!(
            "min_prominence must be positive, got {min_prominence}"
        )));
    }
    let (signal, kind): (Vec<f64>, _) = match baseline {
        None => (spectrum.weights().to_vec(), FeatureKind::Peak),
        Some(base) => {
            if !base.grid().matches(spectrum.grid()) {
                return Err(Error::invalid("baseline is sampled on a different grid"));
            }
            (
                base.weights()
                    .iter()
                    .zip(spectrum.weights())
                    .map(|(b, s)| b - s)
                    .collect(),
                FeatureKind::Dip,
            )
        }
    };
    let grid = spectrum.grid();
    let y = &signal;
    let mut features = Vec::new();
    for k in 1..y.len().saturating_sub(1) {
        if !(y[k] > y[k - 1] && y[k] >= y[k + 1]) {
            continue;
        }
        // leftmost sample of a plateau; skip if the plateau later rises
        let mut end = k;
        while end + 1 < y.len() && y[end + 1] == y[k] {
            end += 1;
        }
        if end + 1 < y.len() && y[end + 1] > y[k] {
            continue;
        }
        let (prom, base) = prominence(y, k);
        if prom < min_prominence {
            continue;
        }
        let (offset, height) = if end == k {
            parabolic_vertex(y[k - 1], y[k], y[k + 1])
        } else {
            (0.0, y[k])
        };
        let fwhm = width_at(y, k, base + 0.5 * prom) * grid.step();
        features.push(Feature {
            center: grid.value(k) + offset * grid.step(),
            height,
            fwhm,
            kind,
        });
    }
    Ok(PeakReport { features })
}

/// Relative distances between two spectra after normalizing each to unit mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumDistance {
    pub l2_rel: f64,
    pub linf_rel: f64,
}

/// `‖a−b‖₂/‖a‖₂` and `max|a−b|/max|a|` after normalization, with `a` as the
/// reference.
pub fn spectrum_distance(a: &SumFrequencySpectrum, b: &SumFrequencySpectrum) -> Result<SpectrumDistance> {
    if !a.grid().matches(b.grid()) {
        return Err(Error::invalid("spectra are sampled on different grids"));
    }
    let (ma, mb) = (a.mass(), b.mass());
    if ma == 0.0 && mb == 0.0 {
        return Ok(SpectrumDistance {
            l2_rel: 0.0,
            linf_rel: 0.0,
        });
    }
    if !(ma > 0.0 && mb > 0.0) {
        return Err(Error::invalid("cannot compare a zero spectrum with a non-zero one"));
    }
    let mut diff2 = 0.0;
    let mut ref2 = 0.0;
    let mut diff_max: f64 = 0.0;
    let mut ref_max: f64 = 0.0;
    for (x, y) in a.weights().iter().zip(b.weights()) {
        let (x, y) = (x / ma, y / mb);
        diff2 += (x - y) * (x - y);
        ref2 += x * x;
        diff_max = diff_max.max((x - y).abs());
        ref_max = ref_max.max(x.abs());
    }
    Ok(SpectrumDistance {
        l2_rel: (diff2 / ref2).sqrt(),
        linf_rel: diff_max / ref_max,
    })
}
