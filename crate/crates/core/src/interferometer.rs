//! N00N-state interference pattern `P(t)` and second-order correlation
//! trace `G(t)` synthesized from a sum-frequency spectrum.
//!
//! With `F(ν)` real and non-negative,
//!
//! ```text
//! P(t) = ½ [1 + step·Σ_ν F(ν) cos(2πνt)]
//! G(t) = 2P(t) − 1 = step·Σ_ν F(ν) cos(2πνt)
//! ```
//!
//! so the oscillation frequency of the pattern is the pair's sum frequency,
//! independent of how it splits between signal and idler.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec;
use crate::spectral_model::{SumFrequencySpectrum, NORMALIZATION_TOL};
use crate::transform::{analytic_signal, centered_transform, cis_cycles, cos_cycles};

/// Uniform delay axis in picoseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    start: f64,
    step: f64,
    count: usize,
}

/// 0.5 fs delay step.
pub const DEFAULT_TIME_STEP_PS: f64 = 5e-4;
/// 2¹⁶ delay points, a 32.768 ps window.
pub const DEFAULT_TIME_COUNT: usize = 1 << 16;

impl TimeGrid {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !start.is_finite() {
            return Err(Error::invalid("delay grid start must be finite"));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::invalid(format!("delay step must be positive, got {step}")));
        }
        if count < 2 {
            return Err(Error::invalid(format!(
                "delay grid needs at least 2 points, got {count}"
            )));
        }
        Ok(Self { start, step, count })
    }

    /// Grid with zero delay at index `count/2`.
    pub fn centered(step: f64, count: usize) -> Result<Self> {
        Self::new(-((count / 2) as f64) * step, step, count)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Total scanned delay `count·step`.
    pub fn window(&self) -> f64 {
        self.count as f64 * self.step
    }

    #[inline]
    pub fn value(&self, n: usize) -> f64 {
        self.start + n as f64 * self.step
    }

    pub fn values(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.count).map(move |n| self.value(n))
    }

    /// Highest frequency representable without aliasing, `1/(2·step)`.
    pub fn nyquist(&self) -> f64 {
        0.5 / self.step
    }

    /// Errors with [`Error::Aliasing`] unless `step < 1/(2·band_max)`.
    pub fn check_nyquist(&self, band_max: f64) -> Result<()> {
        if band_max.abs() >= self.nyquist() {
            return Err(Error::Aliasing {
                step_ps: self.step,
                nyquist_thz: self.nyquist(),
                band_max_thz: band_max,
            });
        }
        Ok(())
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self::centered(DEFAULT_TIME_STEP_PS, DEFAULT_TIME_COUNT).expect("default grid is valid")
    }
}

/// Coincidence probability `P(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interferogram {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    /// Highest frequency in the source spectrum, when known.
    pub band_max_thz: Option<f64>,
}

/// Second-order correlation trace `G(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTrace {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub band_max_thz: Option<f64>,
}

/// Relative tolerance on delay spacing when a trace is read from samples.
pub const UNIFORM_GRID_TOL: f64 = 1e-6;

fn uniform_grid(times: &[f64]) -> Result<TimeGrid> {
    if times.len() < 2 {
        return Err(Error::invalid("a trace needs at least 2 samples"));
    }
    let n = times.len();
    let step = (times[n - 1] - times[0]) / (n - 1) as f64;
    if step.is_nan() || step <= 0.0 {
        return Err(Error::NonUniformGrid { index: 1 });
    }
    for (k, t) in times.iter().enumerate() {
        if (t - (times[0] + k as f64 * step)).abs() > UNIFORM_GRID_TOL * step {
            return Err(Error::NonUniformGrid { index: k });
        }
    }
    TimeGrid::new(times[0], step, n)
}

impl Interferogram {
    pub fn from_samples(times: &[f64], values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::invalid("delay and value columns differ in length"));
        }
        Ok(Self {
            grid: uniform_grid(times)?,
            values,
            band_max_thz: None,
        })
    }
}

impl CorrelationTrace {
    /// Builds a trace from delay/value columns, checking the delays are uniform.
    pub fn from_samples(times: &[f64], values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::invalid("delay and value columns differ in length"));
        }
        Ok(Self {
            grid: uniform_grid(times)?,
            values,
            band_max_thz: None,
        })
    }
}

/// Bins between exact phase evaluations in the recurrence below.
const REANCHOR_EVERY: usize = 64;

/// `Σ_j w_j cos(2π ν_j t)` over a uniform spectral grid, summed in
/// ascending-frequency order. The phase advances by a complex rotation and
/// is recomputed exactly every [`REANCHOR_EVERY`] bins.
fn cosine_sum(spectrum: &SumFrequencySpectrum, t: f64) -> f64 {
    let grid = spectrum.grid();
    let weights = spectrum.weights();
    let rotate = cis_cycles(grid.step() * t);
    let mut acc = 0.0;
    for (block, chunk) in weights.chunks(REANCHOR_EVERY).enumerate() {
        let first = block * REANCHOR_EVERY;
        let mut phase: Complex64 = cis_cycles(grid.value(first) * t);
        for w in chunk {
            acc += w * phase.re;
            phase *= rotate;
        }
    }
    acc
}

/// Forward synthesis of `P(t)` by direct summation over spectral bins.
///
/// The spectrum may carry less than unit mass (a sample removed part of it);
/// more than unit mass is rejected because `P` would leave `[0, 1]`.
pub fn simulate_interferogram(spectrum: &SumFrequencySpectrum, grid: &TimeGrid) -> Result<Interferogram> {
    let mass = spectrum.mass();
    if mass > 1.0 + NORMALIZATION_TOL {
        return Err(Error::invalid(format!(
            "spectrum mass {mass} exceeds 1; normalize it before synthesis"
        )));
    }
    let step = spectrum.grid().step();
    let values = exec::map_indexed(grid.count(), |n| {
        0.5 * (1.0 + step * cosine_sum(spectrum, grid.value(n)))
    });
    Ok(Interferogram {
        grid: *grid,
        values,
        band_max_thz: spectrum.band_max(0.0),
    })
}

/// Reference implementation of the forward sum with an exact cosine per term.
pub fn simulate_interferogram_exact(spectrum: &SumFrequencySpectrum, grid: &TimeGrid) -> Interferogram {
    let sgrid = spectrum.grid();
    let step = sgrid.step();
    let values = exec::map_indexed(grid.count(), |n| {
        let t = grid.value(n);
        let s: f64 = spectrum
            .weights()
            .iter()
            .enumerate()
            .map(|(j, w)| w * cos_cycles(sgrid.value(j) * t))
            .sum();
        0.5 * (1.0 + step * s)
    });
    Interferogram {
        grid: *grid,
        values,
        band_max_thz: spectrum.band_max(0.0),
    }
}

/// How `G` is formed from `P`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignConvention {
    /// `G = 2P − 1`, equal to the cosine transform of `F` with `G(0) = +1`.
    #[default]
    Physical,
    /// `G = 1 − 2P`, the literal printed form; `G(0) = −1`.
    Literal,
}

pub fn correlation_trace(interferogram: &Interferogram) -> CorrelationTrace {
    correlation_trace_with(interferogram, SignConvention::Physical)
}

pub fn correlation_trace_with(interferogram: &Interferogram, convention: SignConvention) -> CorrelationTrace {
    let sign = match convention {
        SignConvention::Physical => 1.0,
        SignConvention::Literal => -1.0,
    };
    CorrelationTrace {
        grid: interferogram.grid,
        values: interferogram.values.iter().map(|p| sign * (2.0 * p - 1.0)).collect(),
        band_max_thz: interferogram.band_max_thz,
    }
}

/// Envelope tails must fall below this fraction of the peak at both window edges.
const ENVELOPE_EDGE_FRACTION: f64 = 0.25;

/// FWHM of `|analytic signal of G|`, the coherence time, in ps.
pub fn envelope_coherence_time(trace: &CorrelationTrace) -> Result<f64> {
    let envelope: Vec<f64> = analytic_signal(&trace.values).iter().map(|c| c.norm()).collect();
    let n = envelope.len();
    let peak_idx = envelope
        .iter()
        .enumerate()
        .fold(0, |best, (k, v)| if *v > envelope[best] { k } else { best });
    let peak = envelope[peak_idx];
    if peak.is_nan() || peak <= 0.0 {
        return Err(Error::NoSignal);
    }
    let too_short = Error::WindowTooShort {
        window_ps: trace.grid.window(),
    };
    let edge = ENVELOPE_EDGE_FRACTION * peak;
    if envelope[0] > edge || envelope[n - 1] > edge {
        return Err(too_short);
    }
    let half = 0.5 * peak;
    let dt = trace.grid.step();

    let mut l = peak_idx;
    while envelope[l] > half {
        if l == 0 {
            return Err(too_short);
        }
        l -= 1;
    }
    let mut r = peak_idx;
    while envelope[r] > half {
        if r == n - 1 {
            return Err(too_short);
        }
        r += 1;
    }
    // envelope[l] ≤ half < envelope[l+1], envelope[r-1] > half ≥ envelope[r]
    let left = l as f64 + (half - envelope[l]) / (envelope[l + 1] - envelope[l]);
    let right = (r - 1) as f64 + (envelope[r - 1] - half) / (envelope[r - 1] - envelope[r]);
    Ok((right - left) * dt)
}

/// Relative margin under which two power values count as tied.
const TIE_TOL: f64 = 1e-9;

/// Frequency of the largest positive-frequency bin in the power spectrum of
/// `G`. Near-ties resolve to the lower frequency.
pub fn dominant_oscillation_frequency(trace: &CorrelationTrace) -> Result<f64> {
    if let Some(band) = trace.band_max_thz {
        trace.grid.check_nyquist(band)?;
    }
    if trace.values.iter().all(|g| *g == 0.0) {
        return Err(Error::NoSignal);
    }
    let samples: Vec<Complex64> = trace.values.iter().map(|g| Complex64::new(*g, 0.0)).collect();
    let spectrum = centered_transform(&samples, trace.grid.start(), trace.grid.step());
    let n = samples.len();
    let zero = n / 2;
    let power: Vec<f64> = spectrum.iter().map(|a| a.norm_sqr()).collect();
    let total_max = power.iter().cloned().fold(0.0, f64::max);

    let mut best = zero + 1;
    for k in zero + 1..n {
        if power[k] > power[best] * (1.0 + TIE_TOL) {
            best = k;
        }
    }
    if best >= n || power[best] <= 1e-12 * total_max {
        return Err(Error::NoSignal);
    }
    Ok((best - zero) as f64 / trace.grid.window())
}
