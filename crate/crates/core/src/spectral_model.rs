//! Discretized pump spectra, SPDC joint spectral intensities and their
//! sum-frequency marginals.
//!
//! Frequencies are ordinary frequencies in THz and delays are in ps, so the
//! product `ν·t` is a number of cycles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;

/// `4 ln 2`, the exponent scale that turns a FWHM into a Gaussian width.
pub const FOUR_LN2: f64 = 4.0 * std::f64::consts::LN_2;

/// Tolerance on `step·Σweights = 1` for a spectrum to count as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Unit-peak Gaussian with the given FWHM.
#[inline]
pub fn gaussian_profile(nu: f64, center: f64, fwhm: f64) -> f64 {
    let x = (nu - center) / fwhm;
    (-FOUR_LN2 * x * x).exp()
}

/// Uniform frequency axis `start + k·step`, `k ∈ [0, count)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    start: f64,
    step: f64,
    count: usize,
}

impl FrequencyGrid {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !start.is_finite() {
            return Err(Error::invalid("grid start must be finite"));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::invalid(format!("grid step must be positive, got {step}")));
        }
        if count < 2 {
            return Err(Error::invalid(format!("grid needs at least 2 points, got {count}")));
        }
        Ok(Self { start, step, count })
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

    /// Last grid value, `start + (count − 1)·step`.
    pub fn end(&self) -> f64 {
        self.value(self.count - 1)
    }

    #[inline]
    pub fn value(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn values(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.count).map(move |k| self.value(k))
    }

    /// Index of the grid point nearest to `nu`, or `None` when `nu` lies more
    /// than half a step outside the grid.
    pub fn nearest_index(&self, nu: f64) -> Option<usize> {
        let k = ((nu - self.start) / self.step).round();
        if k < 0.0 || k >= self.count as f64 {
            None
        } else {
            Some(k as usize)
        }
    }

    /// Whether `[lo, hi]` lies inside the grid span.
    pub fn spans(&self, lo: f64, hi: f64) -> bool {
        lo >= self.start && hi <= self.end()
    }

    /// Same axis up to a relative tolerance of `1e-12` on start and step.
    pub fn matches(&self, other: &FrequencyGrid) -> bool {
        let scale = self.start.abs().max(other.start.abs()).max(self.step);
        self.count == other.count
            && (self.start - other.start).abs() <= 1e-12 * scale
            && (self.step - other.step).abs() <= 1e-12 * self.step
    }
}

/// Convenience wrapper for [`FrequencyGrid::new`].
pub fn make_frequency_grid(start: f64, step: f64, count: usize) -> Result<FrequencyGrid> {
    FrequencyGrid::new(start, step, count)
}

/// Sum-frequency intensity `F(ν)` sampled on a grid, as a density per THz.
#[derive(Debug, Clone, PartialEq)]
pub struct SumFrequencySpectrum {
    grid: FrequencyGrid,
    weights: Vec<f64>,
    truncated: bool,
}

impl SumFrequencySpectrum {
    pub fn new(grid: FrequencyGrid, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != grid.count() {
            return Err(Error::invalid(format!(
                "{} weights for a grid of {} points",
                weights.len(),
                grid.count()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::invalid(format!(
                "spectral weight {w} is not a finite non-negative value"
            )));
        }
        Ok(Self {
            grid,
            weights,
            truncated: false,
        })
    }

    /// All mass on a single frequency: `G(t) = cos(2πν₀t)`.
    pub fn monochromatic(center: f64) -> Result<Self> {
        let step = 1e-3;
        let grid = FrequencyGrid::new(center, step, 2)?;
        Self::new(grid, vec![1.0 / step, 0.0])
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    /// Set when a Gaussian constructor's grid does not span `center ± 3·fwhm`.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// `step·Σweights`.
    pub fn mass(&self) -> f64 {
        self.grid.step() * self.weights.iter().sum::<f64>()
    }

    pub fn is_normalized(&self) -> bool {
        (self.mass() - 1.0).abs() <= NORMALIZATION_TOL
    }

    /// Rescaled copy with unit mass. A zero spectrum is returned unchanged.
    pub fn normalized(&self) -> Self {
        let mass = self.mass();
        if mass <= 0.0 {
            return self.clone();
        }
        Self {
            grid: self.grid,
            weights: self.weights.iter().map(|w| w / mass).collect(),
            truncated: self.truncated,
        }
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, w) in self.weights.iter().enumerate() {
            if *w > self.weights[best] {
                best = k;
            }
        }
        best
    }

    /// Grid point of the highest weight (lowest frequency on ties).
    pub fn peak_frequency(&self) -> f64 {
        self.grid.value(self.argmax())
    }

    /// Highest grid frequency carrying more than `rel·max` weight.
    pub fn band_max(&self, rel: f64) -> Option<f64> {
        let max = self.weights.iter().cloned().fold(0.0, f64::max);
        if max <= 0.0 {
            return None;
        }
        self.weights
            .iter()
            .rposition(|w| *w > rel * max)
            .map(|k| self.grid.value(k))
    }

    /// Integrated mass over `[lo, hi]` (inclusive grid points).
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        self.grid.step()
            * self
                .grid
                .values()
                .zip(&self.weights)
                .filter(|(nu, _)| *nu >= lo && *nu <= hi)
                .map(|(_, w)| w)
                .sum::<f64>()
    }

    pub(crate) fn with_truncated(mut self, truncated: bool) -> Self {
        self.truncated = truncated;
        self
    }
}

/// One line of a pump frequency comb.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CombLine {
    #[serde(rename = "center_thz")]
    pub center: f64,
    #[serde(rename = "fwhm_thz")]
    pub fwhm: f64,
    pub weight: f64,
}

impl CombLine {
    pub fn new(center: f64, fwhm: f64, weight: f64) -> Self {
        Self { center, fwhm, weight }
    }
}

/// Unit-peak Gaussian samples on `grid`, before normalization.
fn raw_gaussian(grid: &FrequencyGrid, center: f64, fwhm: f64) -> Vec<f64> {
    grid.values().map(|nu| gaussian_profile(nu, center, fwhm)).collect()
}

fn check_fwhm(fwhm: f64, what: &str) -> Result<()> {
    if !(fwhm.is_finite() && fwhm > 0.0) {
        return Err(Error::invalid(format!("{what} fwhm must be positive, got {fwhm}")));
    }
    Ok(())
}

/// Gaussian pump `∝ exp[−4 ln2 (ν−center)²/fwhm²]`, normalized on the grid.
pub fn gaussian_pump_spectrum(grid: &FrequencyGrid, center: f64, fwhm: f64) -> Result<SumFrequencySpectrum> {
    check_fwhm(fwhm, "pump")?;
    if !center.is_finite() {
        return Err(Error::invalid("pump center must be finite"));
    }
    let mut weights = raw_gaussian(grid, center, fwhm);
    let mass = grid.step() * weights.iter().sum::<f64>();
    if mass.is_nan() || mass <= 0.0 {
        return Err(Error::invalid(format!(
            "Gaussian at {center} THz has no support on the grid [{}, {}]",
            grid.start(),
            grid.end()
        )));
    }
    weights.iter_mut().for_each(|w| *w /= mass);
    let truncated = !grid.spans(center - 3.0 * fwhm, center + 3.0 * fwhm);
    Ok(SumFrequencySpectrum::new(*grid, weights)?.with_truncated(truncated))
}

/// Weighted sum of individually normalized Gaussian lines, so that each
/// line's integrated area is proportional to its weight.
pub fn comb_pump_spectrum(grid: &FrequencyGrid, lines: &[CombLine]) -> Result<SumFrequencySpectrum> {
    if lines.is_empty() {
        return Err(Error::invalid("comb needs at least one line"));
    }
    if let Some(l) = lines.iter().find(|l| !(l.weight.is_finite() && l.weight >= 0.0)) {
        return Err(Error::invalid(format!("comb line weight {} is negative", l.weight)));
    }
    let total: f64 = lines.iter().map(|l| l.weight).sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::invalid("comb line weights are all zero"));
    }
    let mut weights = vec![0.0; grid.count()];
    let mut truncated = false;
    for line in lines.iter().filter(|l| l.weight > 0.0) {
        let part = gaussian_pump_spectrum(grid, line.center, line.fwhm)?;
        truncated |= part.truncated();
        let share = line.weight / total;
        for (w, p) in weights.iter_mut().zip(part.weights()) {
            *w += share * p;
        }
    }
    Ok(SumFrequencySpectrum::new(*grid, weights)?.with_truncated(truncated))
}

/// `|f(ν_s, ν_i)|²` on a signal × idler grid, row-major by signal index.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpectralIntensity {
    signal_grid: FrequencyGrid,
    idler_grid: FrequencyGrid,
    density: Vec<f64>,
}

impl JointSpectralIntensity {
    pub fn new(signal_grid: FrequencyGrid, idler_grid: FrequencyGrid, density: Vec<f64>) -> Result<Self> {
        if density.len() != signal_grid.count() * idler_grid.count() {
            return Err(Error::invalid(format!(
                "density has {} entries, grids need {}×{}",
                density.len(),
                signal_grid.count(),
                idler_grid.count()
            )));
        }
        if density.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::invalid("JSI density must be finite and non-negative"));
        }
        Ok(Self {
            signal_grid,
            idler_grid,
            density,
        })
    }

    pub fn signal_grid(&self) -> &FrequencyGrid {
        &self.signal_grid
    }

    pub fn idler_grid(&self) -> &FrequencyGrid {
        &self.idler_grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    #[inline]
    pub fn at(&self, signal: usize, idler: usize) -> f64 {
        self.density[signal * self.idler_grid.count() + idler]
    }

    /// `step_s·step_i·Σdensity`.
    pub fn mass(&self) -> f64 {
        self.signal_grid.step() * self.idler_grid.step() * self.density.iter().sum::<f64>()
    }
}

/// Double-Gaussian SPDC model: pump envelope along `ν_s+ν_i` times a
/// Gaussian phase-matching envelope along `ν_s−ν_i`.
pub fn gaussian_jsi(
    signal_grid: &FrequencyGrid,
    idler_grid: &FrequencyGrid,
    pump_center: f64,
    pump_fwhm: f64,
    phasematch_fwhm: f64,
) -> Result<JointSpectralIntensity> {
    check_fwhm(pump_fwhm, "pump")?;
    check_fwhm(phasematch_fwhm, "phase-matching")?;
    let cols = idler_grid.count();
    let mut density = vec![0.0; signal_grid.count() * cols];
    exec::fill_rows(&mut density, cols, |row, out| {
        let nu_s = signal_grid.value(row);
        for (col, d) in out.iter_mut().enumerate() {
            let nu_i = idler_grid.value(col);
            *d = gaussian_profile(nu_s + nu_i, pump_center, pump_fwhm)
                * gaussian_profile(nu_s - nu_i, 0.0, phasematch_fwhm);
        }
    });
    let mass = signal_grid.step() * idler_grid.step() * density.iter().sum::<f64>();
    if mass.is_nan() || mass <= 0.0 {
        return Err(Error::invalid("JSI has no support on the given grids"));
    }
    density.iter_mut().for_each(|d| *d /= mass);
    JointSpectralIntensity::new(*signal_grid, *idler_grid, density)
}

/// Largest fraction of the JSI mass allowed to fall outside the output grid.
pub const MARGINAL_COVERAGE_TOL: f64 = 1e-6;

/// Bins the JSI along anti-diagonals `ν_s+ν_i` onto `output_grid` using
/// nearest-bin assignment, then renormalizes.
pub fn sum_frequency_marginal(
    jsi: &JointSpectralIntensity,
    output_grid: &FrequencyGrid,
) -> Result<SumFrequencySpectrum> {
    let cell = jsi.signal_grid.step() * jsi.idler_grid.step();
    let total = jsi.mass();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::invalid("JSI carries no mass"));
    }
    let mut binned = vec![0.0; output_grid.count()];
    let mut missed = 0.0;
    for s in 0..jsi.signal_grid.count() {
        let nu_s = jsi.signal_grid.value(s);
        for i in 0..jsi.idler_grid.count() {
            let m = jsi.at(s, i) * cell;
            if m == 0.0 {
                continue;
            }
            match output_grid.nearest_index(nu_s + jsi.idler_grid.value(i)) {
                Some(k) => binned[k] += m,
                None => missed += m,
            }
        }
    }
    let missed = missed / total;
    if missed > MARGINAL_COVERAGE_TOL {
        return Err(Error::Coverage { missed });
    }
    let kept: f64 = binned.iter().sum();
    let step = output_grid.step();
    let weights = binned.into_iter().map(|m| m / (kept * step)).collect();
    SumFrequencySpectrum::new(*output_grid, weights)
}
