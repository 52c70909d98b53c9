//! Two-photon absorption by a sample, applied as a transmission filter on the
//! sum-frequency spectrum.
//!
//! Each excited level `ε_f` is a unit-peak Gaussian line at its transition
//! frequency, scaled by an absorption strength in `[0, 1]`. Only the
//! sum frequency `ν_s+ν_i` matters for the interferogram, so absorption acts
//! on the marginal rather than on the full JSI.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral_model::{gaussian_profile, FrequencyGrid, SumFrequencySpectrum};

/// One two-photon-allowed level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbsorptionLine {
    /// Transition frequency from the ground state, THz.
    #[serde(rename = "center_thz")]
    pub level_energy: f64,
    #[serde(rename = "fwhm_thz")]
    pub linewidth_fwhm: f64,
    pub strength: f64,
}

impl AbsorptionLine {
    pub fn new(level_energy: f64, linewidth_fwhm: f64, strength: f64) -> Result<Self> {
        let line = Self {
            level_energy,
            linewidth_fwhm,
            strength,
        };
        line.validate()?;
        Ok(line)
    }

    fn validate(&self) -> Result<()> {
        if !self.level_energy.is_finite() {
            return Err(Error::invalid("line center must be finite"));
        }
        if !(self.linewidth_fwhm.is_finite() && self.linewidth_fwhm > 0.0) {
            return Err(Error::invalid(format!(
                "line fwhm must be positive, got {}",
                self.linewidth_fwhm
            )));
        }
        if !(0.0..=1.0).contains(&self.strength) {
            return Err(Error::invalid(format!(
                "line strength must lie in [0, 1], got {}",
                self.strength
            )));
        }
        Ok(())
    }

    /// `strength · L(ν)` with `L` the unit-peak line profile.
    #[inline]
    pub fn absorbance(&self, nu: f64) -> f64 {
        self.strength * gaussian_profile(nu, self.level_energy, self.linewidth_fwhm)
    }
}

/// A two-photon absorbing sample. Lines are kept sorted by center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SampleDoc")]
pub struct Sample {
    pub name: String,
    lines: Vec<AbsorptionLine>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleDoc {
    name: String,
    lines: Vec<AbsorptionLine>,
}

impl TryFrom<SampleDoc> for Sample {
    type Error = Error;

    fn try_from(doc: SampleDoc) -> Result<Self> {
        Sample::new(doc.name, doc.lines)
    }
}

impl Sample {
    pub fn new(name: impl Into<String>, mut lines: Vec<AbsorptionLine>) -> Result<Self> {
        for line in &lines {
            line.validate()?;
        }
        lines.sort_by(|a, b| a.level_energy.total_cmp(&b.level_energy));
        Ok(Self {
            name: name.into(),
            lines,
        })
    }

    /// A sample that absorbs nothing.
    pub fn transparent() -> Self {
        Self {
            name: "transparent".into(),
            lines: Vec::new(),
        }
    }

    pub fn lines(&self) -> &[AbsorptionLine] {
        &self.lines
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("sample JSON: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sample serializes")
    }

    /// Summed absorbance before clamping.
    fn total_absorbance(&self, nu: f64) -> f64 {
        self.lines.iter().map(|l| l.absorbance(nu)).sum()
    }
}

/// Transmission sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    pub values: Vec<f64>,
    /// Some grid point had summed absorbance above 1 and was clamped to 0.
    pub clamped: bool,
}

/// `T(ν) = clamp(1 − Σ strength·L(ν), 0, 1)`.
pub fn transmission_profile(sample: &Sample, grid: &FrequencyGrid) -> Transmission {
    let mut clamped = false;
    let values = grid
        .values()
        .map(|nu| {
            let t = 1.0 - sample.total_absorbance(nu);
            if t < 0.0 {
                clamped = true;
                0.0
            } else {
                t.min(1.0)
            }
        })
        .collect();
    Transmission { values, clamped }
}

/// Spectrum after the sample, with its bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Transmitted {
    /// Not renormalized: the missing mass is the absorption signal.
    pub spectrum: SumFrequencySpectrum,
    pub surviving_fraction: f64,
    pub clamped: bool,
}

fn require_normalized(incident: &SumFrequencySpectrum) -> Result<()> {
    if !incident.is_normalized() {
        return Err(Error::invalid(format!(
            "incident spectrum must be normalized, mass is {}",
            incident.mass()
        )));
    }
    Ok(())
}

pub fn transmitted_spectrum(incident: &SumFrequencySpectrum, sample: &Sample) -> Result<Transmitted> {
    require_normalized(incident)?;
    let t = transmission_profile(sample, incident.grid());
    let weights = incident.weights().iter().zip(&t.values).map(|(f, t)| f * t).collect();
    let spectrum = SumFrequencySpectrum::new(*incident.grid(), weights)?.with_truncated(incident.truncated());
    Ok(Transmitted {
        surviving_fraction: spectrum.mass(),
        spectrum,
        clamped: t.clamped,
    })
}

/// Absorbed mass per line, `step·Σ F(ν)·strength·L(ν)`, in the sample's line order.
pub fn excitation_probabilities(incident: &SumFrequencySpectrum, sample: &Sample) -> Result<Vec<f64>> {
    require_normalized(incident)?;
    let grid = incident.grid();
    Ok(sample
        .lines()
        .iter()
        .map(|line| {
            grid.step()
                * grid
                    .values()
                    .zip(incident.weights())
                    .map(|(nu, f)| f * line.absorbance(nu))
                    .sum::<f64>()
        })
        .collect())
}

fn require_same_grid(a: &SumFrequencySpectrum, b: &SumFrequencySpectrum) -> Result<()> {
    if !a.grid().matches(b.grid()) {
        return Err(Error::invalid("spectra are sampled on different grids"));
    }
    Ok(())
}

/// Absorbed spectral density `max(reference − measured, 0)` on the reference's scale.
pub fn recover_absorption_spectrum(
    reference: &SumFrequencySpectrum,
    measured: &SumFrequencySpectrum,
) -> Result<SumFrequencySpectrum> {
    require_same_grid(reference, measured)?;
    let diff = reference
        .weights()
        .iter()
        .zip(measured.weights())
        .map(|(r, m)| (r - m).max(0.0))
        .collect();
    SumFrequencySpectrum::new(*reference.grid(), diff)
}

/// Fractional absorption `(reference − measured)/reference`, clamped to
/// `[0, 1]`. Points where the reference falls below `floor·max(reference)`
/// carry no information and are set to 0.
pub fn fractional_absorption(
    reference: &SumFrequencySpectrum,
    measured: &SumFrequencySpectrum,
    floor: f64,
) -> Result<SumFrequencySpectrum> {
    require_same_grid(reference, measured)?;
    let max = reference.weights().iter().cloned().fold(0.0, f64::max);
    let cutoff = floor * max;
    let depth = reference
        .weights()
        .iter()
        .zip(measured.weights())
        .map(|(r, m)| {
            if *r <= cutoff || *r <= 0.0 {
                0.0
            } else {
                ((r - m) / r).clamp(0.0, 1.0)
            }
        })
        .collect();
    SumFrequencySpectrum::new(*reference.grid(), depth)
}
