//! Scenario documents and the bundled figure presets.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::absorption::{AbsorptionLine, Sample};
use crate::interferometer::{TimeGrid, DEFAULT_TIME_COUNT, DEFAULT_TIME_STEP_PS};
use crate::noise_montecarlo::NoiseConfig;
use crate::spectral_model::{
    comb_pump_spectrum, gaussian_jsi, gaussian_pump_spectrum, sum_frequency_marginal, CombLine, FrequencyGrid,
    JointSpectralIntensity, SumFrequencySpectrum,
};

pub const SCENARIO_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub start_thz: f64,
    pub step_thz: f64,
    pub count: usize,
}

impl GridConfig {
    fn build(&self) -> crate::Result<FrequencyGrid> {
        FrequencyGrid::new(self.start_thz, self.step_thz, self.count)
    }
}

fn default_step_ps() -> f64 {
    DEFAULT_TIME_STEP_PS
}

fn default_count() -> usize {
    DEFAULT_TIME_COUNT
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGridConfig {
    #[serde(default = "default_step_ps")]
    pub step_ps: f64,
    #[serde(default = "default_count")]
    pub count: usize,
    /// Defaults to a grid centered on zero delay.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_ps: Option<f64>,
}

impl Default for TimeGridConfig {
    fn default() -> Self {
        Self {
            step_ps: DEFAULT_TIME_STEP_PS,
            count: DEFAULT_TIME_COUNT,
            start_ps: None,
        }
    }
}

impl TimeGridConfig {
    fn build(&self) -> crate::Result<TimeGrid> {
        match self.start_ps {
            Some(start) => TimeGrid::new(start, self.step_ps, self.count),
            None => TimeGrid::centered(self.step_ps, self.count),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PumpConfig {
    Gaussian {
        grid: GridConfig,
        center_thz: f64,
        fwhm_thz: f64,
    },
    Comb {
        grid: GridConfig,
        lines: Vec<CombLine>,
    },
    Monochromatic {
        center_thz: f64,
    },
    Jsi {
        signal_grid: GridConfig,
        idler_grid: GridConfig,
        output_grid: GridConfig,
        pump_center_thz: f64,
        pump_fwhm_thz: f64,
        phasematch_fwhm_thz: f64,
    },
}

/// A sample given inline or as a path to a sample JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SampleSource {
    Inline(Sample),
    File { path: PathBuf },
}

/// One simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub pump: PumpConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleSource>,
    #[serde(default)]
    pub time_grid: TimeGridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<PathBuf>,
}

/// A scenario with every reference resolved and every spectrum built.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub reference: SumFrequencySpectrum,
    pub jsi: Option<JointSpectralIntensity>,
    pub sample: Sample,
    pub time_grid: TimeGrid,
    pub noise: Option<NoiseConfig>,
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let scenario: Scenario = serde_json::from_str(text).map_err(config_err)?;
        if scenario.version != SCENARIO_VERSION {
            return Err(CliError::Config(format!(
                "unsupported scenario version {} (expected {SCENARIO_VERSION})",
                scenario.version
            )));
        }
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Builds spectra and grids. Relative sample paths resolve against `base`.
    /// Invalid parameters are configuration errors; a delay grid that would
    /// alias the pump band is [`crate::Error::Aliasing`].
    pub fn prepare(&self, base: &Path) -> Result<Prepared, CliError> {
        let (reference, jsi) = match &self.pump {
            PumpConfig::Gaussian {
                grid,
                center_thz,
                fwhm_thz,
            } => (
                gaussian_pump_spectrum(&grid.build().map_err(config_err)?, *center_thz, *fwhm_thz)
                    .map_err(config_err)?,
                None,
            ),
            PumpConfig::Comb { grid, lines } => (
                comb_pump_spectrum(&grid.build().map_err(config_err)?, lines).map_err(config_err)?,
                None,
            ),
            PumpConfig::Monochromatic { center_thz } => (
                SumFrequencySpectrum::monochromatic(*center_thz).map_err(config_err)?,
                None,
            ),
            PumpConfig::Jsi {
                signal_grid,
                idler_grid,
                output_grid,
                pump_center_thz,
                pump_fwhm_thz,
                phasematch_fwhm_thz,
            } => {
                let jsi = gaussian_jsi(
                    &signal_grid.build().map_err(config_err)?,
                    &idler_grid.build().map_err(config_err)?,
                    *pump_center_thz,
                    *pump_fwhm_thz,
                    *phasematch_fwhm_thz,
                )
                .map_err(config_err)?;
                let marginal =
                    sum_frequency_marginal(&jsi, &output_grid.build().map_err(config_err)?).map_err(config_err)?;
                (marginal, Some(jsi))
            }
        };
        let sample = match &self.sample {
            None => Sample::transparent(),
            Some(SampleSource::Inline(s)) => s.clone(),
            Some(SampleSource::File { path }) => {
                let full = if path.is_absolute() {
                    path.clone()
                } else {
                    base.join(path)
                };
                Sample::load(&full).map_err(|e| CliError::Config(format!("{}: {e}", full.display())))?
            }
        };
        if let Some(noise) = &self.noise {
            noise.validate().map_err(config_err)?;
        }
        let time_grid = self.time_grid.build().map_err(config_err)?;
        time_grid.check_nyquist(reference.grid().end())?;
        Ok(Prepared {
            reference,
            jsi,
            sample,
            time_grid,
            noise: self.noise,
        })
    }
}

fn gaussian_run(name: &str, center: f64, fwhm: f64, grid: GridConfig, sample: Option<Sample>) -> Scenario {
    Scenario {
        version: SCENARIO_VERSION,
        name: Some(name.to_string()),
        pump: PumpConfig::Gaussian {
            grid,
            center_thz: center,
            fwhm_thz: fwhm,
        },
        sample: sample.map(SampleSource::Inline),
        time_grid: TimeGridConfig::default(),
        noise: None,
        outputs: None,
    }
}

/// Pump lines of the oscillation-period figure, THz.
pub const FIG2_LINES_THZ: [f64; 3] = [740.215, 740.250, 740.300];

/// Five-line comb with unequal weights.
pub fn fig3_comb() -> Vec<CombLine> {
    vec![
        CombLine::new(739.30, 0.12, 1.0),
        CombLine::new(739.80, 0.12, 0.6),
        CombLine::new(740.25, 0.12, 1.4),
        CombLine::new(740.70, 0.12, 0.8),
        CombLine::new(741.20, 0.12, 0.4),
    ]
}

/// Three-level sample with distinct widths and strengths 0.8/0.5/0.3.
pub fn fig4_sample() -> Sample {
    Sample::new(
        "three-level",
        vec![
            AbsorptionLine::new(739.70, 0.18, 0.8).expect("valid line"),
            AbsorptionLine::new(740.25, 0.16, 0.5).expect("valid line"),
            AbsorptionLine::new(740.80, 0.25, 0.3).expect("valid line"),
        ],
    )
    .expect("valid sample")
}

pub const PRESET_NAMES: [&str; 4] = ["fig2", "fig3", "fig4", "noise"];

/// Named runs of a preset.
pub fn preset(name: &str) -> Option<Vec<(String, Scenario)>> {
    let runs = match name {
        "fig2" => FIG2_LINES_THZ
            .iter()
            .map(|nu| {
                let run = format!("nu_{nu:.3}");
                let grid = GridConfig {
                    start_thz: 739.8,
                    step_thz: 0.001,
                    count: 1001,
                };
                (run.clone(), gaussian_run(&run, *nu, 0.1, grid, None))
            })
            .collect(),
        "fig3" => vec![(
            "fig3".to_string(),
            Scenario {
                version: SCENARIO_VERSION,
                name: Some("fig3".into()),
                pump: PumpConfig::Comb {
                    grid: GridConfig {
                        start_thz: 738.5,
                        step_thz: 0.005,
                        count: 701,
                    },
                    lines: fig3_comb(),
                },
                sample: None,
                time_grid: TimeGridConfig::default(),
                noise: None,
                outputs: None,
            },
        )],
        "fig4" => vec![(
            "fig4".to_string(),
            gaussian_run(
                "fig4",
                740.25,
                1.2,
                GridConfig {
                    start_thz: 736.5,
                    step_thz: 0.005,
                    count: 1501,
                },
                Some(fig4_sample()),
            ),
        )],
        "noise" => {
            let mut s = gaussian_run(
                "noise",
                740.25,
                0.2,
                GridConfig {
                    start_thz: 739.5,
                    step_thz: 0.005,
                    count: 301,
                },
                None,
            );
            s.noise = Some(NoiseConfig::default());
            vec![("noise".to_string(), s)]
        }
        _ => return None,
    };
    Some(runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn presets_prepare_cleanly() {
        for name in PRESET_NAMES {
            for (_, s) in preset(name).unwrap() {
                let p = s.prepare(Path::new(".")).unwrap();
                assert!(p.reference.is_normalized());
                assert!(!p.reference.truncated(), "{name}");
            }
        }
        assert!(preset("fig9").is_none());
    }

    #[test]
    fn json_round_trip() {
        for name in PRESET_NAMES {
            for (_, s) in preset(name).unwrap() {
                assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
            }
        }
    }

    #[test]
    fn rejects_unknown_keys_and_versions() {
        let mut v: serde_json::Value = serde_json::from_str(&preset("fig3").unwrap()[0].1.to_json()).unwrap();
        v["colour"] = "red".into();
        assert!(matches!(Scenario::from_json(&v.to_string()), Err(CliError::Config(_))));

        let mut v: serde_json::Value = serde_json::from_str(&preset("fig3").unwrap()[0].1.to_json()).unwrap();
        v["pump"]["extra"] = 1.into();
        assert!(matches!(Scenario::from_json(&v.to_string()), Err(CliError::Config(_))));

        let mut v: serde_json::Value = serde_json::from_str(&preset("fig3").unwrap()[0].1.to_json()).unwrap();
        v["version"] = 2.into();
        assert!(matches!(Scenario::from_json(&v.to_string()), Err(CliError::Config(_))));
    }

    #[test]
    fn aliasing_grid_is_rejected() {
        let mut s = preset("fig3").unwrap().remove(0).1;
        s.time_grid.step_ps = 1e-3;
        assert!(matches!(
            s.prepare(Path::new(".")),
            Err(CliError::Core(Error::Aliasing { .. }))
        ));
    }

    #[test]
    fn sample_file_resolves_relative_to_base() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("s.json"), fig4_sample().to_json()).unwrap();
        let mut s = preset("fig4").unwrap().remove(0).1;
        s.sample = Some(SampleSource::File { path: "s.json".into() });
        let text = s.to_json();
        let back = Scenario::from_json(&text).unwrap();
        assert_eq!(back.prepare(dir.path()).unwrap().sample, fig4_sample());
        assert!(matches!(
            back.prepare(Path::new("/nonexistent")),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn jsi_pump_builds_marginal() {
        let text = r#"{
            "version": 1,
            "pump": {
                "kind": "jsi",
                "signal_grid": {"start_thz": 369.625, "step_thz": 0.005, "count": 201},
                "idler_grid": {"start_thz": 369.625, "step_thz": 0.005, "count": 201},
                "output_grid": {"start_thz": 739.25, "step_thz": 0.005, "count": 401},
                "pump_center_thz": 740.25, "pump_fwhm_thz": 0.1, "phasematch_fwhm_thz": 0.3
            },
            "time_grid": {"count": 4096}
        }"#;
        let p = Scenario::from_json(text).unwrap().prepare(Path::new(".")).unwrap();
        assert!(p.jsi.is_some());
        assert!((p.reference.peak_frequency() - 740.25).abs() < 0.006);
        assert_eq!(p.time_grid.count(), 4096);
    }
}
