use std::path::{Path, PathBuf};

use serde_json::json;

use super::scenario::{preset, Prepared, Scenario, PRESET_NAMES};
use super::{CliError, Command, PresetAction, Source};
use crate::absorption::transmitted_spectrum;
use crate::interferometer::{
    correlation_trace, dominant_oscillation_frequency, envelope_coherence_time, simulate_interferogram,
};
use crate::io;
use crate::noise_montecarlo::{error_scaling_study, estimate_trace, sample_counts};
use crate::recovery::{detect_features, fold_one_sided, fourier_recover_with, PeakReport, RecoveryOptions, Window};

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| CliError::Io {
        context: format!("writing {}", path.display()),
        source,
    })
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        context: format!("creating {}", dir.display()),
        source,
    })
}

/// Named runs plus the directory that relative paths resolve against.
fn load_runs(source: &Source) -> Result<(Vec<(String, Scenario)>, PathBuf), CliError> {
    match (&source.config, &source.preset) {
        (Some(path), _) => {
            let scenario = Scenario::load(path)?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            let name = scenario.name.clone().unwrap_or_else(|| "run".into());
            Ok((vec![(name, scenario)], base))
        }
        (None, Some(name)) => preset(name)
            .map(|runs| (runs, PathBuf::from(".")))
            .ok_or_else(|| unknown_preset(name)),
        (None, None) => Err(CliError::Config("either --config or --preset is required".into())),
    }
}

fn unknown_preset(name: &str) -> CliError {
    CliError::Config(format!(
        "unknown preset '{name}' (available: {})",
        PRESET_NAMES.join(", ")
    ))
}

fn opt_json(r: crate::Result<f64>) -> serde_json::Value {
    r.map_or(serde_json::Value::Null, |v| json!(v))
}

fn simulate_run(name: &str, p: &Prepared, dir: &Path) -> Result<(), CliError> {
    create_dir(dir)?;
    let transmitted = transmitted_spectrum(&p.reference, &p.sample)?;
    let interferogram = simulate_interferogram(&transmitted.spectrum, &p.time_grid)?;
    let trace = correlation_trace(&interferogram);

    write(dir, "spectrum.csv", &io::spectrum_csv(&p.reference))?;
    write(dir, "transmitted.csv", &io::spectrum_csv(&transmitted.spectrum))?;
    write(dir, "interferogram.csv", &io::interferogram_csv(&interferogram))?;
    write(dir, "trace.csv", &io::trace_csv(&trace))?;
    if let Some(jsi) = &p.jsi {
        write(dir, "jsi.csv", &io::jsi_csv(jsi))?;
    }

    let mut noise_summary = serde_json::Value::Null;
    if let Some(noise) = &p.noise {
        let counts = sample_counts(&interferogram, noise)?;
        let noisy = estimate_trace(&counts.records, noise.efficiency, noise.dark_rate)?;
        write(dir, "counts.csv", &io::counts_csv(&counts.records))?;
        write(dir, "trace_noisy.csv", &io::trace_csv(&noisy))?;
        noise_summary = json!({
            "pairs_per_bin": noise.pairs_per_bin,
            "seed": noise.seed,
            "probability_clamped": counts.clamped,
        });
    }

    let summary = json!({
        "name": name,
        "pump_peak_thz": p.reference.peak_frequency(),
        "pump_truncated": p.reference.truncated(),
        "surviving_fraction": transmitted.surviving_fraction,
        "absorbance_clamped": transmitted.clamped,
        "time_step_ps": p.time_grid.step(),
        "time_count": p.time_grid.count(),
        "nyquist_thz": p.time_grid.nyquist(),
        "dominant_oscillation_thz": opt_json(dominant_oscillation_frequency(&trace)),
        "coherence_time_ps": opt_json(envelope_coherence_time(&trace)),
        "noise": noise_summary,
    });
    write(
        dir,
        "summary.json",
        &(serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n"),
    )
}

fn simulate(source: &Source, out: Option<&Path>, seed: Option<u64>) -> Result<(), CliError> {
    let (runs, base) = load_runs(source)?;
    let multi = runs.len() > 1;
    for (name, scenario) in &runs {
        let root = out
            .map(Path::to_path_buf)
            .or_else(|| scenario.outputs.clone())
            .ok_or_else(|| CliError::Config("no output directory: pass --out or set \"outputs\"".into()))?;
        let dir = if multi { root.join(name) } else { root };
        let mut prepared = scenario.prepare(&base)?;
        if let (Some(noise), Some(seed)) = (prepared.noise.as_mut(), seed) {
            noise.seed = seed;
        }
        simulate_run(name, &prepared, &dir)?;
        println!("{name}: wrote {}", dir.display());
    }
    Ok(())
}

fn recover(
    trace_path: &Path,
    out: &Path,
    window: Window,
    downshift_thz: Option<f64>,
    min_prominence: f64,
) -> Result<(), CliError> {
    if !(min_prominence > 0.0 && min_prominence < 1.0) {
        return Err(CliError::Config(format!(
            "--min-prominence must lie in (0, 1), got {min_prominence}"
        )));
    }
    let text = std::fs::read_to_string(trace_path).map_err(|source| CliError::Io {
        context: format!("reading {}", trace_path.display()),
        source,
    })?;
    let trace = io::read_trace_csv(&text)?;
    let recovered = fourier_recover_with(&trace, &RecoveryOptions { window, downshift_thz });
    let folded = fold_one_sided(&recovered.to_baseband())?;
    let max = folded.weights().iter().copied().fold(0.0, f64::max);
    let peaks = if max > 0.0 {
        detect_features(&folded, None, min_prominence * max)?
    } else {
        PeakReport::default()
    };

    create_dir(out)?;
    write(out, "recovered.csv", &io::recovered_csv(&recovered))?;
    write(out, "folded.csv", &io::spectrum_csv(&folded))?;
    write(out, "peaks.json", &(peaks.to_json() + "\n"))?;
    println!("{} features; wrote {}", peaks.len(), out.display());
    Ok(())
}

fn noise_study(source: &Source, out: &Path, trials: &[u64], repeats: usize, seed: Option<u64>) -> Result<(), CliError> {
    let (mut runs, base) = load_runs(source)?;
    if runs.len() != 1 {
        return Err(CliError::Config("noise-study needs a single-run scenario".into()));
    }
    let (_, scenario) = runs.remove(0);
    let prepared = scenario.prepare(&base)?;
    let mut config = prepared.noise.unwrap_or_default();
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if repeats < crate::noise_montecarlo::MIN_REPEATS {
        eprintln!(
            "warning: {repeats} repeats is below the recommended {}",
            crate::noise_montecarlo::MIN_REPEATS
        );
    }
    let transmitted = transmitted_spectrum(&prepared.reference, &prepared.sample)?;
    let study = error_scaling_study(&transmitted.spectrum, &prepared.time_grid, trials, repeats, &config)?;

    create_dir(out)?;
    write(out, "scaling.csv", &io::scaling_csv(&study))?;
    let fmt = |e: Option<f64>| e.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
    println!(
        "height exponent: {}; center exponent: {}",
        fmt(study.height_exponent),
        fmt(study.center_exponent)
    );
    Ok(())
}

fn presets(action: &PresetAction) -> Result<(), CliError> {
    match action {
        PresetAction::List => {
            for name in PRESET_NAMES {
                let runs = preset(name).expect("listed preset exists");
                let names: Vec<&str> = runs.iter().map(|(n, _)| n.as_str()).collect();
                println!("{name}\t{}", names.join(" "));
            }
        }
        PresetAction::Show { name } => {
            let runs = preset(name).ok_or_else(|| unknown_preset(name))?;
            for (_, scenario) in runs {
                println!("{}", scenario.to_json());
            }
        }
    }
    Ok(())
}

/// Runs one parsed command.
pub fn run(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Simulate { source, out, seed } => simulate(source, out.as_deref(), *seed),
        Command::Recover {
            trace,
            out,
            window,
            downshift_thz,
            min_prominence,
        } => recover(trace, out, *window, *downshift_thz, *min_prominence),
        Command::NoiseStudy {
            source,
            out,
            trials,
            repeats,
            seed,
        } => noise_study(source, out, trials, *repeats, *seed),
        Command::Presets { action } => presets(action),
    }
}
