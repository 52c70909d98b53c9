//! Acceptance suite. Runs every criterion at its stated tolerance, prints
//! one PASS/FAIL line per criterion and exits non-zero if any fails.

use std::cell::Cell;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use noon_spectroscopy::{
    comb_pump_spectrum, correlation_trace, detect_features, dominant_oscillation_frequency, envelope_coherence_time,
    error_scaling_study, excitation_probabilities, fold_one_sided, fourier_recover, fractional_absorption,
    gaussian_pump_spectrum, make_frequency_grid, resolution_limit, simulate_interferogram, transmitted_spectrum,
    AbsorptionLine, CombLine, FeatureKind, NoiseConfig, Sample, SumFrequencySpectrum, TimeGrid,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRng, TestRunner};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within_time(elapsed: Duration, limit_s: f64) -> String {
    format!("{:.2} s (limit {limit_s} s)", elapsed.as_secs_f64())
}

/// Forward model, correlation trace, Fourier recovery and fold.
fn round_trip(spectrum: &SumFrequencySpectrum, grid: &TimeGrid) -> SumFrequencySpectrum {
    let trace = correlation_trace(&simulate_interferogram(spectrum, grid).unwrap());
    fold_one_sided(&fourier_recover(&trace)).unwrap()
}

fn oscillation_period_law() -> Outcome {
    let start = Instant::now();
    let grid = TimeGrid::default();
    let bin = resolution_limit(grid.window());
    let mut worst: f64 = 0.0;
    for nu in [740.215, 740.250, 740.300] {
        let mono = SumFrequencySpectrum::monochromatic(nu).unwrap();
        let narrow = gaussian_pump_spectrum(&make_frequency_grid(739.8, 0.001, 1001).unwrap(), nu, 0.1).unwrap();
        for spectrum in [mono, narrow] {
            let trace = correlation_trace(&simulate_interferogram(&spectrum, &grid).unwrap());
            let found = dominant_oscillation_frequency(&trace).unwrap();
            worst = worst.max((found - nu).abs());
        }
    }
    let elapsed = start.elapsed();
    check(
        worst <= bin && bin <= 0.031 && elapsed.as_secs_f64() < 5.0,
        format!(
            "max |ν_found − ν| = {worst:.4} THz (bin {bin:.4}); {}",
            within_time(elapsed, 5.0)
        ),
    )
}

fn fourier_round_trip() -> Outcome {
    let start = Instant::now();
    let lines = [
        CombLine::new(739.30, 0.12, 1.0),
        CombLine::new(739.80, 0.12, 0.6),
        CombLine::new(740.25, 0.12, 1.4),
        CombLine::new(740.70, 0.12, 0.8),
        CombLine::new(741.20, 0.12, 0.4),
    ];
    let total: f64 = lines.iter().map(|l| l.weight).sum();
    let comb = comb_pump_spectrum(&make_frequency_grid(738.5, 0.005, 701).unwrap(), &lines).unwrap();
    let grid = TimeGrid::default();
    let folded = round_trip(&comb, &grid);
    let bin = folded.grid().step();

    let max = folded.weights().iter().copied().fold(0.0, f64::max);
    let peaks = detect_features(&folded, None, 0.05 * max).unwrap();
    if peaks.len() != lines.len() {
        return Err(format!("expected {} peaks, found {}", lines.len(), peaks.len()));
    }
    let mut center_err: f64 = 0.0;
    let mut area_err: f64 = 0.0;
    for (line, peak) in lines.iter().zip(&peaks.features) {
        center_err = center_err.max((peak.center - line.center).abs());
        let area = folded.mass_between(line.center - 0.25, line.center + 0.25);
        let expected = line.weight / total;
        area_err = area_err.max((area - expected).abs() / expected);
    }
    let elapsed = start.elapsed();
    check(
        center_err <= bin && area_err <= 0.01 && elapsed.as_secs_f64() < 10.0,
        format!(
            "center error {center_err:.4} THz (bin {bin:.4}), area error {:.3}% (limit 1%); {}",
            100.0 * area_err,
            within_time(elapsed, 10.0)
        ),
    )
}

fn envelope_linewidth_reciprocity() -> Outcome {
    let fgrid = make_frequency_grid(737.0, 0.005, 1301).unwrap();
    let grid = TimeGrid::default();
    let widths = [0.1, 0.2, 0.4, 0.8];
    let mut taus = Vec::new();
    for w in widths {
        let f = gaussian_pump_spectrum(&fgrid, 740.25, w).unwrap();
        let trace = correlation_trace(&simulate_interferogram(&f, &grid).unwrap());
        taus.push(envelope_coherence_time(&trace).map_err(|e| format!("fwhm {w}: {e}"))?);
    }
    let ratios: Vec<f64> = taus.windows(2).map(|p| p[0] / p[1]).collect();
    let worst = ratios.iter().map(|r| (r - 2.0).abs() / 2.0).fold(0.0, f64::max);
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.4}")).collect();
    check(
        worst <= 0.05,
        format!(
            "τ ratios per doubling [{}], max deviation {:.3}% (limit 5%)",
            shown.join(", "),
            100.0 * worst
        ),
    )
}

fn absorption_recovery() -> Outcome {
    let start = Instant::now();
    let pump = gaussian_pump_spectrum(&make_frequency_grid(736.5, 0.005, 1501).unwrap(), 740.25, 1.2).unwrap();
    let specs = [(739.70, 0.18, 0.8), (740.25, 0.16, 0.5), (740.80, 0.25, 0.3)];
    let sample = Sample::new(
        "three-level",
        specs
            .iter()
            .map(|(c, w, s)| AbsorptionLine::new(*c, *w, *s).unwrap())
            .collect(),
    )
    .unwrap();
    let grid = TimeGrid::default();
    let transmitted = transmitted_spectrum(&pump, &sample).unwrap();
    let reference = round_trip(&pump, &grid);
    let measured = round_trip(&transmitted.spectrum, &grid);
    let bin = reference.grid().step();
    if let Some((_, w, _)) = specs.iter().find(|(_, w, _)| *w < 5.0 * bin) {
        return Err(format!("line width {w} is below 5 bins; criterion does not apply"));
    }

    let gap_max = reference
        .weights()
        .iter()
        .zip(measured.weights())
        .map(|(r, m)| r - m)
        .fold(0.0, f64::max);
    let dips = detect_features(&measured, Some(&reference), 0.05 * gap_max).unwrap();
    if dips.len() != 3 || dips.features.iter().any(|d| d.kind != FeatureKind::Dip) {
        return Err(format!("expected 3 dips, found {:?}", dips.features));
    }
    let fraction = fractional_absorption(&reference, &measured, 1e-6).unwrap();
    let depths = detect_features(&fraction, None, 0.05).unwrap();
    if depths.len() != 3 {
        return Err(format!("expected 3 absorption peaks, found {}", depths.len()));
    }
    let mut center_err: f64 = 0.0;
    let mut depth_err: f64 = 0.0;
    for ((c, _, s), (dip, depth)) in specs.iter().zip(dips.features.iter().zip(&depths.features)) {
        center_err = center_err.max((dip.center - c).abs());
        depth_err = depth_err.max((depth.height - s).abs() / s);
    }
    let elapsed = start.elapsed();
    check(
        center_err <= bin && depth_err <= 0.02 && elapsed.as_secs_f64() < 10.0,
        format!(
            "dip center error {center_err:.4} THz (bin {bin:.4}), depth error {:.3}% (limit 2%); {}",
            100.0 * depth_err,
            within_time(elapsed, 10.0)
        ),
    )
}

fn runner() -> TestRunner {
    let config = Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config.clone(), TestRng::deterministic_rng(config.rng_algorithm))
}

fn random_pump() -> impl Strategy<Value = SumFrequencySpectrum> {
    (739.5..741.0_f64, 0.05..0.6_f64).prop_map(|(center, fwhm)| {
        let grid = make_frequency_grid(736.0, 0.005, 1801).unwrap();
        gaussian_pump_spectrum(&grid, center, fwhm).unwrap()
    })
}

fn random_sample() -> impl Strategy<Value = Sample> {
    prop::collection::vec((738.0..742.5_f64, 0.01..0.5_f64, 0.0..1.0_f64), 0..5).prop_map(|specs| {
        // keep the summed absorbance below 1 so nothing is clamped
        let n = specs.len().max(1) as f64;
        let lines = specs
            .into_iter()
            .map(|(c, w, s)| AbsorptionLine::new(c, w, s / n).unwrap())
            .collect();
        Sample::new("random", lines).unwrap()
    })
}

fn mass_bookkeeping() -> Outcome {
    let worst = Cell::new(0.0_f64);
    let result = runner().run(&(random_pump(), random_sample()), |(pump, sample)| {
        let transmitted = transmitted_spectrum(&pump, &sample).unwrap();
        prop_assert!(!transmitted.clamped);
        let absorbed: f64 = excitation_probabilities(&pump, &sample).unwrap().iter().sum();
        let err = (transmitted.surviving_fraction + absorbed - 1.0).abs();
        worst.set(worst.get().max(err));
        prop_assert!(err <= 1e-9, "surviving + absorbed − 1 = {err:e}");
        Ok(())
    });
    match result {
        Ok(()) => Ok(format!(
            "1000 cases, max |surviving + Σ excitation − 1| = {:.2e} (limit 1e-9)",
            worst.get()
        )),
        Err(e) => Err(e.to_string()),
    }
}

fn random_band_limited() -> impl Strategy<Value = SumFrequencySpectrum> {
    (
        0.0..400.0_f64,
        prop::collection::vec((0.0..1.0_f64, 0.02..0.2_f64, 0.05..1.0_f64), 1..4),
    )
        .prop_map(|(start, lines)| {
            let grid = make_frequency_grid(start, 0.0125, 64).unwrap();
            let comb: Vec<CombLine> = lines
                .into_iter()
                .map(|(pos, w, weight)| CombLine::new(start + 0.1 + 0.6 * pos, w, weight))
                .collect();
            comb_pump_spectrum(&grid, &comb).unwrap()
        })
}

fn parseval_and_hermitian() -> Outcome {
    let grid = TimeGrid::centered(5e-4, 2048).unwrap();
    let (worst_parseval, worst_hermitian) = (Cell::new(0.0_f64), Cell::new(0.0_f64));
    let result = runner().run(&random_band_limited(), |spectrum| {
        let trace = correlation_trace(&simulate_interferogram(&spectrum, &grid).unwrap());
        let recovered = fourier_recover(&trace);
        let time_energy = grid.step() * trace.values.iter().map(|g| g * g).sum::<f64>();
        let rel = (recovered.energy() - time_energy).abs() / time_energy;
        let herm = recovered.hermitian_deviation();
        worst_parseval.set(worst_parseval.get().max(rel));
        worst_hermitian.set(worst_hermitian.get().max(herm));
        prop_assert!(rel <= 1e-6, "Parseval mismatch {rel:e}");
        prop_assert!(herm <= 1e-9, "Hermitian deviation {herm:e}");
        Ok(())
    });
    match result {
        Ok(()) => Ok(format!(
            "1000 cases, max Parseval mismatch {:.2e} (limit 1e-6), max Hermitian deviation {:.2e} (limit 1e-9)",
            worst_parseval.get(),
            worst_hermitian.get()
        )),
        Err(e) => Err(e.to_string()),
    }
}

fn noise_scaling() -> Outcome {
    let start = Instant::now();
    let pump = gaussian_pump_spectrum(&make_frequency_grid(739.5, 0.005, 301).unwrap(), 740.25, 0.2).unwrap();
    let trials = [1_000, 3_162, 10_000, 31_623, 100_000];
    let config = NoiseConfig {
        seed: 20_240_601,
        ..NoiseConfig::default()
    };
    let study = error_scaling_study(&pump, &TimeGrid::default(), &trials, 50, &config).unwrap();
    let elapsed = start.elapsed();
    let exponent = study.height_exponent.ok_or("no exponent could be fitted")?;
    check(
        (exponent + 0.5).abs() <= 0.1 && elapsed.as_secs_f64() < 120.0,
        format!(
            "height exponent {exponent:.4} (target −0.5 ± 0.1), 50 repeats over N = 1e3…1e5; {}",
            within_time(elapsed, 120.0)
        ),
    )
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_noonspec"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

/// Relative path → contents for every file below `dir`.
fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                files.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for (label, base) in [
        ("simulate", vec!["simulate", "--preset", "noise", "--seed", "7"]),
        (
            "noise-study",
            vec![
                "noise-study",
                "--preset",
                "noise",
                "--seed",
                "7",
                "--trials",
                "1000,10000",
                "--repeats",
                "20",
            ],
        ),
    ] {
        let mut snapshots = Vec::new();
        for threads in ["1", "4"] {
            for attempt in 0..2 {
                let dir = tmp.path().join(format!("{label}-{threads}-{attempt}"));
                let mut args = base.clone();
                let dir_str = dir.to_string_lossy().into_owned();
                args.extend(["--out", &dir_str, "--threads", threads]);
                run_cli(&args)?;
                snapshots.push(snapshot(&dir));
            }
        }
        if snapshots[0].is_empty() {
            return Err(format!("{label} wrote no files"));
        }
        if let Some(i) = snapshots.iter().position(|s| *s != snapshots[0]) {
            return Err(format!("{label}: run {i} differs from run 0"));
        }
        compared += snapshots[0].len();
    }
    Ok(format!(
        "simulate and noise-study byte-identical over 2 runs × {{1, 4}} threads ({compared} files)"
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("oscillation-period law", oscillation_period_law),
        ("Fourier round trip", fourier_round_trip),
        ("envelope-linewidth reciprocity", envelope_linewidth_reciprocity),
        ("absorption-spectrum recovery", absorption_recovery),
        ("mass bookkeeping", mass_bookkeeping),
        ("Parseval and Hermitian symmetry", parseval_and_hermitian),
        ("noise scaling", noise_scaling),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(criterion)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
