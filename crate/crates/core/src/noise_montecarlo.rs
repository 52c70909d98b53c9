//! Finite coincidence-counting statistics on the interferogram, and the
//! scaling of reconstruction error with the number of accumulated pairs.
//!
//! Each delay bin draws `Binomial(pairs_per_bin, clamp(η²·P(t) + dark, 0, 1))`
//! from its own ChaCha stream keyed by `(seed, bin)`, so counts do not
//! depend on how bins are spread over threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::interferometer::{simulate_interferogram, CorrelationTrace, Interferogram, TimeGrid};
use crate::recovery::{fold_one_sided, fourier_recover, parabolic_vertex};
use crate::spectral_model::SumFrequencySpectrum;

/// Coincidences recorded at one delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    /// Delay in ps.
    #[serde(rename = "t_ps")]
    pub delay: f64,
    pub coincidences: u64,
    pub pairs_sent: u64,
}

impl CountRecord {
    pub fn new(delay: f64, coincidences: u64, pairs_sent: u64) -> Result<Self> {
        if pairs_sent == 0 {
            return Err(Error::invalid("pairs_sent must be positive"));
        }
        if coincidences > pairs_sent {
            return Err(Error::invalid(format!(
                "{coincidences} coincidences exceed {pairs_sent} pairs sent"
            )));
        }
        Ok(Self {
            delay,
            coincidences,
            pairs_sent,
        })
    }
}

fn default_pairs() -> u64 {
    10_000
}

fn default_efficiency() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default = "default_pairs")]
    pub pairs_per_bin: u64,
    #[serde(default)]
    pub seed: u64,
    /// Additive coincidence probability per bin.
    #[serde(default)]
    pub dark_rate: f64,
    /// Single-photon detection efficiency; pairs register with `efficiency²`.
    #[serde(default = "default_efficiency")]
    pub efficiency: f64,
    /// Replace sampling by the rounded expectation, for zero-noise baselines.
    #[serde(default)]
    pub noiseless: bool,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            pairs_per_bin: default_pairs(),
            seed: 0,
            dark_rate: 0.0,
            efficiency: default_efficiency(),
            noiseless: false,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pairs_per_bin == 0 {
            return Err(Error::invalid("pairs_per_bin must be positive"));
        }
        if !(self.dark_rate.is_finite() && self.dark_rate >= 0.0) {
            return Err(Error::invalid(format!("dark_rate must be ≥ 0, got {}", self.dark_rate)));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::invalid(format!(
                "efficiency must lie in (0, 1], got {}",
                self.efficiency
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountSample {
    pub records: Vec<CountRecord>,
    /// Some bin's detection probability exceeded 1 and was clamped.
    pub clamped: bool,
}

/// RNG for one delay bin: stream `bin` of the ChaCha8 generator seeded by `seed`.
pub fn bin_rng(seed: u64, bin: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(bin);
    rng
}

pub fn sample_counts(interferogram: &Interferogram, config: &NoiseConfig) -> Result<CountSample> {
    config.validate()?;
    let eta2 = config.efficiency * config.efficiency;
    let pairs = config.pairs_per_bin;
    let grid = interferogram.grid;
    let drawn = exec::map_indexed(interferogram.values.len(), |n| {
        let raw = eta2 * interferogram.values[n] + config.dark_rate;
        let p = raw.clamp(0.0, 1.0);
        let count = if config.noiseless {
            (p * pairs as f64).round() as u64
        } else {
            let dist = Binomial::new(pairs, p).expect("p clamped to [0, 1]");
            dist.sample(&mut bin_rng(config.seed, n as u64))
        };
        (CountRecord::new(grid.value(n), count, pairs), raw > 1.0)
    });
    let mut clamped = false;
    let mut records = Vec::with_capacity(drawn.len());
    for (record, over) in drawn {
        records.push(record?);
        clamped |= over;
    }
    Ok(CountSample { records, clamped })
}

/// `P̂ = (coincidences/pairs − dark_rate)/η²` clamped to `[0, 1]`, and
/// `Ĝ = 2P̂ − 1`.
pub fn estimate_trace(records: &[CountRecord], efficiency: f64, dark_rate: f64) -> Result<CorrelationTrace> {
    if !(efficiency > 0.0 && efficiency <= 1.0) {
        return Err(Error::invalid(format!(
            "efficiency must lie in (0, 1], got {efficiency}"
        )));
    }
    let eta2 = efficiency * efficiency;
    let times: Vec<f64> = records.iter().map(|r| r.delay).collect();
    let values = records
        .iter()
        .map(|r| {
            let p = ((r.coincidences as f64 / r.pairs_sent as f64 - dark_rate) / eta2).clamp(0.0, 1.0);
            2.0 * p - 1.0
        })
        .collect();
    CorrelationTrace::from_samples(&times, values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub n_trials: u64,
    pub std_height: f64,
    pub std_center: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingStudy {
    pub rows: Vec<ScalingRow>,
    /// Fitted power-law exponent of `std_height` against `n_trials`.
    pub height_exponent: Option<f64>,
    pub center_exponent: Option<f64>,
}

/// Recommended lower bound on repeats for a meaningful standard deviation.
pub const MIN_REPEATS: usize = 20;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one repeat of one trial count, derived from the study seed.
pub fn repeat_seed(seed: u64, n_trials: u64, repeat: u64) -> u64 {
    splitmix64(seed ^ splitmix64(n_trials ^ splitmix64(repeat)))
}

/// Height and center of the strongest positive-frequency feature, refined
/// by a 3-point parabola.
pub fn dominant_peak(spectrum: &SumFrequencySpectrum) -> (f64, f64) {
    let w = spectrum.weights();
    let mut k = 1;
    for j in 1..w.len() {
        if w[j] > w[k] {
            k = j;
        }
    }
    let grid = spectrum.grid();
    if k == 0 || k + 1 >= w.len() {
        return (w[k], grid.value(k));
    }
    let (offset, height) = parabolic_vertex(w[k - 1], w[k], w[k + 1]);
    (height, grid.value(k) + offset * grid.step())
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    // shifted by the first sample so identical inputs give exactly zero
    let d: Vec<f64> = xs.iter().map(|x| x - xs[0]).collect();
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    let var = d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (d.len() - 1) as f64;
    var.sqrt()
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// points or any non-positive `y`.
pub fn power_law_exponent(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return None;
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Runs count → estimate → recover → fold `repeats` times per trial count
/// and reports the spread of the recovered peak height and center.
pub fn error_scaling_study(
    spectrum: &SumFrequencySpectrum,
    grid: &TimeGrid,
    trial_counts: &[u64],
    repeats: usize,
    config: &NoiseConfig,
) -> Result<ScalingStudy> {
    config.validate()?;
    if trial_counts.is_empty() {
        return Err(Error::invalid("no trial counts given"));
    }
    if repeats < 2 {
        return Err(Error::invalid("at least 2 repeats are needed for a standard deviation"));
    }
    let interferogram = simulate_interferogram(spectrum, grid)?;

    let jobs = trial_counts.len() * repeats;
    let peaks = exec::map_indexed(jobs, |job| -> Result<(f64, f64)> {
        let n_trials = trial_counts[job / repeats];
        let cfg = NoiseConfig {
            pairs_per_bin: n_trials,
            seed: repeat_seed(config.seed, n_trials, (job % repeats) as u64),
            ..*config
        };
        let counts = sample_counts(&interferogram, &cfg)?;
        let trace = estimate_trace(&counts.records, cfg.efficiency, cfg.dark_rate)?;
        let folded = fold_one_sided(&fourier_recover(&trace))?;
        Ok(dominant_peak(&folded))
    });
    let peaks = peaks.into_iter().collect::<Result<Vec<_>>>()?;

    let rows: Vec<ScalingRow> = trial_counts
        .iter()
        .zip(peaks.chunks(repeats))
        .map(|(n, chunk)| {
            let heights: Vec<f64> = chunk.iter().map(|p| p.0).collect();
            let centers: Vec<f64> = chunk.iter().map(|p| p.1).collect();
            ScalingRow {
                n_trials: *n,
                std_height: sample_std(&heights),
                std_center: sample_std(&centers),
            }
        })
        .collect();
    let fit = |f: fn(&ScalingRow) -> f64| {
        power_law_exponent(&rows.iter().map(|r| (r.n_trials as f64, f(r))).collect::<Vec<_>>())
    };
    Ok(ScalingStudy {
        height_exponent: fit(|r| r.std_height),
        center_exponent: fit(|r| r.std_center),
        rows,
    })
}
