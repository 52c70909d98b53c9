//! Forward simulation and spectral recovery for N00N-state interferometric
//! two-photon excitation spectroscopy.
//!
//! The pipeline runs
//!
//! 1. a pump or SPDC joint spectral intensity ([`spectral_model`]),
//! 2. through a two-photon absorbing sample ([`absorption`]),
//! 3. into a N00N-state interferometer that records `P(t)` and `G(t)`
//!    ([`interferometer`]), optionally with finite counting statistics
//!    ([`noise_montecarlo`]),
//! 4. and back to the sum-frequency spectrum by Fourier transform of
//!    `G(t)` ([`recovery`]).
//!
//! Frequencies are ordinary frequencies in THz, delays in ps.

pub mod absorption;
pub mod cli;
pub mod error;
pub mod exec;
pub mod interferometer;
pub mod io;
pub mod noise_montecarlo;
pub mod recovery;
pub mod spectral_model;
mod transform;

pub use absorption::{
    excitation_probabilities, fractional_absorption, recover_absorption_spectrum, transmission_profile,
    transmitted_spectrum, AbsorptionLine, Sample, Transmission, Transmitted,
};
pub use error::{Error, Result};
pub use interferometer::{
    correlation_trace, correlation_trace_with, dominant_oscillation_frequency, envelope_coherence_time,
    simulate_interferogram, CorrelationTrace, Interferogram, SignConvention, TimeGrid,
};
pub use noise_montecarlo::{
    error_scaling_study, estimate_trace, sample_counts, CountRecord, NoiseConfig, ScalingRow, ScalingStudy,
};
pub use recovery::{
    detect_features, fold_one_sided, fourier_recover, fourier_recover_with, resolution_limit, spectrum_distance,
    Feature, FeatureKind, PeakReport, RecoveredSpectrum, RecoveryOptions, SpectrumDistance, Window,
};
pub use spectral_model::{
    comb_pump_spectrum, gaussian_jsi, gaussian_pump_spectrum, make_frequency_grid, sum_frequency_marginal, CombLine,
    FrequencyGrid, JointSpectralIntensity, SumFrequencySpectrum,
};
