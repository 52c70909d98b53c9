//! DFT helpers shared by the interferometer and recovery modules.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;

/// `exp(i·2π·cycles)`, with the integer part of `cycles` removed first so
/// that large `ν·t` products keep full phase accuracy.
#[inline]
pub(crate) fn cis_cycles(cycles: f64) -> Complex64 {
    let frac = cycles - cycles.round();
    let (s, c) = (TAU * frac).sin_cos();
    Complex64::new(c, s)
}

/// `cos(2π·cycles)` with the same range reduction as [`cis_cycles`].
#[inline]
pub(crate) fn cos_cycles(cycles: f64) -> f64 {
    (TAU * (cycles - cycles.round())).cos()
}

/// Lowest bin index of an `n`-point transform ordered from negative to
/// positive frequencies.
#[inline]
pub(crate) fn lowest_bin(n: usize) -> i64 {
    -((n / 2) as i64)
}

/// DTFT `dt·Σ x_n exp(+i2π ν_k t_n)` at `ν_k = k/(n·dt)` for
/// `k = lowest_bin(n) .. lowest_bin(n) + n`, with `t_n = t0 + n·dt`.
pub(crate) fn centered_transform(samples: &[Complex64], t0: f64, dt: f64) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let k_min = lowest_bin(n);
    let origin = t0 / (n as f64 * dt);
    (0..n)
        .map(|j| {
            let k = k_min + j as i64;
            let raw = buf[k.rem_euclid(n as i64) as usize];
            raw * cis_cycles(k as f64 * origin) * dt
        })
        .collect()
}

/// Analytic signal of a real sequence: negative frequencies removed,
/// positive ones doubled.
pub(crate) fn analytic_signal(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex64> = x.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    for (k, c) in buf.iter_mut().enumerate() {
        let gain = if k == 0 || (n.is_multiple_of(2) && k == half) {
            1.0
        } else if k < n.div_ceil(2) {
            2.0
        } else {
            0.0
        };
        *c *= gain / n as f64;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf
}
