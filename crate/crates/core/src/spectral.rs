//! Rectangular-window periodograms and coherent tone projection over windows
//! that span an exact number of periods.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Relative slack when checking that a window is a whole number of periods.
const COMMENSURATE_TOL: f64 = 1e-9;

/// Errors unless `samples·dt` is an integer multiple of `period`.
pub fn check_window(samples: usize, dt: f64, period: f64) -> Result<usize> {
    let cycles = samples as f64 * dt / period;
    let n = cycles.round();
    if n < 1.0 || (cycles - n).abs() > COMMENSURATE_TOL * cycles.max(1.0) {
        return Err(Error::WindowMismatch(format!(
            "{samples} samples at dt = {dt:.6e} s span {cycles:.9} periods of {period:.6e} s"
        )));
    }
    Ok(n as usize)
}

/// Complex amplitude `A` of `x(t) ≈ Re(A e^{jωt})` with `t = t0 + i·dt`.
pub fn tone_phasor(x: &[f64], t0: f64, dt: f64, omega: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    // Rotate incrementally, renormalising now and then to stop drift.
    let step = Complex64::from_polar(1.0, -omega * dt);
    let mut rot = Complex64::from_polar(1.0, -omega * t0);
    for (i, &v) in x.iter().enumerate() {
        if i % 1024 == 0 {
            rot = Complex64::from_polar(1.0, -omega * (t0 + dt * i as f64));
        }
        acc += v * rot;
        rot *= step;
    }
    acc * (2.0 / x.len() as f64)
}

/// One-sided amplitude spectrum: bin `k` holds `2·X_k/N` (`X_0/N` for dc),
/// the complex amplitude of the component at `k/(N·dt)`.
pub fn amplitude_spectrum(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2 + 1;
    buf.truncate(half);
    for (k, z) in buf.iter_mut().enumerate() {
        let scale = if k == 0 || (n.is_multiple_of(2) && k == n / 2) { 1.0 } else { 2.0 };
        *z *= scale / n as f64;
    }
    buf
}

/// Mean power of each one-sided bin, `|A_k|²/2`, with the dc bin `|A_0|²`.
pub fn bin_powers(x: &[f64]) -> Vec<f64> {
    amplitude_spectrum(x)
        .iter()
        .enumerate()
        .map(|(k, z)| if k == 0 { z.norm_sqr() } else { 0.5 * z.norm_sqr() })
        .collect()
}

pub fn bin_frequency(k: usize, samples: usize, dt: f64) -> f64 {
    k as f64 / (samples as f64 * dt)
}

pub fn angular(f: f64) -> f64 {
    2.0 * PI * f
}
