//! Square-wave flux drives.
//!
//! A drive toggles the dimensionless flux `Φe` between 0 and `amplitude`
//! (π/2 by default, the fully crossed bias of the tunable inductor):
//!
//! ```text
//! Φe(t) = A/2 + (A/2)·h(Ωt + φ)
//! ```
//!
//! where `h` is either the exact sign of `sin`, its odd-harmonic Fourier
//! series truncated at harmonic order `K`, or the same series with Lanczos
//! sigma factors `sinc(n / (K + 1))`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WaveformKind {
    IdealSquare,
    FourierTruncated,
    SigmaApproximated,
}

/// Normalised sinc, `sin(πx) / (πx)`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Weight applied to odd harmonic `n` of a square wave whose highest retained
/// harmonic is `k_max`. Zero for even `n` and for `|n| > k_max`.
pub fn harmonic_weight(kind: WaveformKind, n: i64, k_max: Option<u32>) -> f64 {
    if n % 2 == 0 {
        return 0.0;
    }
    let k = match k_max {
        None => return 1.0,
        Some(k) => k as i64,
    };
    if n.abs() > k {
        return 0.0;
    }
    match kind {
        WaveformKind::SigmaApproximated => sinc(n as f64 / (k + 1) as f64),
        _ => 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxDrive {
    pub omega_mod: f64,
    pub phase: f64,
    /// Highest retained odd harmonic; ignored for [`WaveformKind::IdealSquare`].
    pub harmonics: u32,
    pub kind: WaveformKind,
    pub amplitude: f64,
}

impl FluxDrive {
    pub fn new(omega_mod: f64, phase: f64, harmonics: u32, kind: WaveformKind) -> Result<Self> {
        let d = Self {
            omega_mod,
            phase,
            harmonics,
            kind,
            amplitude: FRAC_PI_2,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_mod > 0.0 && self.omega_mod.is_finite()) {
            return Err(invalid("omega_mod", "must be positive and finite"));
        }
        if !self.phase.is_finite() || !self.amplitude.is_finite() {
            return Err(invalid("phase", "phase and amplitude must be finite"));
        }
        if self.kind != WaveformKind::IdealSquare && self.harmonics.is_multiple_of(2) {
            return Err(invalid(
                "harmonics",
                format!("highest harmonic must be odd, got {}", self.harmonics),
            ));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega_mod
    }

    fn cutoff(&self) -> Option<u32> {
        match self.kind {
            WaveformKind::IdealSquare => None,
            _ => Some(self.harmonics),
        }
    }

    /// Normalised switching function `h`, in `[-1, 1]` for the ideal square.
    pub fn switching(&self, t: f64) -> f64 {
        let x = self.omega_mod * t + self.phase;
        match self.kind {
            WaveformKind::IdealSquare => {
                // High on the half-open first half cycle; edges that land on a
                // sample within rounding are snapped onto it.
                let mut u = (x / (2.0 * PI)).rem_euclid(1.0);
                if (u - u.round()).abs() < 1e-9 {
                    u = 0.0;
                } else if (u - 0.5).abs() < 1e-9 {
                    u = 0.5;
                }
                if u < 0.5 {
                    1.0
                } else {
                    -1.0
                }
            }
            _ => {
                let mut acc = 0.0;
                for n in (1..=self.harmonics as i64).step_by(2) {
                    let w = harmonic_weight(self.kind, n, self.cutoff());
                    acc += w * (n as f64 * x).sin() / n as f64;
                }
                4.0 / PI * acc
            }
        }
    }

    /// Time derivative of the switching function. Zero almost everywhere for
    /// the ideal square.
    pub fn switching_rate(&self, t: f64) -> f64 {
        let x = self.omega_mod * t + self.phase;
        match self.kind {
            WaveformKind::IdealSquare => 0.0,
            _ => {
                let mut acc = 0.0;
                for n in (1..=self.harmonics as i64).step_by(2) {
                    let w = harmonic_weight(self.kind, n, self.cutoff());
                    acc += w * (n as f64 * x).cos();
                }
                4.0 / PI * self.omega_mod * acc
            }
        }
    }

    /// Evaluator with the harmonic weights tabulated.
    pub fn evaluator(&self) -> FluxEvaluator {
        let weights = match self.kind {
            WaveformKind::IdealSquare => Vec::new(),
            _ => (1..=self.harmonics as i64)
                .step_by(2)
                .map(|n| 4.0 / PI * harmonic_weight(self.kind, n, self.cutoff()))
                .collect(),
        };
        FluxEvaluator {
            drive: *self,
            weights,
        }
    }

    pub fn flux(&self, t: f64) -> f64 {
        0.5 * self.amplitude * (1.0 + self.switching(t))
    }

    pub fn flux_rate(&self, t: f64) -> f64 {
        0.5 * self.amplitude * self.switching_rate(t)
    }
}

/// Fast repeated evaluation of a [`FluxDrive`].
#[derive(Debug, Clone)]
pub struct FluxEvaluator {
    drive: FluxDrive,
    /// `(4/π)·w_n` for odd `n = 1, 3, …`.
    weights: Vec<f64>,
}

impl FluxEvaluator {
    /// `(Φe, dΦe/dt)`, summing the harmonics with a rotating phasor.
    pub fn flux_and_rate(&self, t: f64) -> (f64, f64) {
        let d = &self.drive;
        if d.kind == WaveformKind::IdealSquare {
            return (d.flux(t), 0.0);
        }
        let x = d.omega_mod * t + d.phase;
        let base = Complex64::from_polar(1.0, x);
        let step = base * base;
        let mut z = base;
        let (mut s, mut c) = (0.0, 0.0);
        for (i, &w) in self.weights.iter().enumerate() {
            s += w * z.im / (2 * i + 1) as f64;
            c += w * z.re;
            z *= step;
        }
        let half = 0.5 * d.amplitude;
        (half * (1.0 + s), half * d.omega_mod * c)
    }

    pub fn flux(&self, t: f64) -> f64 {
        self.flux_and_rate(t).0
    }
}

/// Samples `Φe` on a uniform grid `t0 + i·dt`.
pub fn build_flux_waveform(drive: &FluxDrive, t0: f64, dt: f64, samples: usize) -> Result<Vec<f64>> {
    drive.validate()?;
    if !(dt > 0.0) {
        return Err(invalid("dt", "time step must be positive"));
    }
    let e = drive.evaluator();
    Ok((0..samples).map(|i| e.flux(t0 + dt * i as f64)).collect())
}
