//! Emission from a flux-driven dc-SQUID inserted in a transmission line.
//!
//! The SQUID (two junctions of critical currents `I0(1 ± a)`, shunt
//! capacitance `C`, loop inductance neglected) sits in a loop closed by the
//! load resistance `R`. A changing external flux induces an EMF
//! `ε = (Φ0/π)·dΦe/dt` around that loop. With the junction phase
//! `φ = (φ1 + φ2)/2` and `φ1 − φ2 = 2Φe` the circuit obeys
//!
//! ```text
//! C (Φ0/2π) φ̈ + (Φ0/2π) φ̇ / R + I_c(Φe) sin(φ + δ(Φe)) = ε / R
//! ```
//!
//! where `I_c sin(φ + δ) = I1 sin(φ + Φe) + I2 sin(φ − Φe)`. Half a flux
//! quantum of physical flux corresponds to `Φe = π/2`; the noise drives
//! swing the loop by a quarter quantum, `Φe: 0 ↔ π/4`. `R` is fixed by the
//! small-signal quality factor `Q = ω_p R C` at `Φe = 0`.

use std::f64::consts::{FRAC_PI_4, PI};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::consts::{FLUX_QUANTUM, HBAR};
use crate::error::{invalid, Result};
use crate::ode::{integrate, Tolerances};
use crate::spectral::{bin_frequency, bin_powers, check_window};
use crate::waveform::{FluxDrive, WaveformKind};

const PHI0_2PI: f64 = FLUX_QUANTUM / (2.0 * PI);

/// Flux swing of the noise drives, `Φ0/4` of physical flux.
pub const NOISE_FLUX_AMPLITUDE: f64 = FRAC_PI_4;

/// Square-wave flux drive with the noise-model swing.
pub fn noise_drive(omega_mod: f64, harmonics: u32, kind: WaveformKind) -> Result<FluxDrive> {
    let mut d = FluxDrive::new(omega_mod, 0.0, harmonics, kind)?;
    d.amplitude = NOISE_FLUX_AMPLITUDE;
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquidNoiseParams {
    pub asymmetry: f64,
    pub cj: f64,
    pub q_factor: f64,
    /// Line impedance, kept for reporting next to the calibrated `R`.
    pub z0: f64,
    pub i0_nominal: f64,
}

impl Default for SquidNoiseParams {
    fn default() -> Self {
        Self {
            asymmetry: 0.05,
            cj: 180e-15,
            q_factor: 3.5,
            z0: 50.0,
            i0_nominal: 9e-6,
        }
    }
}

impl SquidNoiseParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.asymmetry) {
            return Err(invalid("asymmetry", "must lie in [0, 1)"));
        }
        if !(self.q_factor > 0.0) {
            return Err(invalid("q_factor", "must be positive"));
        }
        if !(self.cj > 0.0 && self.z0 > 0.0 && self.i0_nominal > 0.0) {
            return Err(invalid("cj", "capacitance, impedance and critical current must be positive"));
        }
        Ok(())
    }

    /// Small-signal plasma frequency at `Φe = 0` (rad/s).
    pub fn plasma_omega(&self) -> f64 {
        (2.0 * self.i0_nominal / (PHI0_2PI * self.cj)).sqrt()
    }

    pub fn r_eff(&self) -> f64 {
        self.q_factor / (self.plasma_omega() * self.cj)
    }

    /// `(A, B)` with supercurrent `A sin φ + B cos φ`.
    fn supercurrent_coefficients(&self, phi_e: f64) -> (f64, f64) {
        let i0 = self.i0_nominal;
        (2.0 * i0 * phi_e.cos(), 2.0 * i0 * self.asymmetry * phi_e.sin())
    }

    /// Critical current and phase offset of the reduced single-junction form.
    pub fn reduced_junction(&self, phi_e: f64) -> (f64, f64) {
        let (a, b) = self.supercurrent_coefficients(phi_e);
        (a.hypot(b), b.atan2(a))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SupercurrentForm {
    /// `I_c(Φe) sin(φ + δ(Φe))`.
    Reduced,
    /// `I1 sin(φ + Φe) + I2 sin(φ − Φe)`, summed junction by junction.
    TwoJunction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseRunConfig {
    pub settle_periods: u32,
    pub window_periods: u32,
    /// Samples per drive period; `None` picks the smallest power of two that
    /// reaches 30 GS/s.
    pub samples_per_period: Option<usize>,
    pub rtol: f64,
    pub form: SupercurrentForm,
}

impl Default for NoiseRunConfig {
    fn default() -> Self {
        Self {
            settle_periods: 18,
            window_periods: 32,
            samples_per_period: None,
            rtol: 1e-8,
            form: SupercurrentForm::Reduced,
        }
    }
}

/// Minimum simulated length, in drive periods.
pub const MIN_PERIODS: u32 = 50;

/// Steady-state samples over the measurement window.
#[derive(Debug, Clone)]
pub struct LoadRecord {
    pub t0: f64,
    pub dt: f64,
    pub period: f64,
    pub r_eff: f64,
    /// Voltage across the load, `ε − V_junction`.
    pub load_voltage: Vec<f64>,
    pub emf: Vec<f64>,
    /// Power fed into the junctions by the moving flux at fixed phase,
    /// `∂E_J/∂Φe · dΦe/dt`.
    pub flux_power: Vec<f64>,
}

impl LoadRecord {
    /// Mean power delivered by the EMF, `⟨ε·I_R⟩`.
    pub fn source_power(&self) -> f64 {
        let r = self.r_eff;
        mean(self.emf.iter().zip(&self.load_voltage).map(|(e, v)| e * v / r))
    }

    /// Mean parametric power delivered through the flux dependence of the
    /// Josephson energy. In steady state `source + parametric = dissipated`.
    pub fn parametric_power(&self) -> f64 {
        mean(self.flux_power.iter().copied())
    }

    /// Mean power dissipated in the load, `⟨I_R² R⟩`.
    pub fn dissipated_power(&self) -> f64 {
        let r = self.r_eff;
        mean(self.load_voltage.iter().map(|v| v * v / r))
    }
}

fn mean(it: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = it.len() as f64;
    it.sum::<f64>() / n
}

fn samples_per_period(drive: &FluxDrive, cfg: &NoiseRunConfig) -> usize {
    cfg.samples_per_period.unwrap_or_else(|| {
        let f = drive.omega_mod / (2.0 * PI);
        ((30e9 / f).ceil() as usize).next_power_of_two()
    })
}

/// Integrates the driven SQUID and returns the load record over the last
/// `window_periods` drive periods.
pub fn integrate_squid(
    params: &SquidNoiseParams,
    drive: &FluxDrive,
    cfg: &NoiseRunConfig,
) -> Result<LoadRecord> {
    params.validate()?;
    drive.validate()?;
    if drive.kind == WaveformKind::IdealSquare {
        return Err(invalid(
            "drive",
            "the ideal square has an unbounded flux rate; use a band-limited waveform",
        ));
    }
    if cfg.settle_periods + cfg.window_periods < MIN_PERIODS || cfg.window_periods == 0 {
        return Err(invalid(
            "duration",
            format!("need a window and at least {MIN_PERIODS} drive periods in total"),
        ));
    }
    let spp = samples_per_period(drive, cfg);
    let period = drive.period();
    let dt = period / spp as f64;
    let t0 = cfg.settle_periods as f64 * period;
    let n = spp * cfg.window_periods as usize;
    let times: Vec<f64> = (0..n).map(|i| t0 + dt * i as f64).collect();

    let r = params.r_eff();
    let c = params.cj;
    let eval = drive.evaluator();
    let p = *params;
    let form = cfg.form;
    let (i1, i2) = (p.i0_nominal * (1.0 + p.asymmetry), p.i0_nominal * (1.0 - p.asymmetry));
    // State: phase φ and junction voltage V = (Φ0/2π) φ̇.
    let ev = eval.clone();
    let rhs = move |t: f64, y: &[f64; 2]| {
        let (phi_e, rate) = ev.flux_and_rate(t);
        let emf = 2.0 * PHI0_2PI * rate;
        let is = match form {
            SupercurrentForm::Reduced => {
                let (ic, delta) = p.reduced_junction(phi_e);
                ic * (y[0] + delta).sin()
            }
            SupercurrentForm::TwoJunction => {
                i1 * (y[0] + phi_e).sin() + i2 * (y[0] - phi_e).sin()
            }
        };
        [y[1] / PHI0_2PI, ((emf - y[1]) / r - is) / c]
    };

    let (_, delta0) = params.reduced_junction(drive.flux(0.0));
    let tol = Tolerances {
        rtol: cfg.rtol,
        atol: cfg.rtol * 1e-6,
        ..Tolerances::default()
    };
    let states = integrate(rhs, 0.0, [-delta0, 0.0], &times, &tol)?;

    let mut load_voltage = Vec::with_capacity(n);
    let mut emf = Vec::with_capacity(n);
    let mut flux_power = Vec::with_capacity(n);
    for (t, y) in times.iter().zip(&states) {
        let (phi_e, rate) = eval.flux_and_rate(*t);
        let e = 2.0 * PHI0_2PI * rate;
        emf.push(e);
        load_voltage.push(e - y[1]);
        let de = PHI0_2PI * (i1 * (y[0] + phi_e).sin() - i2 * (y[0] - phi_e).sin());
        flux_power.push(de * rate);
    }
    Ok(LoadRecord {
        t0,
        dt,
        period,
        r_eff: r,
        load_voltage,
        emf,
        flux_power,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupancySpectrum {
    pub frequency_hz: Vec<f64>,
    pub n_ss: Vec<f64>,
}

impl OccupancySpectrum {
    pub fn max(&self) -> f64 {
        self.n_ss.iter().copied().fold(0.0, f64::max)
    }
}

/// Power spectral density (W/Hz) of the load dissipation, one-sided.
pub fn load_psd(record: &LoadRecord) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = record.load_voltage.len();
    check_window(n, record.dt, record.period)?;
    let df = 1.0 / (n as f64 * record.dt);
    let p = bin_powers(&record.load_voltage);
    let freqs = (0..p.len()).map(|k| bin_frequency(k, n, record.dt)).collect();
    let psd = p.iter().map(|v| v / record.r_eff / df).collect();
    Ok((freqs, psd))
}

/// Steady-state photon occupancy bound `p(f)/(ħω)` over `[f_lo, f_hi]`.
pub fn occupancy(record: &LoadRecord, f_lo: f64, f_hi: f64) -> Result<OccupancySpectrum> {
    if !(f_hi > f_lo && f_lo > 0.0) {
        return Err(invalid("f_grid", "need 0 < f_lo < f_hi"));
    }
    let (freqs, psd) = load_psd(record)?;
    let (frequency_hz, n_ss) = freqs
        .iter()
        .zip(&psd)
        .filter(|(f, _)| (f_lo..=f_hi).contains(*f))
        .map(|(&f, &p)| (f, p / (HBAR * 2.0 * PI * f)))
        .unzip();
    Ok(OccupancySpectrum { frequency_hz, n_ss })
}

/// Total load power in bins strictly above `f` (W).
pub fn power_above(record: &LoadRecord, f: f64) -> Result<f64> {
    let (freqs, psd) = load_psd(record)?;
    let df = freqs[1] - freqs[0];
    Ok(freqs
        .iter()
        .zip(&psd)
        .filter(|(fr, _)| **fr > f)
        .map(|(_, p)| p * df)
        .sum())
}

pub fn write_occupancy_csv<W: Write>(out: W, spec: &OccupancySpectrum) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["frequency_hz", "n_ss"])?;
    for (f, n) in spec.frequency_hz.iter().zip(&spec.n_ss) {
        w.write_record([format!("{f:.3}"), format!("{n:.9e}")])?;
    }
    w.flush()?;
    Ok(())
}
