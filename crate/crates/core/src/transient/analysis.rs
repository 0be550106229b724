//! Reductions of transient port records: S-parameters, spectra, energy.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use super::TransientResult;
use crate::consts::{amplitude_db, power_db};
use crate::error::{invalid, Result};
use crate::spectral::{bin_powers, check_window, tone_phasor};

/// Largest relative RMS change between the two measurement blocks accepted
/// as steady state.
pub const SETTLING_TOLERANCE: f64 = 1e-4;

/// Relative change in RMS between the two `W`-period blocks, taken over the
/// outgoing waves and normalised by the largest block RMS.
pub fn settling_change(r: &TransientResult) -> f64 {
    let n = r.samples();
    let half = n / 2;
    let rms = |x: &[f64]| (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
    let mut scale = 0.0f64;
    let mut worst = 0.0f64;
    for out in &r.outgoing {
        let (a, b) = (rms(&out[..half]), rms(&out[half..]));
        scale = scale.max(a).max(b);
        worst = worst.max((a - b).abs());
    }
    if scale == 0.0 {
        0.0
    } else {
        worst / scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SParamRow {
    pub frequency_hz: f64,
    pub input_port: usize,
    /// `S_{i,in}` for outputs `i = 1..4` at the tone frequency.
    pub s: [Complex64; 4],
    pub settled: bool,
    pub settling_change: f64,
}

/// Coherent projection of each outgoing wave onto the tone, divided by the
/// projection of the incident wave. Runs that fail the settling test are
/// returned with `settled = false`.
pub fn extract_sparams(results: &[TransientResult]) -> Result<Vec<SParamRow>> {
    results
        .iter()
        .map(|r| {
            let w = 2.0 * PI * r.tone.frequency_hz;
            let dt = r.dt();
            check_window(r.samples(), dt, 2.0 * PI / r.omega_mod)?;
            let p = r.tone.port;
            let inc = tone_phasor(&r.incident[p - 1], r.t_start, dt, w);
            if inc.norm() == 0.0 {
                return Err(invalid("tone.amplitude", "zero incident wave"));
            }
            let mut s = [Complex64::new(0.0, 0.0); 4];
            for (i, out) in r.outgoing.iter().enumerate() {
                s[i] = tone_phasor(out, r.t_start, dt, w) / inc;
            }
            let change = settling_change(r);
            Ok(SParamRow {
                frequency_hz: r.tone.frequency_hz,
                input_port: p,
                s,
                settled: change < SETTLING_TOLERANCE,
                settling_change: change,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub frequency_hz: f64,
    /// Power in the bin relative to the incident tone power (dB).
    pub power_db: f64,
}

/// Periodogram of the outgoing wave at `port`, normalised to the incident
/// tone power `A²/2`. The record must span whole modulation periods.
pub fn output_spectrum(r: &TransientResult, port: usize) -> Result<Vec<SpectrumRow>> {
    if !(1..=4).contains(&port) {
        return Err(invalid("port", "must be 1..=4"));
    }
    let n = r.samples();
    check_window(n, r.dt(), 2.0 * PI / r.omega_mod)?;
    let p_inc = 0.5 * r.tone.amplitude * r.tone.amplitude;
    if p_inc == 0.0 {
        return Err(invalid("tone.amplitude", "zero incident power"));
    }
    let df = r.sample_rate / n as f64;
    Ok(bin_powers(&r.outgoing[port - 1])
        .into_iter()
        .enumerate()
        .map(|(k, p)| SpectrumRow {
            frequency_hz: k as f64 * df,
            power_db: power_db(p / p_inc),
        })
        .collect())
}

/// Mean incident and outgoing power summed over the four ports (W),
/// corrected by the change in stored energy over the span.
pub fn energy_balance(r: &TransientResult) -> (f64, f64) {
    let n = r.samples() as f64;
    let p_in: f64 = r.incident.iter().flatten().map(|a| a * a).sum::<f64>() / n;
    let p_out: f64 = r.outgoing.iter().flatten().map(|b| b * b).sum::<f64>() / n;
    let span = n * r.dt();
    (p_in, p_out + (r.stored_energy[1] - r.stored_energy[0]) / span)
}

/// Free spectral range (Hz) of the ripple in a uniformly sampled response:
/// the reciprocal of the dominant delay in the Fourier transform of the
/// mean-removed data, refined by zero padding.
pub fn ripple_fsr(frequencies_hz: &[f64], values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n < 8 || frequencies_hz.len() != n {
        return Err(invalid("ripple", "need at least eight uniformly spaced points"));
    }
    let step = frequencies_hz[1] - frequencies_hz[0];
    // Remove a linear trend so the slow roll-off does not dominate.
    let xm = (n - 1) as f64 / 2.0;
    let ym = values.iter().sum::<f64>() / n as f64;
    let sxy: f64 = values.iter().enumerate().map(|(i, y)| (i as f64 - xm) * (y - ym)).sum();
    let sxx: f64 = (0..n).map(|i| (i as f64 - xm).powi(2)).sum();
    let slope = sxy / sxx;
    let pad = 64 * n.next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); pad];
    for (i, y) in values.iter().enumerate() {
        // Hann taper against edge leakage.
        let win = 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos();
        buf[i] = Complex64::new((y - ym - slope * (i as f64 - xm)) * win, 0.0);
    }
    FftPlanner::new().plan_fft_forward(pad).process(&mut buf);
    // Skip delays shorter than two grid spans' worth of the record.
    let min_bin = 2 * pad / n;
    let (k, _) = buf[min_bin..pad / 2]
        .iter()
        .enumerate()
        .map(|(i, z)| (i + min_bin, z.norm()))
        .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    let delay = k as f64 / (pad as f64 * step);
    Ok(1.0 / delay)
}

pub fn write_sparams_csv<W: Write>(out: W, rows: &[SParamRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["frequency_hz".to_string()];
    let p = rows.first().map_or(1, |r| r.input_port);
    for i in 1..=4 {
        header.push(format!("s{i}{p}_db"));
        header.push(format!("s{i}{p}_rad"));
    }
    header.push("settled".into());
    header.push("settling_change".into());
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![format!("{:.3}", r.frequency_hz)];
        for z in &r.s {
            rec.push(format!("{:.6}", amplitude_db(z.norm())));
            rec.push(format!("{:.6}", z.arg()));
        }
        rec.push(r.settled.to_string());
        rec.push(format!("{:.3e}", r.settling_change));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_spectrum_csv<W: Write>(out: W, rows: &[SpectrumRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["frequency_hz", "power_db"])?;
    for r in rows {
        w.write_record([format!("{:.3}", r.frequency_hz), format!("{:.6}", r.power_db)])?;
    }
    w.flush()?;
    Ok(())
}
