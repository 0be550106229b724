//! Time-domain simulation of the full circulator: two flux-modulated lattice
//! switches joined by two matched delay lines.
//!
//! Switch A carries external ports 1 and 3 on its nodes 1 and 3; switch B
//! carries ports 2 and 4 on its nodes 2 and 4. Lines join A2 to B1 and A4 to
//! B3. Every node is terminated in `z0`, either by a port or by a line, and a
//! line is a pair of sample-delay buffers carrying travelling-wave amplitudes
//! in √W. Because the delay is at least one sample, the two switches are
//! solved independently at each step.
//!
//! Each switch is advanced with the trapezoidal rule. Arms are arrays of
//! tunable inductors whose flux follows the drive: the through arms (1–2,
//! 3–4) see `π/2 − Φe(t)` and the crossed arms see `Φe(t)`, so `Φe = π/2`
//! puts the switch in its through state.

mod analysis;
mod circuit;

use std::collections::VecDeque;
use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use analysis::{
    energy_balance, extract_sparams, output_spectrum, ripple_fsr, settling_change, write_sparams_csv,
    write_spectrum_csv, SParamRow, SpectrumRow, SETTLING_TOLERANCE,
};
pub use circuit::{CellMode, ElementLaw, TunableInductorArray};

use crate::error::{invalid, Error, Result};
use crate::waveform::{FluxDrive, FluxEvaluator, WaveformKind};
use circuit::{solve_spd, SwitchModel};

/// One lattice switch built from tunable-inductor arrays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchCircuit {
    pub array: TunableInductorArray,
    /// Capacitance from every node to ground (F).
    pub node_capacitance: f64,
}

impl Default for SwitchCircuit {
    fn default() -> Self {
        Self {
            array: TunableInductorArray::default(),
            node_capacitance: DEFAULT_NODE_CAPACITANCE,
        }
    }
}

/// Node capacitance of the default switch, chosen for the best worst-case
/// through-state return loss of the default arrays over the signal band.
pub const DEFAULT_NODE_CAPACITANCE: f64 = 300e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bias {
    Modulated(FluxDrive),
    /// Fixed through-arm flux `b`; the crossed arms sit at `π/2 − b`.
    Static(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToneDrive {
    pub port: usize,
    pub frequency_hz: f64,
    /// Incident wave amplitude (√W).
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransientConfig {
    pub sample_rate: f64,
    /// Modulation rate defining periods and windows (rad/s).
    pub omega_mod: f64,
    pub settle_periods: u32,
    /// Length `W` of each of the two measurement blocks, in periods.
    pub window_periods: u32,
    pub tone: ToneDrive,
    pub tau: f64,
    pub z0: f64,
    pub switches: [SwitchCircuit; 2],
    pub biases: [Bias; 2],
    pub law: ElementLaw,
    pub cells: CellMode,
}

impl TransientConfig {
    /// Both switches driven by band-limited square waves at 80 MHz, the
    /// second one a quarter period late, for 1→2→3→4 circulation.
    pub fn reference(kind: WaveformKind) -> Self {
        let omega_mod = 2.0 * PI * 80e6;
        let drive = |phase| Bias::Modulated(FluxDrive {
            omega_mod,
            phase,
            harmonics: 25,
            kind,
            amplitude: FRAC_PI_2,
        });
        Self {
            sample_rate: 163.84e9,
            omega_mod,
            settle_periods: 64,
            window_periods: 4,
            tone: ToneDrive {
                port: 1,
                frequency_hz: 6e9,
                amplitude: 1e-3,
            },
            tau: FRAC_PI_2 / omega_mod,
            z0: 50.0,
            switches: [SwitchCircuit::default(); 2],
            biases: [drive(0.0), drive(-FRAC_PI_2)],
            law: ElementLaw::Flux,
            cells: CellMode::Collapsed,
        }
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega_mod
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    fn samples_per(&self, seconds: f64, what: &str) -> Result<usize> {
        let n = seconds * self.sample_rate;
        let r = n.round();
        if r < 1.0 || (n - r).abs() > 1e-6 * r.max(1.0) {
            return Err(invalid(
                "sample_rate",
                format!("{what} of {seconds:.6e} s is {n:.6} samples, not an integer"),
            ));
        }
        Ok(r as usize)
    }

    /// `(delay, period)` in samples.
    pub fn grid(&self) -> Result<(usize, usize)> {
        Ok((
            self.samples_per(self.tau, "delay")?,
            self.samples_per(self.period(), "modulation period")?,
        ))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate > 0.0 && self.omega_mod > 0.0 && self.tau > 0.0 && self.z0 > 0.0) {
            return Err(invalid("sample_rate", "rates, delay and impedance must be positive"));
        }
        if self.window_periods == 0 {
            return Err(invalid("window_periods", "need at least one period"));
        }
        if !(1..=4).contains(&self.tone.port) {
            return Err(invalid("tone.port", "must be 1..=4"));
        }
        if !(self.tone.frequency_hz > 0.0 && self.tone.amplitude.is_finite()) {
            return Err(invalid("tone", "frequency must be positive, amplitude finite"));
        }
        if self.tone.frequency_hz >= 0.5 * self.sample_rate {
            return Err(invalid("tone.frequency_hz", "must lie below the Nyquist frequency"));
        }
        self.grid()?;
        let f_mod = self.omega_mod / (2.0 * PI);
        let cycles = self.tone.frequency_hz * f64::from(self.window_periods) / f_mod;
        if (cycles - cycles.round()).abs() > 1e-6 {
            return Err(Error::WindowMismatch(format!(
                "tone at {} Hz is not periodic over {} modulation periods; use a multiple of {} Hz",
                self.tone.frequency_hz,
                self.window_periods,
                f_mod / f64::from(self.window_periods)
            )));
        }
        for (i, sw) in self.switches.iter().enumerate() {
            sw.array.validate()?;
            if !(sw.node_capacitance >= 0.0) {
                return Err(invalid("node_capacitance", "must be non-negative"));
            }
            let f_res = crossed_resonance(sw);
            if f_res.is_finite() && self.sample_rate < 8.0 * f_res {
                return Err(invalid(
                    "sample_rate",
                    format!(
                        "switch {}: {:.3e} Hz gives fewer than 8 samples per period of the \
                         {:.3e} Hz arm resonance",
                        i + 1,
                        self.sample_rate,
                        f_res
                    ),
                ));
            }
        }
        for b in &self.biases {
            match b {
                Bias::Modulated(d) => d.validate()?,
                Bias::Static(v) if !v.is_finite() => {
                    return Err(invalid("bias", "static bias must be finite"))
                }
                Bias::Static(_) => {}
            }
        }
        Ok(())
    }
}

/// Self-resonance of an arm in its high-inductance state (Hz).
pub fn crossed_resonance(sw: &SwitchCircuit) -> f64 {
    let a = &sw.array;
    let l = a.total_inductance(FRAC_PI_2);
    let c = a.cj / f64::from(a.n_cells);
    1.0 / (2.0 * PI * (l * c).sqrt())
}

/// Port records over the measurement span (two blocks of `W` periods).
#[derive(Debug, Clone)]
pub struct TransientResult {
    pub sample_rate: f64,
    pub omega_mod: f64,
    /// Start time of the measurement span (s).
    pub t_start: f64,
    pub window_periods: u32,
    pub tone: ToneDrive,
    /// Incident waves at ports 1..4.
    pub incident: [Vec<f64>; 4],
    /// Outgoing waves at ports 1..4.
    pub outgoing: [Vec<f64>; 4],
    /// Energy stored in the switches at the start and end of the span (J).
    pub stored_energy: [f64; 2],
}

impl TransientResult {
    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn samples(&self) -> usize {
        self.outgoing[0].len()
    }
}

enum BiasEval {
    Modulated(FluxEvaluator),
    Static(f64),
}

impl BiasEval {
    fn new(b: &Bias) -> Self {
        match b {
            Bias::Modulated(d) => Self::Modulated(d.evaluator()),
            Bias::Static(v) => Self::Static(*v),
        }
    }

    /// `(through, crossed)` arm flux at `t`.
    fn flux(&self, t: f64) -> (f64, f64) {
        match self {
            Self::Modulated(e) => {
                let phi = e.flux(t);
                (FRAC_PI_2 - phi, phi)
            }
            Self::Static(b) => (*b, FRAC_PI_2 - b),
        }
    }
}

struct DelayLine {
    buf: VecDeque<f64>,
}

impl DelayLine {
    fn new(samples: usize) -> Self {
        Self {
            buf: std::iter::repeat_n(0.0, samples).collect(),
        }
    }

    fn front(&self) -> f64 {
        self.buf[0]
    }

    fn advance(&mut self, v: f64) {
        self.buf.pop_front();
        self.buf.push_back(v);
    }
}

/// Integrates the network and returns port records over the last
/// `2·window_periods` periods.
pub fn run_transient(config: &TransientConfig) -> Result<TransientResult> {
    config.validate()?;
    let (delay, per_period) = config.grid()?;
    let h = config.dt();
    let settle = config.settle_periods as usize * per_period;
    let measure = 2 * config.window_periods as usize * per_period;
    let total = settle + measure;

    let mut sw: Vec<SwitchModel> = config
        .switches
        .iter()
        .map(|s| SwitchModel::new(s.array, s.node_capacitance, config.z0, config.law, config.cells))
        .collect();
    let biases: Vec<BiasEval> = config.biases.iter().map(BiasEval::new).collect();
    // Lines: A2→B1, B1→A2, A4→B3, B3→A4.
    let mut lines: Vec<DelayLine> = (0..4).map(|_| DelayLine::new(delay)).collect();

    let tone = config.tone;
    let w = 2.0 * PI * tone.frequency_hz;
    let limit = 1e6 * tone.amplitude.abs().max(f64::MIN_POSITIVE) * config.z0.sqrt();

    let mut incident: [Vec<f64>; 4] = Default::default();
    let mut outgoing: [Vec<f64>; 4] = Default::default();
    for v in incident.iter_mut().chain(outgoing.iter_mut()) {
        v.reserve(measure);
    }
    let mut stored = [0.0; 2];

    for n in 1..=total {
        let t = n as f64 * h;
        let mut ext = [0.0; 4];
        ext[tone.port - 1] = tone.amplitude * (w * t).cos();

        let a_a = [ext[0], lines[1].front(), ext[2], lines[3].front()];
        let a_b = [lines[0].front(), ext[1], lines[2].front(), ext[3]];

        let mut outs = [[0.0; 4]; 2];
        for (k, a) in [a_a, a_b].iter().enumerate() {
            let stamp = sw[k].stamp(h, biases[k].flux(t), a);
            let v = solve_spd(&stamp).ok_or(Error::Singular {
                frequency_hz: 0.0,
                condition: f64::INFINITY,
            })?;
            outs[k] = sw[k].commit(h, &v, a);
            let mag = sw[k].magnitude();
            if !(mag <= limit) {
                return Err(Error::Unstable {
                    time_s: t,
                    magnitude: mag,
                });
            }
        }
        let [b_a, b_b] = outs;
        lines[0].advance(b_a[1]);
        lines[1].advance(b_b[0]);
        lines[2].advance(b_a[3]);
        lines[3].advance(b_b[2]);

        if n == settle {
            stored[0] = sw.iter().map(|s| s.stored_energy()).sum();
        }
        if n > settle {
            let b_ext = [b_a[0], b_b[1], b_a[2], b_b[3]];
            for p in 0..4 {
                incident[p].push(ext[p]);
                outgoing[p].push(b_ext[p]);
            }
        }
    }
    stored[1] = sw.iter().map(|s| s.stored_energy()).sum();

    Ok(TransientResult {
        sample_rate: config.sample_rate,
        omega_mod: config.omega_mod,
        t_start: (settle + 1) as f64 * h,
        window_periods: config.window_periods,
        tone,
        incident,
        outgoing,
        stored_energy: stored,
    })
}

/// Runs one simulation per tone frequency in parallel and reduces each to its
/// first-column S-parameters.
pub fn sweep_sparams(config: &TransientConfig, frequencies_hz: &[f64]) -> Result<Vec<SParamRow>> {
    frequencies_hz
        .par_iter()
        .map(|&f| {
            let mut c = *config;
            c.tone.frequency_hz = f;
            let r = run_transient(&c)?;
            Ok(extract_sparams(std::slice::from_ref(&r))?.remove(0))
        })
        .collect()
}

/// Tone grid `[f_lo, f_hi]` in steps of `step`, snapped to multiples of `step`.
pub fn tone_grid(f_lo: f64, f_hi: f64, step: f64) -> Vec<f64> {
    let k0 = (f_lo / step).ceil() as i64;
    let k1 = (f_hi / step + 1e-9).floor() as i64;
    (k0..=k1).map(|k| k as f64 * step).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_config_is_commensurate() {
        let c = TransientConfig::reference(WaveformKind::FourierTruncated);
        c.validate().unwrap();
        assert_eq!(c.grid().unwrap(), (512, 2048));
        assert!((c.tau - 3.125e-9).abs() < 1e-20);
    }

    #[test]
    fn incommensurate_tone_rejected() {
        let mut c = TransientConfig::reference(WaveformKind::FourierTruncated);
        c.tone.frequency_hz = 6.005e9;
        assert!(matches!(c.validate(), Err(Error::WindowMismatch(_))));
    }

    #[test]
    fn incommensurate_delay_rejected() {
        let mut c = TransientConfig::reference(WaveformKind::FourierTruncated);
        c.tau *= 1.0001;
        assert!(c.validate().is_err());
    }

    #[test]
    fn zero_drive_gives_zero_output() {
        let mut c = TransientConfig::reference(WaveformKind::FourierTruncated);
        c.tone.amplitude = 0.0;
        c.settle_periods = 1;
        c.window_periods = 1;
        c.tone.frequency_hz = 6e9;
        let r = run_transient(&c).unwrap();
        assert!(r.outgoing.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn tone_grid_snaps() {
        let g = tone_grid(4e9, 4.1e9, 20e6);
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], 4e9);
    }
}
