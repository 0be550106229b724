//! Run configurations. Every physical key carries its unit as a suffix and
//! unknown keys are rejected.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::path::PathBuf;

use modcirc::lattice::SwitchState;
use modcirc::transient::{CellMode, ElementLaw, DEFAULT_NODE_CAPACITANCE};
use modcirc::waveform::WaveformKind;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[value(rename_all = "PascalCase")]
pub enum Command {
    SwitchSweep,
    Floquet,
    FloquetSurface,
    Transient,
    Optimize,
    Noise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwitchSweepParams {
    pub l0_h: f64,
    pub epsilon: f64,
    pub c_f: f64,
    pub z0_ohm: f64,
    pub state: SwitchState,
    pub f_start_hz: f64,
    pub f_stop_hz: f64,
    pub points: usize,
}

impl Default for SwitchSweepParams {
    fn default() -> Self {
        Self {
            l0_h: 0.94e-9,
            epsilon: 2.5e-2,
            c_f: 270e-15,
            z0_ohm: 50.0,
            state: SwitchState::Crossed,
            f_start_hz: 2e9,
            f_stop_hz: 10e9,
            points: 801,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FloquetParams {
    pub omega_mod_hz: f64,
    pub theta_rad: f64,
    /// Highest odd harmonic; `null` is unbounded.
    pub k_max: Option<u32>,
    /// Defaults to the ideal square for unbounded `k_max`, else truncated.
    pub waveform: Option<WaveformKind>,
    /// Defaults to a quarter modulation period.
    pub tau_s: Option<f64>,
    pub beta: f64,
    pub tan_delta: f64,
    pub carrier_hz: f64,
    pub sidebands: Option<usize>,
    pub amend: bool,
    pub amendment_phase_rad: f64,
}

impl Default for FloquetParams {
    fn default() -> Self {
        Self {
            omega_mod_hz: 80e6,
            theta_rad: FRAC_PI_2,
            k_max: None,
            waveform: None,
            tau_s: None,
            beta: 0.0,
            tan_delta: 0.0,
            carrier_hz: 6e9,
            sidebands: None,
            amend: true,
            amendment_phase_rad: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FloquetSurfaceParams {
    pub omega_mod_hz: f64,
    pub theta_rad: f64,
    pub tau_s: Option<f64>,
    pub tan_delta: f64,
    pub betas: Vec<f64>,
    pub k_max_values: Vec<u32>,
    /// Waveform of the bandwidth surface.
    pub waveform: WaveformKind,
    pub f_start_hz: f64,
    pub f_stop_hz: f64,
    pub points: usize,
}

impl Default for FloquetSurfaceParams {
    fn default() -> Self {
        Self {
            omega_mod_hz: 80e6,
            theta_rad: FRAC_PI_2,
            tau_s: None,
            tan_delta: 0.0,
            betas: vec![0.0, 5e-5, 1e-4, 2e-4, 3e-4, 5e-4, 1e-3],
            k_max_values: vec![5, 9, 15, 25, 49, 99],
            waveform: WaveformKind::FourierTruncated,
            f_start_hz: 2e9,
            f_stop_hz: 10e9,
            points: 81,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransientParams {
    pub omega_mod_hz: f64,
    /// Defaults to a quarter modulation period.
    pub tau_s: Option<f64>,
    /// Defaults to 2048 samples per modulation period.
    pub sample_rate_hz: Option<f64>,
    pub settle_periods: u32,
    pub window_periods: u32,
    pub waveform: WaveformKind,
    pub harmonics: u32,
    pub drive_amplitude_rad: f64,
    pub phase_a_rad: f64,
    pub phase_b_rad: f64,
    pub z0_ohm: f64,
    pub n_cells: u32,
    pub l0_total_h: f64,
    pub epsilon: f64,
    pub lg_total_h: f64,
    pub cj_f: f64,
    pub node_capacitance_f: f64,
    pub element_law: ElementLaw,
    pub cells: CellMode,
    pub tone_port: usize,
    pub tone_amplitude_sqrt_w: f64,
    pub f_start_hz: f64,
    pub f_stop_hz: f64,
    pub f_step_hz: f64,
    pub spectrum_tone_hz: f64,
    pub spectrum_port: usize,
}

impl Default for TransientParams {
    fn default() -> Self {
        let a = modcirc::transient::TunableInductorArray::default();
        Self {
            omega_mod_hz: 80e6,
            tau_s: None,
            sample_rate_hz: None,
            settle_periods: 64,
            window_periods: 4,
            waveform: WaveformKind::FourierTruncated,
            harmonics: 25,
            drive_amplitude_rad: FRAC_PI_2,
            phase_a_rad: 0.0,
            phase_b_rad: -FRAC_PI_2,
            z0_ohm: 50.0,
            n_cells: a.n_cells,
            l0_total_h: a.l0_total,
            epsilon: a.epsilon,
            lg_total_h: a.lg_total,
            cj_f: a.cj,
            node_capacitance_f: DEFAULT_NODE_CAPACITANCE,
            element_law: ElementLaw::Flux,
            cells: CellMode::Collapsed,
            tone_port: 1,
            tone_amplitude_sqrt_w: 1e-3,
            f_start_hz: 4e9,
            f_stop_hz: 8.5e9,
            f_step_hz: 20e6,
            spectrum_tone_hz: 6e9,
            spectrum_port: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeParams {
    pub omega_mod_hz: f64,
    pub tan_delta: f64,
    pub dispersion_per_80mhz: f64,
    /// `null` is unbounded.
    pub modulation_bandwidth_hz: Option<f64>,
    pub pitch_m: f64,
    pub band_lo_hz: f64,
    pub band_hi_hz: f64,
    /// `null` uses two fifths of the vacuum speed of light.
    pub speed_m_per_s: Option<f64>,
    pub dielectric: modcirc::design::DielectricEvaluation,
    pub grid_lo_hz: f64,
    pub grid_hi_hz: f64,
    pub grid_points: usize,
    /// `null` sizes the junction by the plasma rule alone.
    pub critical_current_a: Option<f64>,
    pub target_inductance_h: f64,
    pub f_max_hz: f64,
    pub min_feature_m: f64,
    pub specific_capacitance_f_per_m2: f64,
}

impl Default for OptimizeParams {
    fn default() -> Self {
        let rule = modcirc::design::JunctionRule::default();
        Self {
            omega_mod_hz: 80e6,
            tan_delta: 1e-5,
            dispersion_per_80mhz: 3e-4,
            modulation_bandwidth_hz: Some(2e9),
            pitch_m: 60e-6,
            band_lo_hz: 4e9,
            band_hi_hz: 8e9,
            speed_m_per_s: None,
            dielectric: modcirc::design::DielectricEvaluation::BandTop,
            grid_lo_hz: 10e6,
            grid_hi_hz: 1e9,
            grid_points: 121,
            critical_current_a: rule.critical_current,
            target_inductance_h: 1e-9,
            f_max_hz: rule.f_max,
            min_feature_m: rule.min_feature,
            specific_capacitance_f_per_m2: rule.specific_capacitance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseScenario {
    pub name: String,
    pub omega_mod_hz: f64,
    pub harmonics: u32,
    pub waveform: WaveformKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseParams {
    pub asymmetry: f64,
    pub cj_f: f64,
    pub q_factor: f64,
    pub z0_ohm: f64,
    pub i0_a: f64,
    pub flux_amplitude_rad: f64,
    pub settle_periods: u32,
    pub window_periods: u32,
    pub rtol: f64,
    pub f_lo_hz: f64,
    pub f_hi_hz: f64,
    pub scenarios: Vec<NoiseScenario>,
}

impl Default for NoiseParams {
    fn default() -> Self {
        let p = modcirc::noise::SquidNoiseParams::default();
        let r = modcirc::noise::NoiseRunConfig::default();
        let sc = |name: &str, f: f64, k, waveform| NoiseScenario {
            name: name.into(),
            omega_mod_hz: f,
            harmonics: k,
            waveform,
        };
        Self {
            asymmetry: p.asymmetry,
            cj_f: p.cj,
            q_factor: p.q_factor,
            z0_ohm: p.z0,
            i0_a: p.i0_nominal,
            flux_amplitude_rad: FRAC_PI_4,
            settle_periods: r.settle_periods,
            window_periods: r.window_periods,
            rtol: r.rtol,
            f_lo_hz: 4e9,
            f_hi_hz: 8e9,
            scenarios: vec![
                sc("truncated_80mhz", 80e6, 25, WaveformKind::FourierTruncated),
                sc("sigma_80mhz", 80e6, 25, WaveformKind::SigmaApproximated),
                sc("sigma_15mhz", 15e6, 49, WaveformKind::SigmaApproximated),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    SwitchSweep(SwitchSweepParams),
    Floquet(FloquetParams),
    FloquetSurface(FloquetSurfaceParams),
    Transient(TransientParams),
    Optimize(OptimizeParams),
    Noise(NoiseParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: Params,
    pub output_dir: Option<PathBuf>,
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn parse_params<T: DeserializeOwned>(v: Value) -> Result<T, CliError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            config_error(e.into_inner().to_string())
        } else {
            config_error(format!("key `{path}`: {}", e.into_inner()))
        }
    })
}

fn quarter_period(omega_mod_hz: f64) -> f64 {
    FRAC_PI_2 / (2.0 * PI * omega_mod_hz)
}

fn require(ok: bool, key: &str, what: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(config_error(format!("key `{key}`: {what}")))
    }
}

fn odd(k: u32, key: &str) -> Result<(), CliError> {
    require(k % 2 == 1, key, &format!("k_max must be odd, got {k}"))
}

/// Parses a configuration document and fills every default, including the
/// ones that depend on other keys.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let mut doc: Value = serde_json::from_str(text).map_err(|e| config_error(format!("malformed JSON: {e}")))?;
    let obj = doc
        .as_object_mut()
        .ok_or_else(|| config_error("the configuration must be a JSON object"))?;
    let command = obj
        .remove("command")
        .ok_or_else(|| config_error("missing key `command`"))?;
    let command: Command = serde_json::from_value(command).map_err(|e| config_error(format!("key `command`: {e}")))?;
    let output_dir = match obj.remove("output_dir") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(_) => return Err(config_error("key `output_dir`: expected a path string")),
    };
    let params = match command {
        Command::SwitchSweep => {
            let p: SwitchSweepParams = parse_params(doc)?;
            require(p.l0_h > 0.0, "l0_h", "inductance must be positive (H)")?;
            require(p.c_f > 0.0, "c_f", "capacitance must be positive (F)")?;
            require(p.z0_ohm > 0.0, "z0_ohm", "impedance must be positive (Ω)")?;
            require(p.epsilon > 0.0 && p.epsilon < 1.0, "epsilon", "must lie in (0, 1)")?;
            require(p.f_start_hz > 0.0 && p.f_stop_hz > p.f_start_hz, "f_stop_hz", "need 0 < f_start_hz < f_stop_hz (Hz)")?;
            require(p.points >= 2, "points", "need at least two points")?;
            Params::SwitchSweep(p)
        }
        Command::Floquet => {
            let mut p: FloquetParams = parse_params(doc)?;
            require(p.omega_mod_hz > 0.0, "omega_mod_hz", "must be positive (Hz)")?;
            if let Some(k) = p.k_max {
                odd(k, "k_max")?;
            }
            p.waveform.get_or_insert(match p.k_max {
                None => WaveformKind::IdealSquare,
                Some(_) => WaveformKind::FourierTruncated,
            });
            p.tau_s.get_or_insert(quarter_period(p.omega_mod_hz));
            p.sidebands
                .get_or_insert(modcirc::floquet::default_sidebands(p.k_max));
            Params::Floquet(p)
        }
        Command::FloquetSurface => {
            let mut p: FloquetSurfaceParams = parse_params(doc)?;
            require(p.omega_mod_hz > 0.0, "omega_mod_hz", "must be positive (Hz)")?;
            for &k in &p.k_max_values {
                odd(k, "k_max_values")?;
            }
            require(p.waveform != WaveformKind::IdealSquare, "waveform", "the bandwidth surface needs a band-limited waveform")?;
            require(!p.betas.is_empty() && !p.k_max_values.is_empty(), "betas", "sweep lists must not be empty")?;
            require(p.f_start_hz > 0.0 && p.f_stop_hz >= p.f_start_hz, "f_stop_hz", "need 0 < f_start_hz <= f_stop_hz (Hz)")?;
            require(p.points >= 1, "points", "need at least one point")?;
            p.tau_s.get_or_insert(quarter_period(p.omega_mod_hz));
            Params::FloquetSurface(p)
        }
        Command::Transient => {
            let mut p: TransientParams = parse_params(doc)?;
            require(p.omega_mod_hz > 0.0, "omega_mod_hz", "must be positive (Hz)")?;
            if p.waveform != WaveformKind::IdealSquare {
                odd(p.harmonics, "harmonics")?;
            }
            require(p.f_step_hz > 0.0 && p.f_stop_hz >= p.f_start_hz && p.f_start_hz > 0.0, "f_step_hz", "need a positive step and 0 < f_start_hz <= f_stop_hz (Hz)")?;
            require((1..=4).contains(&p.spectrum_port), "spectrum_port", "must be 1..=4")?;
            p.tau_s.get_or_insert(quarter_period(p.omega_mod_hz));
            p.sample_rate_hz.get_or_insert(2048.0 * p.omega_mod_hz);
            Params::Transient(p)
        }
        Command::Optimize => {
            let p: OptimizeParams = parse_params(doc)?;
            require(p.grid_points >= 3, "grid_points", "need at least three points")?;
            Params::Optimize(p)
        }
        Command::Noise => {
            let p: NoiseParams = parse_params(doc)?;
            require(!p.scenarios.is_empty(), "scenarios", "need at least one scenario")?;
            for (i, s) in p.scenarios.iter().enumerate() {
                let ok = !s.name.is_empty()
                    && s.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
                require(ok, &format!("scenarios[{i}].name"), "use letters, digits, `_` or `-`")?;
                if s.waveform != WaveformKind::IdealSquare {
                    odd(s.harmonics, &format!("scenarios[{i}].harmonics"))?;
                }
            }
            let mut names: Vec<&str> = p.scenarios.iter().map(|s| s.name.as_str()).collect();
            names.sort_unstable();
            names.dedup();
            require(names.len() == p.scenarios.len(), "scenarios", "names must be unique")?;
            Params::Noise(p)
        }
    };
    Ok(RunConfig {
        command,
        params,
        output_dir,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optimize_defaults() {
        let c = parse_config(r#"{"command":"Optimize"}"#).unwrap();
        let Params::Optimize(p) = c.params else { panic!() };
        assert_eq!(p.tan_delta, 1e-5);
        assert_eq!(p.pitch_m, 60e-6);
    }

    #[test]
    fn transient_delay_follows_rate() {
        let c = parse_config(r#"{"command":"Transient","omega_mod_hz":8e7}"#).unwrap();
        let Params::Transient(p) = c.params else { panic!() };
        assert!((p.tau_s.unwrap() - 3.125e-9).abs() < 1e-21);
        assert!((p.sample_rate_hz.unwrap() - 163.84e9).abs() < 1.0);
    }

    #[test]
    fn even_cutoff_rejected() {
        let e = parse_config(r#"{"command":"Floquet","k_max":24}"#).unwrap_err();
        assert!(e.to_string().contains("k_max must be odd"), "{e}");
    }

    #[test]
    fn unknown_key_named() {
        let e = parse_config(r#"{"command":"Floquet","omega_mod":8e7}"#).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("omega_mod") && msg.contains("omega_mod_hz"), "{msg}");
    }

    #[test]
    fn wrong_type_names_key() {
        let e = parse_config(r#"{"command":"SwitchSweep","c_f":"big"}"#).unwrap_err();
        assert!(e.to_string().contains("c_f"), "{e}");
    }

    #[test]
    fn missing_command() {
        assert!(parse_config("{}").is_err());
        assert!(parse_config("[1]").is_err());
        assert!(parse_config(r#"{"command":"Plot"}"#).is_err());
    }
}
