//! Command execution, atomic output files and the run manifest.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use modcirc::consts::amplitude_db;
use modcirc::design::{self, DesignPoint, JunctionRule};
use modcirc::floquet::{self, DelayLineModel, FloquetOptions, ModulationProfile, SurfaceColumn};
use modcirc::lattice::{self, FrequencyGrid, LatticeSwitchParams, SwitchState};
use modcirc::noise::{self, NoiseRunConfig, SquidNoiseParams};
use modcirc::transient::{self, Bias, SwitchCircuit, ToneDrive, TransientConfig, TunableInductorArray};
use modcirc::waveform::FluxDrive;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::*;
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct OutputEntry {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: Command,
    config_sha256: String,
    input: &'a Value,
    resolved: &'a Params,
    outputs: Vec<OutputEntry>,
    summary: Value,
}

fn numerical(module: &'static str, e: modcirc::Error) -> CliError {
    use modcirc::Error as E;
    match e {
        E::InvalidParameter { .. } | E::WindowMismatch(_) | E::MatchCondition { .. } | E::NoHarmonicsInBandwidth { .. } => {
            CliError::Config(format!("{module}: {e}"))
        }
        e => CliError::Numerical { module, source: e },
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `bytes` to a temporary sibling and renames it into place.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<OutputEntry, CliError> {
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, dir.join(name))?;
    Ok(OutputEntry {
        file: name.to_string(),
        bytes: bytes.len(),
        sha256: sha256_hex(bytes),
    })
}

struct Outputs {
    files: Vec<(String, Vec<u8>)>,
    summary: Value,
}

impl Outputs {
    fn new() -> Self {
        Self {
            files: Vec::new(),
            summary: Value::Null,
        }
    }

    fn csv(
        &mut self,
        name: &str,
        module: &'static str,
        write: impl FnOnce(&mut Vec<u8>) -> modcirc::Result<()>,
    ) -> Result<(), CliError> {
        let mut buf = Vec::new();
        write(&mut buf).map_err(|e| numerical(module, e))?;
        self.files.push((name.to_string(), buf));
        Ok(())
    }
}

/// Executes `config`, writes its outputs and the manifest into `out_dir`.
pub fn run(config: &RunConfig, raw: &str, out_dir: &Path) -> Result<Vec<OutputEntry>, CliError> {
    let input: Value = serde_json::from_str(raw).map_err(|e| CliError::Config(e.to_string()))?;
    let out = match &config.params {
        Params::SwitchSweep(p) => switch_sweep(p)?,
        Params::Floquet(p) => floquet_point(p)?,
        Params::FloquetSurface(p) => floquet_surface(p)?,
        Params::Transient(p) => transient_run(p)?,
        Params::Optimize(p) => optimize(p)?,
        Params::Noise(p) => noise_run(p)?,
    };
    fs::create_dir_all(out_dir)?;
    let mut entries = Vec::with_capacity(out.files.len() + 1);
    for (name, bytes) in &out.files {
        entries.push(write_atomic(out_dir, name, bytes)?);
    }
    let manifest = Manifest {
        tool: "modcirc",
        version: env!("CARGO_PKG_VERSION"),
        command: config.command,
        config_sha256: sha256_hex(raw.as_bytes()),
        input: &input,
        resolved: &config.params,
        outputs: entries.clone(),
        summary: out.summary,
    };
    let mut text = serde_json::to_vec_pretty(&manifest)?;
    text.push(b'\n');
    entries.push(write_atomic(out_dir, "manifest.json", &text)?);
    Ok(entries)
}

fn switch_sweep(p: &SwitchSweepParams) -> Result<Outputs, CliError> {
    let m = "lattice-switch";
    let params = LatticeSwitchParams::new(p.l0_h, p.epsilon, p.c_f, p.z0_ohm, p.state).map_err(|e| numerical(m, e))?;
    let grid = FrequencyGrid::new(p.f_start_hz, p.f_stop_hz, p.points).map_err(|e| numerical(m, e))?;
    let pts = lattice::sweep(&params, &grid).map_err(|e| numerical(m, e))?;
    let (pass, iso) = match p.state {
        SwitchState::Crossed => (4, [2, 3]),
        SwitchState::Through => (2, [4, 3]),
    };
    let il = pts.iter().map(|x| -amplitude_db(x.s.get(pass, 1).norm())).fold(0.0, f64::max);
    let isolation = pts
        .iter()
        .flat_map(|x| iso.map(|o| -amplitude_db(x.s.get(o, 1).norm())))
        .fold(f64::INFINITY, f64::min);
    let s11 = pts.iter().map(|x| amplitude_db(x.s.get(1, 1).norm())).fold(f64::NEG_INFINITY, f64::max);
    let integral = lattice::reflection_integral(&params, p.f_start_hz, p.f_stop_hz, p.points).map_err(|e| numerical(m, e))?;
    let mut out = Outputs::new();
    out.csv("switch_sweep.csv", m, |b| lattice::write_sweep_csv(b, &pts))?;
    out.summary = json!({
        "worst_insertion_loss_db": il,
        "worst_isolation_db": isolation,
        "worst_s11_db": s11,
        "reflection_integral_rad_per_s": integral,
        "bode_fano_bound_rad_per_s": PI * p.z0_ohm / p.l0_h,
    });
    Ok(out)
}

fn floquet_point(p: &FloquetParams) -> Result<Outputs, CliError> {
    let m = "floquet-engine";
    let profile = ModulationProfile {
        omega_mod: 2.0 * PI * p.omega_mod_hz,
        theta: p.theta_rad,
        k_max: p.k_max,
        waveform: p.waveform.expect("resolved"),
    };
    let delay = DelayLineModel {
        tau: p.tau_s.expect("resolved"),
        beta: p.beta,
        tan_delta: p.tan_delta,
        omega_center: 2.0 * PI * p.carrier_hz,
    };
    let opts = FloquetOptions {
        sidebands: p.sidebands,
        amend: p.amend,
        amendment_phase: p.amendment_phase_rad,
    };
    let s = floquet::circulator_scattering(&profile, &delay, &opts).map_err(|e| numerical(m, e))?;
    let metrics = floquet::metrics(&s);
    let mut out = Outputs::new();
    out.csv("metrics.csv", m, |b| floquet::write_metrics_csv(b, &metrics))?;
    out.csv("scattering.json", m, |b| s.write_json(b))?;
    out.summary = json!({
        "metrics": metrics,
        "column_power": (1..=4).map(|i| s.column_power(i)).collect::<Vec<_>>(),
    });
    Ok(out)
}

fn floquet_surface(p: &FloquetSurfaceParams) -> Result<Outputs, CliError> {
    let m = "floquet-engine";
    let omega = 2.0 * PI * p.omega_mod_hz;
    let delay = DelayLineModel {
        tan_delta: p.tan_delta,
        ..DelayLineModel::ideal(p.tau_s.expect("resolved"))
    };
    let freqs: Vec<f64> = if p.points == 1 {
        vec![p.f_start_hz]
    } else {
        let step = (p.f_stop_hz - p.f_start_hz) / (p.points - 1) as f64;
        (0..p.points).map(|i| p.f_start_hz + step * i as f64).collect()
    };
    let ideal = ModulationProfile::ideal(omega, p.theta_rad);
    let disp = floquet::dispersion_surface(&ideal, &delay, &p.betas, &freqs).map_err(|e| numerical(m, e))?;
    let bw_profile = ModulationProfile {
        waveform: p.waveform,
        ..ideal
    };
    let bw = floquet::bandwidth_surface(&bw_profile, &delay, &p.k_max_values, &freqs).map_err(|e| numerical(m, e))?;
    let mut out = Outputs::new();
    for (name, pts, param, col) in [
        ("dispersion_insertion_loss.csv", &disp, "beta", SurfaceColumn::InsertionLoss),
        ("dispersion_isolation.csv", &disp, "beta", SurfaceColumn::Isolation),
        ("bandwidth_insertion_loss.csv", &bw, "k_max", SurfaceColumn::InsertionLoss),
        ("bandwidth_isolation.csv", &bw, "k_max", SurfaceColumn::Isolation),
    ] {
        out.csv(name, m, |b| floquet::write_surface_panel_csv(b, pts, param, col))?;
    }
    out.summary = json!({ "dispersion_points": disp.len(), "bandwidth_points": bw.len() });
    Ok(out)
}

fn transient_config(p: &TransientParams) -> Result<TransientConfig, CliError> {
    let omega = 2.0 * PI * p.omega_mod_hz;
    let drive = |phase| -> Result<Bias, CliError> {
        let mut d = FluxDrive::new(omega, phase, p.harmonics, p.waveform).map_err(|e| numerical("transient-sim", e))?;
        d.amplitude = p.drive_amplitude_rad;
        Ok(Bias::Modulated(d))
    };
    let sw = SwitchCircuit {
        array: TunableInductorArray {
            n_cells: p.n_cells,
            l0_total: p.l0_total_h,
            epsilon: p.epsilon,
            lg_total: p.lg_total_h,
            cj: p.cj_f,
        },
        node_capacitance: p.node_capacitance_f,
    };
    Ok(TransientConfig {
        sample_rate: p.sample_rate_hz.expect("resolved"),
        omega_mod: omega,
        settle_periods: p.settle_periods,
        window_periods: p.window_periods,
        tone: ToneDrive {
            port: p.tone_port,
            frequency_hz: p.spectrum_tone_hz,
            amplitude: p.tone_amplitude_sqrt_w,
        },
        tau: p.tau_s.expect("resolved"),
        z0: p.z0_ohm,
        switches: [sw; 2],
        biases: [drive(p.phase_a_rad)?, drive(p.phase_b_rad)?],
        law: p.element_law,
        cells: p.cells,
    })
}

fn transient_run(p: &TransientParams) -> Result<Outputs, CliError> {
    let m = "transient-sim";
    let config = transient_config(p)?;
    config.validate().map_err(|e| numerical(m, e))?;
    let freqs = transient::tone_grid(p.f_start_hz, p.f_stop_hz, p.f_step_hz);
    if freqs.is_empty() {
        return Err(CliError::Config("key `f_step_hz`: the tone grid is empty".into()));
    }
    let rows = transient::sweep_sparams(&config, &freqs).map_err(|e| numerical(m, e))?;
    let result = transient::run_transient(&config).map_err(|e| numerical(m, e))?;
    let spectrum = transient::output_spectrum(&result, p.spectrum_port).map_err(|e| numerical(m, e))?;
    let (p_in, p_out) = transient::energy_balance(&result);
    let unsettled = rows.iter().filter(|r| !r.settled).count();
    let mut out = Outputs::new();
    out.csv("s_params.csv", m, |b| transient::write_sparams_csv(b, &rows))?;
    out.csv("spectrum.csv", m, |b| transient::write_spectrum_csv(b, &spectrum))?;
    out.summary = json!({
        "tones": rows.len(),
        "unsettled_tones": unsettled,
        "energy_out_over_in": p_out / p_in,
        "spectrum_tone_settling_change": transient::settling_change(&result),
    });
    Ok(out)
}

fn optimize(p: &OptimizeParams) -> Result<Outputs, CliError> {
    let m = "design-optimizer";
    let point = DesignPoint {
        omega_mod: 2.0 * PI * p.omega_mod_hz,
        tan_delta: p.tan_delta,
        dispersion_per_reference: p.dispersion_per_80mhz,
        omega_b: p.modulation_bandwidth_hz.map(|f| 2.0 * PI * f),
        pitch: p.pitch_m,
        signal_band: [2.0 * PI * p.band_lo_hz, 2.0 * PI * p.band_hi_hz],
        speed: p.speed_m_per_s,
        dielectric: p.dielectric,
    };
    let rows = design::fig3_grid(&point, p.grid_lo_hz, p.grid_hi_hz, p.grid_points).map_err(|e| numerical(m, e))?;
    let geometry = design::delay_length_and_area(&point).map_err(|e| numerical(m, e))?;
    let budget = design::loss_budget(&point).map_err(|e| numerical(m, e))?;
    let rule = JunctionRule {
        critical_current: p.critical_current_a,
        f_max: p.f_max_hz,
        min_feature: p.min_feature_m,
        specific_capacitance: p.specific_capacitance_f_per_m2,
        ..JunctionRule::default()
    };
    let junction = design::junction_design(&rule, p.target_inductance_h).map_err(|e| numerical(m, e))?;
    let best = rows
        .iter()
        .min_by(|a, b| a.total_db.total_cmp(&b.total_db))
        .expect("grid has points");
    let design_doc = json!({
        "geometry": geometry,
        "loss_budget": budget,
        "junction": junction,
    });
    let mut out = Outputs::new();
    out.csv("fig3.csv", m, |b| design::write_fig3_csv(b, &rows))?;
    let mut doc = serde_json::to_vec_pretty(&design_doc)?;
    doc.push(b'\n');
    out.files.push(("design.json".into(), doc));
    out.summary = json!({
        "grid_optimum_hz": best.omega_mod_hz,
        "grid_optimum_total_db": best.total_db,
        "total_db": budget.total_db,
        "area_mm2": geometry.area_m2 * 1e6,
    });
    Ok(out)
}

fn noise_run(p: &NoiseParams) -> Result<Outputs, CliError> {
    let m = "noise-model";
    let params = SquidNoiseParams {
        asymmetry: p.asymmetry,
        cj: p.cj_f,
        q_factor: p.q_factor,
        z0: p.z0_ohm,
        i0_nominal: p.i0_a,
    };
    let cfg = NoiseRunConfig {
        settle_periods: p.settle_periods,
        window_periods: p.window_periods,
        rtol: p.rtol,
        ..NoiseRunConfig::default()
    };
    let runs = p
        .scenarios
        .par_iter()
        .map(|s| {
            let mut d = FluxDrive::new(2.0 * PI * s.omega_mod_hz, 0.0, s.harmonics, s.waveform)?;
            d.amplitude = p.flux_amplitude_rad;
            let rec = noise::integrate_squid(&params, &d, &cfg)?;
            let occ = noise::occupancy(&rec, p.f_lo_hz, p.f_hi_hz)?;
            Ok((rec, occ))
        })
        .collect::<modcirc::Result<Vec<_>>>()
        .map_err(|e| numerical(m, e))?;
    let mut out = Outputs::new();
    let mut summary = serde_json::Map::new();
    for (s, (rec, occ)) in p.scenarios.iter().zip(&runs) {
        out.csv(&format!("occupancy_{}.csv", s.name), m, |b| noise::write_occupancy_csv(b, occ))?;
        summary.insert(
            s.name.clone(),
            json!({
                "max_occupancy": occ.max(),
                "source_power_w": rec.source_power(),
                "parametric_power_w": rec.parametric_power(),
                "dissipated_power_w": rec.dissipated_power(),
                "r_eff_ohm": rec.r_eff,
            }),
        );
    }
    out.summary = Value::Object(summary);
    Ok(out)
}
