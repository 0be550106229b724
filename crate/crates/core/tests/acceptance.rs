//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use modcirc::consts::amplitude_db;
use modcirc::design::*;
use modcirc::floquet::*;
use modcirc::lattice::*;
use modcirc::noise::*;
use modcirc::transient::*;
use modcirc::waveform::WaveformKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const OMEGA: f64 = 2.0 * PI * 80e6;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn ideal_delay() -> DelayLineModel {
    DelayLineModel::ideal(FRAC_PI_2 / OMEGA)
}

fn c1_ideal_circulation() -> Outcome {
    let t = Instant::now();
    let p = ModulationProfile::truncated(OMEGA, FRAC_PI_2, 99_999);
    let opts = FloquetOptions {
        sidebands: Some(64),
        amend: false,
        ..Default::default()
    };
    let s = circulator_scattering(&p, &ideal_delay(), &opts).unwrap();
    let s41 = s.get(4, 1, 0).norm();
    let leak = (1..=3)
        .flat_map(|o| (-64..=64).map(move |m| (o, m)))
        .map(|(o, m)| s.get(o, 1, m).norm())
        .fold(0.0, f64::max);
    let secs = t.elapsed().as_secs_f64();
    outcome(
        s41 >= 1.0 - 1e-4 && leak <= 1e-4 && secs < 1.0,
        format!("|S41^0| = {s41:.7}, max |S(1..3),1^m| = {leak:.2e}, {secs:.2} s"),
    )
}

fn c2_finite_bandwidth() -> Outcome {
    let k = 25;
    let (omega_tau, theta) = (FRAC_PI_2, FRAC_PI_2);
    // Direct sum over ±k of e^{jk(Ωτ−θ)}/k², real by symmetry.
    let mut acc = 0.0;
    for n in (1..=k).step_by(2) {
        let n = n as f64;
        acc += 2.0 * (n * (omega_tau - theta)).cos() / (n * n);
    }
    let oracle = -amplitude_db(0.5 * (1.0 + 4.0 / (PI * PI) * acc));
    let (il, _) = carrier_metrics(&ModulationProfile::truncated(OMEGA, FRAC_PI_2, k), &ideal_delay()).unwrap();
    outcome(
        (il - oracle).abs() < 1e-12 && (il - 0.07).abs() <= 0.01,
        format!("IL = {il:.4} dB, direct sum {oracle:.4} dB, target 0.07 ± 0.01"),
    )
}

fn c3_switch() -> Outcome {
    let t = Instant::now();
    let p = LatticeSwitchParams::reference(SwitchState::Crossed);
    let grid = FrequencyGrid::new(4e9, 8e9, DEFAULT_SWEEP_POINTS).unwrap();
    let pts = sweep(&p, &grid).unwrap();
    let (mut il, mut iso, mut s11, mut dev) = (0.0f64, f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for pt in &pts {
        let w = 2.0 * PI * pt.frequency_hz;
        il = il.max(-amplitude_db(pt.s.get(4, 1).norm()));
        iso = iso.min(-amplitude_db(pt.s.get(2, 1).norm().max(pt.s.get(3, 1).norm())));
        s11 = s11.max(amplitude_db(pt.s.get(1, 1).norm()));
        let fo = first_order_magnitudes(&p, w);
        for o in 1..=4 {
            dev = dev.max((pt.s.get(o, 1).norm() - fo[o - 1]).abs());
        }
    }
    let bound = 5.0 * p.epsilon * p.epsilon;
    let secs = t.elapsed().as_secs_f64();
    outcome(
        il < 0.03 && iso > 25.0 && s11 < -26.0 && dev <= bound && secs < 1.0,
        format!(
            "IL ≤ {il:.4} dB, isolation ≥ {iso:.2} dB, |S11| ≤ {s11:.2} dB, \
             first-order deviation {dev:.4} vs 5ε² = {bound:.5}, {secs:.2} s"
        ),
    )
}

fn c4_unitarity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut u, mut r) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let state = if rng.gen() { SwitchState::Through } else { SwitchState::Crossed };
        let p = LatticeSwitchParams::new(
            rng.gen_range(0.1e-9..5e-9),
            rng.gen_range(1e-4..0.999),
            rng.gen_range(20e-15..1e-12),
            rng.gen_range(10.0..100.0),
            state,
        )
        .unwrap();
        let s = scattering_matrix(&p, 2.0 * PI * rng.gen_range(2e9..10e9)).unwrap();
        u = u.max(s.unitarity_defect());
        r = r.max(s.reciprocity_defect());
    }
    outcome(u < 1e-10 && r < 1e-12, format!("max ‖S†S − I‖ = {u:.2e}, max ‖S − Sᵀ‖ = {r:.2e}"))
}

fn c5_dispersion() -> Outcome {
    let d = DelayLineModel {
        beta: 3e-4,
        ..ideal_delay()
    };
    let (il, _) = carrier_metrics(&ModulationProfile::ideal(OMEGA, FRAC_PI_2), &d).unwrap();
    outcome((il - 0.05).abs() <= 0.01, format!("IL = {il:.4} dB, target 0.05 ± 0.01"))
}

fn c6_design_space() -> Outcome {
    let base = DesignPoint::new(OMEGA);
    let rows = fig3_grid(&base, 10e6, 1e9, 121).unwrap();
    let mono = rows.windows(2).all(|w| {
        w[1].area_mm2 < w[0].area_mm2
            && w[1].dielectric_db < w[0].dielectric_db
            && w[1].finite_bw_db >= w[0].finite_bw_db
    });
    let local_minima: Vec<f64> = (1..rows.len() - 1)
        .filter(|&i| rows[i].total_db < rows[i - 1].total_db && rows[i].total_db < rows[i + 1].total_db)
        .map(|i| rows[i].omega_mod_hz / 1e6)
        .collect();
    let imin = (0..rows.len()).min_by(|&a, &b| rows[a].total_db.total_cmp(&rows[b].total_db)).unwrap();
    let geo = delay_length_and_area(&base).unwrap();
    let b = loss_budget(&base).unwrap();
    let area = geo.area_m2 * 1e6;
    let pass = mono
        && local_minima.len() == 1
        && imin > 0
        && imin < rows.len() - 1
        && (geo.length_m / 0.375 - 1.0).abs() <= 0.01
        && area <= 49.0
        && b.total_db < 0.1;
    outcome(
        pass,
        format!(
            "monotone {mono}, {} local minima of total loss (global at {:.1} MHz), \
             d = {:.2} cm, area = {area:.1} mm², total = {:.4} dB",
            local_minima.len(),
            rows[imin].omega_mod_hz / 1e6,
            geo.length_m * 100.0,
            b.total_db
        ),
    )
}

fn band(rows: &[SParamRow], lo: f64, hi: f64) -> impl Iterator<Item = &SParamRow> {
    rows.iter().filter(move |r| r.frequency_hz >= lo - 1.0 && r.frequency_hz <= hi + 1.0)
}

fn worst(rows: &[SParamRow], lo: f64, hi: f64) -> (f64, f64, bool) {
    let il = band(rows, lo, hi).map(|r| -amplitude_db(r.s[1].norm())).fold(0.0, f64::max);
    let iso = band(rows, lo, hi).map(|r| -amplitude_db(r.s[3].norm())).fold(f64::INFINITY, f64::min);
    let settled = band(rows, lo, hi).all(|r| r.settled);
    (il, iso, settled)
}

fn c7_transient(truncated: &[SParamRow], ideal: &[SParamRow]) -> Outcome {
    let mut c = TransientConfig::reference(WaveformKind::FourierTruncated);
    c.tone.frequency_hz = 6e9;
    let spec = output_spectrum(&run_transient(&c).unwrap(), 2).unwrap();
    let f_mod = OMEGA / (2.0 * PI);
    let carrier = spec.iter().find(|r| (r.frequency_hz - 6e9).abs() < 1.0).unwrap().power_db;
    let sideband = spec
        .iter()
        .filter(|r| (r.frequency_hz - 6e9).abs() > 0.5 * f_mod)
        .map(|r| r.power_db)
        .fold(f64::NEG_INFINITY, f64::max);
    let (il_t, iso_t, set_t) = worst(truncated, 6.1e9, 8.0e9);
    let (il_i, iso_i, set_i) = worst(ideal, 4.2e9, 8.3e9);
    outcome(
        set_t && set_i && iso_t > 20.0 && il_t < 0.4 && sideband < -25.0 && iso_i > 20.0 && il_i < 0.15,
        format!(
            "truncated 6.1–8.0 GHz: isolation ≥ {iso_t:.2} dB, IL ≤ {il_t:.3} dB, \
             6 GHz carrier {carrier:.3} dB, largest sideband {sideband:.2} dB; \
             ideal 4.2–8.3 GHz: isolation ≥ {iso_i:.2} dB, IL ≤ {il_i:.3} dB"
        ),
    )
}

fn c8_cross_validation() -> Outcome {
    let mut c = TransientConfig::reference(WaveformKind::IdealSquare);
    for sw in &mut c.switches {
        sw.array = TunableInductorArray {
            epsilon: 1e-4,
            cj: 0.0,
            l0_total: 0.1e-9,
            lg_total: 0.0,
            ..sw.array
        };
        sw.node_capacitance = 20e-15;
    }
    let freqs = tone_grid(4e9, 8e9, 100e6);
    let rows = sweep_sparams(&c, &freqs).unwrap();
    let fl = circulator_scattering(
        &ModulationProfile::ideal(OMEGA, -FRAC_PI_2),
        &ideal_delay(),
        &FloquetOptions::default(),
    )
    .unwrap();
    let want = amplitude_db(fl.get(2, 1, 0).norm());
    let dev = rows.iter().map(|r| (amplitude_db(r.s[1].norm()) - want).abs()).fold(0.0, f64::max);
    let settled = rows.iter().all(|r| r.settled);
    outcome(
        settled && dev < 0.1,
        format!("max |ΔS21| = {dev:.4} dB over {} tones (Floquet {want:.4} dB)", rows.len()),
    )
}

fn c9_energy() -> Outcome {
    let r = run_transient(&TransientConfig::reference(WaveformKind::FourierTruncated)).unwrap();
    let (p_in, p_out) = energy_balance(&r);
    let e = p_out / p_in - 1.0;
    outcome(e.abs() < 5e-3, format!("out/in − 1 = {e:.2e}"))
}

fn c10_ripple(truncated: &[SParamRow]) -> Outcome {
    let rows: Vec<&SParamRow> = band(truncated, 4e9, 8e9).collect();
    let f: Vec<f64> = rows.iter().map(|r| r.frequency_hz).collect();
    let v: Vec<f64> = rows.iter().map(|r| amplitude_db(r.s[1].norm())).collect();
    let fsr = ripple_fsr(&f, &v).unwrap();
    let step = f[1] - f[0];
    let want = 2.0 * OMEGA / (2.0 * PI);
    outcome(
        (fsr - want).abs() <= step,
        format!("FSR = {:.1} MHz, target {:.0} ± {:.0} MHz", fsr / 1e6, want / 1e6, step / 1e6),
    )
}

fn c11_compression() -> Outcome {
    let p = p1db_dbm(9e-6);
    outcome((p + 64.8).abs() <= 0.1, format!("P1dB(9 µA) = {p:.3} dBm"))
}

fn c12_noise() -> Outcome {
    let t = Instant::now();
    let params = SquidNoiseParams::default();
    let cfg = NoiseRunConfig::default();
    let max_occ = |f: f64, k: u32, kind| {
        let d = noise_drive(2.0 * PI * f, k, kind).unwrap();
        let rec = integrate_squid(&params, &d, &cfg).unwrap();
        occupancy(&rec, 4e9, 8e9).unwrap().max()
    };
    let trunc = max_occ(80e6, 25, WaveformKind::FourierTruncated);
    let sigma80 = max_occ(80e6, 25, WaveformKind::SigmaApproximated);
    let sigma15 = max_occ(15e6, 49, WaveformKind::SigmaApproximated);
    let decades = (trunc / sigma80).log10();
    let secs = t.elapsed().as_secs_f64();
    outcome(
        decades >= 2.0 && sigma80 > sigma15 && trunc > 1e-4 && secs < 300.0,
        format!(
            "truncated {trunc:.3e}, sigma 80 MHz {sigma80:.3e} ({decades:.2} decades), \
             sigma 15 MHz {sigma15:.3e}, {secs:.1} s"
        ),
    )
}

fn main() {
    let t = Instant::now();
    let grid = tone_grid(4.0e9, 8.3e9, 20e6);
    let truncated = sweep_sparams(&TransientConfig::reference(WaveformKind::FourierTruncated), &grid).unwrap();
    let ideal = sweep_sparams(&TransientConfig::reference(WaveformKind::IdealSquare), &grid).unwrap();
    eprintln!("transient sweeps: {} tones in {:.1} s", 2 * grid.len(), t.elapsed().as_secs_f64());

    let results = [
        ("1 ideal circulation", c1_ideal_circulation()),
        ("2 finite-bandwidth loss", c2_finite_bandwidth()),
        ("3 lattice switch", c3_switch()),
        ("4 switch unitarity/reciprocity", c4_unitarity()),
        ("5 dispersion loss", c5_dispersion()),
        ("6 design space", c6_design_space()),
        ("7 transient reproduction", c7_transient(&truncated, &ideal)),
        ("8 time/frequency cross-check", c8_cross_validation()),
        ("9 transient energy", c9_energy()),
        ("10 ripple FSR", c10_ripple(&truncated)),
        ("11 compression point", c11_compression()),
        ("12 noise hierarchy", c12_noise()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
