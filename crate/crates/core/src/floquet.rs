//! Multi-sideband (Floquet) scattering of the switch–delay–switch circulator.
//!
//! A tone at ω entering the network is decomposed into even and odd modes of
//! the two delay-line pairs. The even mode bypasses the switches' mixing and
//! picks up the average delay; the odd mode is multiplied by the left switch
//! function, delayed, and multiplied by the right switch function. In the
//! sideband basis each of those multiplications is a Toeplitz matrix `H(φ)`
//! and the delay is the diagonal `D′`.
//!
//! Sideband index `m` labels the output frequency `ω + mΩ`. Matrices are
//! stored with row/column `m + M` for `m ∈ [−M, M]`.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::consts::{amplitude_db, DB_FLOOR};
use crate::error::{invalid, Result};
use crate::waveform::{harmonic_weight, WaveformKind};

/// Odd harmonics summed when correcting the closed-form ideal transmission for
/// a non-ideal delay with unbounded modulation bandwidth.
pub const UNBOUNDED_CORRECTION_ORDER: i64 = 131_071;

/// Sideband half-width used when `k_max` is unbounded and none is requested.
/// The column-power defect of the discontinuous ideal switching decays as
/// `1/M`; 512 keeps it below 1e-3.
pub const UNBOUNDED_SIDEBANDS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationProfile {
    pub omega_mod: f64,
    pub theta: f64,
    /// Highest odd harmonic present in the switch function; `None` is unbounded.
    pub k_max: Option<u32>,
    pub waveform: WaveformKind,
}

impl ModulationProfile {
    pub fn ideal(omega_mod: f64, theta: f64) -> Self {
        Self {
            omega_mod,
            theta,
            k_max: None,
            waveform: WaveformKind::IdealSquare,
        }
    }

    pub fn truncated(omega_mod: f64, theta: f64, k_max: u32) -> Self {
        Self {
            omega_mod,
            theta,
            k_max: Some(k_max),
            waveform: WaveformKind::FourierTruncated,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_mod > 0.0 && self.omega_mod.is_finite()) {
            return Err(invalid("omega_mod", "must be positive and finite"));
        }
        if !self.theta.is_finite() {
            return Err(invalid("theta", "must be finite"));
        }
        match (self.k_max, self.waveform) {
            (None, WaveformKind::IdealSquare) => Ok(()),
            (None, _) => Err(invalid(
                "k_max",
                "an unbounded harmonic cutoff requires the ideal square waveform",
            )),
            (Some(_), WaveformKind::IdealSquare) => Err(invalid(
                "k_max",
                "the ideal square waveform has no finite harmonic cutoff",
            )),
            (Some(k), _) if k % 2 == 0 => {
                Err(invalid("k_max", format!("must be odd, got {k}")))
            }
            _ => Ok(()),
        }
    }

    fn weight(&self, n: i64) -> f64 {
        harmonic_weight(self.waveform, n, self.k_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayLineModel {
    pub tau: f64,
    /// Fractional delay change per sideband step: `τ_m = τ(1 + βm)`.
    pub beta: f64,
    pub tan_delta: f64,
    /// Carrier frequency entering the loss model only.
    pub omega_center: f64,
}

impl DelayLineModel {
    pub fn ideal(tau: f64) -> Self {
        Self {
            tau,
            beta: 0.0,
            tan_delta: 0.0,
            omega_center: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(invalid("tau", "must be positive and finite"));
        }
        if !(self.tan_delta >= 0.0) || !self.beta.is_finite() || !self.omega_center.is_finite() {
            return Err(invalid(
                "tan_delta",
                "loss tangent must be non-negative; beta and omega_center finite",
            ));
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.beta == 0.0 && self.tan_delta == 0.0
    }

    /// `a_m`, attenuation of the line at the absolute frequency `|ω + mΩ|`.
    pub fn amplitude(&self, m: i64, omega_mod: f64) -> f64 {
        let w = (self.omega_center + m as f64 * omega_mod).abs();
        (-w * self.tau * self.tan_delta / 2.0).exp()
    }

    /// `D′_mm = a_m exp(j m Ω τ_m)`.
    pub fn element(&self, m: i64, omega_mod: f64) -> Complex64 {
        let mf = m as f64;
        let tau_m = self.tau * (1.0 + self.beta * mf);
        Complex64::from_polar(self.amplitude(m, omega_mod), mf * omega_mod * tau_m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloquetOptions {
    /// Sideband half-width `M`; `None` selects [`default_sidebands`].
    pub sidebands: Option<usize>,
    /// Apply the prompt-reflection amendment when `k_max` is finite.
    pub amend: bool,
    pub amendment_phase: f64,
}

impl Default for FloquetOptions {
    fn default() -> Self {
        Self {
            sidebands: None,
            amend: true,
            amendment_phase: 0.0,
        }
    }
}

/// `4·(⌈k_max/2⌉ + 4)` for a finite cutoff, enough to hold every sideband the
/// product of two band-limited switch functions can produce.
pub fn default_sidebands(k_max: Option<u32>) -> usize {
    match k_max {
        Some(k) => 4 * (k as usize).div_ceil(2) + 16,
        None => UNBOUNDED_SIDEBANDS,
    }
}

fn resolved_sidebands(profile: &ModulationProfile, opts: &FloquetOptions) -> Result<usize> {
    let m = opts.sidebands.unwrap_or_else(|| default_sidebands(profile.k_max));
    if m < 1 {
        return Err(invalid("sidebands", "need at least one sideband on each side"));
    }
    Ok(m)
}

/// Sideband-mixing matrix of a square-wave switch with phase `phase`.
pub fn switch_matrix(phase: f64, k_max: Option<u32>, sidebands: usize) -> DMatrix<Complex64> {
    weighted_switch_matrix(phase, sidebands, |d| {
        harmonic_weight(
            if k_max.is_some() {
                WaveformKind::FourierTruncated
            } else {
                WaveformKind::IdealSquare
            },
            d,
            k_max,
        )
    })
}

/// Switch matrix with the harmonic weights of `profile`'s waveform.
pub fn profile_switch_matrix(
    profile: &ModulationProfile,
    phase: f64,
    sidebands: usize,
) -> DMatrix<Complex64> {
    weighted_switch_matrix(phase, sidebands, |d| profile.weight(d))
}

fn weighted_switch_matrix(
    phase: f64,
    sidebands: usize,
    weight: impl Fn(i64) -> f64,
) -> DMatrix<Complex64> {
    let n = 2 * sidebands + 1;
    DMatrix::from_fn(n, n, |i, j| {
        let d = i as i64 - j as i64;
        let w = weight(d);
        if w == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let df = d as f64;
        Complex64::from_polar(2.0 * w / (PI * df), df * phase - PI / 2.0)
    })
}

pub fn delay_matrix(model: &DelayLineModel, omega_mod: f64, sidebands: usize) -> DMatrix<Complex64> {
    let n = 2 * sidebands + 1;
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        d[(i, i)] = model.element(i as i64 - sidebands as i64, omega_mod);
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    RightGoing,
    LeftGoing,
}

/// Fourier coefficient `m` of `sgn sin(s + α) · sgn sin(s + β)`.
fn square_product_coefficient(alpha: f64, beta: f64, m: i64) -> Complex64 {
    let tau = 2.0 * PI;
    let mut pts = [
        (-alpha).rem_euclid(tau),
        (PI - alpha).rem_euclid(tau),
        (-beta).rem_euclid(tau),
        (PI - beta).rem_euclid(tau),
    ];
    pts.sort_by(f64::total_cmp);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut lo = 0.0;
    for hi in pts.into_iter().chain(std::iter::once(tau)) {
        if hi > lo {
            let mid = 0.5 * (lo + hi);
            let g = (mid + alpha).sin().signum() * (mid + beta).sin().signum();
            let seg = if m == 0 {
                Complex64::new(hi - lo, 0.0)
            } else {
                let mf = m as f64;
                (Complex64::from_polar(1.0, -mf * hi) - Complex64::from_polar(1.0, -mf * lo))
                    / Complex64::new(0.0, -mf)
            };
            acc += seg * g;
        }
        lo = hi;
    }
    acc / tau
}

/// Precomputed per-harmonic factors of the transmission sum; see
/// [`TransmissionSum::at`].
struct TransmissionSum<'a> {
    profile: &'a ModulationProfile,
    direction: Direction,
    /// `(k, w_k·D′_k·phase_k / k)` for odd `|k| ≤ K`.
    terms: Vec<(i64, Complex64)>,
    /// Closed-form ideal part for an unbounded cutoff.
    closed_form: bool,
}

impl<'a> TransmissionSum<'a> {
    fn new(profile: &'a ModulationProfile, delay: &DelayLineModel, direction: Direction) -> Self {
        let om = profile.omega_mod;
        let theta = profile.theta;
        let (order, closed_form) = match profile.k_max {
            Some(k) => (k as i64, false),
            None => (UNBOUNDED_CORRECTION_ORDER, true),
        };
        let ideal = DelayLineModel::ideal(delay.tau);
        let mut terms = Vec::new();
        if !(closed_form && delay.is_ideal()) {
            for k in (-order..=order).step_by(2) {
                let mut d = delay.element(k, om);
                if closed_form {
                    d -= ideal.element(k, om);
                }
                // Right-going: the switch at θ acts last, so its phase rides
                // on the output index; left-going: it acts first.
                let ph = match direction {
                    Direction::RightGoing => -(k as f64) * theta,
                    Direction::LeftGoing => k as f64 * theta,
                };
                let q = profile.weight(k) * d * Complex64::from_polar(1.0, ph) / k as f64;
                terms.push((k, q));
            }
        }
        Self {
            profile,
            direction,
            terms,
            closed_form,
        }
    }

    fn at(&self, m: i64, omega_tau: f64) -> Complex64 {
        if m % 2 != 0 {
            return Complex64::new(0.0, 0.0);
        }
        let theta = self.profile.theta;
        let mut sum = Complex64::new(0.0, 0.0);
        for &(k, q) in &self.terms {
            let w = self.profile.weight(m - k);
            if w != 0.0 {
                sum += q * (w / (m - k) as f64);
            }
        }
        let outer = match self.direction {
            Direction::RightGoing => Complex64::from_polar(1.0, m as f64 * theta),
            Direction::LeftGoing => Complex64::new(1.0, 0.0),
        };
        let mut r = -4.0 / (PI * PI) * outer * sum;
        if self.closed_form {
            r += match self.direction {
                Direction::RightGoing => square_product_coefficient(theta, omega_tau, m),
                Direction::LeftGoing => square_product_coefficient(0.0, theta + omega_tau, m),
            };
        }
        r
    }
}

/// `r′_m` (right-going) or `l′_m` (left-going) for `m ∈ [−M, M]`, indexed by
/// `m + M`.
pub fn differential_transmission(
    profile: &ModulationProfile,
    delay: &DelayLineModel,
    direction: Direction,
    sidebands: usize,
) -> Result<Vec<Complex64>> {
    profile.validate()?;
    delay.validate()?;
    let sum = TransmissionSum::new(profile, delay, direction);
    let ot = profile.omega_mod * delay.tau;
    let m = sidebands as i64;
    Ok((-m..=m).into_par_iter().map(|i| sum.at(i, ot)).collect())
}

/// Magnitudes `(|r̃|, |l̃|)` of the prompt-reflection amplitudes: the power
/// a lossless network with the same delay phases fails to transfer into any
/// sideband, `1 − Σ_m |r′_m|²`. Zero for the ideal square.
pub fn amendment_magnitudes(
    profile: &ModulationProfile,
    delay: &DelayLineModel,
) -> Result<(f64, f64)> {
    let k = match profile.k_max {
        None => return Ok((0.0, 0.0)),
        Some(k) => k as usize,
    };
    let lossless = DelayLineModel {
        tan_delta: 0.0,
        ..*delay
    };
    // r′ and l′ vanish beyond |m| = 2K.
    let deficit = |dir| -> Result<f64> {
        let v = differential_transmission(profile, &lossless, dir, 2 * k + 1)?;
        let p: f64 = v.iter().rev().map(|z| z.norm_sqr()).sum();
        Ok((1.0 - p).max(0.0).sqrt())
    };
    Ok((deficit(Direction::RightGoing)?, deficit(Direction::LeftGoing)?))
}

/// Complex amplitudes `S_{out,in}^m` of the four-port circulator.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetScatteringMatrix {
    sidebands: usize,
    entries: Vec<Complex64>,
}

impl FloquetScatteringMatrix {
    fn zeros(sidebands: usize) -> Self {
        Self {
            sidebands,
            entries: vec![Complex64::new(0.0, 0.0); 16 * (2 * sidebands + 1)],
        }
    }

    pub fn sidebands(&self) -> usize {
        self.sidebands
    }

    fn index(&self, out_port: usize, in_port: usize, m: i64) -> Option<usize> {
        let mm = self.sidebands as i64;
        if !(1..=4).contains(&out_port) || !(1..=4).contains(&in_port) || m.abs() > mm {
            return None;
        }
        Some(((out_port - 1) * 4 + in_port - 1) * (2 * self.sidebands + 1) + (m + mm) as usize)
    }

    /// Entry for 1-based ports; zero outside the stored sideband range.
    pub fn get(&self, out_port: usize, in_port: usize, m: i64) -> Complex64 {
        self.index(out_port, in_port, m)
            .map_or(Complex64::new(0.0, 0.0), |i| self.entries[i])
    }

    fn set(&mut self, out_port: usize, in_port: usize, m: i64, v: Complex64) {
        let i = self.index(out_port, in_port, m).expect("index in range");
        self.entries[i] = v;
    }

    /// Total output power for unit input at `in_port`, over all ports and
    /// stored sidebands.
    pub fn column_power(&self, in_port: usize) -> f64 {
        let mm = self.sidebands as i64;
        (1..=4)
            .flat_map(|o| (-mm..=mm).map(move |m| (o, m)))
            .map(|(o, m)| self.get(o, in_port, m).norm_sqr())
            .sum()
    }

    /// Nested `[out][in][m]` arrays of `[re, im]`.
    pub fn to_nested(&self) -> Vec<Vec<Vec<[f64; 2]>>> {
        let mm = self.sidebands as i64;
        (1..=4)
            .map(|o| {
                (1..=4)
                    .map(|i| {
                        (-mm..=mm)
                            .map(|m| {
                                let z = self.get(o, i, m);
                                [z.re, z.im]
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Doc {
            sidebands: usize,
            entries: Vec<Vec<Vec<[f64; 2]>>>,
        }
        serde_json::to_writer(
            out,
            &Doc {
                sidebands: self.sidebands,
                entries: self.to_nested(),
            },
        )?;
        Ok(())
    }
}

struct Blocks {
    e: Complex64,
    r: Vec<Complex64>,
    l: Vec<Complex64>,
    r_tilde: Complex64,
    l_tilde: Complex64,
}

fn assemble(sidebands: usize, b: &Blocks) -> FloquetScatteringMatrix {
    let mut s = FloquetScatteringMatrix::zeros(sidebands);
    let mm = sidebands as i64;
    let half = 0.5;
    for m in -mm..=mm {
        let i = (m + mm) as usize;
        let e = if m == 0 { b.e } else { Complex64::new(0.0, 0.0) };
        let r = b.r[i];
        let l = b.l[i];
        s.set(2, 1, m, (e - r) * half);
        s.set(4, 1, m, (e + r) * half);
        s.set(2, 3, m, (e + r) * half);
        s.set(4, 3, m, (e - r) * half);
        s.set(1, 2, m, (e - l) * half);
        s.set(3, 2, m, (e + l) * half);
        s.set(1, 4, m, (e + l) * half);
        s.set(3, 4, m, (e - l) * half);
    }
    let (rt, lt) = (b.r_tilde * half, b.l_tilde * half);
    s.set(1, 1, 0, rt);
    s.set(3, 3, 0, rt);
    s.set(3, 1, 0, -rt);
    s.set(1, 3, 0, -rt);
    s.set(2, 2, 0, lt);
    s.set(4, 4, 0, lt);
    s.set(4, 2, 0, -lt);
    s.set(2, 4, 0, -lt);
    s
}

/// Full sideband-resolved scattering of the circulator.
///
/// Ports 1 and 3 are on the left switch, 2 and 4 on the right. The even
/// mode is carried straight through with the line's carrier attenuation; the
/// odd mode is carried by `r′_m` (rightwards) and `l′_m` (leftwards).
pub fn circulator_scattering(
    profile: &ModulationProfile,
    delay: &DelayLineModel,
    opts: &FloquetOptions,
) -> Result<FloquetScatteringMatrix> {
    let sidebands = resolved_sidebands(profile, opts)?;
    let r = differential_transmission(profile, delay, Direction::RightGoing, sidebands)?;
    let l = differential_transmission(profile, delay, Direction::LeftGoing, sidebands)?;
    let (r_tilde, l_tilde) = amendment(profile, delay, opts)?;
    let blocks = Blocks {
        e: Complex64::new(delay.amplitude(0, profile.omega_mod), 0.0),
        r,
        l,
        r_tilde,
        l_tilde,
    };
    Ok(assemble(sidebands, &blocks))
}

fn amendment(
    profile: &ModulationProfile,
    delay: &DelayLineModel,
    opts: &FloquetOptions,
) -> Result<(Complex64, Complex64)> {
    if !opts.amend || profile.k_max.is_none() {
        return Ok((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
    }
    let (r, l) = amendment_magnitudes(profile, delay)?;
    Ok((
        Complex64::from_polar(r, opts.amendment_phase),
        Complex64::from_polar(l, opts.amendment_phase),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirculatorMetrics {
    pub insertion_loss_db: f64,
    pub isolation_db: f64,
    pub return_loss_db: f64,
    pub largest_sideband_db: f64,
}

/// Figures of merit for a tone entering port 1. The circulating output is
/// whichever of ports 2 and 4 carries more power at `m = 0`; the other is the
/// reverse path.
pub fn metrics(s: &FloquetScatteringMatrix) -> CirculatorMetrics {
    let s21 = s.get(2, 1, 0).norm();
    let s41 = s.get(4, 1, 0).norm();
    let (circ_port, circ, rev) = if s41 >= s21 { (4, s41, s21) } else { (2, s21, s41) };
    let mm = s.sidebands() as i64;
    let largest = (-mm..=mm)
        .filter(|&m| m != 0)
        .map(|m| amplitude_db(s.get(circ_port, 1, m).norm()))
        .fold(DB_FLOOR, f64::max);
    CirculatorMetrics {
        insertion_loss_db: -amplitude_db(circ),
        isolation_db: amplitude_db(rev),
        return_loss_db: amplitude_db(s.get(1, 1, 0).norm()),
        largest_sideband_db: largest,
    }
}

/// Insertion loss and isolation from the `m = 0` entries only, avoiding the
/// full sideband computation.
pub fn carrier_metrics(
    profile: &ModulationProfile,
    delay: &DelayLineModel,
) -> Result<(f64, f64)> {
    profile.validate()?;
    delay.validate()?;
    let sum = TransmissionSum::new(profile, delay, Direction::RightGoing);
    let r0 = sum.at(0, profile.omega_mod * delay.tau);
    let e = Complex64::new(delay.amplitude(0, profile.omega_mod), 0.0);
    let a = ((e - r0) * 0.5).norm();
    let b = ((e + r0) * 0.5).norm();
    let (circ, rev) = if b >= a { (b, a) } else { (a, b) };
    Ok((-amplitude_db(circ), amplitude_db(rev)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfacePoint {
    pub sweep_param: f64,
    pub frequency_hz: f64,
    pub insertion_loss_db: f64,
    pub isolation_db: f64,
}

/// Insertion loss and isolation over (dispersion β, carrier frequency).
pub fn dispersion_surface(
    profile: &ModulationProfile,
    delay: &DelayLineModel,
    betas: &[f64],
    frequencies_hz: &[f64],
) -> Result<Vec<SurfacePoint>> {
    let grid: Vec<(f64, f64)> = betas
        .iter()
        .flat_map(|&b| frequencies_hz.iter().map(move |&f| (b, f)))
        .collect();
    grid.par_iter()
        .map(|&(beta, f)| {
            let d = DelayLineModel {
                beta,
                omega_center: 2.0 * PI * f,
                ..*delay
            };
            let (il, iso) = carrier_metrics(profile, &d)?;
            Ok(SurfacePoint {
                sweep_param: beta,
                frequency_hz: f,
                insertion_loss_db: il,
                isolation_db: iso,
            })
        })
        .collect()
}

/// Insertion loss and isolation over (harmonic cutoff, carrier frequency).
pub fn bandwidth_surface(
    profile: &ModulationProfile,
    delay: &DelayLineModel,
    k_maxes: &[u32],
    frequencies_hz: &[f64],
) -> Result<Vec<SurfacePoint>> {
    let waveform = match profile.waveform {
        WaveformKind::IdealSquare => WaveformKind::FourierTruncated,
        w => w,
    };
    let grid: Vec<(u32, f64)> = k_maxes
        .iter()
        .flat_map(|&k| frequencies_hz.iter().map(move |&f| (k, f)))
        .collect();
    grid.par_iter()
        .map(|&(k, f)| {
            let p = ModulationProfile {
                k_max: Some(k),
                waveform,
                ..*profile
            };
            let d = DelayLineModel {
                omega_center: 2.0 * PI * f,
                ..*delay
            };
            let (il, iso) = carrier_metrics(&p, &d)?;
            Ok(SurfacePoint {
                sweep_param: k as f64,
                frequency_hz: f,
                insertion_loss_db: il,
                isolation_db: iso,
            })
        })
        .collect()
}

pub fn write_surface_csv<W: Write>(out: W, points: &[SurfacePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sweep_param", "frequency_hz", "insertion_loss_db", "isolation_db"])?;
    for p in points {
        w.write_record([
            format!("{:.9e}", p.sweep_param),
            format!("{:.6}", p.frequency_hz),
            format!("{:.9}", p.insertion_loss_db),
            format!("{:.9}", p.isolation_db),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurfaceColumn {
    InsertionLoss,
    Isolation,
}

/// One panel of a surface: the sweep parameter under `param_name`, the
/// carrier frequency and a single figure of merit.
pub fn write_surface_panel_csv<W: Write>(
    out: W,
    points: &[SurfacePoint],
    param_name: &str,
    column: SurfaceColumn,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let name = match column {
        SurfaceColumn::InsertionLoss => "insertion_loss_db",
        SurfaceColumn::Isolation => "isolation_db",
    };
    w.write_record([param_name, "frequency_hz", name])?;
    for p in points {
        let v = match column {
            SurfaceColumn::InsertionLoss => p.insertion_loss_db,
            SurfaceColumn::Isolation => p.isolation_db,
        };
        w.write_record([
            format!("{:.9e}", p.sweep_param),
            format!("{:.6}", p.frequency_hz),
            format!("{v:.9}"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_metrics_csv<W: Write>(out: W, m: &CirculatorMetrics) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "insertion_loss_db",
        "isolation_db",
        "return_loss_db",
        "largest_sideband_db",
    ])?;
    w.write_record([
        format!("{:.6}", m.insertion_loss_db),
        format!("{:.6}", m.isolation_db),
        format!("{:.6}", m.return_loss_db),
        format!("{:.6}", m.largest_sideband_db),
    ])?;
    w.flush()?;
    Ok(())
}
