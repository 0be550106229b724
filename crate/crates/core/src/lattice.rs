//! Four-port symmetric-lattice transfer switch.
//!
//! Nodes are labelled by the port attached to them (1–4, ground implicit).
//! Chords 1–4 are the tunable inductors, chords 5–8 the shunt matching
//! capacitors. Ports 1 and 3 face left, ports 2 and 4 face right; the
//! through state routes 1→2 / 3→4 and the crossed state routes 1→4 / 3→2.
//!
//! The nodal admittance is assembled as `Y = Aᵀ y A` from the chord
//! incidence matrix and the diagonal primitive admittance, and converted to
//! scattering parameters with `S = (I + Z0 Y)⁻¹ (I − Z0 Y)`.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::Matrix4;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::consts::amplitude_db;
use crate::error::{invalid, Error, Result};

/// Chord-to-node incidence matrix (8 chords × 4 nodes).
pub const INCIDENCE: [[i8; 4]; 8] = [
    [1, -1, 0, 0],
    [1, 0, 0, -1],
    [0, -1, 1, 0],
    [0, 0, 1, -1],
    [1, 0, 0, 0],
    [0, 1, 0, 0],
    [0, 0, 1, 0],
    [0, 0, 0, 1],
];

/// Condition-number ceiling for `I + Z0 Y`; above it the inversion is reported
/// as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Default number of points in a frequency sweep.
pub const DEFAULT_SWEEP_POINTS: usize = 801;

/// Default relative tolerance on the match condition for the first-order
/// expansion.
pub const DEFAULT_MATCH_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SwitchState {
    Through,
    Crossed,
}

/// Component values of the lattice switch.
///
/// In the through state the through-arm inductance is `l0` and the
/// crossed-arm inductance is `l0 / epsilon`; the crossed state swaps them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSwitchParams {
    pub l0: f64,
    pub epsilon: f64,
    pub c: f64,
    pub z0: f64,
    pub state: SwitchState,
}

impl LatticeSwitchParams {
    pub fn new(l0: f64, epsilon: f64, c: f64, z0: f64, state: SwitchState) -> Result<Self> {
        let p = Self {
            l0,
            epsilon,
            c,
            z0,
            state,
        };
        p.validate()?;
        Ok(p)
    }

    /// The switch of the reference design: 0.94 nH, 270 fF, ε = 0.025, 50 Ω.
    pub fn reference(state: SwitchState) -> Self {
        Self {
            l0: 0.94e-9,
            epsilon: 2.5e-2,
            c: 270e-15,
            z0: 50.0,
            state,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l0 > 0.0 && self.l0.is_finite()) {
            return Err(invalid("l0", format!("must be positive, got {}", self.l0)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(invalid("c", format!("must be positive, got {}", self.c)));
        }
        if !(self.z0 > 0.0 && self.z0.is_finite()) {
            return Err(invalid("z0", format!("must be positive, got {}", self.z0)));
        }
        // epsilon = 1 is the balanced bridge; it is allowed so the degenerate
        // state-independent case can be evaluated.
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(invalid(
                "epsilon",
                format!("must lie in (0, 1], got {}", self.epsilon),
            ));
        }
        Ok(())
    }

    /// `(l_through, l_crossed)` for the current state.
    pub fn arm_inductances(&self) -> (f64, f64) {
        let large = self.l0 / self.epsilon;
        match self.state {
            SwitchState::Through => (self.l0, large),
            SwitchState::Crossed => (large, self.l0),
        }
    }

    pub fn with_state(mut self, state: SwitchState) -> Self {
        self.state = state;
        self
    }
}

/// Scattering matrix of a four-port at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourPortS(pub Matrix4<Complex64>);

impl FourPortS {
    /// Entry `S_{out,in}` with 1-based port numbers.
    pub fn get(&self, out_port: usize, in_port: usize) -> Complex64 {
        self.0[(out_port - 1, in_port - 1)]
    }

    /// `max |(S†S − I)_{ij}|`.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.0.adjoint() * self.0 - Matrix4::identity();
        p.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |(S − Sᵀ)_{ij}|`.
    pub fn reciprocity_defect(&self) -> f64 {
        let d = self.0 - self.0.transpose();
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Relabels ports with `perm[i]` = new 1-based label of old port `i + 1`.
    pub fn permuted(&self, perm: [usize; 4]) -> Self {
        let mut m = Matrix4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m[(perm[i] - 1, perm[j] - 1)] = self.0[(i, j)];
            }
        }
        Self(m)
    }
}

/// Nodal admittance `Aᵀ diag(chords) A` for arbitrary chord admittances.
pub fn nodal_admittance(chords: &[Complex64; 8]) -> Matrix4<Complex64> {
    let mut y = Matrix4::<Complex64>::zeros();
    for (row, &yc) in INCIDENCE.iter().zip(chords) {
        for i in 0..4 {
            if row[i] == 0 {
                continue;
            }
            for j in 0..4 {
                if row[j] != 0 {
                    y[(i, j)] += yc * f64::from(row[i] * row[j]);
                }
            }
        }
    }
    y
}

/// Primitive (chord) admittances of the switch at `omega`.
pub fn chord_admittances(params: &LatticeSwitchParams, omega: f64) -> Result<[Complex64; 8]> {
    params.validate()?;
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::DcSingularity { omega });
    }
    let (lt, lc) = params.arm_inductances();
    let j = Complex64::i();
    let yt = 1.0 / (j * omega * lt);
    let yc = 1.0 / (j * omega * lc);
    let ycap = j * omega * params.c;
    let chords = [yt, yc, yc, yt, ycap, ycap, ycap, ycap];
    if chords.iter().any(|z| !z.is_finite()) {
        return Err(Error::DcSingularity { omega });
    }
    Ok(chords)
}

pub fn admittance_matrix(params: &LatticeSwitchParams, omega: f64) -> Result<Matrix4<Complex64>> {
    Ok(nodal_admittance(&chord_admittances(params, omega)?))
}

/// Converts a nodal admittance matrix to scattering parameters referenced to
/// `z0` at every port. `omega` is only used for error reporting.
pub fn s_from_admittance(y: &Matrix4<Complex64>, z0: f64, omega: f64) -> Result<FourPortS> {
    let id = Matrix4::<Complex64>::identity();
    let zy = y * Complex64::new(z0, 0.0);
    let lhs = id + zy;
    let rhs = id - zy;
    let sv = lhs.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let frequency_hz = omega / (2.0 * PI);
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::Singular {
            frequency_hz,
            condition,
        });
    }
    let s = lhs.lu().solve(&rhs).ok_or(Error::Singular {
        frequency_hz,
        condition,
    })?;
    Ok(FourPortS(s))
}

pub fn scattering_matrix(params: &LatticeSwitchParams, omega: f64) -> Result<FourPortS> {
    let y = admittance_matrix(params, omega)?;
    s_from_admittance(&y, params.z0, omega)
}

/// Relative mismatch of `l0 / 2c = Z0² / (1 + ω²τc²)` with `τc = Z0 c`.
pub fn match_mismatch(params: &LatticeSwitchParams, omega: f64) -> f64 {
    let tc = params.z0 * params.c;
    let target = params.z0 * params.z0 / (1.0 + (omega * tc).powi(2));
    (params.l0 / (2.0 * params.c) - target).abs() / target
}

/// Inductance that satisfies the match condition for the given `c`.
pub fn matched_l0(c: f64, z0: f64, omega: f64) -> f64 {
    let tc = z0 * c;
    2.0 * c * z0 * z0 / (1.0 + (omega * tc).powi(2))
}

/// Smaller root of the match condition solved for `c`, or `None` when
/// `ω l0 > Z0` leaves no real solution.
pub fn matched_c(l0: f64, z0: f64, omega: f64) -> Option<f64> {
    let disc = z0 * z0 - (l0 * omega).powi(2);
    if disc < 0.0 {
        return None;
    }
    Some((z0 - disc.sqrt()) / (l0 * omega * omega * z0))
}

/// First-order-in-ε magnitudes `[|S11|, |S21|, |S31|, |S41|]` without
/// checking the match condition.
///
/// The expansion is written for the crossed state (`l_t = l0/ε`, `l_c = l0`);
/// for a switch in the through state outputs 2 and 4 are relabelled.
pub fn first_order_magnitudes(params: &LatticeSwitchParams, omega: f64) -> [f64; 4] {
    let eps = params.epsilon;
    let x = omega * params.z0 * params.c;
    let j = Complex64::i();
    let s11 = eps * (x * x - 1.0).abs() / (2.0 * x);
    let s31 = eps * (x + j).norm_sqr() / (2.0 * x);
    let s41 = ((j + x) / (j - x) - j * eps * (x + j) * (x + j) / (2.0 * x)).norm();
    match params.state {
        SwitchState::Crossed => [s11, s11, s31, s41],
        SwitchState::Through => [s11, s41, s31, s11],
    }
}

/// First column magnitudes to first order in ε, valid only where the switch is
/// matched; returns [`Error::MatchCondition`] when the relative mismatch
/// exceeds `tolerance`.
pub fn scattering_first_order(
    params: &LatticeSwitchParams,
    omega: f64,
    tolerance: f64,
) -> Result<[f64; 4]> {
    params.validate()?;
    if !(omega > 0.0) {
        return Err(Error::DcSingularity { omega });
    }
    let mismatch = match_mismatch(params, omega);
    if mismatch > tolerance {
        return Err(Error::MatchCondition {
            omega,
            mismatch,
            required_c: matched_c(params.l0, params.z0, omega).unwrap_or(f64::NAN),
            required_l0: matched_l0(params.c, params.z0, omega),
        });
    }
    Ok(first_order_magnitudes(params, omega))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BodeFano {
    pub integral_lhs: f64,
    pub bound_rhs: f64,
    pub satisfied: bool,
}

/// Series-RL Bode–Fano check for a flat reflection level over `[f_lo, f_hi]`
/// (Hz) and total reflection outside it.
pub fn bode_fano_check(
    l_small: f64,
    z0: f64,
    gamma_db: f64,
    f_lo: f64,
    f_hi: f64,
) -> Result<BodeFano> {
    if !(f_hi > f_lo && f_lo >= 0.0) {
        return Err(invalid("band", format!("need f_hi > f_lo >= 0, got [{f_lo}, {f_hi}]")));
    }
    if !(gamma_db <= 0.0) {
        return Err(invalid("gamma_db", format!("must be <= 0 dB, got {gamma_db}")));
    }
    if !(l_small > 0.0 && z0 > 0.0) {
        return Err(invalid("l_small", "inductance and impedance must be positive"));
    }
    let gamma = 10f64.powf(gamma_db / 20.0);
    let integral_lhs = -gamma.ln() * 2.0 * PI * (f_hi - f_lo);
    let bound_rhs = PI * z0 / l_small;
    Ok(BodeFano {
        integral_lhs,
        bound_rhs,
        satisfied: integral_lhs < bound_rhs,
    })
}

/// Trapezoidal estimate of `−∫ ln|S11(ω)| dω` over `[f_lo, f_hi]`.
pub fn reflection_integral(
    params: &LatticeSwitchParams,
    f_lo: f64,
    f_hi: f64,
    points: usize,
) -> Result<f64> {
    let grid = FrequencyGrid::new(f_lo, f_hi, points)?;
    let vals = grid
        .frequencies()
        .map(|f| -> Result<f64> {
            let s = scattering_matrix(params, 2.0 * PI * f)?;
            Ok(-s.get(1, 1).norm().ln())
        })
        .collect::<Result<Vec<_>>>()?;
    let dw = 2.0 * PI * grid.step();
    let inner: f64 = vals[1..vals.len() - 1].iter().sum();
    Ok(dw * (inner + 0.5 * (vals[0] + vals[vals.len() - 1])))
}

/// Uniform frequency grid, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub start_hz: f64,
    pub stop_hz: f64,
    pub points: usize,
}

impl FrequencyGrid {
    pub fn new(start_hz: f64, stop_hz: f64, points: usize) -> Result<Self> {
        if !(start_hz > 0.0 && stop_hz > start_hz) {
            return Err(invalid(
                "frequency_grid",
                format!("need 0 < start < stop, got [{start_hz}, {stop_hz}]"),
            ));
        }
        if points < 2 {
            return Err(invalid("points", "a sweep needs at least two points"));
        }
        Ok(Self {
            start_hz,
            stop_hz,
            points,
        })
    }

    pub fn step(&self) -> f64 {
        (self.stop_hz - self.start_hz) / (self.points - 1) as f64
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        let step = self.step();
        (0..self.points).map(move |i| self.start_hz + step * i as f64)
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub frequency_hz: f64,
    pub s: FourPortS,
}

/// Exact scattering over a frequency grid, evaluated in parallel.
pub fn sweep(params: &LatticeSwitchParams, grid: &FrequencyGrid) -> Result<Vec<SweepPoint>> {
    let freqs: Vec<f64> = grid.frequencies().collect();
    freqs
        .par_iter()
        .map(|&f| {
            Ok(SweepPoint {
                frequency_hz: f,
                s: scattering_matrix(params, 2.0 * PI * f)?,
            })
        })
        .collect()
}

/// Writes a sweep as CSV: `frequency_hz`, then `sIJ_db`, `sIJ_rad` for every
/// entry in row-major order.
pub fn write_sweep_csv<W: Write>(out: W, points: &[SweepPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["frequency_hz".to_string()];
    for i in 1..=4 {
        for j in 1..=4 {
            header.push(format!("s{i}{j}_db"));
            header.push(format!("s{i}{j}_rad"));
        }
    }
    w.write_record(&header)?;
    for p in points {
        let mut rec = vec![format!("{:.6}", p.frequency_hz)];
        for i in 1..=4 {
            for j in 1..=4 {
                let z = p.s.get(i, j);
                rec.push(format!("{:.9}", amplitude_db(z.norm())));
                rec.push(format!("{:.9}", z.arg()));
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const W6: f64 = 2.0 * PI * 6e9;

    #[test]
    fn incidence_rows_have_single_endpoints() {
        for row in INCIDENCE {
            assert!(row.iter().filter(|&&v| v == 1).count() <= 1);
            assert!(row.iter().filter(|&&v| v == -1).count() <= 1);
        }
    }

    #[test]
    fn admittance_is_symmetric_and_imaginary() {
        let p = LatticeSwitchParams::reference(SwitchState::Crossed);
        let y = admittance_matrix(&p, W6).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(y[(i, j)], y[(j, i)]);
                assert_eq!(y[(i, j)].re, 0.0);
            }
        }
    }

    #[test]
    fn dc_is_rejected() {
        let p = LatticeSwitchParams::reference(SwitchState::Through);
        assert!(matches!(
            admittance_matrix(&p, 0.0),
            Err(Error::DcSingularity { .. })
        ));
    }

    #[test]
    fn invalid_params_are_rejected() {
        assert!(LatticeSwitchParams::new(-1e-9, 0.1, 1e-13, 50.0, SwitchState::Through).is_err());
        assert!(LatticeSwitchParams::new(1e-9, 0.0, 1e-13, 50.0, SwitchState::Through).is_err());
        assert!(LatticeSwitchParams::new(1e-9, 0.1, 0.0, 50.0, SwitchState::Through).is_err());
        assert!(LatticeSwitchParams::new(1e-9, 0.1, 1e-13, 0.0, SwitchState::Through).is_err());
    }

    #[test]
    fn singular_inversion_reports_frequency() {
        // I + Z0 Y with Y = -I/Z0 is exactly singular.
        let y = Matrix4::<Complex64>::identity() * Complex64::new(-1.0 / 50.0, 0.0);
        match s_from_admittance(&y, 50.0, 2.0 * PI * 5e9) {
            Err(Error::Singular { frequency_hz, .. }) => {
                assert!((frequency_hz - 5e9).abs() < 1e-3)
            }
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn balanced_bridge_is_state_independent() {
        let mut p = LatticeSwitchParams::reference(SwitchState::Through);
        p.epsilon = 1.0;
        let a = scattering_matrix(&p, W6).unwrap();
        let b = scattering_matrix(&p.with_state(SwitchState::Crossed), W6).unwrap();
        assert!((a.0 - b.0).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn first_order_zero_at_corner_frequency() {
        let c = 270e-15;
        let z0 = 50.0;
        let w = 1.0 / (z0 * c);
        let l0 = matched_l0(c, z0, w);
        let p = LatticeSwitchParams::new(l0, 0.025, c, z0, SwitchState::Crossed).unwrap();
        let m = scattering_first_order(&p, w, DEFAULT_MATCH_TOLERANCE).unwrap();
        assert!(m[0].abs() < 1e-15 && m[1].abs() < 1e-15);
        assert!((m[2] - 0.025).abs() < 1e-15);
    }

    #[test]
    fn first_order_rejects_unmatched_params() {
        let p = LatticeSwitchParams::reference(SwitchState::Crossed);
        match scattering_first_order(&p, W6, DEFAULT_MATCH_TOLERANCE) {
            Err(Error::MatchCondition {
                required_c,
                required_l0,
                ..
            }) => {
                let fixed = LatticeSwitchParams { l0: required_l0, ..p };
                assert!(match_mismatch(&fixed, W6) < 1e-12);
                let fixed = LatticeSwitchParams { c: required_c, ..p };
                assert!(match_mismatch(&fixed, W6) < 1e-9);
            }
            other => panic!("expected match error, got {other:?}"),
        }
    }

    #[test]
    fn bode_fano_reference_numbers() {
        let bf = bode_fano_check(1e-9, 50.0, -20.0, 0.0, 8e9).unwrap();
        assert!((bf.integral_lhs - 1.157e11).abs() / 1.157e11 < 1e-3);
        assert!((bf.bound_rhs - 1.571e11).abs() / 1.571e11 < 1e-3);
        assert!(bf.satisfied);

        let unity = bode_fano_check(1e-9, 50.0, 0.0, 0.0, 8e9).unwrap();
        assert_eq!(unity.integral_lhs, 0.0);
        assert!(unity.satisfied);

        let big = bode_fano_check(2e-9, 50.0, -20.0, 0.0, 8e9).unwrap();
        assert!(!big.satisfied);
        assert!(bode_fano_check(1e-9, 50.0, -20.0, 8e9, 4e9).is_err());
        assert!(bode_fano_check(1e-9, 50.0, 3.0, 4e9, 8e9).is_err());
    }

    #[test]
    fn sweep_csv_has_header_and_rows() {
        let p = LatticeSwitchParams::reference(SwitchState::Through);
        let grid = FrequencyGrid::new(4e9, 8e9, 5).unwrap();
        let pts = sweep(&p, &grid).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &pts).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("frequency_hz,s11_db,s11_rad,s12_db"));
        assert_eq!(header.split(',').count(), 33);
        assert_eq!(lines.count(), 5);
    }
}
