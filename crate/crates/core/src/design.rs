//! Modulation-rate trade-off and junction sizing.
//!
//! Slow modulation needs long delay lines (large chip, more dielectric loss);
//! fast modulation leaves fewer harmonics inside a fixed modulation bandwidth
//! and makes each sideband step see more dispersion. [`loss_budget`] and
//! [`fig3_grid`] evaluate both sides of that trade.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::consts::{FLUX_QUANTUM, SPEED_OF_LIGHT};
use crate::error::{invalid, Error, Result};
use crate::floquet::{carrier_metrics, DelayLineModel, ModulationProfile};

/// Fixed chip overhead added to the meander area (m²).
pub const CHIP_OVERHEAD_M2: f64 = 2e-6;

/// Modulation rate at which the quoted fractional dispersion was measured (Hz).
pub const DISPERSION_REFERENCE_HZ: f64 = 80e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DielectricEvaluation {
    BandTop,
    BandAverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub omega_mod: f64,
    pub tan_delta: f64,
    /// Fractional group-velocity dispersion per 80 MHz step.
    pub dispersion_per_reference: f64,
    /// Modulation bandwidth (rad/s); `None` is unbounded.
    pub omega_b: Option<f64>,
    pub pitch: f64,
    pub signal_band: [f64; 2],
    /// Propagation speed override (m/s); the default is `2c0/5`.
    pub speed: Option<f64>,
    pub dielectric: DielectricEvaluation,
}

impl DesignPoint {
    pub fn new(omega_mod: f64) -> Self {
        Self {
            omega_mod,
            tan_delta: 1e-5,
            dispersion_per_reference: 3e-4,
            omega_b: Some(2.0 * PI * 2e9),
            pitch: 60e-6,
            signal_band: [2.0 * PI * 4e9, 2.0 * PI * 8e9],
            speed: None,
            dielectric: DielectricEvaluation::BandTop,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_mod > 0.0 && self.omega_mod.is_finite()) {
            return Err(invalid("omega_mod", "must be positive and finite"));
        }
        if !(self.tan_delta >= 0.0) {
            return Err(invalid("tan_delta", "must be non-negative"));
        }
        if !self.dispersion_per_reference.is_finite() {
            return Err(invalid("dispersion_per_reference", "must be finite"));
        }
        if !(self.pitch > 0.0) {
            return Err(invalid("pitch", "must be positive"));
        }
        let [lo, hi] = self.signal_band;
        if !(hi > lo && lo > 0.0) {
            return Err(invalid("signal_band", "need 0 < lo < hi"));
        }
        if let Some(v) = self.speed {
            if !(v > 0.0) {
                return Err(invalid("speed", "must be positive"));
            }
        }
        if let Some(b) = self.omega_b {
            if !(b > 0.0) {
                return Err(invalid("omega_b", "must be positive"));
            }
        }
        Ok(())
    }

    /// `β(Ω)`: dispersion per sideband step grows with the step size.
    pub fn beta(&self) -> f64 {
        self.dispersion_per_reference * (self.omega_mod / (2.0 * PI)) / DISPERSION_REFERENCE_HZ
    }

    /// Largest odd integer not above `Ω_b/Ω`; `None` for unbounded bandwidth.
    pub fn k_max(&self) -> Result<Option<u32>> {
        let Some(b) = self.omega_b else {
            return Ok(None);
        };
        if b < self.omega_mod {
            return Err(Error::NoHarmonicsInBandwidth {
                omega_b: b,
                omega_mod: self.omega_mod,
            });
        }
        // Ratios like 2 GHz / 80 MHz must land on 25, not 24.999…
        let ratio = (b / self.omega_mod * (1.0 + 1e-12)).floor() as u64;
        let k = if ratio.is_multiple_of(2) { ratio - 1 } else { ratio };
        Ok(Some(u32::try_from(k).map_err(|_| invalid("omega_b", "too many harmonics"))?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayGeometry {
    pub tau_s: f64,
    pub length_m: f64,
    pub area_m2: f64,
}

pub fn delay_length_and_area(point: &DesignPoint) -> Result<DelayGeometry> {
    point.validate()?;
    let tau = PI / (2.0 * point.omega_mod);
    let length = match point.speed {
        Some(v) => v * tau,
        None => PI * SPEED_OF_LIGHT / (5.0 * point.omega_mod),
    };
    Ok(DelayGeometry {
        tau_s: tau,
        length_m: length,
        area_m2: 2.0 * length * point.pitch + CHIP_OVERHEAD_M2,
    })
}

/// Attenuation in dB of a line with delay `tau` at angular frequency `omega`.
pub fn dielectric_loss_db(omega: f64, tau: f64, tan_delta: f64) -> f64 {
    20.0 / std::f64::consts::LN_10 * (omega * tau * tan_delta / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossBudget {
    pub k_max: Option<u32>,
    pub beta: f64,
    pub dielectric_db: f64,
    pub dispersion_db: f64,
    pub finite_bw_db: f64,
    pub total_db: f64,
}

/// Insertion-loss contributions at one modulation rate.
///
/// Finite bandwidth and dispersion interact, so they are split incrementally:
/// `finite_bw_db` is the loss with the harmonic cutoff alone and
/// `dispersion_db` the extra loss when dispersion is switched on as well.
pub fn loss_budget(point: &DesignPoint) -> Result<LossBudget> {
    let geo = delay_length_and_area(point)?;
    let k_max = point.k_max()?;
    let beta = point.beta();
    let [lo, hi] = point.signal_band;
    let omega_loss = match point.dielectric {
        DielectricEvaluation::BandTop => hi,
        DielectricEvaluation::BandAverage => 0.5 * (lo + hi),
    };
    let dielectric_db = dielectric_loss_db(omega_loss, geo.tau_s, point.tan_delta);

    let profile = match k_max {
        Some(k) => ModulationProfile::truncated(point.omega_mod, PI / 2.0, k),
        None => ModulationProfile::ideal(point.omega_mod, PI / 2.0),
    };
    let ideal = DelayLineModel::ideal(geo.tau_s);
    let dispersive = DelayLineModel { beta, ..ideal };
    let finite_bw_db = carrier_metrics(&profile, &ideal)?.0;
    let joint_db = carrier_metrics(&profile, &dispersive)?.0;
    Ok(LossBudget {
        k_max,
        beta,
        dielectric_db,
        dispersion_db: joint_db - finite_bw_db,
        finite_bw_db,
        total_db: dielectric_db + joint_db,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig3Row {
    pub omega_mod_hz: f64,
    pub area_mm2: f64,
    pub dielectric_db: f64,
    pub dispersion_db: f64,
    pub finite_bw_db: f64,
    pub total_db: f64,
}

/// Loss budget and area on a log-spaced grid of modulation frequencies (Hz).
pub fn fig3_grid(base: &DesignPoint, f_lo: f64, f_hi: f64, points: usize) -> Result<Vec<Fig3Row>> {
    if !(f_hi > f_lo && f_lo > 0.0) || points < 2 {
        return Err(invalid("grid", "need 0 < f_lo < f_hi and at least two points"));
    }
    let ratio = (f_hi / f_lo).ln() / (points - 1) as f64;
    (0..points)
        .into_par_iter()
        .map(|i| {
            let f = f_lo * (ratio * i as f64).exp();
            let p = DesignPoint {
                omega_mod: 2.0 * PI * f,
                ..*base
            };
            let geo = delay_length_and_area(&p)?;
            let b = loss_budget(&p)?;
            Ok(Fig3Row {
                omega_mod_hz: f,
                area_mm2: geo.area_m2 * 1e6,
                dielectric_db: b.dielectric_db,
                dispersion_db: b.dispersion_db,
                finite_bw_db: b.finite_bw_db,
                total_db: b.total_db,
            })
        })
        .collect()
}

pub fn write_fig3_csv<W: Write>(out: W, rows: &[Fig3Row]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "omega_mod_hz",
        "area_mm2",
        "dielectric_db",
        "dispersion_db",
        "finite_bw_db",
        "total_db",
    ])?;
    for r in rows {
        w.write_record([
            format!("{:.6}", r.omega_mod_hz),
            format!("{:.9}", r.area_mm2),
            format!("{:.9e}", r.dielectric_db),
            format!("{:.9e}", r.dispersion_db),
            format!("{:.9e}", r.finite_bw_db),
            format!("{:.9e}", r.total_db),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JunctionRule {
    pub epsilon: f64,
    /// Top of the operating band (Hz).
    pub f_max: f64,
    pub min_feature: f64,
    /// Pinned critical current; `None` uses the plasma-rule minimum.
    pub critical_current: Option<f64>,
    /// Junction capacitance per area (F/m²).
    pub specific_capacitance: f64,
    /// Series SQUID count quoted alongside the computed one.
    pub reported_n_squids: u32,
}

impl Default for JunctionRule {
    fn default() -> Self {
        Self {
            epsilon: 2.5e-2,
            f_max: 10e9,
            min_feature: 2e-6,
            critical_current: Some(9e-6),
            specific_capacitance: 45e-15 / 1e-12,
            reported_n_squids: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JunctionDesign {
    pub omega_p_min: f64,
    /// Minimum critical current density (A/m²).
    pub j_c_min: f64,
    pub i0_plasma_min: f64,
    pub i0: f64,
    pub josephson_inductance: f64,
    pub n_squids: u32,
    pub n_squids_reported: u32,
    pub p1db_dbm: f64,
}

/// Compression point from square-law scaling of a −53 dBm reference at 35 µA.
pub fn p1db_dbm(i0: f64) -> f64 {
    -53.0 + 10.0 * (i0 / 35e-6).powi(2).log10()
}

pub fn josephson_inductance(i0: f64) -> f64 {
    FLUX_QUANTUM / (2.0 * PI * i0)
}

/// Junction sizing. The flux-biased junctions' plasma frequency drops by √ε,
/// so the unbiased value must reach `2π·f_max/√ε`.
pub fn junction_design(rule: &JunctionRule, target_l: f64) -> Result<JunctionDesign> {
    if !(rule.epsilon > 0.0 && rule.epsilon < 1.0) {
        return Err(invalid("epsilon", format!("must lie in (0, 1), got {}", rule.epsilon)));
    }
    if !(target_l > 0.0) {
        return Err(invalid("target_l", "must be positive"));
    }
    if !(rule.f_max > 0.0 && rule.min_feature > 0.0 && rule.specific_capacitance > 0.0) {
        return Err(invalid("f_max", "band edge, feature size and capacitance must be positive"));
    }
    if let Some(i) = rule.critical_current {
        if !(i > 0.0) {
            return Err(invalid("critical_current", "must be positive"));
        }
    }
    let omega_p_min = 2.0 * PI * rule.f_max / rule.epsilon.sqrt();
    // ω_p² = 2π J_c / (Φ0 C_s)
    let j_c_min = omega_p_min * omega_p_min * FLUX_QUANTUM * rule.specific_capacitance / (2.0 * PI);
    let i0_plasma_min = j_c_min * rule.min_feature * rule.min_feature;
    let i0 = rule.critical_current.unwrap_or(i0_plasma_min);
    let lj = josephson_inductance(i0);
    Ok(JunctionDesign {
        omega_p_min,
        j_c_min,
        i0_plasma_min,
        i0,
        josephson_inductance: lj,
        n_squids: (target_l / lj).round() as u32,
        n_squids_reported: rule.reported_n_squids,
        p1db_dbm: p1db_dbm(i0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_at_80_mhz() {
        let g = delay_length_and_area(&DesignPoint::new(2.0 * PI * 80e6)).unwrap();
        assert!((g.tau_s - 3.125e-9).abs() < 1e-18);
        assert!((g.length_m - 0.375).abs() / 0.375 < 0.01);
        assert!(g.area_m2 * 1e6 < 49.0);
    }

    #[test]
    fn geometry_at_15_mhz() {
        let g = delay_length_and_area(&DesignPoint::new(2.0 * PI * 15e6)).unwrap();
        assert!((g.length_m - 2.0).abs() < 0.01);
        assert!((g.area_m2 * 1e6 - 242.0).abs() < 0.5);
    }

    #[test]
    fn doubling_omega_halves_length() {
        let a = delay_length_and_area(&DesignPoint::new(1e9)).unwrap();
        let b = delay_length_and_area(&DesignPoint::new(2e9)).unwrap();
        assert!((a.length_m - 2.0 * b.length_m).abs() < 1e-15);
        let meander = |g: &DelayGeometry| g.area_m2 - CHIP_OVERHEAD_M2;
        assert!((meander(&a) - 2.0 * meander(&b)).abs() < 1e-18);
    }

    #[test]
    fn speed_override() {
        let mut p = DesignPoint::new(2.0 * PI * 80e6);
        p.speed = Some(1e8);
        let g = delay_length_and_area(&p).unwrap();
        assert!((g.length_m - 1e8 * g.tau_s).abs() < 1e-12);
    }

    #[test]
    fn k_max_from_bandwidth() {
        let p = DesignPoint::new(2.0 * PI * 80e6);
        assert_eq!(p.k_max().unwrap(), Some(25));
        assert_eq!(DesignPoint::new(2.0 * PI * 100e6).k_max().unwrap(), Some(19));
        assert!(matches!(
            DesignPoint::new(2.0 * PI * 3e9).k_max(),
            Err(Error::NoHarmonicsInBandwidth { .. })
        ));
    }

    #[test]
    fn all_channels_off() {
        let mut p = DesignPoint::new(2.0 * PI * 80e6);
        p.tan_delta = 0.0;
        p.dispersion_per_reference = 0.0;
        p.omega_b = None;
        let b = loss_budget(&p).unwrap();
        assert_eq!(b.total_db, 0.0);
    }

    #[test]
    fn budget_at_80_mhz() {
        let b = loss_budget(&DesignPoint::new(2.0 * PI * 80e6)).unwrap();
        assert!(b.total_db < 0.1, "{b:?}");
        assert!((b.dielectric_db - 0.00682).abs() < 1e-4);
    }

    #[test]
    fn band_average_is_lower() {
        let mut p = DesignPoint::new(2.0 * PI * 80e6);
        let top = loss_budget(&p).unwrap().dielectric_db;
        p.dielectric = DielectricEvaluation::BandAverage;
        let avg = loss_budget(&p).unwrap().dielectric_db;
        assert!((avg / top - 0.75).abs() < 1e-12);
    }

    #[test]
    fn junction_reference_points() {
        let rule = JunctionRule::default();
        let d = junction_design(&rule, 1e-9).unwrap();
        assert!((d.p1db_dbm + 64.8).abs() < 0.1);
        assert!((d.josephson_inductance - 36.6e-12).abs() < 0.1e-12);
        assert_eq!(d.n_squids, 27);
        assert_eq!(d.n_squids_reported, 40);
        assert!((d.i0_plasma_min - 9.4e-6).abs() < 0.2e-6, "{}", d.i0_plasma_min);
        assert!((p1db_dbm(35e-6) + 53.0).abs() < 1e-12);
    }

    #[test]
    fn junction_rejects_bad_inputs() {
        let mut rule = JunctionRule::default();
        assert!(junction_design(&rule, 0.0).is_err());
        rule.epsilon = 1.0;
        assert!(junction_design(&rule, 1e-9).is_err());
    }
}
