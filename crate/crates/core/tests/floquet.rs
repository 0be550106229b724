use std::f64::consts::{FRAC_PI_2, PI};

use modcirc::consts::amplitude_db;
use modcirc::floquet::*;
use modcirc::Complex64;
use proptest::prelude::*;

const OMEGA: f64 = 2.0 * PI * 80e6;

fn quarter_period() -> f64 {
    FRAC_PI_2 / OMEGA
}

/// `r′_0` written out as the plain truncated sum
/// `(4/π²) Σ_{odd |k| ≤ K} e^{jk(Ωτ − θ)} / k²`.
fn r0_direct(omega_tau: f64, theta: f64, k_max: i64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut k = k_max - (1 - k_max % 2);
    while k >= 1 {
        let kf = k as f64;
        let ph = kf * (omega_tau - theta);
        acc += Complex64::new(2.0 * ph.cos() / (kf * kf), 0.0);
        k -= 2;
    }
    acc * (4.0 / (PI * PI))
}

#[test]
fn basel_partial_sum_converges() {
    let s = r0_direct(0.0, 0.0, 99_999).re;
    assert!((1.0 - s).abs() < 1e-4, "{s}");
    let p = ModulationProfile::truncated(OMEGA, FRAC_PI_2, 99_999);
    let r = differential_transmission(&p, &DelayLineModel::ideal(quarter_period()), Direction::RightGoing, 0)
        .unwrap();
    assert!((r[0].re - s).abs() < 1e-9 && r[0].im.abs() < 1e-9);
}

#[test]
fn truncated_carrier_matches_direct_sum() {
    let delay = DelayLineModel::ideal(quarter_period());
    for &(theta, k) in &[(FRAC_PI_2, 25u32), (0.4, 25), (1.1, 7), (-2.0, 61)] {
        let p = ModulationProfile::truncated(OMEGA, theta, k);
        let r = differential_transmission(&p, &delay, Direction::RightGoing, 0).unwrap()[0];
        let want = r0_direct(FRAC_PI_2, theta, i64::from(k));
        assert!((r - want).norm() < 1e-12, "θ = {theta}, K = {k}: {r} vs {want}");
    }
}

#[test]
fn twenty_five_harmonics_cost_seven_hundredths_of_a_db() {
    let want = -amplitude_db(((1.0 + r0_direct(FRAC_PI_2, FRAC_PI_2, 25)) * 0.5).norm());
    let p = ModulationProfile::truncated(OMEGA, FRAC_PI_2, 25);
    let (il, _) = carrier_metrics(&p, &DelayLineModel::ideal(quarter_period())).unwrap();
    assert!((il - want).abs() < 1e-12);
    assert!((il - 0.07).abs() < 0.01, "{il}");
}

#[test]
fn ideal_point_is_strongly_nonreciprocal() {
    let p = ModulationProfile::ideal(OMEGA, FRAC_PI_2);
    let opts = FloquetOptions {
        sidebands: Some(64),
        ..Default::default()
    };
    let s = circulator_scattering(&p, &DelayLineModel::ideal(quarter_period()), &opts).unwrap();
    let fwd = amplitude_db(s.get(2, 1, 0).norm());
    let back = amplitude_db(s.get(1, 2, 0).norm());
    assert!((fwd - back).abs() >= 60.0, "{fwd} vs {back}");
}

#[test]
fn loss_rises_with_dispersion_and_falls_with_bandwidth() {
    let delay = DelayLineModel::ideal(quarter_period());
    let ideal = ModulationProfile::ideal(OMEGA, FRAC_PI_2);
    let mut last = -1.0;
    for i in 0..=20 {
        let d = DelayLineModel {
            beta: 5e-5 * i as f64,
            ..delay
        };
        let (il, _) = carrier_metrics(&ideal, &d).unwrap();
        assert!(il >= last - 1e-12, "β step {i}: {il} < {last}");
        last = il;
    }
    let mut last = f64::INFINITY;
    for k in (1..=99).step_by(2) {
        let (il, _) = carrier_metrics(&ModulationProfile::truncated(OMEGA, FRAC_PI_2, k), &delay).unwrap();
        assert!(il <= last + 1e-12, "K = {k}: {il} > {last}");
        last = il;
    }
}

#[test]
fn surfaces_cover_the_grid_in_order() {
    let p = ModulationProfile::ideal(OMEGA, FRAC_PI_2);
    let d = DelayLineModel::ideal(quarter_period());
    let freqs = [4e9, 6e9, 8e9];
    let s = dispersion_surface(&p, &d, &[0.0, 3e-4], &freqs).unwrap();
    assert_eq!(s.len(), 6);
    assert_eq!((s[4].sweep_param, s[4].frequency_hz), (3e-4, 6e9));
    assert!(s[0].insertion_loss_db.abs() < 1e-9);
    let b = bandwidth_surface(&p, &d, &[25, 99], &freqs).unwrap();
    assert!(b[0].insertion_loss_db > b[3].insertion_loss_db);
}

#[test]
fn default_sidebands_conserve_power_at_generic_points() {
    for i in 0..12 {
        let theta = -3.0 + 0.5 * i as f64;
        let ot = 0.1 + 0.25 * i as f64;
        let p = ModulationProfile::ideal(OMEGA, theta);
        let s = circulator_scattering(&p, &DelayLineModel::ideal(ot / OMEGA), &FloquetOptions::default())
            .unwrap();
        for c in 1..=4 {
            assert!((s.column_power(c) - 1.0).abs() <= 1e-3, "θ = {theta}, Ωτ = {ot}, column {c}");
        }
    }
}

fn generic_point() -> impl Strategy<Value = (f64, f64)> {
    (-PI..PI, 0.05..3.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn only_the_product_omega_tau_matters((theta, ot) in generic_point(), k in 0u32..40) {
        let k = 2 * k + 1;
        let a = ModulationProfile::truncated(OMEGA, theta, k);
        let b = ModulationProfile { omega_mod: 2.0 * OMEGA, ..a };
        let opts = FloquetOptions { sidebands: Some(2 * k as usize + 4), ..Default::default() };
        let sa = circulator_scattering(&a, &DelayLineModel::ideal(ot / OMEGA), &opts).unwrap();
        let sb = circulator_scattering(&b, &DelayLineModel::ideal(0.5 * ot / OMEGA), &opts).unwrap();
        let m = opts.sidebands.unwrap() as i64;
        for o in 1..=4 {
            for i in 1..=4 {
                for s in -m..=m {
                    prop_assert!((sa.get(o, i, s) - sb.get(o, i, s)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn flipping_theta_swaps_outputs_two_and_four(theta in -PI..PI, k in 0u32..40) {
        let k = 2 * k + 1;
        let delay = DelayLineModel::ideal(quarter_period());
        let opts = FloquetOptions { sidebands: Some(2 * k as usize + 4), ..Default::default() };
        let plus = circulator_scattering(&ModulationProfile::truncated(OMEGA, theta, k), &delay, &opts).unwrap();
        let minus = circulator_scattering(&ModulationProfile::truncated(OMEGA, -theta, k), &delay, &opts).unwrap();
        let swap = |p: usize| match p { 2 => 4, 4 => 2, p => p };
        for i in [1, 3] {
            for o in 1..=4 {
                let a = minus.get(o, i, 0).norm();
                let b = plus.get(swap(o), i, 0).norm();
                prop_assert!((a - b).abs() < 1e-12, "S{}{} {} vs {}", o, i, a, b);
            }
        }
    }

    #[test]
    fn lossless_unbounded_columns_carry_unit_power((theta, ot) in generic_point(), m in 64usize..=512) {
        let p = ModulationProfile::ideal(OMEGA, theta);
        let opts = FloquetOptions { sidebands: Some(m), ..Default::default() };
        let s = circulator_scattering(&p, &DelayLineModel::ideal(ot / OMEGA), &opts).unwrap();
        for i in 1..=4 {
            let power = s.column_power(i);
            prop_assert!((power - 1.0).abs() <= 1e-3, "M = {}, column {}: {}", m, i, power);
        }
    }
}
