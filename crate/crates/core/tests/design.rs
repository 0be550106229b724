use std::f64::consts::PI;

use modcirc::consts::SPEED_OF_LIGHT;
use modcirc::design::*;
use proptest::prelude::*;

fn grid() -> Vec<Fig3Row> {
    fig3_grid(&DesignPoint::new(2.0 * PI * 80e6), 10e6, 1e9, 121).unwrap()
}

#[test]
fn fig3_curves_have_the_expected_shape() {
    let rows = grid();
    for w in rows.windows(2) {
        assert!(w[1].area_mm2 < w[0].area_mm2);
        assert!(w[1].dielectric_db < w[0].dielectric_db);
        assert!(w[1].finite_bw_db >= w[0].finite_bw_db - 1e-12, "at {} Hz", w[1].omega_mod_hz);
    }
    let (imin, best) = rows
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_db.total_cmp(&b.1.total_db))
        .unwrap();
    assert!(imin > 0 && imin < rows.len() - 1);
    let ties = rows.iter().filter(|r| r.total_db == best.total_db).count();
    assert_eq!(ties, 1);
}

#[test]
fn total_loss_has_a_single_local_minimum() {
    let rows = grid();
    let minima: Vec<f64> = (1..rows.len() - 1)
        .filter(|&i| rows[i].total_db < rows[i - 1].total_db && rows[i].total_db < rows[i + 1].total_db)
        .map(|i| rows[i].omega_mod_hz)
        .collect();
    assert_eq!(minima.len(), 1, "local minima at {minima:?} Hz");
}

#[test]
fn area_follows_the_meander_model() {
    // Independent arithmetic: d = π c0 / (5Ω), area = 2 d p + 2 mm².
    for f in [15e6, 80e6, 300e6] {
        let w = 2.0 * PI * f;
        let g = delay_length_and_area(&DesignPoint::new(w)).unwrap();
        let d = PI * SPEED_OF_LIGHT / (5.0 * w);
        assert!((g.length_m - d).abs() < 1e-12);
        assert!((g.area_m2 - (2.0 * d * 60e-6 + 2e-6)).abs() < 1e-15);
        assert!((g.tau_s - 1.0 / (4.0 * f)).abs() < 1e-21);
    }
}

#[test]
fn dielectric_term_matches_exponential_attenuation() {
    let tau = 3.125e-9;
    let w = 2.0 * PI * 8e9;
    let a = (-w * tau * 1e-5 / 2.0).exp();
    assert!((dielectric_loss_db(w, tau, 1e-5) + 20.0 * a.log10()).abs() < 1e-15);
}

#[test]
fn bandwidth_below_modulation_rate_is_an_error() {
    let p = DesignPoint {
        omega_b: Some(2.0 * PI * 50e6),
        ..DesignPoint::new(2.0 * PI * 80e6)
    };
    assert!(loss_budget(&p).is_err());
}

proptest! {
    #[test]
    fn compression_point_scales_as_current_squared(a in 1e-6..1e-4f64, b in 1e-6..1e-4f64) {
        let d = p1db_dbm(a) - p1db_dbm(b);
        prop_assert!((d - 20.0 * (a / b).log10()).abs() < 1e-9);
    }

    #[test]
    fn doubling_the_rate_halves_the_meander(f in 5e6..2e9f64) {
        let one = delay_length_and_area(&DesignPoint::new(2.0 * PI * f)).unwrap();
        let two = delay_length_and_area(&DesignPoint::new(4.0 * PI * f)).unwrap();
        prop_assert!((one.length_m - 2.0 * two.length_m).abs() < 1e-12 * one.length_m);
        prop_assert!(((one.area_m2 - 2e-6) - 2.0 * (two.area_m2 - 2e-6)).abs() < 1e-12 * one.area_m2);
    }
}
