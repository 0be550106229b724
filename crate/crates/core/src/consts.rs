//! Physical constants (SI, CODATA 2018 exact values where defined).

/// Magnetic flux quantum h / 2e (Wb).
pub const FLUX_QUANTUM: f64 = 2.067_833_848_461_929e-15;

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Amplitude floor used when a perfectly vanishing transmission has to be
/// written to a file in dB.
pub const DB_FLOOR: f64 = -200.0;

/// `20 log10 |x|`, clamped below at [`DB_FLOOR`].
pub fn amplitude_db(x: f64) -> f64 {
    let db = 20.0 * x.abs().log10();
    if db.is_nan() || db < DB_FLOOR {
        DB_FLOOR
    } else {
        db
    }
}

/// `10 log10 p`, clamped below at [`DB_FLOOR`].
pub fn power_db(p: f64) -> f64 {
    let db = 10.0 * p.log10();
    if db.is_nan() || db < DB_FLOOR {
        DB_FLOOR
    } else {
        db
    }
}
