use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dc singularity: inductive admittance is undefined at omega = {omega}")]
    DcSingularity { omega: f64 },

    #[error("singular matrix at {frequency_hz} Hz (condition number {condition:.3e})")]
    Singular { frequency_hz: f64, condition: f64 },

    #[error(
        "match condition violated at omega = {omega:.6e} rad/s (relative mismatch {mismatch:.3e}); \
         required c = {required_c:.6e} F for this l0, or l0 = {required_l0:.6e} H for this c"
    )]
    MatchCondition {
        omega: f64,
        mismatch: f64,
        required_c: f64,
        required_l0: f64,
    },

    #[error("no modulation harmonics fit in bandwidth (omega_b = {omega_b:.4e} < omega_mod = {omega_mod:.4e})")]
    NoHarmonicsInBandwidth { omega_b: f64, omega_mod: f64 },

    #[error("transient simulation unstable: state magnitude {magnitude:.3e} at t = {time_s:.6e} s")]
    Unstable { time_s: f64, magnitude: f64 },

    #[error("steady state not reached: relative RMS change {change:.3e} between the last two windows")]
    NotSettled { change: f64 },

    #[error("window/period mismatch: {0}")]
    WindowMismatch(String),

    #[error("integration failed at t = {time_s:.6e} s: step size underflow (h = {step:.3e} s)")]
    StepUnderflow { time_s: f64, step: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
