//! Simulation and design-verification workbench for an actively modulated,
//! delay-based four-port microwave circulator.
//!
//! The crate is organised by subsystem:
//!
//! - [`lattice`]: exact and first-order scattering of the symmetric-lattice
//!   transfer switch built from tunable inductors and matching capacitors.
//! - [`floquet`]: multi-sideband scattering of the switch–delay–switch network,
//!   including group-delay dispersion, dielectric loss and finite modulation
//!   bandwidth.
//! - [`waveform`]: band-limited square-wave flux drives shared by the
//!   time-domain simulators.
//! - [`transient`]: fixed-step trapezoidal co-simulation of two flux-modulated
//!   lattice switches joined by matched delay lines.
//! - [`design`]: closed-form modulation-rate / chip-area / loss trade-off and
//!   junction design rules.
//! - [`noise`]: emission from a flux-driven, resistively loaded dc-SQUID and
//!   the resulting cavity photon occupancy bound.

// `!(x > 0.0)` is used throughout so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod consts;
pub mod design;
pub mod error;
pub mod floquet;
pub mod lattice;
pub mod noise;
pub mod ode;
pub mod spectral;
pub mod transient;
pub mod waveform;

pub use error::{Error, Result};
pub use num_complex::Complex64;
