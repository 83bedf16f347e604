//! Stochastic FitzHugh-Nagumo neuron in the excitable regime and the
//! leaky integrate-and-fire models embedded in it.
//!
//! The crate is organised bottom-up:
//!
//! * [`sde_engine`]: seeded Brownian paths, Heun/Euler-Maruyama stepping, events.
//! * [`fhn_model`]: vector fields, fixed point, eigenstructure, dissipativity.
//! * [`linearization`]: shifted/linearized systems, normal form, approximation experiments.
//! * [`lif_reduction`]: radial Ornstein-Uhlenbeck and polar radial LIF equations.
//! * [`firing_isi`]: firing probability on the probe line, sigmoid fit, hazard, ISI densities.
//! * [`spectral`]: Welch power spectral densities and overlap scores.
//! * [`attractor_checks`]: numerical checks of the random-attractor construction.

pub mod attractor_checks;
mod ensemble;
pub mod error;
pub mod fhn_model;
pub mod firing_isi;
pub mod lif_reduction;
pub mod linalg;
pub mod linearization;
pub mod output;
pub mod sde_engine;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use fhn_model::{FhnParams, FixedPoint, NoiseKind, NoiseSpec};
pub use linalg::Mat2;
pub use sde_engine::{BrownianPath, Interpretation, SdeSystem};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
