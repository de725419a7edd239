//! Single two-level emitter in a one-dimensional waveguide driven by one- and
//! two-photon Fock pulses.
//!
//! Two independent engines compute the same observables: a semi-analytic one
//! ([`analytic`]) built on closed forms and a resonant ODE hierarchy, and a
//! time-bin matrix-product-state collision model ([`mps`]). [`spectra`] turns
//! either engine's first-order correlation into time-dependent spectra.

pub mod analytic;
pub mod error;
pub mod model;
pub mod mps;
pub mod spectra;

pub use error::{Error, Result};
pub use model::{CouplingKind, EmitterParams, G1Matrix, PulseShape, PulseSpec, Stamp, TimeGrid, TimeSeries};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
