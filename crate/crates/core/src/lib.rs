//! Conditional preparation of collective spin states of an atomic ensemble by
//! cavity-assisted homodyne measurement.
//!
//! The crate is organised bottom-up:
//!
//! - [`spin`]: Dicke-basis states, observables, fidelity and an explicit
//!   matrix oracle for small ensembles.
//! - [`pulse`]: probe envelopes, cavity response functions, numeric
//!   measurement strengths and feasibility bounds.
//! - [`measurement`]: the diagonal Gaussian measurement operator, outcome
//!   densities, seeded sampling and composition of repeated measurements.
//! - [`protocols`]: superposition/GHZ preparation, Dicke-squeezed-state
//!   preparation, repetitive measurement and long-pulse planning.
//! - [`sweep`] and [`experiments`]: parameter sweeps and figure tables
//!   emitted as CSV or JSON.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod measurement;
pub mod protocols;
pub mod pulse;
mod quad;
pub mod spin;
pub mod sweep;

pub use error::{Error, Result};
pub use measurement::{MeasurementRecord, MeasurementSetting};
pub use protocols::{DssResult, OutcomePolicy, SuperpositionResult};
pub use pulse::{CavityParams, FeasibilityReport, PulseGrid, PulseKind};
pub use spin::{ObservableReport, SpinEnsembleState};
pub use sweep::{SweepResult, SweepSpec};

pub use num_complex::Complex64 as C64;
