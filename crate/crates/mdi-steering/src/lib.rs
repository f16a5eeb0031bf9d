//! Measurement-device-independent certification of quantum steering.
//!
//! The crate simulates a steering experiment in which one party's measurement
//! device is untrusted and the referee supplies trusted quantum inputs, then
//! certifies steering directly from the observed correlation table: a
//! semidefinite program lower-bounds a convex steering measure from the
//! numbers an experiment actually produces, with no assumption about the
//! untrusted device. Companion solvers compute the steering robustness of the
//! underlying assemblage, an entanglement-robustness bound for the shared
//! state, and an incompatibility-robustness bound for the trusted party's
//! measurements, so the chain measure ≤ steering ≤ entanglement/incompatibility
//! can be checked end to end.
//!
//! Layers, bottom up:
//! - [`complex`], [`eig`]: dense complex matrices and Hermitian eigensolves;
//! - [`quantum`]: states, POVMs, assemblies, and the fixed Bell/Pauli objects;
//! - [`sdp`]: a self-contained primal-dual interior-point solver for
//!   semidefinite programs with certified solutions;
//! - [`steering`]: assemblages, local-hidden-state membership, steering
//!   robustness, steering witnesses;
//! - [`mdi`]: correlation tables, the measurement-device-independent witness
//!   optimization, loss/bias noise models;
//! - [`robustness`]: entanglement and incompatibility robustness bounds;
//! - [`experiment`]: finite-statistics sampling, visibility sweeps, CSV/plot
//!   emission for the command-line driver.

pub mod complex;
pub mod eig;
pub mod error;
pub mod experiment;
pub mod mdi;
pub mod quantum;
pub mod robustness;
pub mod sdp;
pub mod steering;

pub use error::{Error, Result};
