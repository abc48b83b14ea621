//! Spontaneous emission from a metal nanoparticle strongly coupled to a
//! three-level quantum emitter.
//!
//! The coupled system is reduced to four levels: the ground state `|G⟩`,
//! the pumped emitter state `|U⟩` and the dressed doublet `|−⟩`, `|+⟩`
//! formed by hybridising the one-plasmon state with the emitter's `|e⟩`.
//! Everything is expressed with ℏ = 1, so energies are angular frequencies.
//!
//! * [`model`]: parameters, dressed basis and per-branch rates.
//! * [`rate`]: population balance equations, steady state, regression oracle
//!   for the incoherently pumped scenario.
//! * [`bloch`]: optical Bloch equations for resonant driving of one branch.
//! * [`correlations`]: closed-form g¹, spectra and g² for both scenarios.
//! * [`stochastic`]: jump-process photon streams and their estimators.

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bloch;
pub mod correlations;
mod error;
pub mod model;
mod ode;
pub mod rate;
pub mod stochastic;

pub use bloch::{BlochDerivative, BlochState};
pub use correlations::{CorrelationSeries, Normalization, SpectrumSeries, SpectrumTag};
pub use error::{Error, Result};
pub use model::{Branch, BranchRate, BranchRates, DressedBasis, Scenario, SystemParams};
pub use rate::{PopulationTrajectory, Populations};
pub use stochastic::{BranchFilter, Photon, PhotonStream, TrajectoryConfig};
