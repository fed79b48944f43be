//! Energy-efficient joint power and rate control for multiple-access
//! networks with rate and delay QoS constraints.
//!
//! - [`efficiency`]: S-shaped packet-success curves and the optimal SIR `γ*`.
//! - [`qos`]: the M/G/1-with-ARQ delay model, `Ω∞`, `Ω*` and user size.
//! - [`equilibrium`]: the Pareto-dominant Nash equilibrium and the
//!   power-capped best response.
//! - [`admission`]: feasibility screening and utility-maximising selection.
//! - [`delay`]: delay moments and the queueing-delay distribution.
//! - [`mg1sim`]: discrete-event simulation of a user's queue.
//!
//! Plumbing for front ends: [`scenario`] files with [`units`],
//! [`reproduce`] for the standard figures and [`report`] tables.

// `!(x > 0.0)` is how inputs reject NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admission;
pub mod delay;
pub mod efficiency;
pub mod equilibrium;
pub mod error;
pub mod mg1sim;
pub mod qos;
pub mod report;
pub mod reproduce;
pub mod scenario;
pub mod units;

pub use admission::{Admission, AdmissionRequest, Policy};
pub use delay::DelayDistribution;
pub use efficiency::{EfficiencyModel, Optimum, SuccessCurve};
pub use equilibrium::{EquilibriumAllocation, NetworkScenario, User};
pub use error::{Error, Result};
pub use mg1sim::{SimConfig, SimReport};
pub use qos::{QosProfile, QueueState};
pub use scenario::ScenarioFile;
