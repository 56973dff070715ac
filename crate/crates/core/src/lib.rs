//! Workbench for the bimodal-vs-unimodal learning separation built on
//! low-noise LPN, and the bit-agreement protocol derived from it.
//!
//! Layers, bottom up:
//! - [`gf2`]: packed Z_2 vectors/matrices and seeded samplers.
//! - [`taskgen`]: the task distribution, its unimodal projections and DLPN instances.
//! - [`learner`]: the majority-vote bimodal learner and unimodal attack probes.
//! - [`reductions`]: learner-to-distinguisher and distinguisher-to-predictor constructions.
//! - [`protocol`]: bit agreement, eavesdropper harness and key agreement.

pub mod error;
pub mod gf2;
pub mod learner;
pub mod protocol;
pub mod reductions;
pub mod stats;
pub mod taskgen;

pub use error::{Error, Result};
