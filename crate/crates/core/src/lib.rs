//! Leakage-controlled robust beamforming for the multi-user MISO downlink.
//!
//! The base station serves `K` single-antenna users from `N` antennas, each
//! antenna with its own power budget. Users feed back `B`-bit random vector
//! quantization (RVQ) indices of their channel directions plus, optionally,
//! a quantized channel norm. The crate provides
//!
//! - channel generation, RVQ quantization and the base station's model of
//!   the residual direction uncertainty ([`channel`]),
//! - closed-form statistics of the interference leakage produced by a
//!   zero-forcing beamformer and the leakage thresholds derived from them
//!   ([`leakage`]),
//! - small dense SDP / GP solvers and Gaussian randomization ([`solvers`]),
//! - every beamforming scheme, including the alternating power/beam
//!   optimization for per-antenna budgets ([`beamforming`]),
//! - ground-truth rate evaluation and Monte Carlo averaging ([`evaluation`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beamforming;
pub mod channel;
pub mod config;
pub mod dd;
pub mod error;
pub mod evaluation;
pub mod leakage;
pub mod linalg;
pub mod quad;
pub mod rng;
pub mod solvers;
pub mod special;

pub use config::{CmiMode, SystemConfig};
pub use error::{Error, Result};
