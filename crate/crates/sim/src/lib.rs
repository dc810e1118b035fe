//! Monte Carlo harness for the `leakbf` beamforming library: experiment
//! parsing, SNR sweeps, figure recipes and CSV / JSON output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod output;
pub mod recipes;
pub mod spec;
pub mod verify;

pub use error::SimError;
pub use output::{Cell, Table};
pub use spec::{parse_schemes, parse_snr_grid, Assignments, ExperimentSpec, OutputFormat, Recipe};
