// SPDX-License-Identifier: Apache-2.0

//! Reproduction harness: configuration, parameter scans, the validation
//! suite, unit conversion and CSV output.

pub mod config;
pub mod csv;
pub mod sweep;
pub mod units;
pub mod validate;

pub use config::{Mode, RunConfig, SUPERPOSITION_INPUT};
pub use csv::{format_sig, Cell, Table};
pub use sweep::{run, run_convergence, run_fig2_sweep, run_fig3_curve, run_single, Metadata, SweepResult};
pub use units::{physical_units_report, UnitsReport, UnitsRequest};
pub use validate::{run_validation_suite, Check, Status, ValidationReport};
