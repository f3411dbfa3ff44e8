//! Command-line surface for the invariant-region toolkit: configuration
//! resolution, the on-disk file formats, the subcommand implementations and
//! the SVG phase-portrait renderer.
//!
//! The binary lives in `main.rs`; everything here is a library so the file
//! parsers can be exercised directly by tests and fuzz targets.

pub mod commands;
pub mod config;
pub mod formats;
pub mod svg;

use std::fmt;

/// Process exit codes, part of the public contract (see `--help`).
pub mod exit_code {
    pub const OK: u8 = 0;
    pub const GENERIC: u8 = 1;
    pub const INVALID_PARAMETERS: u8 = 2;
    pub const TANGENCY_ROOT_NOT_FOUND: u8 = 3;
    pub const CONDITION_E1_VIOLATED: u8 = 4;
    pub const CONDITION_E2_VIOLATED: u8 = 5;
    pub const EVENT_NOT_REACHED: u8 = 6;
    pub const SELF_INTERSECTING_BOUNDARY: u8 = 7;
    pub const NO_CONVERGENCE: u8 = 8;
    pub const VERIFICATION_FAILED: u8 = 9;
    pub const IO: u8 = 10;
    pub const CONSTRUCTION_INAPPLICABLE: u8 = 11;
}

/// A command failure carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn io(err: impl fmt::Display) -> Self {
        Self::new(exit_code::IO, err.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

impl From<regionkit::region::BuildError> for CliError {
    fn from(e: regionkit::region::BuildError) -> Self {
        use regionkit::region::BuildError as B;
        let code = match &e {
            B::TangencyRootNotFound => exit_code::TANGENCY_ROOT_NOT_FOUND,
            B::ConditionE1Violated { .. } => exit_code::CONDITION_E1_VIOLATED,
            B::ConditionE2Violated { .. } => exit_code::CONDITION_E2_VIOLATED,
            B::EventNotReached { .. } => exit_code::EVENT_NOT_REACHED,
            B::SpiralArcDegenerate { .. } => exit_code::CONSTRUCTION_INAPPLICABLE,
            B::SelfIntersectingBoundary | B::OriginNotInterior => {
                exit_code::SELF_INTERSECTING_BOUNDARY
            }
            B::Integration { .. } => exit_code::GENERIC,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<regionkit::system::ParameterError> for CliError {
    fn from(e: regionkit::system::ParameterError) -> Self {
        CliError::new(exit_code::INVALID_PARAMETERS, e.to_string())
    }
}
