//! Library side of the `gumbel-order` command-line tool: spec parsing,
//! command runners and report rendering. The binary is a thin argument
//! parser on top of this crate.

pub mod commands;
pub mod report;
pub mod scan;
pub mod spec;

use std::fmt;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// An error that ends a command, with the exit code it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self { code: EXIT_INCONCLUSIVE, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

impl From<gumbel_order::Error> for Failure {
    fn from(e: gumbel_order::Error) -> Self {
        match e {
            gumbel_order::Error::Numeric(_) => Failure::runtime(e.to_string()),
            _ => Failure::usage(e.to_string()),
        }
    }
}

/// The rendered result of a command.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub code: i32,
    pub text: String,
    pub json: serde_json::Value,
}
