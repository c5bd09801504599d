//! Library side of the `qmt` command: model documents, commands and output.

pub mod commands;
pub mod model;
pub mod output;

pub use commands::{oracle_check, propagate, validate, Mode, OracleArgs, Outcome, PropagateArgs};
pub use model::ModelDocument;

/// Environment variable overriding the oracle frame cap.
pub const MAX_FRAME_ENV: &str = "QMT_MAX_FRAME";
