//! Expression language and command runner for `species-idr`.

pub mod commands;
pub mod eval;
pub mod expr;

pub use commands::{run, Cli};
