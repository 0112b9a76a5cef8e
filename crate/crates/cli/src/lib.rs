//! Scenario files in, CSV/JSON datasets out.
//!
//! Every command reads one [`Scenario`] and writes its results under the
//! output directory as `<name>_<artifact>.<csv|json>`. Files are replaced
//! atomically.

pub mod commands;
mod error;
pub mod output;
pub mod scenario;

pub use commands::Run;
pub use error::CliError;
pub use output::Format;
pub use scenario::{ModelSpec, Scenario, SCHEMA_VERSION};
