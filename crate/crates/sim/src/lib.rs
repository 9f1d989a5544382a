//! Simulation harness, file formats and run configuration for the
//! `nbldpc-core` decoders.

pub mod config;
pub mod formats;
pub mod harness;

pub use config::{parse_spec, ConfigError, EmulationSpec, Provenance};
pub use harness::{run_point, sweep, CellRecord, PointStats, ResultRow, RunConfig};
