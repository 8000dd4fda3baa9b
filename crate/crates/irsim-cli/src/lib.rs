//! Human-facing surface of the simulator: JSON scenario configs, sweep
//! execution, CSV persistence, and SVG figure rendering. The numerical
//! pipeline itself lives in `irsim-core`.

pub mod config;
pub mod csv;
pub mod runner;
pub mod svg;
