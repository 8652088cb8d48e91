//! Scenario files, presets, similitude scaling, runs, batches and parameter sweeps.

mod config;
mod format;
pub(crate) mod presets;
mod run;
mod scale;
mod sweep;

pub use config::*;
pub use format::fmt_g9;
pub use presets::{preset, BREADBOARD_FACTOR, PRESET_NAMES};
pub use run::*;
pub use scale::scale_config;
pub use sweep::{numeric_leaf, sweep, with_value, SweepRow, SWEEP_CSV};
