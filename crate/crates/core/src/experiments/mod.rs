//! Declarative sweeps, the oscillation-onset scan and the cross-validation
//! harness. Every run produces a CSV document whose first line records the
//! resolved configuration and whose rows are sorted, so output is reproducible
//! byte for byte regardless of thread count.

pub mod config;
pub mod onset;
pub mod sweep;
pub mod table;
pub mod validate;

pub use config::{parse_config_text, Experiment, ExperimentConfig, GridPreset, QfiMethod};
pub use onset::detect_oscillation_onset;
pub use sweep::{run_experiment, RunOutput};
pub use table::{fmt_f64, Cell, SweepRow, Table};
pub use validate::{run_validation, Check, ValidationReport};
