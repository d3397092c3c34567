//! Experiment files, reproducible runs and their on-disk artifacts.

mod config;
mod norms;
mod output;
mod run;

pub use config::{
    config_hash, fmt_f64, parse_config, render_config, ExperimentConfig, ExperimentKind, FrameSpec,
};
pub use norms::{snapshot_fields, NormSpec};
pub use output::{
    manifest_status, sha256_file, Artifact, CsvWriter, RunDir, RunStatus, ARTIFACT_VERSION,
    MANIFEST,
};
pub use run::{run_experiment, RunOutcome};
