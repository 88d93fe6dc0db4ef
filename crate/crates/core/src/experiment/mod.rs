//! Experiment orchestration behind the `bemap` binary.

mod config;
mod run;

pub use config::{
    DatasetConfig, ExperimentConfig, ModelConfig, OutputConfig, SamplerConfig, TrainerConfig,
};
pub use run::{
    load_dataset, read_summary, run_experiment, run_probe, run_report, run_theory, write_manifest, Manifest,
    MeanStd, ProbeOutcome, ReductionRow, RunRecord, SummaryRow,
};
