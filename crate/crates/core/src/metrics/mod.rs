//! Utility and fairness metrics.

mod fairness;
mod probe;
mod report;

pub use fairness::{auc, delta_eo, delta_sp, distance_based_bias, relative_reduction};
pub use probe::{fit_logistic, probe_sensitive_leakage, LogisticProbe, ProbeBin, ProbeConfig, ProbeReport};
pub use report::{evaluate, write_reports_csv, write_reports_jsonl, FairnessReport, REPORT_FIELDS};
