//! Balance-aware neighbor sampling.
//!
//! A [`BalanceTable`] is computed once per graph. Every epoch each node's
//! self-augmented neighborhood is downsampled into a fair neighborhood
//! (equal group counts when both groups are present), and the result is
//! packaged as an [`EpochGraph`] with precomputed aggregation weights.

mod balance;
mod epoch;
mod neighborhood;
mod weighted;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use balance::{balance_score, binary_balance_score, compute_balance_table, pairwise_balance_score, BalanceTable};
pub use epoch::{sample_epoch_graph, EpochGraph, Sampler};
pub use neighborhood::{retained_size_single_group, sample_fair_neighborhood};
pub use weighted::successive_sample;

/// Exponent of the degree-proportional ablation sampler.
pub const DEGREE_EXPONENT: f64 = 0.75;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerMode {
    /// Full neighborhoods (vanilla GCN).
    None,
    Uniform,
    Degree,
    Bemap,
}

impl SamplerMode {
    pub const ALL: [SamplerMode; 4] = [SamplerMode::None, SamplerMode::Uniform, SamplerMode::Degree, SamplerMode::Bemap];

    pub fn as_str(self) -> &'static str {
        match self {
            SamplerMode::None => "none",
            SamplerMode::Uniform => "uniform",
            SamplerMode::Degree => "degree",
            SamplerMode::Bemap => "bemap",
        }
    }
}

impl fmt::Display for SamplerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SamplerMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        SamplerMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| crate::Error::validation(format!("unknown sampler mode {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMode {
    /// `α_ij = 1/|N̂(i)|`
    #[default]
    Row,
    /// `α_ij = 1/(√|N̂(i)|·√|N̂(j)|)`
    Symmetric,
}

impl fmt::Display for NormMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormMode::Row => "row",
            NormMode::Symmetric => "symmetric",
        })
    }
}
