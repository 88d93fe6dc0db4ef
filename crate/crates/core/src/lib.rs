//! Balance-aware neighbor sampling (BeMap) for fair message passing in
//! graph convolutional networks.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: immutable CSR graphs, dataset loading, synthetic generators
//! - [`sampling`]: balance scores, per-edge sampling probabilities and the
//!   per-epoch fair neighborhood
//! - [`model`]: two-layer GCN / MLP with exact gradients and Adam
//! - [`metrics`]: ΔSP, ΔEO, AUC, distance-based bias, the sensitive-attribute probe
//! - [`theory`]: Monte-Carlo checks of the bias-amplification and fair
//!   message passing results on random graphs
//! - [`experiment`]: configuration and orchestration used by the `bemap` binary

pub mod error;
pub mod exec;
pub mod experiment;
pub mod graph;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod sampling;
pub mod theory;

pub use error::{Error, Result};
pub use exec::Exec;
pub use graph::Graph;
