use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::graph::{SplitFractions, SyntheticSpec};
use crate::metrics::ProbeConfig;
use crate::model::{Activation, TrainConfig};
use crate::sampling::{NormMode, SamplerMode};
use crate::theory::TheoryConfig;

/// Either a pair of files or a synthetic generator spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub edges: Option<PathBuf>,
    pub nodes: Option<PathBuf>,
    pub synthetic: Option<SyntheticSpec>,
    pub split: SplitFractions,
    pub split_seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            edges: None,
            nodes: None,
            synthetic: Some(SyntheticSpec::biased(2000, 0)),
            split: SplitFractions::default(),
            split_seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub layers: usize,
    pub hidden: usize,
    pub activation: Activation,
    pub norm: NormMode,
    pub mlp: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            layers: 2,
            hidden: 128,
            activation: Activation::Relu,
            norm: NormMode::Row,
            mlp: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainerConfig {
    pub lr: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub seeds: Vec<u64>,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            lr: 1e-3,
            weight_decay: 1e-5,
            epochs: 1000,
            seeds: vec![0, 1, 2, 3, 4],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    /// Modes compared by `train`, one summary row each.
    pub modes: Vec<SamplerMode>,
    pub beta: f64,
    pub delta: f64,
    pub hops: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            modes: SamplerMode::ALL.to_vec(),
            beta: 0.25,
            delta: 1.0,
            hops: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out") }
    }
}

/// Top-level TOML document. Every section and key is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub exec: Exec,
    pub dataset: DatasetConfig,
    pub model: ModelConfig,
    pub trainer: TrainerConfig,
    pub sampler: SamplerConfig,
    pub probe: ProbeConfig,
    pub theory: TheoryConfig,
    pub outputs: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::validation(format!("config: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        // Dataset paths are relative to the config file.
        if let Some(base) = path.parent() {
            for p in [&mut cfg.dataset.edges, &mut cfg.dataset.nodes].into_iter().flatten() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trainer.seeds.is_empty() {
            return Err(Error::validation("trainer.seeds is empty"));
        }
        if self.sampler.modes.is_empty() {
            return Err(Error::validation("sampler.modes is empty"));
        }
        match (&self.dataset.edges, &self.dataset.nodes) {
            (Some(_), Some(_)) | (None, None) => {}
            _ => return Err(Error::validation("dataset.edges and dataset.nodes must be given together")),
        }
        if self.dataset.edges.is_none() && self.dataset.synthetic.is_none() {
            return Err(Error::validation("dataset needs either files or a synthetic spec"));
        }
        let s = self.dataset.split;
        if [s.train, s.val, s.test].iter().any(|f| !(*f >= 0.0)) || (s.train + s.val + s.test - 1.0).abs() > 1e-9 {
            return Err(Error::validation("split fractions must be non-negative and sum to 1"));
        }
        for mode in &self.sampler.modes {
            self.train_config(*mode).validate()?;
        }
        Ok(())
    }

    pub fn train_config(&self, mode: SamplerMode) -> TrainConfig {
        TrainConfig {
            layers: self.model.layers,
            hidden: self.model.hidden,
            activation: self.model.activation,
            norm: self.model.norm,
            mlp: self.model.mlp,
            lr: self.trainer.lr,
            weight_decay: self.trainer.weight_decay,
            epochs: self.trainer.epochs,
            sampler: mode,
            beta: self.sampler.beta,
            delta: self.sampler.delta,
            hops: self.sampler.hops,
        }
    }

    /// SHA-256 of the canonical JSON form of the effective configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_from_empty_document() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        let t = cfg.train_config(SamplerMode::Bemap);
        assert_eq!((t.layers, t.hidden, t.lr, t.weight_decay, t.beta, t.delta, t.hops), (2, 128, 1e-3, 1e-5, 0.25, 1.0, 2));
        assert_eq!(cfg.trainer.seeds.len(), 5);
        cfg.validate().unwrap();
    }

    #[test]
    fn partial_document_and_unknown_keys() {
        let cfg = ExperimentConfig::from_toml("[trainer]\nepochs = 5\nseeds = [7]\n[sampler]\nmodes = [\"bemap\"]\n").unwrap();
        assert_eq!(cfg.trainer.epochs, 5);
        assert_eq!(cfg.sampler.modes, vec![SamplerMode::Bemap]);
        assert!(ExperimentConfig::from_toml("[trainer]\nepoch = 5\n").is_err());
    }

    #[test]
    fn empty_seed_list_is_invalid() {
        let cfg = ExperimentConfig::from_toml("[trainer]\nseeds = []\n").unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Validation(_))));
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.trainer.epochs = 3;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
