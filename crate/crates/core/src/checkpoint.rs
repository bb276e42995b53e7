//! The shared checkpoint format.
//!
//! One versioned JSON document holds the embedder tensors, the optional
//! relation-network section added by metric training, and both optimizer
//! states, so a reloaded checkpoint resumes bit-identically.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embedder::{EmbedMode, EmbedderOptState, EmbedderParams};
use crate::error::Result;
use crate::records;
use crate::similarity::{RelationNetParams, RelationOptState};
use crate::trainer::TrainConfig;

pub const CHECKPOINT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub episode: usize,
    pub loss: f64,
}

/// Metric-training state layered on top of the embedder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationSection {
    pub params: RelationNetParams,
    pub opt: RelationOptState,
    pub config: TrainConfig,
    /// Episodes consumed so far, including skipped ones.
    pub completed_episodes: usize,
    pub loss_history: Vec<LossRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema_version: u32,
    pub seed: u64,
    pub embed_mode: EmbedMode,
    pub embedder: EmbedderParams,
    pub embedder_opt: EmbedderOptState,
    pub pretrain_steps: u64,
    pub pretrain_loss_history: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<RelationSection>,
}

impl Checkpoint {
    pub fn validate(&self) -> Result<()> {
        self.embedder.validate()?;
        if let Some(section) = &self.relation {
            section.params.validate()?;
            section.config.validate()?;
        }
        Ok(())
    }

    /// Width of the embeddings this checkpoint produces.
    pub fn embedding_dim(&self) -> usize {
        self.embed_mode
            .output_dim(self.embedder.input_dim, self.embedder.embed_dim)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        records::write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let ckpt: Checkpoint = records::read_json(path)?;
        records::check_schema(path, ckpt.schema_version, CHECKPOINT_SCHEMA_VERSION)?;
        ckpt.validate()?;
        Ok(ckpt)
    }
}
