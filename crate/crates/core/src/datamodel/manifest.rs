//! The dataset manifest: feature dimensions, predicate vocabulary and split,
//! and all image records, as one versioned JSON document.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::boxes::nms_topk;
use super::labels::match_annotations;
use super::types::ImageRecord;
use crate::error::{Error, Result};
use crate::records;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub schema_version: u32,
    /// Appearance feature dimension shared by every region.
    pub appearance_dim: usize,
    /// Class-score dimension shared by every region.
    pub class_dim: usize,
    /// Predicate vocabulary: id -> display name.
    pub predicates: BTreeMap<u32, String>,
    pub train_predicates: BTreeSet<u32>,
    pub test_predicates: BTreeSet<u32>,
    pub images: Vec<ImageRecord>,
    /// Free-form provenance (generator config, seeds); round-tripped as-is.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

impl DatasetManifest {
    pub fn validate(&self) -> Result<()> {
        if !self.train_predicates.is_disjoint(&self.test_predicates) {
            return Err(Error::Validation(
                "train and test predicate sets overlap".into(),
            ));
        }
        for pid in self.train_predicates.iter().chain(&self.test_predicates) {
            if !self.predicates.contains_key(pid) {
                return Err(Error::Validation(format!(
                    "split references unknown predicate id {pid}"
                )));
            }
        }
        let mut seen_ids = BTreeSet::new();
        for image in &self.images {
            if !seen_ids.insert(&image.image_id) {
                return Err(Error::Validation(format!(
                    "duplicate image id {}",
                    image.image_id
                )));
            }
            for region in &image.regions {
                region.validate(self.appearance_dim, self.class_dim)?;
            }
            for ann in &image.annotations {
                ann.subject_box.validate()?;
                ann.object_box.validate()?;
                if !self.predicates.contains_key(&ann.predicate_id) {
                    return Err(Error::Validation(format!(
                        "image {}: unknown predicate id {}",
                        image.image_id, ann.predicate_id
                    )));
                }
                if let Some((s, o)) = ann.matched {
                    if s >= image.regions.len() || o >= image.regions.len() || s == o {
                        return Err(Error::Validation(format!(
                            "image {}: matched indices ({s}, {o}) invalid for {} regions",
                            image.image_id,
                            image.regions.len()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn split_predicates(&self, split: Split) -> &BTreeSet<u32> {
        match split {
            Split::Train => &self.train_predicates,
            Split::Test => &self.test_predicates,
        }
    }

    pub fn image(&self, image_id: &str) -> Result<&ImageRecord> {
        self.images
            .iter()
            .find(|img| img.image_id == image_id)
            .ok_or_else(|| Error::MissingData(format!("image {image_id} not in manifest")))
    }

    /// Region-set ingestion: NMS + top-k per image, then annotation matching.
    ///
    /// Regions come out ordered by descending objectness; annotation matches
    /// are recomputed against the pruned region list.
    pub fn prepare(&self, nms_iou: f64, top_k: usize, match_iou: f64) -> DatasetManifest {
        let mut out = self.clone();
        out.images = self
            .images
            .iter()
            .map(|image| {
                let kept = nms_topk(&image.regions, nms_iou, top_k);
                let pruned = ImageRecord {
                    image_id: image.image_id.clone(),
                    regions: kept.iter().map(|&i| image.regions[i].clone()).collect(),
                    annotations: image.annotations.clone(),
                };
                match_annotations(&pruned, match_iou)
            })
            .collect();
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        records::write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let manifest: DatasetManifest = records::read_json(path)?;
        records::check_schema(path, manifest.schema_version, MANIFEST_SCHEMA_VERSION)?;
        manifest.validate()?;
        Ok(manifest)
    }
}
