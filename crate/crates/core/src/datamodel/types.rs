//! Core data types shared by every stage of the pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned bounding box in normalized image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl BBox {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self> {
        let b = BBox { x1, y1, x2, y2 };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let coords = [self.x1, self.y1, self.x2, self.y2];
        if coords.iter().any(|c| !c.is_finite() || *c < 0.0 || *c > 1.0) {
            return Err(Error::Validation(format!(
                "box coordinates must lie in [0,1]: {self:?}"
            )));
        }
        if self.x1 >= self.x2 || self.y1 >= self.y2 {
            return Err(Error::Validation(format!(
                "box must have positive area with x1<x2, y1<y2: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        (self.x2 - self.x1) * (self.y2 - self.y1)
    }
}

/// One detected region: box, appearance feature, class scores, objectness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub bbox: BBox,
    pub appearance: Vec<f64>,
    pub class_scores: Vec<f64>,
    pub objectness: f64,
}

impl Region {
    pub fn validate(&self, appearance_dim: usize, class_dim: usize) -> Result<()> {
        self.bbox.validate()?;
        if self.appearance.len() != appearance_dim {
            return Err(Error::DimensionMismatch {
                what: "region appearance".into(),
                expected: appearance_dim,
                got: self.appearance.len(),
            });
        }
        if self.class_scores.len() != class_dim {
            return Err(Error::DimensionMismatch {
                what: "region class scores".into(),
                expected: class_dim,
                got: self.class_scores.len(),
            });
        }
        if self.appearance.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite appearance feature".into()));
        }
        let sum: f64 = self.class_scores.iter().sum();
        if !sum.is_finite() || (sum - 1.0).abs() > 1e-5 {
            return Err(Error::Validation(format!(
                "class scores must sum to 1 within 1e-5, got {sum}"
            )));
        }
        if !self.objectness.is_finite() || !(0.0..=1.0).contains(&self.objectness) {
            return Err(Error::Validation(format!(
                "objectness must lie in [0,1], got {}",
                self.objectness
            )));
        }
        Ok(())
    }
}

/// Ground-truth relationship: subject box, object box, predicate category.
///
/// `matched` is filled in by annotation matching: the indices of the regions
/// best overlapping the subject and object boxes, when both clear the IoU
/// threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationshipAnnotation {
    pub subject_box: BBox,
    pub object_box: BBox,
    pub predicate_id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched: Option<(usize, usize)>,
}

/// One image: its (post-NMS) regions and ground-truth annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub image_id: String,
    pub regions: Vec<Region>,
    pub annotations: Vec<RelationshipAnnotation>,
}

/// Ordered (subject, object) region index pair inside one image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PairLabel {
    pub subject_idx: usize,
    pub object_idx: usize,
}

impl PairLabel {
    pub fn validate(&self, regions: usize) -> Result<()> {
        if self.subject_idx == self.object_idx
            || self.subject_idx >= regions
            || self.object_idx >= regions
        {
            return Err(Error::InvalidLabel {
                subject_idx: self.subject_idx,
                object_idx: self.object_idx,
                regions,
            });
        }
        Ok(())
    }
}

/// A bag of images sharing one latent predicate. The predicate id is kept
/// for supervision and evaluation only; inference never reads it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bag {
    pub image_ids: Vec<String>,
    pub common_predicate_id: u32,
}

impl Bag {
    pub fn size(&self) -> usize {
        self.image_ids.len()
    }
}
