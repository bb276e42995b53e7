//! Bag construction and the bag-list file format.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::manifest::{DatasetManifest, Split};
use super::types::Bag;
use crate::error::{Error, Result};
use crate::records;
use crate::rng::stream_rng;

pub const BAGS_SCHEMA_VERSION: u32 = 1;

/// Sample `count` bags of `bag_size` images from the given split.
///
/// Per bag: one predicate uniform over the split's eligible predicates (those
/// occurring in at least `bag_size` images), then `bag_size` distinct images
/// uniform without replacement from that predicate's pool. Images may recur
/// across bags. Fully determined by `seed`.
pub fn make_bags(
    manifest: &DatasetManifest,
    split: Split,
    bag_size: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Bag>> {
    if bag_size < 2 {
        return Err(Error::Config(format!(
            "bag size must be at least 2, got {bag_size}"
        )));
    }

    // Predicate -> images containing at least one annotation with it,
    // in manifest order. BTreeMap keeps predicate iteration deterministic.
    let mut pools: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for pid in manifest.split_predicates(split) {
        pools.insert(*pid, Vec::new());
    }
    for (img_idx, image) in manifest.images.iter().enumerate() {
        let mut seen: Vec<u32> = Vec::new();
        for ann in &image.annotations {
            if pools.contains_key(&ann.predicate_id) && !seen.contains(&ann.predicate_id) {
                seen.push(ann.predicate_id);
                pools.get_mut(&ann.predicate_id).unwrap().push(img_idx);
            }
        }
    }

    let eligible: Vec<(u32, &Vec<usize>)> = pools
        .iter()
        .filter(|(_, images)| images.len() >= bag_size)
        .map(|(pid, images)| (*pid, images))
        .collect();
    if eligible.is_empty() {
        return Err(Error::Config(format!(
            "no {split:?}-split predicate occurs in at least {bag_size} images"
        )));
    }

    let mut bags = Vec::with_capacity(count);
    for bag_idx in 0..count {
        let mut rng = stream_rng(seed, "bag", bag_idx as u64);
        let (pid, pool) = eligible[rng.gen_range(0..eligible.len())];
        let picks = sample(&mut rng, pool.len(), bag_size);
        let image_ids = picks
            .iter()
            .map(|i| manifest.images[pool[i]].image_id.clone())
            .collect();
        bags.push(Bag {
            image_ids,
            common_predicate_id: pid,
        });
    }
    Ok(bags)
}

/// On-disk bag list; carries the sampling parameters that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BagFile {
    pub schema_version: u32,
    pub split: Split,
    pub bag_size: usize,
    pub seed: u64,
    pub bags: Vec<Bag>,
}

impl BagFile {
    pub fn save(&self, path: &Path) -> Result<()> {
        records::write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: BagFile = records::read_json(path)?;
        records::check_schema(path, file.schema_version, BAGS_SCHEMA_VERSION)?;
        Ok(file)
    }

    /// Check every bag against the manifest: known images, >= 2 regions per
    /// image, and the shared-predicate invariant.
    pub fn validate(&self, manifest: &DatasetManifest) -> Result<()> {
        for (i, bag) in self.bags.iter().enumerate() {
            if bag.size() < 2 {
                return Err(Error::Validation(format!("bag {i} has fewer than 2 images")));
            }
            for image_id in &bag.image_ids {
                let image = manifest.image(image_id)?;
                if image.regions.len() < 2 {
                    return Err(Error::DegenerateImage {
                        image_id: image_id.clone(),
                        regions: image.regions.len(),
                    });
                }
                if !image
                    .annotations
                    .iter()
                    .any(|a| a.predicate_id == bag.common_predicate_id)
                {
                    return Err(Error::Validation(format!(
                        "bag {i}: image {image_id} has no annotation with predicate {}",
                        bag.common_predicate_id
                    )));
                }
            }
        }
        Ok(())
    }
}
