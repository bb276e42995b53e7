//! Data types, file formats, and region-set ingestion.

mod bags;
mod boxes;
mod labels;
mod manifest;
mod types;

pub use bags::{make_bags, BagFile, BAGS_SCHEMA_VERSION};
pub use boxes::{iou, nms_topk};
pub use labels::{build_label_set, match_annotations};
pub use manifest::{DatasetManifest, Split, MANIFEST_SCHEMA_VERSION};
pub use types::{Bag, BBox, ImageRecord, PairLabel, Region, RelationshipAnnotation};

#[cfg(test)]
mod tests {
    use std::collections::{BTreeMap, BTreeSet};

    use super::*;
    use crate::error::Error;

    fn tiny_manifest() -> DatasetManifest {
        let mk_region = |x: f64, app: f64| Region {
            bbox: BBox::new(x, 0.1, x + 0.15, 0.3).unwrap(),
            appearance: vec![app, -app],
            class_scores: vec![0.25, 0.75],
            objectness: 0.5 + app / 10.0,
        };
        let mk_image = |id: &str, pids: &[u32]| {
            let regions = vec![mk_region(0.05, 1.0), mk_region(0.4, 2.0), mk_region(0.7, 3.0)];
            let annotations = pids
                .iter()
                .map(|&pid| RelationshipAnnotation {
                    subject_box: regions[0].bbox,
                    object_box: regions[1].bbox,
                    predicate_id: pid,
                    matched: None,
                })
                .collect();
            ImageRecord {
                image_id: id.to_string(),
                regions,
                annotations,
            }
        };
        DatasetManifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            appearance_dim: 2,
            class_dim: 2,
            predicates: BTreeMap::from([
                (0, "holding".into()),
                (1, "near".into()),
                (2, "above".into()),
            ]),
            train_predicates: BTreeSet::from([0, 1]),
            test_predicates: BTreeSet::from([2]),
            images: vec![
                mk_image("a", &[0, 1]),
                mk_image("b", &[0]),
                mk_image("c", &[0, 2]),
                mk_image("d", &[1, 2]),
            ],
            provenance: None,
        }
    }

    #[test]
    fn manifest_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        let manifest = tiny_manifest();
        manifest.save(&path).unwrap();
        let back = DatasetManifest::load(&path).unwrap();
        assert_eq!(manifest.images, back.images);
        assert_eq!(manifest.predicates, back.predicates);
    }

    #[test]
    fn manifest_dimension_mismatch_rejected() {
        let mut manifest = tiny_manifest();
        manifest.images[0].regions[0].appearance.push(9.0);
        assert!(manifest.validate().is_err());
    }

    #[test]
    fn manifest_unknown_schema_version_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        let mut manifest = tiny_manifest();
        manifest.schema_version = 99;
        crate::records::write_json(&path, &manifest).unwrap();
        assert!(matches!(
            DatasetManifest::load(&path),
            Err(Error::SchemaVersion { found: 99, .. })
        ));
    }

    #[test]
    fn overlapping_splits_rejected() {
        let mut manifest = tiny_manifest();
        manifest.test_predicates.insert(0);
        assert!(manifest.validate().is_err());
    }

    #[test]
    fn make_bags_is_seed_reproducible() {
        let manifest = tiny_manifest();
        let a = make_bags(&manifest, Split::Train, 2, 20, 7).unwrap();
        let b = make_bags(&manifest, Split::Train, 2, 20, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|bag| bag.size() == 2));
        assert!(a
            .iter()
            .all(|bag| manifest.train_predicates.contains(&bag.common_predicate_id)));
    }

    #[test]
    fn make_bags_within_bag_images_are_distinct() {
        let manifest = tiny_manifest();
        for bag in make_bags(&manifest, Split::Train, 3, 50, 3).unwrap() {
            let mut ids = bag.image_ids.clone();
            ids.sort();
            ids.dedup();
            assert_eq!(ids.len(), 3);
        }
    }

    #[test]
    fn make_bags_single_eligible_predicate_forces_membership() {
        // Test split has predicate 2 in exactly images c and d.
        let manifest = tiny_manifest();
        let bags = make_bags(&manifest, Split::Test, 2, 10, 11).unwrap();
        for bag in bags {
            assert_eq!(bag.common_predicate_id, 2);
            let mut ids = bag.image_ids.clone();
            ids.sort();
            assert_eq!(ids, vec!["c".to_string(), "d".to_string()]);
        }
    }

    #[test]
    fn make_bags_rejects_oversized_bags() {
        let manifest = tiny_manifest();
        assert!(matches!(
            make_bags(&manifest, Split::Test, 3, 5, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn bag_file_round_trip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bags.json");
        let manifest = tiny_manifest();
        let file = BagFile {
            schema_version: BAGS_SCHEMA_VERSION,
            split: Split::Train,
            bag_size: 2,
            seed: 7,
            bags: make_bags(&manifest, Split::Train, 2, 5, 7).unwrap(),
        };
        file.save(&path).unwrap();
        let back = BagFile::load(&path).unwrap();
        assert_eq!(file.bags, back.bags);
        back.validate(&manifest).unwrap();
    }

    #[test]
    fn prepare_orders_by_objectness_and_rematches() {
        let manifest = tiny_manifest();
        let prepared = manifest.prepare(0.5, 100, 0.5);
        for image in &prepared.images {
            let obj: Vec<f64> = image.regions.iter().map(|r| r.objectness).collect();
            assert!(obj.windows(2).all(|w| w[0] >= w[1]));
            for ann in &image.annotations {
                let (s, o) = ann.matched.expect("exact boxes must match");
                assert_eq!(image.regions[s].bbox, ann.subject_box);
                assert_eq!(image.regions[o].bbox, ann.object_box);
            }
        }
    }
}
