//! Label sets and ground-truth-to-region matching.

use super::boxes::iou;
use super::types::{ImageRecord, PairLabel};
use crate::error::{Error, Result};

/// All ordered region pairs (s, o), s != o, in lexicographic order.
///
/// The result has exactly `p * (p - 1)` entries for `p` regions.
pub fn build_label_set(image: &ImageRecord) -> Result<Vec<PairLabel>> {
    let p = image.regions.len();
    if p < 2 {
        return Err(Error::DegenerateImage {
            image_id: image.image_id.clone(),
            regions: p,
        });
    }
    let mut labels = Vec::with_capacity(p * (p - 1));
    for subject_idx in 0..p {
        for object_idx in 0..p {
            if subject_idx != object_idx {
                labels.push(PairLabel {
                    subject_idx,
                    object_idx,
                });
            }
        }
    }
    Ok(labels)
}

/// Attach region indices to each annotation.
///
/// For every annotation, the subject and object boxes are matched to their
/// highest-IoU regions (ties to the lower index). The match is recorded only
/// when both IoUs reach `iou_thresh` and the two indices differ; otherwise
/// the annotation is left unmatched and training-pair construction skips it.
pub fn match_annotations(image: &ImageRecord, iou_thresh: f64) -> ImageRecord {
    let best = |target| -> Option<(usize, f64)> {
        image
            .regions
            .iter()
            .enumerate()
            .map(|(i, r)| (i, iou(target, &r.bbox)))
            .max_by(|(ia, va), (ib, vb)| va.partial_cmp(vb).unwrap().then(ib.cmp(ia)))
    };

    let mut out = image.clone();
    for ann in &mut out.annotations {
        ann.matched = None;
        let (Some((s_idx, s_iou)), Some((o_idx, o_iou))) =
            (best(&ann.subject_box), best(&ann.object_box))
        else {
            continue;
        };
        if s_iou >= iou_thresh && o_iou >= iou_thresh && s_idx != o_idx {
            ann.matched = Some((s_idx, o_idx));
        }
    }
    out
}
