//! Intersection-over-union and non-maximum suppression.

use super::types::{BBox, Region};

/// Intersection area over union area; 0 for disjoint boxes.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let ix = (a.x2.min(b.x2) - a.x1.max(b.x1)).max(0.0);
    let iy = (a.y2.min(b.y2) - a.y1.max(b.y1)).max(0.0);
    let inter = ix * iy;
    if inter <= 0.0 {
        return 0.0;
    }
    inter / (a.area() + b.area() - inter)
}

/// Greedy non-maximum suppression followed by top-k truncation.
///
/// Returns indices into `regions`, sorted by descending objectness (ties
/// broken by the lower original index). A region is kept only if its IoU
/// with every previously kept region is at most `iou_thresh`.
pub fn nms_topk(regions: &[Region], iou_thresh: f64, top_k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..regions.len()).collect();
    order.sort_by(|&a, &b| {
        regions[b]
            .objectness
            .partial_cmp(&regions[a].objectness)
            .expect("objectness validated finite")
            .then(a.cmp(&b))
    });

    let mut kept: Vec<usize> = Vec::new();
    for idx in order {
        if kept.len() >= top_k {
            break;
        }
        let candidate = &regions[idx].bbox;
        if kept
            .iter()
            .all(|&k| iou(candidate, &regions[k].bbox) <= iou_thresh)
        {
            kept.push(idx);
        }
    }
    kept
}
