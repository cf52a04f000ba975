use std::collections::BTreeMap;

use super::{check_single_image, rank_order, Detection};
use crate::error::{check_ratio, Result};
use crate::geometry::iou;

/// Suppression IoU used after inference.
pub const DEFAULT_NMS_IOU: f64 = 0.2;

/// A surviving detection and the indices (into the input slice) of every
/// detection it absorbed, itself first.
#[derive(Debug, Clone, PartialEq)]
pub struct NmsCluster {
    pub keep: usize,
    pub members: Vec<usize>,
}

/// Greedy suppression returning clusters in survivor order.
///
/// A detection is suppressed by the first higher-ranked survivor whose IoU with
/// it is strictly greater than `iou_threshold`.
pub fn nms_clusters(dets: &[Detection], iou_threshold: f64) -> Result<Vec<NmsCluster>> {
    check_ratio("iou_threshold", iou_threshold)?;
    check_single_image(dets.iter().map(|d| d.image_id.as_str()))?;

    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| rank_order(&dets[a], &dets[b]));

    let mut clusters: Vec<NmsCluster> = Vec::new();
    for idx in order {
        let owner = clusters
            .iter_mut()
            .find(|c| iou(&dets[c.keep].bbox, &dets[idx].bbox) > iou_threshold);
        match owner {
            Some(c) => c.members.push(idx),
            None => clusters.push(NmsCluster {
                keep: idx,
                members: vec![idx],
            }),
        }
    }
    Ok(clusters)
}

/// Non-maximum suppression over detections of a single image. Output is in
/// descending score order.
pub fn nms(dets: &[Detection], iou_threshold: f64) -> Result<Vec<Detection>> {
    Ok(nms_clusters(dets, iou_threshold)?
        .into_iter()
        .map(|c| dets[c.keep].clone())
        .collect())
}

/// Runs [`nms`] independently per image; images are emitted in id order.
pub fn nms_by_image(dets: &[Detection], iou_threshold: f64) -> Result<Vec<Detection>> {
    let mut groups: BTreeMap<&str, Vec<Detection>> = BTreeMap::new();
    for d in dets {
        groups
            .entry(d.image_id.as_str())
            .or_default()
            .push(d.clone());
    }
    let mut out = Vec::with_capacity(dets.len());
    for group in groups.values() {
        out.extend(nms(group, iou_threshold)?);
    }
    Ok(out)
}
