//! Helpers shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

use rand::Rng;
use vcm_core::detmetrics::{BoundingBox, Detection, GroundTruthBox};

/// Intersection over union computed from scratch.
fn overlap(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let ix = (a.x + a.w).min(b.x + b.w) - a.x.max(b.x);
    let iy = (a.y + a.h).min(b.y + b.h) - a.y.max(b.y);
    if ix <= 0.0 || iy <= 0.0 {
        return 0.0;
    }
    let inter = ix * iy;
    inter / (a.w * a.h + b.w * b.h - inter)
}

/// Brute-force AP for one class: naive greedy matching, a full precision /
/// recall table, then the area under the right-to-left maximum staircase
/// integrated over every distinct recall level.
pub fn oracle_ap(dets: &[Detection], gts: &[GroundTruthBox], iou_threshold: f64) -> f64 {
    if gts.is_empty() {
        return if dets.is_empty() { 1.0 } else { 0.0 };
    }
    let mut ranked: Vec<&Detection> = dets.iter().collect();
    ranked.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap());

    let mut used = vec![false; gts.len()];
    let mut table = Vec::new(); // (recall, precision) after each detection
    let mut tp = 0.0;
    for (k, d) in ranked.iter().enumerate() {
        let mut best = -1.0;
        let mut best_i = None;
        for (i, g) in gts.iter().enumerate() {
            if used[i] || g.frame_id != d.frame_id || g.class_id != d.class_id {
                continue;
            }
            let v = overlap(&d.bbox, &g.bbox);
            if v > best {
                best = v;
                best_i = Some(i);
            }
        }
        if let Some(i) = best_i {
            if best >= iou_threshold {
                used[i] = true;
                tp += 1.0;
            }
        }
        table.push((tp / gts.len() as f64, tp / (k + 1) as f64));
    }

    let mut levels: Vec<f64> = table.iter().map(|&(r, _)| r).collect();
    levels.dedup();
    let mut area = 0.0;
    let mut prev = 0.0;
    for r in levels {
        let p = table
            .iter()
            .filter(|&&(rr, _)| rr >= r)
            .map(|&(_, p)| p)
            .fold(0.0, f64::max);
        area += (r - prev) * p;
        prev = r;
    }
    area
}

fn random_box(rng: &mut impl Rng) -> BoundingBox {
    BoundingBox::new(
        rng.random_range(0.0..40.0),
        rng.random_range(0.0..40.0),
        rng.random_range(2.0..20.0),
        rng.random_range(2.0..20.0),
    )
    .unwrap()
}

/// A small instance: up to 10 ground-truth boxes over up to 5 frames and 3
/// classes, and up to 10 detections that are either jittered copies of ground
/// truth (sometimes with the wrong class) or random clutter. Scores are coarse
/// so ties happen.
pub fn random_instance(rng: &mut impl Rng) -> (Vec<Detection>, Vec<GroundTruthBox>) {
    let frames = rng.random_range(1..=5u64);
    let classes = rng.random_range(1..=3u32);
    let n_gt = rng.random_range(0..=10);
    let gts: Vec<GroundTruthBox> = (0..n_gt)
        .map(|_| GroundTruthBox {
            frame_id: rng.random_range(0..frames),
            class_id: rng.random_range(0..classes),
            bbox: random_box(rng),
        })
        .collect();
    let n_det = rng.random_range(0..=10);
    let dets = (0..n_det)
        .map(|_| {
            let (frame_id, mut class_id, bbox) = if !gts.is_empty() && rng.random_bool(0.7) {
                let g = gts[rng.random_range(0..gts.len())];
                let b = g.bbox;
                let mut j = || rng.random_range(-2.0..2.0);
                let bbox = BoundingBox::new(b.x + j(), b.y + j(), b.w.max(3.0) + j(), b.h.max(3.0) + j()).unwrap();
                (g.frame_id, g.class_id, bbox)
            } else {
                (
                    rng.random_range(0..frames),
                    rng.random_range(0..classes),
                    random_box(rng),
                )
            };
            if rng.random_bool(0.1) {
                class_id = rng.random_range(0..classes);
            }
            let score = rng.random_range(1..=8) as f64 / 8.0;
            Detection::new(frame_id, class_id, bbox, score).unwrap()
        })
        .collect();
    (dets, gts)
}

/// Per-class oracle APs over the classes present in the ground truth.
pub fn oracle_per_class(
    dets: &[Detection],
    gts: &[GroundTruthBox],
    iou_threshold: f64,
) -> std::collections::BTreeMap<u32, f64> {
    let classes: std::collections::BTreeSet<u32> = gts.iter().map(|g| g.class_id).collect();
    classes
        .into_iter()
        .map(|c| {
            let d: Vec<Detection> = dets.iter().filter(|d| d.class_id == c).copied().collect();
            let g: Vec<GroundTruthBox> = gts.iter().filter(|g| g.class_id == c).copied().collect();
            (c, oracle_ap(&d, &g, iou_threshold))
        })
        .collect()
}
