use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{filter_by_confidence, iou, Detection, GroundTruthBox, MetricsError};

/// A detection after matching, in descending-score order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matched {
    pub detection: Detection,
    /// Index into the ground-truth slice when the detection is a true positive.
    pub gt_index: Option<usize>,
}

impl Matched {
    pub fn is_tp(&self) -> bool {
        self.gt_index.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub matched: Vec<Matched>,
    pub n_gt: usize,
}

impl MatchResult {
    pub fn tp_flags(&self) -> Vec<bool> {
        self.matched.iter().map(Matched::is_tp).collect()
    }
}

/// Greedy matching in descending score order (stable for ties). Each
/// detection takes the still-unmatched ground truth of the same frame and
/// class with the highest IoU, provided that IoU reaches `iou_threshold`.
pub fn match_detections(dets: &[Detection], gts: &[GroundTruthBox], iou_threshold: f64) -> MatchResult {
    let mut by_key: HashMap<(u64, u32), Vec<usize>> = HashMap::new();
    for (i, g) in gts.iter().enumerate() {
        by_key.entry((g.frame_id, g.class_id)).or_default().push(i);
    }

    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score.total_cmp(&dets[a].score));

    let mut taken = vec![false; gts.len()];
    let matched = order
        .into_iter()
        .map(|di| {
            let det = dets[di];
            let mut best: Option<(usize, f64)> = None;
            if let Some(candidates) = by_key.get(&(det.frame_id, det.class_id)) {
                for &gi in candidates.iter().filter(|&&gi| !taken[gi]) {
                    let v = iou(&det.bbox, &gts[gi].bbox);
                    if best.is_none_or(|(_, bv)| v > bv) {
                        best = Some((gi, v));
                    }
                }
            }
            let gt_index = match best {
                Some((gi, v)) if v >= iou_threshold => {
                    taken[gi] = true;
                    Some(gi)
                }
                _ => None,
            };
            Matched {
                detection: det,
                gt_index,
            }
        })
        .collect();

    MatchResult {
        matched,
        n_gt: gts.len(),
    }
}

/// All-point interpolated AP from TP/FP flags in descending-score order.
///
/// With no ground truth the result is 1 when there are also no detections and
/// 0 otherwise.
pub fn average_precision(tp_flags: &[bool], n_gt: usize) -> f64 {
    if n_gt == 0 {
        return if tp_flags.is_empty() { 1.0 } else { 0.0 };
    }
    let mut precision = Vec::with_capacity(tp_flags.len());
    let mut tp = 0usize;
    for (i, &is_tp) in tp_flags.iter().enumerate() {
        tp += is_tp as usize;
        precision.push(tp as f64 / (i + 1) as f64);
    }
    // precision envelope: running max from the right
    for i in (0..precision.len().saturating_sub(1)).rev() {
        precision[i] = precision[i].max(precision[i + 1]);
    }
    let step = 1.0 / n_gt as f64;
    tp_flags
        .iter()
        .zip(&precision)
        .filter(|(&is_tp, _)| is_tp)
        .map(|(_, &p)| step * p)
        .sum::<f64>()
        .min(1.0)
}

/// Unweighted mean over per-class APs.
pub fn mean_ap(per_class_ap: &BTreeMap<u32, f64>) -> Result<f64, MetricsError> {
    if per_class_ap.is_empty() {
        return Err(MetricsError::EmptyApMap);
    }
    Ok(per_class_ap.values().sum::<f64>() / per_class_ap.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApReport {
    pub per_class: BTreeMap<u32, f64>,
    pub map: f64,
}

/// Per-class AP over the classes present in the ground truth, after dropping
/// detections below `confidence_threshold`.
pub fn evaluate(
    dets: &[Detection],
    gts: &[GroundTruthBox],
    iou_threshold: f64,
    confidence_threshold: f64,
) -> Result<ApReport, MetricsError> {
    for t in [iou_threshold, confidence_threshold] {
        if !(0.0..=1.0).contains(&t) {
            return Err(MetricsError::InvalidThreshold(t));
        }
    }
    let dets = filter_by_confidence(dets, confidence_threshold);
    let classes: BTreeSet<u32> = gts.iter().map(|g| g.class_id).collect();
    let per_class: BTreeMap<u32, f64> = classes
        .into_iter()
        .map(|c| {
            let d: Vec<Detection> = dets.iter().filter(|d| d.class_id == c).copied().collect();
            let g: Vec<GroundTruthBox> = gts.iter().filter(|g| g.class_id == c).copied().collect();
            let m = match_detections(&d, &g, iou_threshold);
            (c, average_precision(&m.tp_flags(), m.n_gt))
        })
        .collect();
    let map = mean_ap(&per_class)?;
    Ok(ApReport { per_class, map })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detmetrics::BoundingBox;
    use proptest::prelude::*;

    fn bx(x: f64, y: f64, w: f64, h: f64) -> BoundingBox {
        BoundingBox::new(x, y, w, h).unwrap()
    }

    fn det(frame: u64, class: u32, b: BoundingBox, score: f64) -> Detection {
        Detection::new(frame, class, b, score).unwrap()
    }

    fn gt(frame: u64, class: u32, b: BoundingBox) -> GroundTruthBox {
        GroundTruthBox {
            frame_id: frame,
            class_id: class,
            bbox: b,
        }
    }

    #[test]
    fn matching_examples() {
        let b = bx(0.0, 0.0, 10.0, 10.0);
        let m = match_detections(&[det(0, 0, b, 0.9)], &[gt(0, 0, b)], 0.5);
        assert_eq!((m.tp_flags(), m.n_gt), (vec![true], 1));

        let near = bx(1.0, 0.0, 10.0, 10.0);
        let m = match_detections(&[det(0, 0, near, 0.8), det(0, 0, b, 0.9)], &[gt(0, 0, b)], 0.5);
        assert_eq!(m.tp_flags(), vec![true, false]);
        assert_eq!(m.matched[0].detection.score, 0.9);

        let m = match_detections(&[det(3, 0, b, 0.9)], &[gt(0, 0, b)], 0.5);
        assert_eq!(m.tp_flags(), vec![false]);
        let m = match_detections(&[det(0, 1, b, 0.9)], &[gt(0, 0, b)], 0.5);
        assert_eq!(m.tp_flags(), vec![false]);
    }

    #[test]
    fn ties_keep_input_order() {
        let b = bx(0.0, 0.0, 10.0, 10.0);
        let m = match_detections(&[det(0, 0, b, 0.5), det(1, 0, b, 0.5)], &[gt(1, 0, b)], 0.5);
        assert_eq!(m.matched[0].detection.frame_id, 0);
        assert_eq!(m.tp_flags(), vec![false, true]);
    }

    #[test]
    fn picks_highest_iou_unmatched_gt() {
        let g0 = bx(0.0, 0.0, 10.0, 10.0);
        let g1 = bx(2.0, 0.0, 10.0, 10.0);
        let m = match_detections(
            &[
                det(0, 0, bx(2.0, 0.0, 10.0, 10.0), 0.9),
                det(0, 0, bx(1.0, 0.0, 10.0, 10.0), 0.8),
            ],
            &[gt(0, 0, g0), gt(0, 0, g1)],
            0.5,
        );
        assert_eq!(m.matched[0].gt_index, Some(1));
        assert_eq!(m.matched[1].gt_index, Some(0));
    }

    #[test]
    fn ap_hand_cases() {
        assert_eq!(average_precision(&[true, true, true], 3), 1.0);
        assert_eq!(average_precision(&[], 4), 0.0);
        assert_eq!(average_precision(&[true, false], 1), 1.0);
        assert_eq!(average_precision(&[false, true], 1), 0.5);
        assert_eq!(average_precision(&[], 0), 1.0);
        assert_eq!(average_precision(&[false], 0), 0.0);
        // recall 1/2 at precision 1, recall 2/2 at precision 2/3
        let v = average_precision(&[true, false, true], 2);
        assert!((v - (0.5 + 0.5 * 2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn mean_ap_examples() {
        let m = |pairs: &[(u32, f64)]| mean_ap(&pairs.iter().copied().collect()).unwrap();
        assert_eq!(m(&[(0, 1.0)]), 1.0);
        assert_eq!(m(&[(0, 1.0), (1, 0.0)]), 0.5);
        assert_eq!(m(&[(0, 0.5), (1, 0.25), (2, 0.75)]), 0.5);
        assert_eq!(mean_ap(&BTreeMap::new()), Err(MetricsError::EmptyApMap));
    }

    #[test]
    fn evaluate_uses_gt_classes_and_threshold() {
        let b = bx(0.0, 0.0, 10.0, 10.0);
        let gts = [gt(0, 0, b), gt(0, 2, b)];
        let dets = [det(0, 0, b, 0.9), det(0, 2, b, 0.2), det(0, 7, b, 0.9)];
        let r = evaluate(&dets, &gts, 0.5, 0.25).unwrap();
        assert_eq!(r.per_class.keys().copied().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(r.per_class[&0], 1.0);
        assert_eq!(r.per_class[&2], 0.0);
        assert_eq!(r.map, 0.5);
        assert!(evaluate(&dets, &[], 0.5, 0.25).is_err());
        assert!(evaluate(&dets, &gts, 1.5, 0.25).is_err());
    }

    proptest! {
        #[test]
        fn never_assigns_a_gt_twice(
            boxes in proptest::collection::vec((0u64..3, 0u32..2, 0.0f64..20.0, 0.0f64..20.0, 1.0f64..10.0, 0.0f64..=1.0), 0..15),
            gts in proptest::collection::vec((0u64..3, 0u32..2, 0.0f64..20.0, 0.0f64..20.0, 1.0f64..10.0), 0..10),
        ) {
            let dets: Vec<Detection> = boxes.iter().map(|&(f, c, x, y, s, sc)| det(f, c, bx(x, y, s, s), sc)).collect();
            let gts: Vec<GroundTruthBox> = gts.iter().map(|&(f, c, x, y, s)| gt(f, c, bx(x, y, s, s))).collect();
            let m = match_detections(&dets, &gts, 0.3);
            let mut used: Vec<usize> = m.matched.iter().filter_map(|d| d.gt_index).collect();
            let n = used.len();
            used.sort_unstable();
            used.dedup();
            prop_assert_eq!(used.len(), n);
            for w in m.matched.windows(2) {
                prop_assert!(w[0].detection.score >= w[1].detection.score);
            }
        }

        #[test]
        fn ap_depends_only_on_score_order(
            boxes in proptest::collection::vec((0u64..3, 0.0f64..20.0, 0.0f64..20.0, 1.0f64..10.0, 1u32..1000), 1..12),
            gts in proptest::collection::vec((0u64..3, 0.0f64..20.0, 0.0f64..20.0, 1.0f64..10.0), 1..8),
        ) {
            let gts: Vec<GroundTruthBox> = gts.iter().map(|&(f, x, y, s)| gt(f, 0, bx(x, y, s, s))).collect();
            let mk = |g: &dyn Fn(f64) -> f64| -> f64 {
                let dets: Vec<Detection> = boxes
                    .iter()
                    .map(|&(f, x, y, s, k)| det(f, 0, bx(x, y, s, s), g(k as f64 / 1000.0)))
                    .collect();
                let m = match_detections(&dets, &gts, 0.5);
                average_precision(&m.tp_flags(), m.n_gt)
            };
            let base = mk(&|s| s);
            prop_assert!((0.0..=1.0).contains(&base));
            prop_assert_eq!(base, mk(&|s| s.sqrt()));
            prop_assert_eq!(base, mk(&|s| s * s * s));
        }
    }
}
