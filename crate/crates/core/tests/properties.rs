use cesm_cad::froc::{
    froc_curve, match_image, score_distribution, EvaluationSet, FpCategory, FrocMetric,
    GroundTruthLesion, LesionPathology,
};
use cesm_cad::geometry::iou;
use cesm_cad::postprocess::{nms, tta_fuse, FusionMode, TtaTransform};
use cesm_cad::roc::{roc_curve, sensitivity_at_specificity};
use cesm_cad::{BoundingBox, Detection};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bx(x0: f64, y0: f64, x1: f64, y1: f64) -> BoundingBox {
    BoundingBox::new(x0, y0, x1, y1).unwrap()
}

fn jittered(rng: &mut ChaCha8Rng, center: (f64, f64), spread: i32) -> BoundingBox {
    let cx = center.0 + f64::from(rng.gen_range(-spread..=spread));
    let cy = center.1 + f64::from(rng.gen_range(-spread..=spread));
    let w = f64::from(rng.gen_range(6..=14));
    let h = f64::from(rng.gen_range(6..=14));
    bx(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0)
}

/// Largest number of disjoint (detection, lesion) pairs with IoU ≥ `thr`.
fn max_matching(dets: &[Detection], lesions: &[GroundTruthLesion], thr: f64) -> usize {
    fn go(d: usize, used: &mut Vec<bool>, edges: &[Vec<bool>]) -> usize {
        if d == edges.len() {
            return 0;
        }
        let mut best = go(d + 1, used, edges);
        for l in 0..used.len() {
            if edges[d][l] && !used[l] {
                used[l] = true;
                best = best.max(1 + go(d + 1, used, edges));
                used[l] = false;
            }
        }
        best
    }
    let edges: Vec<Vec<bool>> = dets
        .iter()
        .map(|d| {
            lesions
                .iter()
                .map(|l| iou(&d.bbox, &l.bbox) >= thr)
                .collect()
        })
        .collect();
    go(0, &mut vec![false; lesions.len()], &edges)
}

#[test]
fn greedy_matching_is_near_optimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let trials = 2000;
    let mut disagreements = Vec::new();
    for trial in 0..trials {
        // Crowd everything around two centres so candidate sets overlap.
        let centres = [(20.0, 20.0), (26.0, 22.0)];
        let lesions: Vec<GroundTruthLesion> = (0..rng.gen_range(1..=4))
            .map(|i| GroundTruthLesion {
                image_id: "img".into(),
                lesion_id: format!("l{i}"),
                bbox: jittered(&mut rng, centres[i % 2], 4),
                pathology: LesionPathology::Malignant,
            })
            .collect();
        let dets: Vec<Detection> = (0..rng.gen_range(1..=4))
            .map(|i| {
                let b = jittered(&mut rng, centres[i % 2], 5);
                Detection::new("img", b, f64::from(rng.gen_range(1..=9)) / 10.0).unwrap()
            })
            .collect();
        let greedy = match_image(&dets, &lesions, FrocMetric::AllLesions, 0.3)
            .unwrap()
            .true_positives
            .len();
        let optimal = max_matching(&dets, &lesions, 0.3);
        assert!(greedy <= optimal);
        if greedy != optimal {
            disagreements.push((trial, greedy, optimal));
        }
    }
    for (trial, greedy, optimal) in &disagreements {
        eprintln!("greedy matching trial {trial}: greedy {greedy} TP, optimal {optimal}");
    }
    let agreement = 1.0 - disagreements.len() as f64 / trials as f64;
    eprintln!("greedy matching agreement with exhaustive optimum: {agreement}");
    assert!(agreement >= 0.95, "agreement {agreement}");
}

fn det_strategy(image: &'static str) -> impl Strategy<Value = Detection> {
    (0u32..60, 0u32..60, 1u32..25, 1u32..25, 0u32..=20).prop_map(move |(x, y, w, h, s)| {
        let (x, y) = (f64::from(x), f64::from(y));
        Detection::new(
            image,
            bx(x, y, x + f64::from(w), y + f64::from(h)),
            f64::from(s) / 20.0,
        )
        .unwrap()
    })
}

fn lesion_strategy() -> impl Strategy<Value = (BoundingBox, LesionPathology)> {
    let pathology = prop_oneof![
        Just(LesionPathology::Malignant),
        Just(LesionPathology::BenignBiopsied),
        Just(LesionPathology::BenignNonBiopsied),
    ];
    (0u32..60, 0u32..60, 4u32..25, pathology).prop_map(|(x, y, s, p)| {
        let (x, y, s) = (f64::from(x), f64::from(y), f64::from(s));
        (bx(x, y, x + s, y + s), p)
    })
}

fn lesions_for(image: &str, raw: Vec<(BoundingBox, LesionPathology)>) -> Vec<GroundTruthLesion> {
    raw.into_iter()
        .enumerate()
        .map(|(i, (bbox, pathology))| GroundTruthLesion {
            image_id: image.into(),
            lesion_id: format!("l{i}"),
            bbox,
            pathology,
        })
        .collect()
}

proptest! {
    // Integration tests have no src/ to anchor regression files to.
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn target_sets_are_nested(
        dets in prop::collection::vec(det_strategy("a"), 0..12),
        raw in prop::collection::vec(lesion_strategy(), 0..6),
    ) {
        let lesions = lesions_for("a", raw);
        let set = EvaluationSet::new(["a"], dets.clone(), lesions).unwrap();
        let all = set.target_count(FrocMetric::AllLesions);
        let biopsied = set.target_count(FrocMetric::BiopsiedLesions);
        let malignant = set.target_count(FrocMetric::MalignantLesions);
        prop_assert!(all >= biopsied && biopsied >= malignant);

        // With every lesion a target, no FP can be attributed to one.
        let r = &set.match_all(FrocMetric::AllLesions, 0.3).unwrap()[0];
        prop_assert!(r.false_positives.iter().all(|(_, c)| *c == FpCategory::NonAnnotated));
        for p in &r.pairs {
            prop_assert!(p.iou >= 0.3);
        }
    }

    #[test]
    fn froc_sensitivity_never_exceeds_one_and_ends_at_all_detections(
        dets in prop::collection::vec(det_strategy("a"), 1..15),
        raw in prop::collection::vec(lesion_strategy(), 1..6),
    ) {
        let lesions = lesions_for("a", raw);
        let set = EvaluationSet::new(["a", "b"], dets.clone(), lesions).unwrap();
        let curve = froc_curve(&set, FrocMetric::AllLesions, 0.3).unwrap();
        let last = curve.points.last().unwrap();
        prop_assert_eq!(last.true_positives + last.false_positives, dets.len());
        prop_assert_eq!(last.fp_per_image, last.false_positives as f64 / 2.0);
        prop_assert!(curve.points.iter().all(|p| p.sensitivity <= 1.0));
    }

    #[test]
    fn score_distribution_conserves_detections(
        dets in prop::collection::vec(det_strategy("a"), 0..20),
        raw in prop::collection::vec(lesion_strategy(), 0..6),
        min_score in prop_oneof![Just(0.0), Just(0.1), Just(0.25)],
        width in prop_oneof![Just(0.05), Just(0.1), Just(0.3)],
    ) {
        let lesions = lesions_for("a", raw);
        let set = EvaluationSet::new(["a"], dets.clone(), lesions).unwrap();
        let results = set.match_all(FrocMetric::MalignantLesions, 0.3).unwrap();
        let dist = score_distribution(&results, width, min_score).unwrap();
        let expected = dets.iter().filter(|d| d.score >= min_score).count();
        prop_assert_eq!(dist.total(), expected);
        prop_assert_eq!(dist.bins.last().unwrap().hi, 1.0);
    }

    #[test]
    fn roc_points_are_monotone(
        raw in prop::collection::vec((0u32..=10, any::<bool>()), 2..60),
    ) {
        let mut scores: Vec<(f64, bool)> = raw.into_iter().map(|(s, y)| (f64::from(s) / 10.0, y)).collect();
        scores[0].1 = true;
        scores[1].1 = false;
        let curve = roc_curve(&scores).unwrap();
        let first = curve.points.first().unwrap();
        let last = curve.points.last().unwrap();
        prop_assert_eq!((first.threshold, first.tpr, first.fpr), (f64::NEG_INFINITY, 1.0, 1.0));
        prop_assert_eq!((last.threshold, last.tpr, last.fpr), (f64::INFINITY, 0.0, 0.0));
        for w in curve.points.windows(2) {
            prop_assert!(w[0].threshold < w[1].threshold);
            prop_assert!(w[0].tpr >= w[1].tpr && w[0].fpr >= w[1].fpr);
        }
        prop_assert!((0.0..=1.0).contains(&curve.auc));
        let mut prev = 1.0;
        for k in 0..=20 {
            let se = sensitivity_at_specificity(&curve, f64::from(k) / 20.0);
            prop_assert!(se <= prev);
            prev = se;
        }
    }

    #[test]
    fn identity_fusion_is_plain_nms(
        dets in prop::collection::vec(det_strategy("a"), 0..30),
        thr in prop_oneof![Just(0.1), Just(0.2), Just(0.5)],
    ) {
        let t = TtaTransform::identity(100.0, 100.0).unwrap();
        let views = vec![(t, dets.clone())];
        prop_assert_eq!(tta_fuse(&views, thr, FusionMode::Nms).unwrap(), nms(&dets, thr).unwrap());
        let averaged = tta_fuse(&views, thr, FusionMode::WeightedAverage).unwrap();
        prop_assert_eq!(averaged.len(), nms(&dets, thr).unwrap().len());
    }

    #[test]
    fn mirrored_views_fuse_to_one_set(
        dets in prop::collection::vec(det_strategy("a"), 1..10),
    ) {
        let (w, h) = (100.0, 100.0);
        let id = TtaTransform::identity(w, h).unwrap();
        let flip = TtaTransform::horizontal_flip(w, h).unwrap();
        let mirrored: Vec<Detection> = dets
            .iter()
            .map(|d| Detection { bbox: flip.forward(&d.bbox).unwrap(), ..d.clone() })
            .collect();
        let fused = tta_fuse(&[(id, dets.clone()), (flip, mirrored)], 0.2, FusionMode::Nms).unwrap();
        prop_assert_eq!(fused, nms(&dets, 0.2).unwrap());
    }
}
