//! Lesion-level matching and FROC analysis.
//!
//! Detections are matched one-to-one against the lesions a [`FrocMetric`]
//! targets, greedily in descending score order, under an IoU acceptance
//! criterion (`IoU ≥ threshold`). Unmatched detections are false positives and
//! are classified by what they landed on.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_ratio, Error, Result};
use crate::geometry::{iou, BoundingBox};
use crate::postprocess::{check_single_image, rank_order, Detection};

/// IoU a detection needs with a lesion to count as a hit.
pub const DEFAULT_MATCH_IOU: f64 = 0.3;
pub const DEFAULT_BIN_WIDTH: f64 = 0.05;
pub const DEFAULT_MIN_SCORE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LesionPathology {
    Malignant,
    BenignBiopsied,
    BenignNonBiopsied,
}

impl LesionPathology {
    pub fn as_str(self) -> &'static str {
        match self {
            LesionPathology::Malignant => "malignant",
            LesionPathology::BenignBiopsied => "benign_biopsied",
            LesionPathology::BenignNonBiopsied => "benign_non_biopsied",
        }
    }
}

impl FromStr for LesionPathology {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "malignant" => Ok(LesionPathology::Malignant),
            "benign_biopsied" => Ok(LesionPathology::BenignBiopsied),
            "benign_non_biopsied" => Ok(LesionPathology::BenignNonBiopsied),
            other => Err(format!("unknown lesion pathology '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthLesion {
    pub image_id: String,
    pub lesion_id: String,
    pub bbox: BoundingBox,
    pub pathology: LesionPathology,
}

/// Which annotated lesions count as detection targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrocMetric {
    /// Every annotated lesion.
    AllLesions,
    /// Malignant and biopsied benign lesions.
    BiopsiedLesions,
    /// Cancers only.
    MalignantLesions,
}

impl FrocMetric {
    pub const ALL: [FrocMetric; 3] = [
        FrocMetric::AllLesions,
        FrocMetric::BiopsiedLesions,
        FrocMetric::MalignantLesions,
    ];

    pub fn targets(self, p: LesionPathology) -> bool {
        use LesionPathology::*;
        match self {
            FrocMetric::AllLesions => true,
            FrocMetric::BiopsiedLesions => matches!(p, Malignant | BenignBiopsied),
            FrocMetric::MalignantLesions => p == Malignant,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FrocMetric::AllLesions => "all",
            FrocMetric::BiopsiedLesions => "biopsied",
            FrocMetric::MalignantLesions => "malignant",
        }
    }
}

impl fmt::Display for FrocMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FrocMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" | "all_lesions" => Ok(FrocMetric::AllLesions),
            "biopsied" | "biopsied_lesions" => Ok(FrocMetric::BiopsiedLesions),
            "malignant" | "malignant_lesions" => Ok(FrocMetric::MalignantLesions),
            other => Err(Error::InvalidArgument(format!(
                "unknown FROC metric '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FpCategory {
    NonAnnotated,
    AnnotatedNonBiopsied,
    BiopsiedBenign,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchedPair {
    pub detection: Detection,
    pub lesion_id: String,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct MatchResult {
    pub pairs: Vec<MatchedPair>,
    pub true_positives: Vec<Detection>,
    pub false_positives: Vec<(Detection, FpCategory)>,
    pub missed: Vec<String>,
}

impl MatchResult {
    pub fn target_count(&self) -> usize {
        self.true_positives.len() + self.missed.len()
    }
}

/// Matches the detections of one image against its lesions.
pub fn match_image(
    dets: &[Detection],
    gts: &[GroundTruthLesion],
    metric: FrocMetric,
    iou_threshold: f64,
) -> Result<MatchResult> {
    check_ratio("iou_threshold", iou_threshold)?;
    check_single_image(
        dets.iter()
            .map(|d| d.image_id.as_str())
            .chain(gts.iter().map(|g| g.image_id.as_str())),
    )?;

    let (targets, others): (Vec<&GroundTruthLesion>, Vec<&GroundTruthLesion>) =
        gts.iter().partition(|g| metric.targets(g.pathology));
    let mut claimed = vec![false; targets.len()];

    let mut ranked: Vec<&Detection> = dets.iter().collect();
    ranked.sort_by(|a, b| rank_order(a, b));

    let mut result = MatchResult::default();
    for d in ranked {
        let mut best: Option<(usize, f64)> = None;
        for (i, t) in targets.iter().enumerate() {
            if claimed[i] {
                continue;
            }
            let v = iou(&d.bbox, &t.bbox);
            if v >= iou_threshold && best.map_or(true, |(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        match best {
            Some((i, v)) => {
                claimed[i] = true;
                result.pairs.push(MatchedPair {
                    detection: d.clone(),
                    lesion_id: targets[i].lesion_id.clone(),
                    iou: v,
                });
                result.true_positives.push(d.clone());
            }
            None => {
                let category = classify_false_positive(d, &others, iou_threshold);
                result.false_positives.push((d.clone(), category));
            }
        }
    }
    result.missed = targets
        .iter()
        .zip(&claimed)
        .filter(|(_, &c)| !c)
        .map(|(t, _)| t.lesion_id.clone())
        .collect();
    Ok(result)
}

fn classify_false_positive(
    d: &Detection,
    others: &[&GroundTruthLesion],
    iou_threshold: f64,
) -> FpCategory {
    let mut best: Option<(&GroundTruthLesion, f64)> = None;
    for g in others {
        let v = iou(&d.bbox, &g.bbox);
        if v >= iou_threshold && best.map_or(true, |(_, b)| v > b) {
            best = Some((g, v));
        }
    }
    match best.map(|(g, _)| g.pathology) {
        Some(LesionPathology::BenignNonBiopsied) => FpCategory::AnnotatedNonBiopsied,
        Some(LesionPathology::BenignBiopsied) => FpCategory::BiopsiedBenign,
        // Malignant lesions are targets of every metric.
        Some(LesionPathology::Malignant) | None => FpCategory::NonAnnotated,
    }
}

/// Detections and lesions of one evaluated image.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ImageEval {
    pub image_id: String,
    pub detections: Vec<Detection>,
    pub lesions: Vec<GroundTruthLesion>,
}

/// Every evaluated image, including those without detections or lesions, in
/// image-id order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvaluationSet {
    images: Vec<ImageEval>,
    breast_count: Option<usize>,
}

impl EvaluationSet {
    /// Groups records by image. Records pointing to an image outside
    /// `image_ids` are an integrity error.
    pub fn new<I, S>(
        image_ids: I,
        detections: Vec<Detection>,
        lesions: Vec<GroundTruthLesion>,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut by_id: BTreeMap<String, ImageEval> = image_ids
            .into_iter()
            .map(|id| {
                let id = id.into();
                (
                    id.clone(),
                    ImageEval {
                        image_id: id,
                        ..ImageEval::default()
                    },
                )
            })
            .collect();
        let mut dangling = Vec::new();
        for d in detections {
            match by_id.get_mut(&d.image_id) {
                Some(img) => img.detections.push(d),
                None => dangling.push(d.image_id),
            }
        }
        for l in lesions {
            match by_id.get_mut(&l.image_id) {
                Some(img) => img.lesions.push(l),
                None => dangling.push(l.image_id),
            }
        }
        if !dangling.is_empty() {
            dangling.sort();
            dangling.dedup();
            return Err(Error::Integrity(format!(
                "records reference unknown images: {}",
                dangling.join(", ")
            )));
        }
        Ok(EvaluationSet {
            images: by_id.into_values().collect(),
            breast_count: None,
        })
    }

    /// Enables the per-breast FP rate alongside the per-image one.
    pub fn with_breast_count(mut self, breasts: usize) -> Self {
        self.breast_count = Some(breasts);
        self
    }

    pub fn images(&self) -> &[ImageEval] {
        &self.images
    }

    pub fn image_count(&self) -> usize {
        self.images.len()
    }

    pub fn breast_count(&self) -> Option<usize> {
        self.breast_count
    }

    pub fn target_count(&self, metric: FrocMetric) -> usize {
        self.images
            .iter()
            .flat_map(|i| &i.lesions)
            .filter(|l| metric.targets(l.pathology))
            .count()
    }

    pub fn match_all(&self, metric: FrocMetric, iou_threshold: f64) -> Result<Vec<MatchResult>> {
        self.images
            .iter()
            .map(|img| match_image(&img.detections, &img.lesions, metric, iou_threshold))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrocPoint {
    pub threshold: f64,
    pub sensitivity: f64,
    pub fp_per_image: f64,
    pub true_positives: usize,
    pub false_positives: usize,
}

/// Operating points ordered by descending score threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrocCurve {
    pub metric: FrocMetric,
    pub points: Vec<FrocPoint>,
    pub total_targets: usize,
    pub image_count: usize,
    pub breast_count: Option<usize>,
}

impl FrocCurve {
    pub fn fp_per_breast(&self, point: &FrocPoint) -> Option<f64> {
        self.breast_count
            .filter(|&b| b > 0)
            .map(|b| point.false_positives as f64 / b as f64)
    }

    pub fn max_sensitivity(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.sensitivity)
    }
}

pub fn froc_curve(
    set: &EvaluationSet,
    metric: FrocMetric,
    iou_threshold: f64,
) -> Result<FrocCurve> {
    let total_targets = set.target_count(metric);
    if total_targets == 0 {
        return Err(Error::NoTargets(metric.as_str()));
    }
    let image_count = set.image_count();

    // Greedy matching in score order means the outcome of a detection depends
    // only on higher-ranked ones, so one pass over all detections yields the
    // matching at every threshold.
    let mut outcomes: Vec<(f64, bool)> = Vec::new();
    for result in set.match_all(metric, iou_threshold)? {
        outcomes.extend(result.true_positives.iter().map(|d| (d.score, true)));
        outcomes.extend(result.false_positives.iter().map(|(d, _)| (d.score, false)));
    }
    outcomes.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut points = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < outcomes.len() {
        let threshold = outcomes[i].0;
        while i < outcomes.len() && outcomes[i].0 == threshold {
            if outcomes[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(FrocPoint {
            threshold,
            sensitivity: tp as f64 / total_targets as f64,
            fp_per_image: fp as f64 / image_count as f64,
            true_positives: tp,
            false_positives: fp,
        });
    }

    Ok(FrocCurve {
        metric,
        points,
        total_targets,
        image_count,
        breast_count: set.breast_count(),
    })
}

/// Best sensitivity reachable without exceeding `fp_per_image`. Step lookup,
/// no interpolation; 0 when even the strictest threshold exceeds the budget.
pub fn sensitivity_at_fp(curve: &FrocCurve, fp_per_image: f64) -> Result<f64> {
    if curve.points.is_empty() {
        return Err(Error::EmptyInput("FROC curve"));
    }
    Ok(curve
        .points
        .iter()
        .take_while(|p| p.fp_per_image <= fp_per_image)
        .last()
        .map_or(0.0, |p| p.sensitivity))
}

/// Highest-threshold point whose sensitivity reaches `sensitivity`.
pub fn operating_point_at_sensitivity(curve: &FrocCurve, sensitivity: f64) -> Result<FrocPoint> {
    if curve.points.is_empty() {
        return Err(Error::EmptyInput("FROC curve"));
    }
    curve
        .points
        .iter()
        .find(|p| p.sensitivity >= sensitivity)
        .copied()
        .ok_or(Error::SensitivityUnreachable {
            requested: sensitivity,
            max: curve.max_sensitivity(),
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ScoreBin {
    pub lo: f64,
    pub hi: f64,
    pub tp: usize,
    pub fp_non_annotated: usize,
    pub fp_annotated_non_biopsied: usize,
    pub fp_biopsied_benign: usize,
}

impl ScoreBin {
    pub fn total(&self) -> usize {
        self.tp + self.fp_non_annotated + self.fp_annotated_non_biopsied + self.fp_biopsied_benign
    }
}

/// Histogram of TP and categorised FP scores over `[min_score, 1]`. Bins are
/// half-open `[lo, hi)` except the last, which also holds a score of 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreDistribution {
    pub min_score: f64,
    pub bin_width: f64,
    pub bins: Vec<ScoreBin>,
}

impl ScoreDistribution {
    pub fn total(&self) -> usize {
        self.bins.iter().map(ScoreBin::total).sum()
    }
}

// Bin edges are snapped to 1e-9 so that e.g. 0.1 + 12·0.05 reads as 0.7.
fn snap(v: f64) -> f64 {
    (v * 1e9).round() / 1e9
}

pub fn score_distribution(
    results: &[MatchResult],
    bin_width: f64,
    min_score: f64,
) -> Result<ScoreDistribution> {
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    if !(0.0..1.0).contains(&min_score) {
        return Err(Error::InvalidArgument(format!(
            "min score must lie in [0, 1), got {min_score}"
        )));
    }
    let n = (((1.0 - min_score) / bin_width) - 1e-9).ceil().max(1.0) as usize;
    let mut bins: Vec<ScoreBin> = (0..n)
        .map(|i| ScoreBin {
            lo: snap(min_score + i as f64 * bin_width),
            hi: snap(min_score + (i + 1) as f64 * bin_width).min(1.0),
            ..ScoreBin::default()
        })
        .collect();

    let lows: Vec<f64> = bins.iter().map(|b| b.lo).collect();
    let locate = |s: f64| -> Option<usize> {
        if s < lows[0] {
            return None;
        }
        let mut i = (((s - min_score) / bin_width).floor().max(0.0) as usize).min(n - 1);
        while i + 1 < n && lows[i + 1] <= s {
            i += 1;
        }
        while i > 0 && lows[i] > s {
            i -= 1;
        }
        Some(i)
    };

    for r in results {
        for d in &r.true_positives {
            if let Some(i) = locate(d.score) {
                bins[i].tp += 1;
            }
        }
        for (d, cat) in &r.false_positives {
            if let Some(i) = locate(d.score) {
                let b = &mut bins[i];
                match cat {
                    FpCategory::NonAnnotated => b.fp_non_annotated += 1,
                    FpCategory::AnnotatedNonBiopsied => b.fp_annotated_non_biopsied += 1,
                    FpCategory::BiopsiedBenign => b.fp_biopsied_benign += 1,
                }
            }
        }
    }

    Ok(ScoreDistribution {
        min_score,
        bin_width,
        bins,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(x0: f64, y0: f64, x1: f64, y1: f64) -> BoundingBox {
        BoundingBox::new(x0, y0, x1, y1).unwrap()
    }

    fn det(img: &str, b: BoundingBox, s: f64) -> Detection {
        Detection::new(img, b, s).unwrap()
    }

    fn gt(img: &str, id: &str, b: BoundingBox, p: LesionPathology) -> GroundTruthLesion {
        GroundTruthLesion {
            image_id: img.into(),
            lesion_id: id.into(),
            bbox: b,
            pathology: p,
        }
    }

    use LesionPathology::*;

    #[test]
    fn iou_exactly_at_threshold_is_a_hit() {
        // 3x10 inside 10x10: IoU = 30/100 = 0.3 exactly.
        let g = gt("i", "L1", bx(0., 0., 10., 10.), Malignant);
        let d = det("i", bx(0., 0., 3., 10.), 0.9);
        assert_eq!(iou(&d.bbox, &g.bbox), 0.3);
        let r = match_image(&[d], &[g], FrocMetric::MalignantLesions, 0.3).unwrap();
        assert_eq!(r.true_positives.len(), 1);
        assert!(r.missed.is_empty());
        assert_eq!(r.pairs[0].lesion_id, "L1");
    }

    #[test]
    fn below_threshold_is_a_miss() {
        let g = gt("i", "L1", bx(0., 0., 100., 10.), Malignant);
        let d = det("i", bx(0., 0., 29., 10.), 0.9);
        assert!((iou(&d.bbox, &g.bbox) - 0.29).abs() < 1e-12);
        let r = match_image(&[d], &[g], FrocMetric::MalignantLesions, 0.3).unwrap();
        assert!(r.true_positives.is_empty());
        assert_eq!(r.false_positives.len(), 1);
        assert_eq!(r.missed, vec!["L1".to_string()]);
    }

    #[test]
    fn hit_on_biopsied_benign_is_categorised() {
        let benign = gt("i", "B1", bx(0., 0., 10., 10.), BenignBiopsied);
        let d = det("i", bx(0., 0., 6., 10.), 0.8);
        let r = match_image(&[d], &[benign], FrocMetric::MalignantLesions, 0.3).unwrap();
        assert_eq!(r.false_positives[0].1, FpCategory::BiopsiedBenign);
        assert!(r.missed.is_empty());
    }

    #[test]
    fn non_biopsied_is_a_target_only_in_the_all_metric() {
        let nb = gt("i", "N1", bx(0., 0., 10., 10.), BenignNonBiopsied);
        let d = det("i", bx(0., 0., 10., 10.), 0.8);
        let all = match_image(
            std::slice::from_ref(&d),
            std::slice::from_ref(&nb),
            FrocMetric::AllLesions,
            0.3,
        )
        .unwrap();
        assert_eq!(all.true_positives.len(), 1);
        let biop = match_image(&[d], &[nb], FrocMetric::BiopsiedLesions, 0.3).unwrap();
        assert_eq!(biop.false_positives[0].1, FpCategory::AnnotatedNonBiopsied);
    }

    #[test]
    fn detection_straddling_two_lesions_claims_the_higher_iou() {
        let a = gt("i", "A", bx(0., 0., 10., 10.), Malignant);
        let b = gt("i", "B", bx(4., 0., 14., 10.), Malignant);
        let d = det("i", bx(3., 0., 13., 10.), 0.9);
        let r = match_image(&[d], &[a, b], FrocMetric::MalignantLesions, 0.3).unwrap();
        assert_eq!(r.pairs[0].lesion_id, "B");
        assert_eq!(r.missed, vec!["A".to_string()]);
    }

    #[test]
    fn duplicate_detections_count_once() {
        let g = gt("i", "L", bx(0., 0., 10., 10.), Malignant);
        let dets = [
            det("i", bx(0., 0., 10., 10.), 0.9),
            det("i", bx(0., 0., 10., 9.), 0.5),
        ];
        let r = match_image(&dets, &[g], FrocMetric::MalignantLesions, 0.3).unwrap();
        assert_eq!(r.true_positives[0].score, 0.9);
        assert_eq!(r.false_positives.len(), 1);
        assert_eq!(r.false_positives[0].1, FpCategory::NonAnnotated);
    }

    #[test]
    fn bad_inputs_rejected() {
        assert!(match_image(&[], &[], FrocMetric::AllLesions, 1.2).is_err());
        let d1 = det("a", bx(0., 0., 1., 1.), 0.5);
        let g = gt("b", "L", bx(0., 0., 1., 1.), Malignant);
        assert!(matches!(
            match_image(&[d1], &[g], FrocMetric::AllLesions, 0.3),
            Err(Error::MixedImages { .. })
        ));
    }

    fn two_image_fixture() -> EvaluationSet {
        EvaluationSet::new(
            ["img1", "img2"],
            vec![
                // Half of the lesion: IoU 0.5.
                det("img1", bx(0., 0., 10., 5.), 0.9),
                det("img2", bx(50., 50., 60., 60.), 0.4),
            ],
            vec![gt("img1", "L1", bx(0., 0., 10., 10.), Malignant)],
        )
        .unwrap()
    }

    #[test]
    fn two_image_curve() {
        let set = two_image_fixture();
        let curve = froc_curve(&set, FrocMetric::MalignantLesions, 0.3).unwrap();
        let pts: Vec<_> = curve
            .points
            .iter()
            .map(|p| (p.threshold, p.sensitivity, p.fp_per_image))
            .collect();
        assert_eq!(pts, vec![(0.9, 1.0, 0.0), (0.4, 1.0, 0.5)]);

        let op = operating_point_at_sensitivity(&curve, 1.0).unwrap();
        assert_eq!((op.threshold, op.fp_per_image), (0.9, 0.0));
        assert_eq!(
            operating_point_at_sensitivity(&curve, 0.0)
                .unwrap()
                .threshold,
            0.9
        );
        assert_eq!(sensitivity_at_fp(&curve, 10.0).unwrap(), 1.0);
    }

    #[test]
    fn unreachable_sensitivity_reports_the_maximum() {
        let set = EvaluationSet::new(
            ["a"],
            vec![det("a", bx(0., 0., 10., 10.), 0.7)],
            vec![
                gt("a", "L1", bx(0., 0., 10., 10.), Malignant),
                gt("a", "L2", bx(50., 50., 60., 60.), Malignant),
            ],
        )
        .unwrap();
        let curve = froc_curve(&set, FrocMetric::MalignantLesions, 0.3).unwrap();
        match operating_point_at_sensitivity(&curve, 0.95) {
            Err(Error::SensitivityUnreachable { max, .. }) => assert_eq!(max, 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn no_overlap_means_zero_sensitivity() {
        let set = EvaluationSet::new(
            ["a"],
            vec![
                det("a", bx(50., 50., 60., 60.), 0.7),
                det("a", bx(70., 50., 80., 60.), 0.2),
            ],
            vec![gt("a", "L1", bx(0., 0., 10., 10.), Malignant)],
        )
        .unwrap();
        let curve = froc_curve(&set, FrocMetric::AllLesions, 0.3).unwrap();
        assert!(curve.points.iter().all(|p| p.sensitivity == 0.0));
        assert_eq!(sensitivity_at_fp(&curve, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn perfect_detector_reaches_full_sensitivity_without_fp() {
        let set = EvaluationSet::new(
            ["a", "b"],
            vec![
                det("a", bx(0., 0., 10., 10.), 0.7),
                det("b", bx(5., 5., 9., 9.), 0.6),
            ],
            vec![
                gt("a", "L1", bx(0., 0., 10., 10.), Malignant),
                gt("b", "L2", bx(5., 5., 9., 9.), BenignBiopsied),
            ],
        )
        .unwrap();
        let curve = froc_curve(&set, FrocMetric::AllLesions, 0.3).unwrap();
        let last = curve.points.last().unwrap();
        assert_eq!((last.sensitivity, last.fp_per_image), (1.0, 0.0));
    }

    #[test]
    fn zero_targets_is_an_error() {
        let set = EvaluationSet::new(
            ["a"],
            vec![],
            vec![gt("a", "B", bx(0., 0., 1., 1.), BenignBiopsied)],
        )
        .unwrap();
        assert!(matches!(
            froc_curve(&set, FrocMetric::MalignantLesions, 0.3),
            Err(Error::NoTargets("malignant"))
        ));
    }

    #[test]
    fn dangling_records_fail_integrity() {
        let err = EvaluationSet::new(["a"], vec![det("zz", bx(0., 0., 1., 1.), 0.5)], vec![])
            .unwrap_err();
        assert!(matches!(err, Error::Integrity(msg) if msg.contains("zz")));
    }

    #[test]
    fn per_breast_rate() {
        let curve = froc_curve(
            &two_image_fixture().with_breast_count(1),
            FrocMetric::AllLesions,
            0.3,
        )
        .unwrap();
        assert_eq!(curve.fp_per_breast(&curve.points[1]), Some(1.0));
    }

    #[test]
    fn score_distribution_bins() {
        let fp = det("i", bx(0., 0., 1., 1.), 0.72);
        let tp = det("i", bx(0., 0., 1., 1.), 1.0);
        let low = det("i", bx(0., 0., 1., 1.), 0.05);
        let r = MatchResult {
            true_positives: vec![tp],
            false_positives: vec![
                (fp, FpCategory::BiopsiedBenign),
                (low, FpCategory::NonAnnotated),
            ],
            ..MatchResult::default()
        };
        let dist = score_distribution(&[r], DEFAULT_BIN_WIDTH, DEFAULT_MIN_SCORE).unwrap();
        assert_eq!(dist.bins.len(), 18);
        assert_eq!(dist.bins[0].lo, 0.1);
        assert_eq!(dist.bins[17].hi, 1.0);
        let hit = dist
            .bins
            .iter()
            .find(|b| b.fp_biopsied_benign == 1)
            .unwrap();
        assert_eq!((hit.lo, hit.hi), (0.7, 0.75));
        assert_eq!(dist.bins[17].tp, 1);
        // The 0.05 detection lies below the floor.
        assert_eq!(dist.total(), 2);
        assert!(score_distribution(&[], 0.0, 0.1).is_err());
    }

    #[test]
    fn bin_edges_are_inclusive_at_the_bottom() {
        let r = MatchResult {
            true_positives: vec![
                det("i", bx(0., 0., 1., 1.), 0.7),
                det("i", bx(0., 0., 1., 1.), 0.1),
            ],
            ..MatchResult::default()
        };
        let dist = score_distribution(&[r], 0.05, 0.1).unwrap();
        assert_eq!(dist.bins[12].tp, 1);
        assert_eq!(dist.bins[12].lo, 0.7);
        assert_eq!(dist.bins[0].tp, 1);
    }
}
