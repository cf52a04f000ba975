//! Breast-level malignancy classification: suspicion scores, ROC/AUC and
//! comparison with clinical operating points.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::postprocess::Detection;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Laterality {
    Left,
    Right,
}

impl Laterality {
    pub fn as_str(self) -> &'static str {
        match self {
            Laterality::Left => "left",
            Laterality::Right => "right",
        }
    }
}

impl FromStr for Laterality {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "l" | "left" => Ok(Laterality::Left),
            "r" | "right" => Ok(Laterality::Right),
            other => Err(format!("unknown laterality '{other}'")),
        }
    }
}

/// Case-level pathology of a breast or patient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagnosis {
    Normal,
    Benign,
    Malignant,
}

impl Diagnosis {
    pub fn as_str(self) -> &'static str {
        match self {
            Diagnosis::Normal => "normal",
            Diagnosis::Benign => "benign",
            Diagnosis::Malignant => "malignant",
        }
    }

    pub fn is_malignant(self) -> bool {
        self == Diagnosis::Malignant
    }
}

impl fmt::Display for Diagnosis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Diagnosis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "normal" => Ok(Diagnosis::Normal),
            "benign" => Ok(Diagnosis::Benign),
            "malignant" => Ok(Diagnosis::Malignant),
            other => Err(format!("unknown pathology '{other}'")),
        }
    }
}

/// One breast: identified by `(patient_id, laterality)`, holding its views.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreastRecord {
    pub patient_id: String,
    pub laterality: Laterality,
    pub image_ids: Vec<String>,
    pub pathology: Diagnosis,
}

/// Suspicion score of a breast: the highest detection score over its images,
/// 0 when nothing was detected.
pub fn breast_score(breast: &BreastRecord, detections: &BTreeMap<String, Vec<Detection>>) -> f64 {
    breast
        .image_ids
        .iter()
        .filter_map(|id| detections.get(id))
        .flatten()
        .map(|d| d.score)
        .fold(0.0, f64::max)
}

/// `(score, is_malignant)` for each breast, benign and normal both negative.
pub fn breast_scores(
    breasts: &[BreastRecord],
    detections: &BTreeMap<String, Vec<Detection>>,
) -> Vec<(f64, bool)> {
    breasts
        .iter()
        .map(|b| (breast_score(b, detections), b.pathology.is_malignant()))
        .collect()
}

/// Patient-level variant: the maximum over a patient's breasts, malignant if
/// any breast is.
pub fn patient_scores(
    breasts: &[BreastRecord],
    detections: &BTreeMap<String, Vec<Detection>>,
) -> Vec<(f64, bool)> {
    let mut by_patient: BTreeMap<&str, (f64, bool)> = BTreeMap::new();
    for b in breasts {
        let s = breast_score(b, detections);
        let e = by_patient.entry(&b.patient_id).or_insert((0.0, false));
        e.0 = e.0.max(s);
        e.1 |= b.pathology.is_malignant();
    }
    by_patient.into_values().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub tpr: f64,
    pub fpr: f64,
}

/// ROC points in ascending threshold order, from `(−∞, 1, 1)` to `(+∞, 0, 0)`.
/// A case is called positive when its score is at least the threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
    pub positives: usize,
    pub negatives: usize,
}

pub fn roc_curve(scores: &[(f64, bool)]) -> Result<RocCurve> {
    if let Some((s, _)) = scores.iter().find(|(s, _)| !s.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite score {s}")));
    }
    let positives = scores.iter().filter(|(_, y)| *y).count();
    let negatives = scores.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass {
            positives,
            negatives,
        });
    }

    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));

    // Sweep from the highest threshold down; equal scores flip together.
    let mut descending = vec![RocPoint {
        threshold: f64::INFINITY,
        tpr: 0.0,
        fpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == t {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        descending.push(RocPoint {
            threshold: t,
            tpr: tp as f64 / positives as f64,
            fpr: fp as f64 / negatives as f64,
        });
    }
    descending.push(RocPoint {
        threshold: f64::NEG_INFINITY,
        tpr: 1.0,
        fpr: 1.0,
    });
    descending.reverse();
    let points = descending;

    let auc = points
        .windows(2)
        .map(|w| (w[0].fpr - w[1].fpr) * (w[0].tpr + w[1].tpr) / 2.0)
        .sum();

    Ok(RocCurve {
        points,
        auc,
        positives,
        negatives,
    })
}

// fpr values are k/N; this absorbs rounding in 1 − specificity.
const FPR_SLACK: f64 = 1e-12;

/// Largest TPR among points whose FPR does not exceed `1 − specificity`.
pub fn sensitivity_at_specificity(curve: &RocCurve, specificity: f64) -> f64 {
    let max_fpr = 1.0 - specificity + FPR_SLACK;
    curve
        .points
        .iter()
        .filter(|p| p.fpr <= max_fpr)
        .map(|p| p.tpr)
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClinicalOperatingPoint {
    pub sensitivity: f64,
    pub specificity: f64,
    pub source_tag: String,
}

impl ClinicalOperatingPoint {
    pub fn new(sensitivity: f64, specificity: f64, source_tag: impl Into<String>) -> Result<Self> {
        for (name, v) in [("sensitivity", sensitivity), ("specificity", specificity)] {
            crate::error::check_ratio(name, v)?;
        }
        Ok(ClinicalOperatingPoint {
            sensitivity,
            specificity,
            source_tag: source_tag.into(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClinicalComparisonRow {
    pub point: ClinicalOperatingPoint,
    pub model_sensitivity: f64,
    /// Model minus clinical sensitivity at the clinical specificity.
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ClinicalComparison {
    pub rows: Vec<ClinicalComparisonRow>,
    pub median_specificity: Option<f64>,
    pub model_sensitivity_at_median: Option<f64>,
}

pub fn compare_to_clinical(
    curve: &RocCurve,
    points: &[ClinicalOperatingPoint],
) -> ClinicalComparison {
    let rows = points
        .iter()
        .map(|p| {
            let model = sensitivity_at_specificity(curve, p.specificity);
            ClinicalComparisonRow {
                point: p.clone(),
                model_sensitivity: model,
                difference: model - p.sensitivity,
            }
        })
        .collect();
    let median_specificity = median(points.iter().map(|p| p.specificity).collect());
    ClinicalComparison {
        rows,
        median_specificity,
        model_sensitivity_at_median: median_specificity
            .map(|s| sensitivity_at_specificity(curve, s)),
    }
}

pub fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundingBox;

    fn det(img: &str, s: f64) -> Detection {
        Detection::new(img, BoundingBox::new(0., 0., 1., 1.).unwrap(), s).unwrap()
    }

    fn breast(ids: &[&str], p: Diagnosis) -> BreastRecord {
        BreastRecord {
            patient_id: "p".into(),
            laterality: Laterality::Left,
            image_ids: ids.iter().map(|s| s.to_string()).collect(),
            pathology: p,
        }
    }

    #[test]
    fn breast_score_examples() {
        let b = breast(&["cc", "mlo"], Diagnosis::Malignant);
        let mut dets = BTreeMap::new();
        assert_eq!(breast_score(&b, &dets), 0.0);
        dets.insert("cc".to_string(), vec![det("cc", 0.2)]);
        dets.insert("mlo".to_string(), vec![det("mlo", 0.8)]);
        assert_eq!(breast_score(&b, &dets), 0.8);
        let single = breast(&["x"], Diagnosis::Normal);
        let dets: BTreeMap<_, _> = [("x".to_string(), vec![det("x", 0.55)])].into();
        assert_eq!(breast_score(&single, &dets), 0.55);
    }

    #[test]
    fn auc_examples() {
        let perfect = roc_curve(&[(0.9, true), (0.8, true), (0.3, false), (0.1, false)]).unwrap();
        assert_eq!(perfect.auc, 1.0);
        let flat = roc_curve(&[(0.5, true), (0.5, false), (0.5, false)]).unwrap();
        assert_eq!(flat.auc, 0.5);
        let mixed = roc_curve(&[(0.9, true), (0.7, false), (0.6, true), (0.2, false)]).unwrap();
        assert_eq!(mixed.auc, 0.75);
    }

    #[test]
    fn curve_endpoints_and_order() {
        let c = roc_curve(&[(0.9, true), (0.7, false), (0.6, true), (0.2, false)]).unwrap();
        let first = c.points.first().unwrap();
        let last = c.points.last().unwrap();
        assert_eq!(
            (first.threshold, first.tpr, first.fpr),
            (f64::NEG_INFINITY, 1.0, 1.0)
        );
        assert_eq!(
            (last.threshold, last.tpr, last.fpr),
            (f64::INFINITY, 0.0, 0.0)
        );
        for w in c.points.windows(2) {
            assert!(w[0].threshold < w[1].threshold);
            assert!(w[0].tpr >= w[1].tpr && w[0].fpr >= w[1].fpr);
        }
    }

    #[test]
    fn single_class_is_an_error() {
        assert!(matches!(
            roc_curve(&[(0.3, false), (0.4, false)]),
            Err(Error::SingleClass {
                positives: 0,
                negatives: 2
            })
        ));
        assert!(roc_curve(&[]).is_err());
    }

    #[test]
    fn sensitivity_at_specificity_examples() {
        let c = roc_curve(&[(0.9, true), (0.7, false), (0.6, true), (0.2, false)]).unwrap();
        assert_eq!(sensitivity_at_specificity(&c, 0.0), 1.0);
        assert_eq!(sensitivity_at_specificity(&c, 1.0), 0.5);
        assert_eq!(sensitivity_at_specificity(&c, 0.5), 1.0);
    }

    #[test]
    fn clinical_comparison() {
        let perfect = roc_curve(&[(0.9, true), (0.1, false)]).unwrap();
        assert_eq!(
            compare_to_clinical(&perfect, &[]),
            ClinicalComparison::default()
        );
        let pt = ClinicalOperatingPoint::new(0.9, 0.757, "reader").unwrap();
        let report = compare_to_clinical(&perfect, &[pt]);
        assert_eq!(report.rows[0].model_sensitivity, 1.0);
        assert!((report.rows[0].difference - 0.1).abs() < 1e-12);
        assert_eq!(report.median_specificity, Some(0.757));
        assert!(ClinicalOperatingPoint::new(1.2, 0.5, "x").is_err());
    }

    #[test]
    fn median_of_specificities() {
        assert_eq!(median(vec![0.8, 0.7, 0.757]), Some(0.757));
        assert_eq!(median(vec![0.2, 0.4]), Some(0.30000000000000004));
        assert_eq!(median(vec![]), None);
    }

    #[test]
    fn patient_level_aggregation() {
        let mut a = breast(&["a1"], Diagnosis::Normal);
        a.patient_id = "p1".into();
        let mut b = breast(&["b1"], Diagnosis::Malignant);
        b.patient_id = "p1".into();
        b.laterality = Laterality::Right;
        let dets: BTreeMap<_, _> = [("a1".to_string(), vec![det("a1", 0.4)])].into();
        assert_eq!(patient_scores(&[a, b], &dets), vec![(0.4, true)]);
    }
}
