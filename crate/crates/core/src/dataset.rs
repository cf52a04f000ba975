use std::collections::BTreeMap;
use std::path::Path;

use crate::data::StudyIndex;
use crate::error::Result;
use crate::froc::{EvaluationSet, GroundTruthLesion};
use crate::io;
use crate::postprocess::Detection;
use crate::roc::{breast_scores, BreastRecord};

/// Study index, annotations and final detections, cross-validated.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub index: StudyIndex,
    pub lesions: Vec<GroundTruthLesion>,
    pub detections: Vec<Detection>,
}

impl Dataset {
    pub fn new(
        index: StudyIndex,
        lesions: Vec<GroundTruthLesion>,
        detections: Vec<Detection>,
    ) -> Result<Self> {
        index.check_annotations(&lesions)?;
        // Reuses the dangling-id check of the evaluation set.
        EvaluationSet::new(index.image_ids(), detections.clone(), Vec::new())?;
        Ok(Dataset {
            index,
            lesions,
            detections,
        })
    }

    pub fn load(index: &Path, annotations: &Path, detections: &Path) -> Result<Self> {
        let index = io::load_study_index(index)?;
        let lesions = io::load_annotations(annotations, Some(&index))?;
        let detections = io::load_detections(detections, Some(&index))?;
        Self::new(index, lesions, detections)
    }

    pub fn breasts(&self) -> Vec<BreastRecord> {
        self.index.breasts()
    }

    pub fn evaluation_set(&self) -> Result<EvaluationSet> {
        Ok(EvaluationSet::new(
            self.index.image_ids(),
            self.detections.clone(),
            self.lesions.clone(),
        )?
        .with_breast_count(self.breasts().len()))
    }

    pub fn detections_by_image(&self) -> BTreeMap<String, Vec<Detection>> {
        let mut out: BTreeMap<String, Vec<Detection>> = BTreeMap::new();
        for d in &self.detections {
            out.entry(d.image_id.clone()).or_default().push(d.clone());
        }
        out
    }

    /// `(score, is_malignant)` per breast.
    pub fn breast_scores(&self) -> Vec<(f64, bool)> {
        breast_scores(&self.breasts(), &self.detections_by_image())
    }
}
