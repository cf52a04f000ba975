use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::split::{PatientStratum, Split, SplitAssignment};
use crate::error::{Error, Result};
use crate::froc::{GroundTruthLesion, LesionPathology};
use crate::roc::{BreastRecord, Diagnosis, Laterality};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum View {
    #[serde(rename = "CC")]
    Cc,
    #[serde(rename = "MLO")]
    Mlo,
    #[serde(rename = "other")]
    Other,
}

impl View {
    pub fn as_str(self) -> &'static str {
        match self {
            View::Cc => "CC",
            View::Mlo => "MLO",
            View::Other => "other",
        }
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for View {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "CC" => Ok(View::Cc),
            "MLO" => Ok(View::Mlo),
            "OTHER" => Ok(View::Other),
            other => Err(format!("unknown view '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub image_id: String,
    pub patient_id: String,
    pub site: String,
    pub acquisition_system: String,
    pub laterality: Laterality,
    pub view: View,
    pub width: u32,
    pub height: u32,
    pub pixel_path: PathBuf,
    pub breast_pathology: Diagnosis,
}

/// Validated collection of image records.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StudyIndex {
    images: Vec<ImageRecord>,
    by_id: HashMap<String, usize>,
}

impl StudyIndex {
    /// Image ids must be unique, and all views of one breast must agree on
    /// the breast's pathology.
    pub fn new(images: Vec<ImageRecord>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(images.len());
        for (i, img) in images.iter().enumerate() {
            if by_id.insert(img.image_id.clone(), i).is_some() {
                return Err(Error::Integrity(format!(
                    "duplicate image id {}",
                    img.image_id
                )));
            }
        }
        let index = StudyIndex { images, by_id };
        index.build_breasts()?;
        index.build_patients()?;
        Ok(index)
    }

    pub fn images(&self) -> &[ImageRecord] {
        &self.images
    }

    pub fn get(&self, image_id: &str) -> Option<&ImageRecord> {
        self.by_id.get(image_id).map(|&i| &self.images[i])
    }

    pub fn contains(&self, image_id: &str) -> bool {
        self.by_id.contains_key(image_id)
    }

    pub fn image_ids(&self) -> impl Iterator<Item = &str> {
        self.images.iter().map(|i| i.image_id.as_str())
    }

    /// Breasts in `(patient_id, laterality)` order.
    pub fn breasts(&self) -> Vec<BreastRecord> {
        self.build_breasts().expect("validated at construction")
    }

    fn build_breasts(&self) -> Result<Vec<BreastRecord>> {
        let mut groups: BTreeMap<(&str, Laterality), BreastRecord> = BTreeMap::new();
        for img in &self.images {
            let b = groups
                .entry((img.patient_id.as_str(), img.laterality))
                .or_insert_with(|| BreastRecord {
                    patient_id: img.patient_id.clone(),
                    laterality: img.laterality,
                    image_ids: Vec::new(),
                    pathology: img.breast_pathology,
                });
            if b.pathology != img.breast_pathology {
                return Err(Error::Integrity(format!(
                    "breast {}/{} has conflicting pathology across views ({} vs {})",
                    img.patient_id,
                    img.laterality.as_str(),
                    b.pathology,
                    img.breast_pathology
                )));
            }
            b.image_ids.push(img.image_id.clone());
        }
        Ok(groups.into_values().collect())
    }

    /// One stratum record per patient; the patient's pathology is the most
    /// severe of its breasts.
    pub fn patients(&self) -> Vec<PatientStratum> {
        self.build_patients().expect("validated at construction")
    }

    fn build_patients(&self) -> Result<Vec<PatientStratum>> {
        let mut out: BTreeMap<&str, PatientStratum> = BTreeMap::new();
        for img in &self.images {
            let p = out
                .entry(img.patient_id.as_str())
                .or_insert_with(|| PatientStratum {
                    patient_id: img.patient_id.clone(),
                    site: img.site.clone(),
                    pathology: img.breast_pathology,
                });
            if p.site != img.site {
                return Err(Error::Integrity(format!(
                    "patient {} appears at sites {} and {}",
                    img.patient_id, p.site, img.site
                )));
            }
            p.pathology = p.pathology.max(img.breast_pathology);
        }
        Ok(out.into_values().collect())
    }

    /// Image-level split inherited from the patient assignment.
    pub fn image_splits(&self, assignment: &SplitAssignment) -> Result<BTreeMap<String, Split>> {
        self.images
            .iter()
            .map(|img| {
                assignment
                    .get(&img.patient_id)
                    .map(|s| (img.image_id.clone(), *s))
                    .ok_or_else(|| {
                        Error::Integrity(format!("patient {} has no split", img.patient_id))
                    })
            })
            .collect()
    }

    /// Checks that every lesion points at a known image and that a breast is
    /// labelled malignant exactly when it carries a malignant lesion.
    pub fn check_annotations(&self, lesions: &[GroundTruthLesion]) -> Result<()> {
        let mut dangling: Vec<&str> = lesions
            .iter()
            .map(|l| l.image_id.as_str())
            .filter(|id| !self.contains(id))
            .collect();
        if !dangling.is_empty() {
            dangling.sort_unstable();
            dangling.dedup();
            return Err(Error::Integrity(format!(
                "annotations reference unknown images: {}",
                dangling.join(", ")
            )));
        }
        let malignant_images: std::collections::HashSet<&str> = lesions
            .iter()
            .filter(|l| l.pathology == LesionPathology::Malignant)
            .map(|l| l.image_id.as_str())
            .collect();
        let mut conflicts = Vec::new();
        for b in self.breasts() {
            let has_malignant = b
                .image_ids
                .iter()
                .any(|id| malignant_images.contains(id.as_str()));
            if has_malignant != b.pathology.is_malignant() {
                conflicts.push(format!("{}/{}", b.patient_id, b.laterality.as_str()));
            }
        }
        if !conflicts.is_empty() {
            return Err(Error::Integrity(format!(
                "breast pathology disagrees with malignant annotations for: {}",
                conflicts.join(", ")
            )));
        }
        Ok(())
    }
}
