//! File formats: study index, annotations, detections, splits and the
//! evaluation exports.
//!
//! Readers report malformed input with the offending line number. Writers
//! render numbers with Rust's shortest round-trip formatting, so output is
//! byte-stable for identical values.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::records::{ImageRecord, StudyIndex};
use crate::data::split::{Split, SplitAssignment};
use crate::error::{Error, Result};
use crate::froc::{FrocCurve, GroundTruthLesion, LesionPathology, ScoreDistribution};
use crate::geometry::BoundingBox;
use crate::postprocess::Detection;
use crate::roc::{ClinicalComparison, ClinicalOperatingPoint, RocCurve};

pub const STUDY_INDEX_HEADER: &str =
    "image_id,patient_id,site,system,laterality,view,width,height,pixel_path,breast_pathology";
pub const DETECTIONS_HEADER: &str = "image_id,x_min,y_min,x_max,y_max,score";
pub const SPLIT_HEADER: &str = "patient_id,split";
pub const FROC_HEADER: &str = "threshold,sensitivity,fp_per_image";
pub const SCORE_DISTRIBUTION_HEADER: &str =
    "bin_lo,bin_hi,tp,fp_non_annotated,fp_annotated_non_biopsied,fp_biopsied_benign";
pub const ROC_HEADER: &str = "threshold,tpr,fpr";
pub const CLINICAL_HEADER: &str = "sensitivity,specificity,source_tag";

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Reads a headed CSV whose header must equal `expected`, handing each record
/// and its line number to `row`.
fn read_csv<R: Read, T>(
    reader: R,
    source: &Path,
    expected: &str,
    mut row: impl FnMut(&csv::StringRecord, u64) -> std::result::Result<T, String>,
) -> Result<Vec<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(source, 1, e))?
        .clone();
    // A zero-byte file has no header at all; treat it as empty.
    if headers.is_empty() {
        return Ok(Vec::new());
    }
    let got = headers.iter().collect::<Vec<_>>().join(",");
    if got != expected {
        return Err(Error::parse(
            source,
            1,
            format!("expected header '{expected}', found '{got}'"),
        ));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::parse(source, line, e)
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        out.push(row(&rec, line).map_err(|m| Error::parse(source, line, m))?);
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    i: usize,
    name: &str,
) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    let raw = rec.get(i).ok_or_else(|| format!("missing field {name}"))?;
    raw.parse::<T>()
        .map_err(|e| format!("invalid {name} '{raw}': {e}"))
}

fn dangling_error(what: &str, mut ids: Vec<String>) -> Result<()> {
    if ids.is_empty() {
        return Ok(());
    }
    ids.sort();
    ids.dedup();
    Err(Error::Integrity(format!(
        "{what} reference unknown images: {}",
        ids.join(", ")
    )))
}

// ---- study index ----

pub fn parse_study_index<R: Read>(reader: R, source: &Path) -> Result<StudyIndex> {
    let images = read_csv(reader, source, STUDY_INDEX_HEADER, |rec, _| {
        Ok(ImageRecord {
            image_id: field(rec, 0, "image_id")?,
            patient_id: field(rec, 1, "patient_id")?,
            site: field(rec, 2, "site")?,
            acquisition_system: field(rec, 3, "system")?,
            laterality: field(rec, 4, "laterality")?,
            view: field(rec, 5, "view")?,
            width: field(rec, 6, "width")?,
            height: field(rec, 7, "height")?,
            pixel_path: field::<String>(rec, 8, "pixel_path")?.into(),
            breast_pathology: field(rec, 9, "breast_pathology")?,
        })
    })?;
    StudyIndex::new(images)
}

pub fn load_study_index(path: &Path) -> Result<StudyIndex> {
    parse_study_index(open(path)?, path)
}

pub fn study_index_csv(index: &StudyIndex) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(STUDY_INDEX_HEADER.split(','))
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    for img in index.images() {
        w.write_record([
            img.image_id.as_str(),
            &img.patient_id,
            &img.site,
            &img.acquisition_system,
            img.laterality.as_str(),
            img.view.as_str(),
            &img.width.to_string(),
            &img.height.to_string(),
            &img.pixel_path.to_string_lossy(),
            img.breast_pathology.as_str(),
        ])
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    into_string(w)
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits the utf-8 it was given"))
}

// ---- annotations ----

#[derive(Debug, Serialize, Deserialize)]
struct AnnotationLine {
    image_id: String,
    lesion_id: String,
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
    pathology: String,
}

/// Parses JSON Lines annotations. Blank lines are skipped. Lesion ids must be
/// unique within an image. With an index, unknown image ids are an integrity
/// error.
pub fn parse_annotations<R: Read>(
    reader: R,
    source: &Path,
    index: Option<&StudyIndex>,
) -> Result<Vec<GroundTruthLesion>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line.map_err(|e| Error::parse(source, line_no, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let a: AnnotationLine =
            serde_json::from_str(&line).map_err(|e| Error::parse(source, line_no, e))?;
        let pathology: LesionPathology = a
            .pathology
            .parse()
            .map_err(|e| Error::parse(source, line_no, e))?;
        let bbox = BoundingBox::new(a.x_min, a.y_min, a.x_max, a.y_max)
            .map_err(|e| Error::parse(source, line_no, e))?;
        if !seen.insert((a.image_id.clone(), a.lesion_id.clone())) {
            return Err(Error::parse(
                source,
                line_no,
                format!("duplicate lesion {} in image {}", a.lesion_id, a.image_id),
            ));
        }
        out.push(GroundTruthLesion {
            image_id: a.image_id,
            lesion_id: a.lesion_id,
            bbox,
            pathology,
        });
    }
    if let Some(index) = index {
        dangling_error(
            "annotations",
            out.iter()
                .filter(|l| !index.contains(&l.image_id))
                .map(|l| l.image_id.clone())
                .collect(),
        )?;
    }
    Ok(out)
}

pub fn load_annotations(path: &Path, index: Option<&StudyIndex>) -> Result<Vec<GroundTruthLesion>> {
    parse_annotations(open(path)?, path, index)
}

pub fn annotations_jsonl(lesions: &[GroundTruthLesion]) -> String {
    let mut out = String::new();
    for l in lesions {
        let [x_min, y_min, x_max, y_max] = l.bbox.corners();
        let line = AnnotationLine {
            image_id: l.image_id.clone(),
            lesion_id: l.lesion_id.clone(),
            x_min,
            y_min,
            x_max,
            y_max,
            pathology: l.pathology.as_str().to_string(),
        };
        out.push_str(&serde_json::to_string(&line).expect("plain struct serializes"));
        out.push('\n');
    }
    out
}

// ---- detections ----

pub fn parse_detections<R: Read>(
    reader: R,
    source: &Path,
    index: Option<&StudyIndex>,
) -> Result<Vec<Detection>> {
    let dets = read_csv(reader, source, DETECTIONS_HEADER, |rec, _| {
        let bbox = BoundingBox::new(
            field(rec, 1, "x_min")?,
            field(rec, 2, "y_min")?,
            field(rec, 3, "x_max")?,
            field(rec, 4, "y_max")?,
        )
        .map_err(|e| e.to_string())?;
        Detection::new(
            field::<String>(rec, 0, "image_id")?,
            bbox,
            field(rec, 5, "score")?,
        )
        .map_err(|e| e.to_string())
    })?;
    if let Some(index) = index {
        dangling_error(
            "detections",
            dets.iter()
                .filter(|d| !index.contains(&d.image_id))
                .map(|d| d.image_id.clone())
                .collect(),
        )?;
    }
    Ok(dets)
}

pub fn load_detections(path: &Path, index: Option<&StudyIndex>) -> Result<Vec<Detection>> {
    parse_detections(open(path)?, path, index)
}

pub fn detections_csv(dets: &[Detection]) -> String {
    let mut out = format!("{DETECTIONS_HEADER}\n");
    for d in dets {
        let [x0, y0, x1, y1] = d.bbox.corners();
        writeln!(
            out,
            "{},{x0},{y0},{x1},{y1},{}",
            csv_text(&d.image_id),
            d.score
        )
        .unwrap();
    }
    out
}

/// Quotes a text field when CSV requires it.
fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

// ---- splits ----

pub fn split_csv(assignment: &SplitAssignment) -> String {
    let mut out = format!("{SPLIT_HEADER}\n");
    for (patient, split) in assignment {
        writeln!(out, "{},{split}", csv_text(patient)).unwrap();
    }
    out
}

pub fn load_split(path: &Path) -> Result<SplitAssignment> {
    let rows = read_csv(open(path)?, path, SPLIT_HEADER, |rec, _| {
        Ok((
            field::<String>(rec, 0, "patient_id")?,
            field::<Split>(rec, 1, "split")?,
        ))
    })?;
    Ok(rows.into_iter().collect())
}

// ---- evaluation exports ----

pub fn froc_csv(curve: &FrocCurve) -> String {
    let mut out = format!("{FROC_HEADER}\n");
    for p in &curve.points {
        writeln!(out, "{},{},{}", p.threshold, p.sensitivity, p.fp_per_image).unwrap();
    }
    out
}

pub fn score_distribution_csv(dist: &ScoreDistribution) -> String {
    let mut out = format!("{SCORE_DISTRIBUTION_HEADER}\n");
    for b in &dist.bins {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            b.lo, b.hi, b.tp, b.fp_non_annotated, b.fp_annotated_non_biopsied, b.fp_biopsied_benign
        )
        .unwrap();
    }
    out
}

pub fn roc_csv(curve: &RocCurve) -> String {
    let mut out = format!("{ROC_HEADER}\n");
    for p in &curve.points {
        writeln!(out, "{},{},{}", p.threshold, p.tpr, p.fpr).unwrap();
    }
    out
}

pub fn parse_clinical_points<R: Read>(
    reader: R,
    source: &Path,
) -> Result<Vec<ClinicalOperatingPoint>> {
    read_csv(reader, source, CLINICAL_HEADER, |rec, _| {
        ClinicalOperatingPoint::new(
            field(rec, 0, "sensitivity")?,
            field(rec, 1, "specificity")?,
            field::<String>(rec, 2, "source_tag")?,
        )
        .map_err(|e| e.to_string())
    })
}

pub fn load_clinical_points(path: &Path) -> Result<Vec<ClinicalOperatingPoint>> {
    parse_clinical_points(open(path)?, path)
}

pub fn clinical_comparison_csv(report: &ClinicalComparison) -> String {
    let mut out =
        String::from("source_tag,clinical_sensitivity,specificity,model_sensitivity,difference\n");
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            csv_text(&r.point.source_tag),
            r.point.sensitivity,
            r.point.specificity,
            r.model_sensitivity,
            r.difference
        )
        .unwrap();
    }
    out
}
