#![allow(dead_code, clippy::needless_range_loop)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const INDEX_HEADER: &str =
    "image_id,patient_id,site,system,laterality,view,width,height,pixel_path,breast_pathology";

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cesm-cad"))
}

pub fn run(args: &[&str]) -> Output {
    bin()
        .args(args)
        .env_remove("CESM_CAD_SEED")
        .output()
        .expect("binary runs")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

pub struct Fixture {
    pub index: PathBuf,
    pub annotations: PathBuf,
    pub detections: PathBuf,
    pub clinical: PathBuf,
}

/// Two images: img1 holds one malignant lesion hit by a 0.9 detection at
/// IoU 0.5, img2 is normal with one 0.4 false positive.
pub fn two_image_fixture(dir: &Path) -> Fixture {
    let f = Fixture {
        index: dir.join("index.csv"),
        annotations: dir.join("annotations.jsonl"),
        detections: dir.join("detections.csv"),
        clinical: dir.join("clinical.csv"),
    };
    fs::write(
        &f.index,
        format!(
            "{INDEX_HEADER}\n\
             img1,pA,s1,sysA,L,CC,100,100,img1.raw,malignant\n\
             img2,pB,s1,sysA,R,CC,100,100,img2.raw,normal\n"
        ),
    )
    .unwrap();
    fs::write(
        &f.annotations,
        r#"{"image_id":"img1","lesion_id":"l1","x_min":0,"y_min":0,"x_max":10,"y_max":10,"pathology":"malignant"}"#
            .to_string()
            + "\n",
    )
    .unwrap();
    fs::write(
        &f.detections,
        "image_id,x_min,y_min,x_max,y_max,score\nimg1,0,0,10,5,0.9\nimg2,50,50,60,60,0.4\n",
    )
    .unwrap();
    fs::write(
        &f.clinical,
        "sensitivity,specificity,source_tag\n0.9,0.8,R1\n",
    )
    .unwrap();
    f
}

/// What the 20-patient fixture was built to produce.
pub struct Expected {
    /// Score threshold of the first operating point with sensitivity ≥ 0.95.
    pub threshold: f64,
    pub sensitivity: f64,
    pub fp_per_image: f64,
    pub fp_per_breast: f64,
    /// `(score, malignant)` per breast.
    pub breast_scores: Vec<(f64, bool)>,
}

pub const E2E_PATIENTS: usize = 20;
const MALIGNANT_PATIENTS: usize = 10;
const LESION: (f64, f64, f64, f64) = (100.0, 100.0, 160.0, 160.0);
const HIT: (f64, f64, f64, f64) = (102.0, 100.0, 160.0, 160.0);

/// (patient, view, box, score)
type FalsePositive = (usize, usize, (f64, f64, f64, f64), f64);

/// 20 patients, one breast each, imaged in CC and MLO (40 images).
///
/// Patients 0-9 are malignant with the cancer annotated in both views and
/// detected at scores 0.95, 0.93, ... 0.57. Patients 10-13 are benign, 14-19
/// normal. Ten false positives are spread over the set, five of them above the
/// 19th cancer detection (0.59).
pub fn twenty_patient_fixture(dir: &Path) -> (Fixture, Expected) {
    let f = Fixture {
        index: dir.join("index.csv"),
        annotations: dir.join("annotations.jsonl"),
        detections: dir.join("detections.csv"),
        clinical: dir.join("clinical.csv"),
    };
    let views = ["CC", "MLO"];
    let pathology = |p: usize| match p {
        0..=9 => "malignant",
        10..=13 => "benign",
        _ => "normal",
    };
    let image = |p: usize, v: usize| format!("p{p:02}_{}", views[v]);

    let mut index = format!("{INDEX_HEADER}\n");
    for p in 0..E2E_PATIENTS {
        let lat = if p % 2 == 0 { "L" } else { "R" };
        for v in 0..2 {
            let id = image(p, v);
            writeln!(
                index,
                "{id},p{p:02},site{},sysA,{lat},{},512,512,{id}.raw,{}",
                p % 3,
                views[v],
                pathology(p)
            )
            .unwrap();
        }
    }

    let mut ann = String::new();
    let lesion_line = |id: &str, lid: &str, b: (f64, f64, f64, f64), path: &str| {
        format!(
            "{{\"image_id\":\"{id}\",\"lesion_id\":\"{lid}\",\"x_min\":{},\"y_min\":{},\"x_max\":{},\"y_max\":{},\"pathology\":\"{path}\"}}\n",
            b.0, b.1, b.2, b.3
        )
    };
    for p in 0..MALIGNANT_PATIENTS {
        for v in 0..2 {
            ann += &lesion_line(&image(p, v), "m1", LESION, "malignant");
        }
    }
    let benign_box = (200.0, 50.0, 250.0, 100.0);
    for p in 10..14 {
        ann += &lesion_line(&image(p, 0), "b1", benign_box, "benign_biopsied");
    }
    ann += &lesion_line(
        &image(12, 1),
        "n1",
        (400.0, 400.0, 440.0, 440.0),
        "benign_non_biopsied",
    );

    let mut dets = String::from("image_id,x_min,y_min,x_max,y_max,score\n");
    let mut tp_scores = Vec::new();
    let mut breast = [0.0f64; E2E_PATIENTS];
    for p in 0..MALIGNANT_PATIENTS {
        for v in 0..2 {
            let j = 2 * p + v;
            let score = (95 - 2 * j) as f64 / 100.0;
            tp_scores.push(score);
            breast[p] = breast[p].max(score);
            writeln!(
                dets,
                "{},{},{},{},{},{score}",
                image(p, v),
                HIT.0,
                HIT.1,
                HIT.2,
                HIT.3
            )
            .unwrap();
        }
    }
    // 0.63 ties the breast score of patient 8.
    let far = (300.0, 300.0, 340.0, 340.0);
    let fps: [FalsePositive; 10] = [
        (14, 0, far, 0.9),
        (15, 1, far, 0.8),
        (10, 0, benign_box, 0.64),
        (16, 0, far, 0.63),
        (3, 0, far, 0.6),
        (17, 1, far, 0.5),
        (12, 1, (400.0, 400.0, 440.0, 440.0), 0.45),
        (18, 0, far, 0.3),
        (11, 0, far, 0.2),
        (0, 1, far, 0.1),
    ];
    for (p, v, b, score) in fps {
        breast[p] = breast[p].max(score);
        writeln!(
            dets,
            "{},{},{},{},{},{score}",
            image(p, v),
            b.0,
            b.1,
            b.2,
            b.3
        )
        .unwrap();
    }

    fs::write(&f.index, index).unwrap();
    fs::write(&f.annotations, ann).unwrap();
    fs::write(&f.detections, dets).unwrap();
    fs::write(
        &f.clinical,
        "sensitivity,specificity,source_tag\n0.9,0.7,R1\n0.85,0.757,R2\n0.8,0.8,R3\n",
    )
    .unwrap();

    let needed = 19; // ceil(0.95 * 20)
    tp_scores.sort_by(|a, b| b.total_cmp(a));
    let threshold = tp_scores[needed - 1];
    let fp_above = fps.iter().filter(|f| f.3 >= threshold).count();
    let expected = Expected {
        threshold,
        sensitivity: needed as f64 / (2 * MALIGNANT_PATIENTS) as f64,
        fp_per_image: fp_above as f64 / (2 * E2E_PATIENTS) as f64,
        fp_per_breast: fp_above as f64 / E2E_PATIENTS as f64,
        breast_scores: breast
            .iter()
            .enumerate()
            .map(|(p, &s)| (s, p < MALIGNANT_PATIENTS))
            .collect(),
    };
    (f, expected)
}

/// Mann–Whitney statistic by explicit pair counting.
pub fn pair_counting_auc(scores: &[(f64, bool)]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for &(sp, yp) in scores {
        if !yp {
            continue;
        }
        for &(sn, yn) in scores {
            if yn {
                continue;
            }
            pairs += 1.0;
            if sp > sn {
                wins += 1.0;
            } else if sp == sn {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Value of `key=` (or `key: `) on the first report line starting with `prefix`.
pub fn report_value(report: &str, prefix: &str, key: &str) -> Option<f64> {
    let line = report.lines().find(|l| l.starts_with(prefix))?;
    let rest = &line[line.find(key)? + key.len()..];
    let token = rest.split_whitespace().next()?;
    token.parse().ok()
}
