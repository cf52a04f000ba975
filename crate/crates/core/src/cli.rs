//! `cesm-cad` command line.
//!
//! Settings resolve in this order: command-line flag, then the JSON file given
//! by `--config`, then (for the seed only) the `CESM_CAD_SEED` environment
//! variable, then the built-in default.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use image::DynamicImage;
use serde::{Deserialize, Serialize};

use crate::anchors::{anchor_fitness, kmeans_anchors, KMeansConfig, Shape};
use crate::data::window::{
    window_to_8bit, Gray16Image, WindowingSpec, DEFAULT_WINDOW_HI, DEFAULT_WINDOW_LO,
};
use crate::data::{stratified_split, SplitSpec, StudyIndex};
use crate::error::{check_ratio, Error, Result};
use crate::froc::{
    froc_curve, operating_point_at_sensitivity, score_distribution, FrocMetric, DEFAULT_BIN_WIDTH,
    DEFAULT_MATCH_IOU, DEFAULT_MIN_SCORE,
};
use crate::io;
use crate::postprocess::{
    nms_by_image, tta_fuse, Detection, FusionMode, TransformKind, TransformSpec, DEFAULT_NMS_IOU,
};
use crate::roc::{compare_to_clinical, patient_scores, roc_curve, sensitivity_at_specificity};
use crate::Dataset;

pub const SEED_ENV: &str = "CESM_CAD_SEED";
pub const DEFAULT_TTA: [&str; 3] = ["identity", "scale:0.83", "hflip"];
pub const DEFAULT_TARGET_SENSITIVITY: f64 = 0.95;

#[derive(Debug, Parser)]
#[command(
    name = "cesm-cad",
    version,
    about = "Lesion-detection CAD post-processing and evaluation"
)]
pub struct Cli {
    /// JSON configuration file; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Random seed [default: $CESM_CAD_SEED, else 0].
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Window raw 16-bit images to 8 bits.
    Preprocess(PreprocessArgs),
    /// Patient-level stratified train/val/test split.
    Split(SplitArgs),
    /// Estimate anchor sizes by k-means over annotated boxes.
    Anchors(AnchorsArgs),
    /// Back-map test-time-augmented detections, fuse them and apply NMS.
    Postprocess(PostprocessArgs),
    /// FROC curves for the three lesion metrics and the FP score distribution.
    EvaluateFroc(FrocArgs),
    /// Breast-level ROC/AUC and comparison with clinical operating points.
    EvaluateRoc(RocArgs),
    /// Human-readable summary of detection and classification performance.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Lower raw-intensity bound [default: 1950].
    #[arg(long)]
    pub window_lo: Option<f64>,
    /// Upper raw-intensity bound [default: 2205].
    #[arg(long)]
    pub window_hi: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub index: PathBuf,
    /// Output CSV `patient_id,split`.
    #[arg(long)]
    pub out: PathBuf,
    /// Training fraction [default: 0.55].
    #[arg(long)]
    pub train: Option<f64>,
    /// Validation fraction [default: 0.15].
    #[arg(long)]
    pub val: Option<f64>,
    /// Test fraction [default: 0.30].
    #[arg(long)]
    pub test: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnchorsArgs {
    #[arg(long)]
    pub annotations: PathBuf,
    /// Study index; needed with --normalize-to.
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// Number of anchors [default: 9].
    #[arg(long)]
    pub k: Option<usize>,
    /// [default: 300]
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Centroid movement tolerance in pixels [default: 0.0001].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Rescale each box as if its image's longer side were this many pixels.
    #[arg(long)]
    pub normalize_to: Option<f64>,
    /// Output JSON file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PostprocessArgs {
    #[arg(long)]
    pub index: PathBuf,
    /// Detections already in original-image coordinates.
    #[arg(long, conflicts_with = "tta_dir", required_unless_present = "tta_dir")]
    pub detections: Option<PathBuf>,
    /// Directory with one detections CSV per transform: identity.csv,
    /// hflip.csv, vflip.csv, scale-<factor>.csv.
    #[arg(long)]
    pub tta_dir: Option<PathBuf>,
    /// Transforms to read from --tta-dir [default: identity,scale:0.83,hflip].
    #[arg(long, value_delimiter = ',')]
    pub tta: Option<Vec<String>>,
    /// NMS IoU threshold [default: 0.2].
    #[arg(long)]
    pub nms_iou: Option<f64>,
    /// nms | average [default: nms].
    #[arg(long)]
    pub fusion: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalInputs {
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub annotations: PathBuf,
    #[arg(long)]
    pub detections: PathBuf,
    /// Acceptance IoU for a detection to hit a lesion [default: 0.3].
    #[arg(long)]
    pub iou_match: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FrocArgs {
    #[command(flatten)]
    pub inputs: EvalInputs,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// all | biopsied | malignant [default: all three].
    #[arg(long)]
    pub metric: Option<String>,
    /// Score histogram bin width [default: 0.05].
    #[arg(long)]
    pub bin_width: Option<f64>,
    /// Lowest score in the histogram [default: 0.1].
    #[arg(long)]
    pub min_score: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub detections: PathBuf,
    /// Clinical operating points CSV `sensitivity,specificity,source_tag`.
    #[arg(long)]
    pub clinical: Option<PathBuf>,
    /// breast | patient | image [default: breast].
    #[arg(long, default_value = "breast")]
    pub level: String,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub inputs: EvalInputs,
    #[arg(long)]
    pub clinical: Option<PathBuf>,
    /// Sensitivity the reported FROC operating point must reach [default: 0.95].
    #[arg(long)]
    pub target_sensitivity: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Values a `--config` file may set. Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub iou_match_threshold: Option<f64>,
    pub nms_iou: Option<f64>,
    pub metric: Option<String>,
    pub window_lo: Option<f64>,
    pub window_hi: Option<f64>,
    pub split_fractions: Option<[f64; 3]>,
    pub tta_transforms: Option<Vec<String>>,
    pub fusion: Option<String>,
    pub bin_width: Option<f64>,
    pub min_score: Option<f64>,
    pub target_sensitivity: Option<f64>,
    pub anchors_k: Option<usize>,
    pub anchors_max_iter: Option<usize>,
    pub anchors_tol: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
    }
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub iou_match_threshold: f64,
    pub nms_iou: f64,
    /// `None` evaluates all three metrics.
    pub metric: Option<FrocMetric>,
    pub windowing: WindowingSpec,
    pub split: SplitSpec,
    pub tta_transforms: Vec<TransformSpec>,
    pub fusion: FusionMode,
    pub bin_width: f64,
    pub min_score: f64,
    pub target_sensitivity: f64,
    pub kmeans: KMeansConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            iou_match_threshold: DEFAULT_MATCH_IOU,
            nms_iou: DEFAULT_NMS_IOU,
            metric: None,
            windowing: WindowingSpec::default(),
            split: SplitSpec::default(),
            tta_transforms: DEFAULT_TTA
                .iter()
                .map(|s| s.parse().expect("valid default"))
                .collect(),
            fusion: FusionMode::Nms,
            bin_width: DEFAULT_BIN_WIDTH,
            min_score: DEFAULT_MIN_SCORE,
            target_sensitivity: DEFAULT_TARGET_SENSITIVITY,
            kmeans: KMeansConfig::default(),
        }
    }
}

impl RunConfig {
    /// Merges the config file under the command-line flags.
    pub fn resolve(cli: &Cli, file: &ConfigFile, env_seed: Option<&str>) -> Result<Self> {
        let d = RunConfig::default();
        let env_seed = env_seed
            .map(|s| {
                s.trim().parse::<u64>().map_err(|_| {
                    Error::InvalidArgument(format!(
                        "{SEED_ENV} must be an unsigned integer, got '{s}'"
                    ))
                })
            })
            .transpose()?;
        let seed = cli.seed.or(file.seed).or(env_seed).unwrap_or(d.seed);

        let (mut iou_match, mut nms_iou, mut metric, mut lo, mut hi) = (
            file.iou_match_threshold,
            file.nms_iou,
            file.metric.clone(),
            file.window_lo,
            file.window_hi,
        );
        let mut fractions = file.split_fractions;
        let mut tta = file.tta_transforms.clone();
        let mut fusion = file.fusion.clone();
        let (mut bin_width, mut min_score, mut target) =
            (file.bin_width, file.min_score, file.target_sensitivity);
        let (mut k, mut max_iter, mut tol) =
            (file.anchors_k, file.anchors_max_iter, file.anchors_tol);

        fn over<T: Clone>(slot: &mut Option<T>, flag: &Option<T>) {
            if flag.is_some() {
                slot.clone_from(flag);
            }
        }
        match &cli.command {
            Command::Preprocess(a) => {
                over(&mut lo, &a.window_lo);
                over(&mut hi, &a.window_hi);
            }
            Command::Split(a) => {
                let f = fractions.unwrap_or(d.split.fractions());
                let merged = [
                    a.train.unwrap_or(f[0]),
                    a.val.unwrap_or(f[1]),
                    a.test.unwrap_or(f[2]),
                ];
                fractions = Some(merged);
            }
            Command::Anchors(a) => {
                over(&mut k, &a.k);
                over(&mut max_iter, &a.max_iter);
                over(&mut tol, &a.tol);
            }
            Command::Postprocess(a) => {
                over(&mut nms_iou, &a.nms_iou);
                over(&mut tta, &a.tta);
                over(&mut fusion, &a.fusion);
            }
            Command::EvaluateFroc(a) => {
                over(&mut iou_match, &a.inputs.iou_match);
                over(&mut metric, &a.metric);
                over(&mut bin_width, &a.bin_width);
                over(&mut min_score, &a.min_score);
            }
            Command::EvaluateRoc(_) => {}
            Command::Report(a) => {
                over(&mut iou_match, &a.inputs.iou_match);
                over(&mut target, &a.target_sensitivity);
            }
        }

        let iou_match_threshold = iou_match.unwrap_or(d.iou_match_threshold);
        let nms_iou = nms_iou.unwrap_or(d.nms_iou);
        let target_sensitivity = target.unwrap_or(d.target_sensitivity);
        check_ratio("iou_match_threshold", iou_match_threshold)?;
        check_ratio("nms_iou", nms_iou)?;
        check_ratio("target_sensitivity", target_sensitivity)?;
        let [tr, va, te] = fractions.unwrap_or(d.split.fractions());

        Ok(RunConfig {
            seed,
            iou_match_threshold,
            nms_iou,
            metric: metric.map(|m| m.parse()).transpose()?,
            windowing: WindowingSpec::new(
                lo.unwrap_or(DEFAULT_WINDOW_LO),
                hi.unwrap_or(DEFAULT_WINDOW_HI),
            )?,
            split: SplitSpec::new(tr, va, te, seed)?,
            tta_transforms: match tta {
                Some(list) => list.iter().map(|s| s.parse()).collect::<Result<_>>()?,
                None => d.tta_transforms,
            },
            fusion: fusion.map(|f| f.parse()).transpose()?.unwrap_or(d.fusion),
            bin_width: bin_width.unwrap_or(d.bin_width),
            min_score: min_score.unwrap_or(d.min_score),
            target_sensitivity,
            kmeans: KMeansConfig {
                k: k.unwrap_or(d.kmeans.k),
                seed,
                max_iter: max_iter.unwrap_or(d.kmeans.max_iter),
                tol: tol.unwrap_or(d.kmeans.tol),
            },
        })
    }
}

/// Parses nothing; executes an already-parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    let config = RunConfig::resolve(cli, &file, env_seed.as_deref())?;
    match &cli.command {
        Command::Preprocess(a) => preprocess(a, &config),
        Command::Split(a) => split(a, &config),
        Command::Anchors(a) => anchors(a, &config),
        Command::Postprocess(a) => postprocess(a, &config),
        Command::EvaluateFroc(a) => evaluate_froc(a, &config),
        Command::EvaluateRoc(a) => evaluate_roc(a, &config),
        Command::Report(a) => {
            let text = report(a, &config)?;
            match &a.out {
                Some(path) => io::write_file(path, &text),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
    }
}

fn base_dir(index: &Path) -> PathBuf {
    index.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn load_raw_pixels(path: &Path, width: u32, height: u32) -> Result<Gray16Image> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("raw") | Some("u16") => {
            let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            let expected = width as usize * height as usize * 2;
            if bytes.len() != expected {
                return Err(Error::parse(
                    path,
                    0,
                    format!(
                        "expected {expected} bytes for {width}x{height} u16, found {}",
                        bytes.len()
                    ),
                ));
            }
            let data = bytes
                .chunks_exact(2)
                .map(|c| u16::from_le_bytes([c[0], c[1]]))
                .collect();
            Ok(Gray16Image::from_raw(width, height, data).expect("length checked"))
        }
        _ => match image::open(path).map_err(|e| Error::parse(path, 0, e))? {
            DynamicImage::ImageLuma16(img) => Ok(img),
            other => Err(Error::parse(
                path,
                0,
                format!("expected 16-bit grayscale, found {:?}", other.color()),
            )),
        },
    }
}

fn preprocess(a: &PreprocessArgs, config: &RunConfig) -> Result<()> {
    let index = io::load_study_index(&a.index)?;
    let base = base_dir(&a.index);
    std::fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    let mut windowed = Vec::with_capacity(index.images().len());
    for img in index.images() {
        let raw = load_raw_pixels(&base.join(&img.pixel_path), img.width, img.height)?;
        if raw.dimensions() != (img.width, img.height) {
            return Err(Error::Integrity(format!(
                "image {} is {}x{}, index says {}x{}",
                img.image_id,
                raw.width(),
                raw.height(),
                img.width,
                img.height
            )));
        }
        let out_name = format!("{}.png", img.image_id);
        let out_path = a.out_dir.join(&out_name);
        window_to_8bit(&raw, &config.windowing)
            .save(&out_path)
            .map_err(|e| Error::Io {
                path: out_path.clone(),
                source: std::io::Error::other(e),
            })?;
        let mut rec = img.clone();
        rec.pixel_path = out_name.into();
        windowed.push(rec);
    }
    let out_index = StudyIndex::new(windowed)?;
    io::write_file(
        &a.out_dir.join("index.csv"),
        &io::study_index_csv(&out_index)?,
    )
}

fn split(a: &SplitArgs, config: &RunConfig) -> Result<()> {
    let index = io::load_study_index(&a.index)?;
    let assignment = stratified_split(&index.patients(), &config.split)?;
    io::write_file(&a.out, &io::split_csv(&assignment))
}

fn anchors(a: &AnchorsArgs, config: &RunConfig) -> Result<()> {
    let index = a.index.as_deref().map(io::load_study_index).transpose()?;
    let lesions = io::load_annotations(&a.annotations, index.as_ref())?;
    let shapes = lesions
        .iter()
        .map(|l| {
            let factor = match (a.normalize_to, &index) {
                (None, _) => 1.0,
                (Some(target), Some(index)) => {
                    let img = index.get(&l.image_id).expect("checked against index");
                    target / f64::from(img.width.max(img.height))
                }
                (Some(_), None) => {
                    return Err(Error::InvalidArgument(
                        "--normalize-to needs --index for image sizes".into(),
                    ))
                }
            };
            Shape::new(l.bbox.width() * factor, l.bbox.height() * factor)
        })
        .collect::<Result<Vec<_>>>()?;
    let set = kmeans_anchors(&shapes, &config.kmeans)?;
    let fitness = anchor_fitness(&shapes, &set)?;
    eprintln!("anchors: k={} mean best IoU={fitness}", set.k());
    let json = set.to_json() + "\n";
    match &a.out {
        Some(p) => io::write_file(p, &json),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

/// File stem under `--tta-dir` for a transform.
pub fn tta_file_stem(spec: &TransformSpec) -> String {
    match spec.kind {
        TransformKind::Scale => format!("scale-{}", spec.scale_factor),
        _ => spec.to_string(),
    }
}

fn postprocess(a: &PostprocessArgs, config: &RunConfig) -> Result<()> {
    let index = io::load_study_index(&a.index)?;
    let fused = match (&a.detections, &a.tta_dir) {
        (Some(path), _) => nms_by_image(&io::load_detections(path, Some(&index))?, config.nms_iou)?,
        (None, Some(dir)) => {
            let mut per_image: BTreeMap<String, Vec<(TransformSpec, Vec<Detection>)>> =
                BTreeMap::new();
            for spec in &config.tta_transforms {
                let path = dir.join(format!("{}.csv", tta_file_stem(spec)));
                let mut grouped: BTreeMap<String, Vec<Detection>> = BTreeMap::new();
                for d in io::load_detections(&path, Some(&index))? {
                    grouped.entry(d.image_id.clone()).or_default().push(d);
                }
                for (id, dets) in grouped {
                    per_image.entry(id).or_default().push((*spec, dets));
                }
            }
            let mut out = Vec::new();
            for (id, views) in per_image {
                let img = index.get(&id).expect("checked against index");
                let bound = views
                    .into_iter()
                    .map(|(spec, dets)| {
                        Ok((
                            spec.bind(f64::from(img.width), f64::from(img.height))?,
                            dets,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                out.extend(tta_fuse(&bound, config.nms_iou, config.fusion)?);
            }
            out
        }
        (None, None) => {
            return Err(Error::InvalidArgument(
                "need --detections or --tta-dir".into(),
            ))
        }
    };
    io::write_file(&a.out, &io::detections_csv(&fused))
}

fn metrics(config: &RunConfig) -> Vec<FrocMetric> {
    match config.metric {
        Some(m) => vec![m],
        None => FrocMetric::ALL.to_vec(),
    }
}

fn evaluate_froc(a: &FrocArgs, config: &RunConfig) -> Result<()> {
    let ds = Dataset::load(&a.inputs.index, &a.inputs.annotations, &a.inputs.detections)?;
    let set = ds.evaluation_set()?;
    for metric in metrics(config) {
        let curve = froc_curve(&set, metric, config.iou_match_threshold)?;
        io::write_file(
            &a.out_dir.join(format!("froc_{metric}.csv")),
            &io::froc_csv(&curve),
        )?;
    }
    // FP categories are most informative for the cancer metric, where benign
    // lesions are not targets.
    let dist_metric = config.metric.unwrap_or(FrocMetric::MalignantLesions);
    let results = set.match_all(dist_metric, config.iou_match_threshold)?;
    let dist = score_distribution(&results, config.bin_width, config.min_score)?;
    io::write_file(
        &a.out_dir.join("score_distribution.csv"),
        &io::score_distribution_csv(&dist),
    )
}

#[derive(Debug, Serialize)]
struct RocSummary {
    level: String,
    auc: f64,
    positives: usize,
    negatives: usize,
    negative_classes: &'static str,
    median_clinical_specificity: Option<f64>,
    model_sensitivity_at_median_specificity: Option<f64>,
}

fn evaluate_roc(a: &RocArgs, _config: &RunConfig) -> Result<()> {
    let index = io::load_study_index(&a.index)?;
    let dets = io::load_detections(&a.detections, Some(&index))?;
    let ds = Dataset {
        index,
        lesions: Vec::new(),
        detections: dets,
    };
    let scores = match a.level.as_str() {
        "breast" => ds.breast_scores(),
        "patient" => patient_scores(&ds.breasts(), &ds.detections_by_image()),
        "image" => {
            let by_image = ds.detections_by_image();
            ds.index
                .images()
                .iter()
                .map(|img| {
                    let score = by_image
                        .get(&img.image_id)
                        .into_iter()
                        .flatten()
                        .map(|d| d.score)
                        .fold(0.0, f64::max);
                    (score, img.breast_pathology.is_malignant())
                })
                .collect()
        }
        other => return Err(Error::InvalidArgument(format!("unknown level '{other}'"))),
    };
    let curve = roc_curve(&scores)?;
    io::write_file(&a.out_dir.join("roc.csv"), &io::roc_csv(&curve))?;

    let clinical = a
        .clinical
        .as_deref()
        .map(io::load_clinical_points)
        .transpose()?
        .unwrap_or_default();
    let comparison = compare_to_clinical(&curve, &clinical);
    if a.clinical.is_some() {
        io::write_file(
            &a.out_dir.join("clinical_comparison.csv"),
            &io::clinical_comparison_csv(&comparison),
        )?;
    }
    let summary = RocSummary {
        level: a.level.clone(),
        auc: curve.auc,
        positives: curve.positives,
        negatives: curve.negatives,
        negative_classes: "normal+benign",
        median_clinical_specificity: comparison.median_specificity,
        model_sensitivity_at_median_specificity: comparison.model_sensitivity_at_median,
    };
    let json = serde_json::to_string_pretty(&summary).expect("plain struct serializes") + "\n";
    io::write_file(&a.out_dir.join("roc_summary.json"), &json)
}

/// Renders the summary text written by the `report` subcommand.
pub fn report(a: &ReportArgs, config: &RunConfig) -> Result<String> {
    let ds = Dataset::load(&a.inputs.index, &a.inputs.annotations, &a.inputs.detections)?;
    let set = ds.evaluation_set()?;
    let breasts = ds.breasts();
    let patients = ds.index.patients().len();
    let mut out = String::new();
    let w = &mut out;

    writeln!(w, "cesm-cad evaluation report").unwrap();
    writeln!(w, "images: {}", set.image_count()).unwrap();
    writeln!(w, "breasts: {}", breasts.len()).unwrap();
    writeln!(w, "patients: {patients}").unwrap();
    writeln!(w, "match iou threshold: {}", config.iou_match_threshold).unwrap();
    writeln!(w).unwrap();
    writeln!(
        w,
        "[detection] target sensitivity: {}",
        config.target_sensitivity
    )
    .unwrap();
    for metric in FrocMetric::ALL {
        let curve = match froc_curve(&set, metric, config.iou_match_threshold) {
            Ok(c) => c,
            Err(Error::NoTargets(_)) => {
                writeln!(w, "{metric}: no target lesions").unwrap();
                continue;
            }
            Err(e) => return Err(e),
        };
        write!(w, "{metric}: targets={} ", curve.total_targets).unwrap();
        match operating_point_at_sensitivity(&curve, config.target_sensitivity) {
            Ok(p) => {
                write!(
                    w,
                    "threshold={} sensitivity={} fp_per_image={}",
                    p.threshold, p.sensitivity, p.fp_per_image
                )
                .unwrap();
                if let Some(fpb) = curve.fp_per_breast(&p) {
                    write!(w, " fp_per_breast={fpb}").unwrap();
                }
            }
            Err(Error::SensitivityUnreachable { max, .. }) => {
                write!(w, "target unreachable (max sensitivity={max})").unwrap();
            }
            Err(Error::EmptyInput(_)) => write!(w, "no detections").unwrap(),
            Err(e) => return Err(e),
        }
        writeln!(w).unwrap();
        if let Some(last) = curve.points.last() {
            writeln!(
                w,
                "{metric}: max sensitivity={} at fp_per_image={}",
                last.sensitivity, last.fp_per_image
            )
            .unwrap();
        }
    }

    writeln!(w).unwrap();
    writeln!(
        w,
        "[classification] level: breast, negatives: normal+benign"
    )
    .unwrap();
    match roc_curve(&ds.breast_scores()) {
        Ok(curve) => {
            writeln!(
                w,
                "positives: {} negatives: {}",
                curve.positives, curve.negatives
            )
            .unwrap();
            writeln!(w, "auc: {}", curve.auc).unwrap();
            let clinical = a
                .clinical
                .as_deref()
                .map(io::load_clinical_points)
                .transpose()?
                .unwrap_or_default();
            let cmp = compare_to_clinical(&curve, &clinical);
            if let Some(sp) = cmp.median_specificity {
                writeln!(
                    w,
                    "sensitivity at median clinical specificity {sp}: {}",
                    sensitivity_at_specificity(&curve, sp)
                )
                .unwrap();
            }
            for r in &cmp.rows {
                writeln!(
                    w,
                    "clinical {}: sensitivity={} specificity={} model={} difference={}",
                    r.point.source_tag,
                    r.point.sensitivity,
                    r.point.specificity,
                    r.model_sensitivity,
                    r.difference
                )
                .unwrap();
            }
        }
        Err(Error::SingleClass {
            positives,
            negatives,
        }) => {
            writeln!(
                w,
                "roc undefined (positives: {positives}, negatives: {negatives})"
            )
            .unwrap();
        }
        Err(e) => return Err(e),
    }
    Ok(out)
}
