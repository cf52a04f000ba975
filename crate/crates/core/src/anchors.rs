//! Anchor-size estimation by k-means over box shapes.
//!
//! Shapes are compared co-centred, so the distance `1 − IoU` depends only on
//! widths and heights and is invariant to uniform scaling.

use std::collections::HashSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shape {
    pub width: f64,
    pub height: f64,
}

impl Shape {
    pub fn new(width: f64, height: f64) -> Result<Self> {
        if !(width.is_finite() && height.is_finite() && width > 0.0 && height > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "shape dimensions must be positive, got {width}x{height}"
            )));
        }
        Ok(Shape { width, height })
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    /// IoU of the two shapes placed on a common centre.
    pub fn centered_iou(&self, other: &Shape) -> f64 {
        let inter = self.width.min(other.width) * self.height.min(other.height);
        inter / (self.area() + other.area() - inter)
    }

    fn distance(&self, other: &Shape) -> f64 {
        1.0 - self.centered_iou(other)
    }

    fn key(&self) -> (u64, u64) {
        (self.width.to_bits(), self.height.to_bits())
    }
}

/// Anchors sorted by ascending area.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnchorSet {
    anchors: Vec<Shape>,
}

impl AnchorSet {
    pub fn new(mut anchors: Vec<Shape>) -> Result<Self> {
        if anchors.is_empty() {
            return Err(Error::EmptyInput("anchor set"));
        }
        for a in &anchors {
            Shape::new(a.width, a.height)?;
        }
        anchors.sort_by(|a, b| {
            a.area()
                .total_cmp(&b.area())
                .then(a.width.total_cmp(&b.width))
        });
        Ok(AnchorSet { anchors })
    }

    pub fn k(&self) -> usize {
        self.anchors.len()
    }

    pub fn anchors(&self) -> &[Shape] {
        &self.anchors
    }

    /// `[[w, h], ...]` as emitted by the CLI.
    pub fn to_json(&self) -> String {
        let pairs: Vec<[f64; 2]> = self.anchors.iter().map(|a| [a.width, a.height]).collect();
        serde_json::to_string(&pairs).expect("f64 pairs always serialize")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop once no centroid moves farther than this (pixels).
    pub tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            k: 9,
            seed: 0,
            max_iter: 300,
            tol: 1e-4,
        }
    }
}

/// Mean `1 − IoU` of one assignment pass, measured against the centroids in
/// force during that pass: once with the previous assignment and once after
/// reassignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationStats {
    pub before_reassign: Option<f64>,
    pub after_reassign: f64,
    pub max_movement: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansOutcome {
    pub anchors: AnchorSet,
    pub iterations: Vec<IterationStats>,
}

pub fn kmeans_anchors(boxes: &[Shape], config: &KMeansConfig) -> Result<AnchorSet> {
    kmeans_anchors_traced(boxes, config).map(|o| o.anchors)
}

pub fn kmeans_anchors_traced(boxes: &[Shape], config: &KMeansConfig) -> Result<KMeansOutcome> {
    let k = config.k;
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if !(config.tol.is_finite() && config.tol >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tol must be non-negative, got {}",
            config.tol
        )));
    }
    for b in boxes {
        Shape::new(b.width, b.height)?;
    }
    let distinct = boxes.iter().map(Shape::key).collect::<HashSet<_>>().len();
    if distinct < k {
        return Err(Error::TooFewShapes { k, distinct });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut centroids = seed_centroids(boxes, k, &mut rng);
    let mut assignment: Option<Vec<usize>> = None;
    let mut iterations = Vec::new();

    for _ in 0..config.max_iter {
        let before_reassign = assignment
            .as_ref()
            .map(|a| mean_distance(boxes, &centroids, a));
        let next = assign(boxes, &centroids);
        let after_reassign = mean_distance(boxes, &centroids, &next);

        let mut sums = vec![(0.0, 0.0, 0usize); k];
        for (b, &c) in boxes.iter().zip(&next) {
            sums[c].0 += b.width;
            sums[c].1 += b.height;
            sums[c].2 += 1;
        }
        let mut max_movement: f64 = 0.0;
        for (c, &(sw, sh, n)) in centroids.iter_mut().zip(&sums) {
            // Empty clusters keep their previous centroid.
            if n == 0 {
                continue;
            }
            let updated = Shape {
                width: sw / n as f64,
                height: sh / n as f64,
            };
            max_movement =
                max_movement.max((updated.width - c.width).hypot(updated.height - c.height));
            *c = updated;
        }
        assignment = Some(next);
        iterations.push(IterationStats {
            before_reassign,
            after_reassign,
            max_movement,
        });
        if max_movement < config.tol {
            break;
        }
    }

    Ok(KMeansOutcome {
        anchors: AnchorSet::new(centroids)?,
        iterations,
    })
}

/// k-means++ seeding under the `1 − IoU` distance: the first centre is drawn
/// uniformly, later ones with probability proportional to the squared
/// distance to the nearest centre chosen so far.
fn seed_centroids(boxes: &[Shape], k: usize, rng: &mut impl Rng) -> Vec<Shape> {
    let mut centroids = vec![boxes[rng.gen_range(0..boxes.len())]];
    let mut nearest: Vec<f64> = boxes.iter().map(|b| b.distance(&centroids[0])).collect();
    while centroids.len() < k {
        let weights: Vec<f64> = nearest.iter().map(|d| d * d).collect();
        // Fewer distinct shapes than k is rejected upstream, so some weight is
        // positive here.
        let pick = WeightedIndex::new(&weights)
            .expect("at least one unchosen distinct shape")
            .sample(rng);
        let c = boxes[pick];
        for (n, b) in nearest.iter_mut().zip(boxes) {
            *n = n.min(b.distance(&c));
        }
        centroids.push(c);
    }
    centroids
}

fn assign(boxes: &[Shape], centroids: &[Shape]) -> Vec<usize> {
    boxes
        .iter()
        .map(|b| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (i, c) in centroids.iter().enumerate() {
                let d = b.distance(c);
                if d < best_d {
                    best = i;
                    best_d = d;
                }
            }
            best
        })
        .collect()
}

fn mean_distance(boxes: &[Shape], centroids: &[Shape], assignment: &[usize]) -> f64 {
    let total: f64 = boxes
        .iter()
        .zip(assignment)
        .map(|(b, &c)| b.distance(&centroids[c]))
        .sum();
    total / boxes.len() as f64
}

/// Mean over boxes of the best co-centred IoU against any anchor.
pub fn anchor_fitness(boxes: &[Shape], anchors: &AnchorSet) -> Result<f64> {
    if boxes.is_empty() {
        return Err(Error::EmptyInput("boxes"));
    }
    let total: f64 = boxes
        .iter()
        .map(|b| {
            anchors
                .anchors()
                .iter()
                .map(|a| b.centered_iou(a))
                .fold(0.0, f64::max)
        })
        .sum();
    Ok(total / boxes.len() as f64)
}
