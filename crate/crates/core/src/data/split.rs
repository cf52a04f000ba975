//! Patient-level train/validation/test split, stratified by site and
//! pathology.
//!
//! Each stratum is apportioned by largest remainder; leftover patients go to
//! the largest fractional quotas, ties resolved train, then val, then test.
//! Within a stratum the sorted patient ids are shuffled with a seeded
//! generator and filled into train, val and test contiguously.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roc::Diagnosis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "train" => Ok(Split::Train),
            "val" | "validation" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split '{other}'")),
        }
    }
}

pub const DEFAULT_FRACTIONS: [f64; 3] = [0.55, 0.15, 0.30];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    fractions: [f64; 3],
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            fractions: DEFAULT_FRACTIONS,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn new(train: f64, val: f64, test: f64, seed: u64) -> Result<Self> {
        let fractions = [train, val, test];
        if fractions.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "split fractions must be positive, got {fractions:?}"
            )));
        }
        let sum: f64 = fractions.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "split fractions must sum to 1, got {sum}"
            )));
        }
        Ok(SplitSpec { fractions, seed })
    }

    pub fn fractions(&self) -> [f64; 3] {
        self.fractions
    }

    /// Largest-remainder apportionment of `n` patients.
    pub fn quotas(&self, n: usize) -> [usize; 3] {
        let exact = self.fractions.map(|f| f * n as f64);
        let mut counts = exact.map(|q| q.floor() as usize);
        let assigned: usize = counts.iter().sum();
        // Remainders are compared at 1e-9 resolution so that 10 · 0.15 and
        // 10 · 0.55 tie; the stable sort then keeps train > val > test.
        let remainder = exact.map(|q| ((q - q.floor()) * 1e9).round() as i64);
        let mut order = [0usize, 1, 2];
        order.sort_by_key(|&i| std::cmp::Reverse(remainder[i]));
        for &i in order.iter().take(n.saturating_sub(assigned)) {
            counts[i] += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatientStratum {
    pub patient_id: String,
    pub site: String,
    pub pathology: Diagnosis,
}

/// `patient_id → split`, iterated in patient-id order.
pub type SplitAssignment = BTreeMap<String, Split>;

pub fn stratified_split(patients: &[PatientStratum], spec: &SplitSpec) -> Result<SplitAssignment> {
    if patients.is_empty() {
        return Err(Error::EmptyInput("patient list"));
    }
    let mut seen = HashSet::new();
    for p in patients {
        if !seen.insert(p.patient_id.as_str()) {
            return Err(Error::Integrity(format!(
                "patient {} listed more than once",
                p.patient_id
            )));
        }
    }

    let mut strata: BTreeMap<(&str, Diagnosis), Vec<&str>> = BTreeMap::new();
    for p in patients {
        strata
            .entry((p.site.as_str(), p.pathology))
            .or_default()
            .push(p.patient_id.as_str());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = SplitAssignment::new();
    for ids in strata.values_mut() {
        ids.sort_unstable();
        ids.shuffle(&mut rng);
        let quotas = spec.quotas(ids.len());
        let mut rest = ids.iter();
        for (split, n) in Split::ALL.into_iter().zip(quotas) {
            for id in rest.by_ref().take(n) {
                out.insert(id.to_string(), split);
            }
        }
    }
    Ok(out)
}
