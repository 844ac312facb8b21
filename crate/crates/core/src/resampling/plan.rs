//! Per-class target counts: every minority class grows by half, capped at
//! the majority count.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::record::SensationClass;
use crate::error::{Error, Result};

/// Growth factor applied to each minority class.
pub const GROWTH: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthesizerTag {
    Interpolation,
    Gan,
}

impl fmt::Display for SynthesizerTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SynthesizerTag::Interpolation => "interp",
            SynthesizerTag::Gan => "gan",
        })
    }
}

impl FromStr for SynthesizerTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "interp" | "interpolation" | "smote" => Ok(SynthesizerTag::Interpolation),
            "gan" => Ok(SynthesizerTag::Gan),
            other => Err(Error::Config(format!("unknown synthesizer `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResamplePlan {
    /// Observed count per class present in the training rows.
    pub counts: BTreeMap<SensationClass, usize>,
    /// Count per class after synthesis.
    pub targets: BTreeMap<SensationClass, usize>,
    pub synthesizer: SynthesizerTag,
    pub seed: u64,
}

impl ResamplePlan {
    pub fn deficit(&self, class: SensationClass) -> usize {
        let have = self.counts.get(&class).copied().unwrap_or(0);
        self.targets.get(&class).copied().unwrap_or(have).saturating_sub(have)
    }

    pub fn total_synthetic(&self) -> usize {
        self.counts.keys().map(|&c| self.deficit(c)).sum()
    }

    pub fn with_synthesizer(mut self, tag: SynthesizerTag, seed: u64) -> Self {
        self.synthesizer = tag;
        self.seed = seed;
        self
    }
}

/// `target_c = min(round(1.5 · n_c), n_majority)`, rounding half away from
/// zero. The plan defaults to interpolation with seed 0.
pub fn make_plan(class_counts: &BTreeMap<SensationClass, usize>) -> Result<ResamplePlan> {
    if class_counts.is_empty() {
        return Err(Error::Resample("no classes to plan for".into()));
    }
    if let Some((c, _)) = class_counts.iter().find(|(_, &n)| n == 0) {
        return Err(Error::Resample(format!("class {c} has no samples")));
    }
    let majority = *class_counts.values().max().expect("non-empty");
    let targets = class_counts
        .iter()
        .map(|(&c, &n)| {
            let grown = (GROWTH * n as f64).round() as usize;
            (c, grown.min(majority))
        })
        .collect();
    Ok(ResamplePlan {
        counts: class_counts.clone(),
        targets,
        synthesizer: SynthesizerTag::Interpolation,
        seed: 0,
    })
}

/// Counts of the classes that occur in `labels`.
pub fn present_counts(labels: &[SensationClass]) -> BTreeMap<SensationClass, usize> {
    let mut m = BTreeMap::new();
    for &l in labels {
        *m.entry(l).or_insert(0) += 1;
    }
    m
}

pub fn plan_for_labels(labels: &[SensationClass], tag: SynthesizerTag, seed: u64) -> Result<ResamplePlan> {
    Ok(make_plan(&present_counts(labels))?.with_synthesizer(tag, seed))
}
