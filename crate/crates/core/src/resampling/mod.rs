//! Minority-class oversampling of training partitions.
//!
//! Every minority class is grown by half (capped at the majority count)
//! with either nearest-neighbour interpolation or a small per-class GAN.
//! Original rows are always kept verbatim; synthesis only appends.

pub mod gan;
pub mod interpolate;
pub mod plan;

use std::collections::{BTreeMap, BTreeSet};

use log::info;
use serde::{Deserialize, Serialize};

use crate::dataset::record::SensationClass;
use crate::dataset::table::{DomainDataset, RowOrigin};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use gan::{oversample_gan, GanConfig};
pub use interpolate::{oversample_interpolation, NEIGHBOURS};
pub use plan::{make_plan, plan_for_labels, present_counts, ResamplePlan, SynthesizerTag, GROWTH};

/// Input rows followed by synthetic rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Augmented {
    pub x: Matrix,
    pub labels: Vec<SensationClass>,
    /// Number of leading rows copied from the input.
    pub original: usize,
    /// Classes for which the GAN was abandoned in favour of interpolation.
    pub fallbacks: Vec<SensationClass>,
}

impl Augmented {
    fn from_original(x: &Matrix, labels: &[SensationClass]) -> Self {
        Augmented {
            x: x.clone(),
            labels: labels.to_vec(),
            original: labels.len(),
            fallbacks: Vec::new(),
        }
    }

    fn push(&mut self, row: &[f64], class: SensationClass) {
        self.x.push_row(row);
        self.labels.push(class);
    }

    pub fn synthetic(&self) -> usize {
        self.labels.len() - self.original
    }
}

/// Row indices per class, after checking the plan against the data.
fn check_plan(
    x: &Matrix,
    labels: &[SensationClass],
    plan: &ResamplePlan,
) -> Result<BTreeMap<SensationClass, Vec<usize>>> {
    if x.rows() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} rows but {} labels",
            x.rows(),
            labels.len()
        )));
    }
    let mut by_class: BTreeMap<SensationClass, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    for (class, &target) in &plan.targets {
        let have = by_class.get(class).map_or(0, Vec::len);
        if have == 0 {
            return Err(Error::Resample(format!("class {class} in plan has no rows")));
        }
        if have > target {
            return Err(Error::Resample(format!(
                "class {class} has {have} rows, above its target {target}"
            )));
        }
    }
    Ok(by_class)
}

/// Which synthesizer, if any, balances a training partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Resampler {
    None,
    Interpolation,
    Gan(GanConfig),
}

impl Resampler {
    pub fn name(&self) -> &'static str {
        match self {
            Resampler::None => "none",
            Resampler::Interpolation => "interp",
            Resampler::Gan(_) => "gan",
        }
    }

    /// `none`, `interp` or `gan` (default GAN settings).
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(Resampler::None),
            other => Ok(match other.parse::<SynthesizerTag>()? {
                SynthesizerTag::Interpolation => Resampler::Interpolation,
                SynthesizerTag::Gan => Resampler::Gan(GanConfig::default()),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResampleReport {
    pub resampler: String,
    pub before: [usize; SensationClass::COUNT],
    pub planned: [usize; SensationClass::COUNT],
    pub achieved: [usize; SensationClass::COUNT],
    pub fallbacks: Vec<SensationClass>,
    /// Provenance of every row the synthesizer could draw on.
    #[serde(skip)]
    pub consumed: BTreeSet<RowOrigin>,
}

/// Balance a training partition. Synthetic rows are tagged
/// [`RowOrigin::Synthetic`]; `consumed` lists the rows they were derived
/// from, for leak audits.
pub fn resample_dataset(
    data: &DomainDataset,
    resampler: &Resampler,
    seed: u64,
) -> Result<(DomainDataset, ResampleReport)> {
    let before = data.class_counts();
    if matches!(resampler, Resampler::None) || data.is_empty() {
        let report = ResampleReport {
            resampler: resampler.name().into(),
            before,
            planned: before,
            achieved: before,
            fallbacks: Vec::new(),
            consumed: BTreeSet::new(),
        };
        return Ok((data.clone(), report));
    }
    let tag = match resampler {
        Resampler::Gan(_) => SynthesizerTag::Gan,
        _ => SynthesizerTag::Interpolation,
    };
    let plan = plan_for_labels(&data.labels, tag, seed)?;
    let augmented = match resampler {
        Resampler::Gan(cfg) => oversample_gan(&data.x, &data.labels, &plan, cfg)?,
        _ => oversample_interpolation(&data.x, &data.labels, &plan)?,
    };
    let mut planned = [0; SensationClass::COUNT];
    for (c, &t) in &plan.targets {
        planned[c.index()] = t;
    }
    let achieved = crate::dataset::table::class_counts(&augmented.labels);
    if achieved != planned {
        return Err(Error::Resample(format!(
            "achieved counts {achieved:?} differ from plan {planned:?}"
        )));
    }
    let consumed = data
        .origins
        .iter()
        .zip(&data.labels)
        .filter(|(_, l)| plan.deficit(**l) > 0)
        .map(|(o, _)| *o)
        .collect();
    info!(
        "resampled with {}: {:?} -> {:?}",
        resampler.name(),
        before,
        achieved
    );
    let mut origins = data.origins.clone();
    origins.resize(augmented.labels.len(), RowOrigin::Synthetic);
    let out = DomainDataset::with_origins(
        augmented.x,
        augmented.labels,
        data.feature_names.clone(),
        data.domain,
        origins,
    )?;
    let report = ResampleReport {
        resampler: resampler.name().into(),
        before,
        planned,
        achieved,
        fallbacks: augmented.fallbacks,
        consumed,
    };
    Ok((out, report))
}
