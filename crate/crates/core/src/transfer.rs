//! Source-pool assembly, source training and layer-retaining fine-tuning.
//!
//! A source MLP is trained on pooled HVAC records restricted to the eight
//! inputs shared by every study. Fine-tuning builds a fresh network for
//! the target inputs, copies the source's last hidden layer in bit-exactly
//! and freezes it, then trains the remaining layers on the target rows.

use std::fmt;
use std::str::FromStr;

use log::info;
use serde::{Deserialize, Serialize};

use crate::dataset::climate::PoolFilter;
use crate::dataset::record::{ClimateZone, ComfortRecord, FeatureSet};
use crate::dataset::standardize::Standardizer;
use crate::dataset::table::{Domain, DomainDataset};
use crate::error::{Error, Result};
use crate::neural::{train, MlpModel, RetainedLayer, TrainConfig, TrainHistory};
use crate::resampling::{resample_dataset, ResampleReport, Resampler};
use crate::rng;

pub const HIDDEN_WIDTH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SourcePool {
    AllHvac,
    SameClimateZone(ClimateZone),
}

impl SourcePool {
    pub fn filter(self) -> PoolFilter {
        match self {
            SourcePool::AllHvac => PoolFilter::hvac(),
            SourcePool::SameClimateZone(z) => PoolFilter::hvac_in(z),
        }
    }
}

impl fmt::Display for SourcePool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourcePool::AllHvac => f.write_str("all"),
            SourcePool::SameClimateZone(z) => write!(f, "zone:{}", z.letter()),
        }
    }
}

impl FromStr for SourcePool {
    type Err = Error;
    /// `all` or `zone:<zone>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(SourcePool::AllHvac);
        }
        match s.split_once(':') {
            Some((k, z)) if k.eq_ignore_ascii_case("zone") => Ok(SourcePool::SameClimateZone(z.parse()?)),
            _ => Err(Error::Config(format!("unknown source pool `{s}` (use `all` or `zone:C`)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferPlan {
    pub source_pool: SourcePool,
    /// Index of the retained layer; `None` means the last hidden layer.
    pub retained_layer: Option<usize>,
    pub hidden: Vec<usize>,
    pub fine_tune: TrainConfig,
    pub source_train: TrainConfig,
    /// Also copy and freeze the source output layer.
    pub retain_output: bool,
    pub resampler: Resampler,
}

impl Default for TransferPlan {
    fn default() -> Self {
        TransferPlan {
            source_pool: SourcePool::AllHvac,
            retained_layer: None,
            hidden: vec![HIDDEN_WIDTH, HIDDEN_WIDTH],
            fine_tune: TrainConfig::fine_tune(0),
            source_train: TrainConfig::source(0),
            retain_output: false,
            resampler: Resampler::Interpolation,
        }
    }
}

impl TransferPlan {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.source_train.seed = rng::derive(seed, "source-train");
        self.fine_tune.seed = rng::derive(seed, "fine-tune");
        self
    }

    /// Layer index that is copied and frozen.
    pub fn retained_index(&self) -> Result<usize> {
        let last_hidden = self
            .hidden
            .len()
            .checked_sub(1)
            .ok_or_else(|| Error::TransferContract("plan has no hidden layer".into()))?;
        let r = self.retained_layer.unwrap_or(last_hidden);
        if r > last_hidden {
            return Err(Error::TransferContract(format!(
                "retained layer {r} is not a hidden layer (last hidden is {last_hidden})"
            )));
        }
        Ok(r)
    }
}

/// HVAC records of both sources (zone-filtered per plan) on the eight
/// shared inputs. Row origins index into `ashrae ++ scales`.
pub fn assemble_source_pool(
    ashrae: &[ComfortRecord],
    scales: &[ComfortRecord],
    plan: &TransferPlan,
) -> Result<DomainDataset> {
    let filter = plan.source_pool.filter();
    let mut pooled: Vec<ComfortRecord> = Vec::with_capacity(ashrae.len() + scales.len());
    pooled.extend(ashrae.iter().cloned());
    pooled.extend(scales.iter().cloned());
    let keep: Vec<bool> = pooled.iter().map(|r| filter.matches(r)).collect();
    let shared = FeatureSet::source_shared();
    let all = DomainDataset::from_records(&pooled, &shared, Domain::Source)?;
    let rows: Vec<usize> = (0..all.len())
        .filter(|&i| all.origins[i].record().is_some_and(|r| keep[r]))
        .collect();
    let pool = all.subset(&rows);
    if pool.is_empty() {
        return Err(Error::EmptyPool(format!(
            "no complete HVAC rows for pool `{}`",
            plan.source_pool
        )));
    }
    info!("source pool `{}`: {} rows", plan.source_pool, pool.len());
    Ok(pool)
}

#[derive(Debug, Clone)]
pub struct TrainedSource {
    pub model: MlpModel,
    pub standardizer: Standardizer,
    pub history: TrainHistory,
    pub resample: ResampleReport,
}

/// Standardize the pool, rebalance it and train `[8, hidden.., 5]`.
pub fn train_source(pool: &DomainDataset, plan: &TransferPlan) -> Result<TrainedSource> {
    if pool.is_empty() {
        return Err(Error::EmptyPool("source pool".into()));
    }
    let standardizer = Standardizer::fit(pool)?;
    let scaled = standardizer.transform(pool)?;
    let seed = plan.source_train.seed;
    let (balanced, resample) = resample_dataset(&scaled, &plan.resampler, rng::derive(seed, "source-resample"))?;
    let mut model = MlpModel::new(pool.feature_names.clone(), &plan.hidden, rng::derive(seed, "source-init"))?;
    let history = train(&mut model, &balanced.x, &balanced.labels, &plan.source_train)?;
    if history.loss.iter().any(|l| !l.is_finite()) {
        return Err(Error::NonFinite("source loss history".into()));
    }
    Ok(TrainedSource {
        model,
        standardizer,
        history,
        resample,
    })
}

#[derive(Debug, Clone)]
pub struct FineTuned {
    pub model: MlpModel,
    pub history: TrainHistory,
    /// False when the retained layer is the first layer, so only layers
    /// above it learn from the target.
    pub lower_layers_adapted: bool,
}

/// Fresh network for the target inputs with the source's retained layer
/// copied bit-exactly and frozen. `target` must already be standardized
/// (and rebalanced, if wanted). When the retained layer is the first
/// layer, the target is projected onto the source's inputs.
pub fn transfer_fine_tune(source: &MlpModel, target: &DomainDataset, plan: &TransferPlan) -> Result<FineTuned> {
    if target.is_empty() {
        return Err(Error::EmptyInput("target training rows"));
    }
    let r = plan.retained_index()?;
    if source.hidden_widths() != plan.hidden {
        return Err(Error::TransferContract(format!(
            "source hidden widths {:?} differ from plan {:?}",
            source.hidden_widths(),
            plan.hidden
        )));
    }
    let projected;
    let data = if r == 0 {
        projected = target.project(&source.feature_names)?;
        &projected
    } else {
        target
    };
    let mut model = MlpModel::new(
        data.feature_names.clone(),
        &plan.hidden,
        rng::derive(plan.fine_tune.seed, "fine-tune-init"),
    )?;
    let mut copied = vec![r];
    if plan.retain_output {
        copied.push(model.layer_count() - 1);
    }
    for &l in &copied {
        model.network.layers[l] = source.network.layers[l].clone();
        model.network.layers[l].frozen = true;
    }
    let history = train(&mut model, &data.x, &data.labels, &plan.fine_tune)?;
    for &l in &copied {
        let (a, b) = (&source.network.layers[l], &model.network.layers[l]);
        let same = a.weights.as_slice().iter().zip(b.weights.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits())
            && a.biases.iter().zip(&b.biases).all(|(x, y)| x.to_bits() == y.to_bits());
        if !same {
            return Err(Error::TransferContract(format!("retained layer {l} changed during fine-tuning")));
        }
    }
    model.retained = Some(RetainedLayer {
        layer: r,
        source_seed: source.seed,
    });
    Ok(FineTuned {
        model,
        history,
        lower_layers_adapted: r > 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pool_parsing() {
        assert_eq!("all".parse::<SourcePool>().unwrap(), SourcePool::AllHvac);
        assert_eq!(
            "zone:C".parse::<SourcePool>().unwrap(),
            SourcePool::SameClimateZone(ClimateZone::C)
        );
        assert!("zone:Q".parse::<SourcePool>().is_err());
        assert_eq!(SourcePool::SameClimateZone(ClimateZone::D).to_string(), "zone:D");
    }

    #[test]
    fn retained_index_defaults_to_last_hidden() {
        let p = TransferPlan::default();
        assert_eq!(p.retained_index().unwrap(), 1);
        let p = TransferPlan {
            retained_layer: Some(2),
            ..Default::default()
        };
        assert!(p.retained_index().is_err());
    }
}
