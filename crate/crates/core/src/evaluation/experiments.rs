//! Experiment suites: feature-set ablation, hidden-depth sweep and the
//! synthetic transfer-benefit comparison.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::record::{ComfortRecord, FeatureSet, FeatureSetTag};
use crate::error::Result;
use crate::evaluation::cv::{run_cv_with_pool, run_holdout, Algorithm, CvConfig, EvalReport};
use crate::evaluation::metrics::mean_std;
use crate::evaluation::synthetic::{generate_synthetic_scenario, SyntheticSpec};
use crate::neural::TrainConfig;
use crate::transfer::{assemble_source_pool, train_source, SourcePool, TransferPlan, HIDDEN_WIDTH};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub label: String,
    pub algorithm: String,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub f1_mean: f64,
    pub f1_std: f64,
    pub note: String,
}

impl SummaryRow {
    pub fn from_report(label: impl Into<String>, report: &EvalReport) -> Self {
        let (am, asd) = report.accuracy();
        let (fm, fsd) = report.weighted_f1();
        SummaryRow {
            label: label.into(),
            algorithm: report.manifest.algorithm.clone(),
            accuracy_mean: am,
            accuracy_std: asd,
            f1_mean: fm,
            f1_std: fsd,
            note: String::new(),
        }
    }
}

/// `first_column,algorithm,accuracy_mean,accuracy_std,f1_mean,f1_std,note`.
pub fn summary_csv(first_column: &str, rows: &[SummaryRow]) -> String {
    let mut s = format!("{first_column},algorithm,accuracy_mean,accuracy_std,f1_mean,f1_std,note\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{:.4},{:.4},{:.4},{:.4},{}\n",
            r.label, r.algorithm, r.accuracy_mean, r.accuracy_std, r.f1_mean, r.f1_std, r.note
        ));
    }
    s
}

/// Every algorithm on Xa, Xb and Xc, grouped by feature set.
pub fn run_feature_ablation(
    records: &[ComfortRecord],
    algorithms: &[Algorithm],
    cfg: &CvConfig,
) -> Result<Vec<SummaryRow>> {
    let mut rows = Vec::new();
    for tag in [FeatureSetTag::Xa, FeatureSetTag::Xb, FeatureSetTag::Xc] {
        let c = CvConfig {
            feature_set: FeatureSet::from_tag(tag),
            ..cfg.clone()
        };
        for alg in algorithms {
            let report = run_cv_with_pool(alg, records, &c, None)?;
            rows.push(SummaryRow::from_report(tag.to_string(), &report));
        }
    }
    Ok(rows)
}

/// Transfer models with 1..=n hidden layers of width 64, each retaining its
/// last hidden layer. All depths share folds and seeds.
pub fn run_hidden_layer_sweep(
    target: &[ComfortRecord],
    ashrae: &[ComfortRecord],
    scales: &[ComfortRecord],
    depths: &[usize],
    pool: SourcePool,
    source_train: TrainConfig,
    cfg: &CvConfig,
) -> Result<Vec<SummaryRow>> {
    depths
        .par_iter()
        .map(|&depth| {
            let plan = TransferPlan {
                source_pool: pool,
                hidden: vec![HIDDEN_WIDTH; depth],
                source_train,
                resampler: cfg.resampler.clone(),
                ..Default::default()
            };
            let source_pool = assemble_source_pool(ashrae, scales, &plan)?;
            let source = train_source(&source_pool, &plan)?;
            let alg = Algorithm::Transfer {
                label: format!("tl-mlp-depth{depth}"),
                source: Arc::new(source.model),
            };
            let report = run_cv_with_pool(&alg, target, cfg, Some(pool.to_string()))?;
            let mut row = SummaryRow::from_report(depth.to_string(), &report);
            if depth == 1 {
                row.note = "no lower layers adapted".into();
            }
            Ok(row)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenefitConfig {
    pub spec: SyntheticSpec,
    pub seeds: Vec<u64>,
    pub source_epochs: usize,
    /// Fine-tuning and scratch schedule, resampler and hidden widths.
    pub cv: CvConfig,
}

impl Default for BenefitConfig {
    fn default() -> Self {
        BenefitConfig {
            spec: SyntheticSpec::default(),
            seeds: (0..10).collect(),
            source_epochs: 500,
            cv: CvConfig::default(),
        }
    }
}

/// Held-out target accuracy of the three MLP variants for one scenario seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenefitRow {
    pub seed: u64,
    pub tl_zone: f64,
    pub tl_all: f64,
    pub scratch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenefitSummary {
    pub rows: Vec<BenefitRow>,
    pub tl_zone: (f64, f64),
    pub tl_all: (f64, f64),
    pub scratch: (f64, f64),
}

impl BenefitSummary {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("seed,tl_mlp_c,tl_mlp,mlp\n");
        for r in &self.rows {
            s.push_str(&format!("{},{:.4},{:.4},{:.4}\n", r.seed, r.tl_zone, r.tl_all, r.scratch));
        }
        s.push_str(&format!(
            "mean,{:.4},{:.4},{:.4}\n",
            self.tl_zone.0, self.tl_all.0, self.scratch.0
        ));
        s
    }
}

fn benefit_for_seed(cfg: &BenefitConfig, seed: u64) -> Result<BenefitRow> {
    let scenario = generate_synthetic_scenario(&cfg.spec, seed)?;
    let cv = CvConfig { seed, ..cfg.cv.clone() };
    let transfer = |pool: SourcePool| -> Result<f64> {
        let plan = TransferPlan {
            source_pool: pool,
            hidden: cv.hidden.clone(),
            source_train: TrainConfig::source(0).with_epochs(cfg.source_epochs),
            resampler: cv.resampler.clone(),
            ..Default::default()
        }
        .with_seed(seed);
        let source_pool = assemble_source_pool(&scenario.source, &[], &plan)?;
        let source = train_source(&source_pool, &plan)?;
        let alg = Algorithm::Transfer {
            label: pool.to_string(),
            source: Arc::new(source.model),
        };
        Ok(run_holdout(&alg, &scenario.target_train, &scenario.target_test, &cv)?.accuracy)
    };
    let tl_zone = transfer(SourcePool::SameClimateZone(cfg.spec.target_zone))?;
    let tl_all = transfer(SourcePool::AllHvac)?;
    let scratch = run_holdout(&Algorithm::Mlp, &scenario.target_train, &scenario.target_test, &cv)?.accuracy;
    Ok(BenefitRow {
        seed,
        tl_zone,
        tl_all,
        scratch,
    })
}

/// Zone-matched transfer, all-pool transfer and scratch MLP on fresh
/// scenarios, one per seed, scored on each scenario's held-out target rows.
pub fn run_transfer_benefit(cfg: &BenefitConfig) -> Result<BenefitSummary> {
    let rows = cfg
        .seeds
        .par_iter()
        .map(|&s| benefit_for_seed(cfg, s))
        .collect::<Result<Vec<_>>>()?;
    let col = |f: fn(&BenefitRow) -> f64| mean_std(&rows.iter().map(f).collect::<Vec<_>>());
    Ok(BenefitSummary {
        tl_zone: col(|r| r.tl_zone),
        tl_all: col(|r| r.tl_all),
        scratch: col(|r| r.scratch),
        rows,
    })
}
