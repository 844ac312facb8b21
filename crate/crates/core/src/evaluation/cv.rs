//! Leak-free k-fold evaluation of every algorithm.
//!
//! Per fold the standardizer is fitted on the training rows only, the
//! training rows alone are rebalanced, and the untouched test rows are
//! scored. Row provenance is audited after every fold.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{BaselineKind, BaselineModel, BaselineParams};
use crate::dataset::record::{ComfortRecord, FeatureSet, SensationClass};
use crate::dataset::standardize::Standardizer;
use crate::dataset::table::{Domain, DomainDataset, RowOrigin};
use crate::error::{Error, Result};
use crate::evaluation::folds::{kfold_split, stratified_kfold_split, FoldSplit};
use crate::evaluation::metrics::{accuracy, mean_std, ConfusionMatrix};
use crate::neural::{train, MlpModel, TrainConfig};
use crate::pmv::pmv_baseline_predict;
use crate::resampling::{resample_dataset, Resampler};
use crate::rng;
use crate::transfer::{transfer_fine_tune, TransferPlan};

#[derive(Debug, Clone)]
pub enum Algorithm {
    Pmv,
    Baseline(BaselineKind),
    /// MLP trained from scratch on the target.
    Mlp,
    /// Fine-tuned from a source model trained once, outside the folds.
    Transfer { label: String, source: Arc<MlpModel> },
}

impl Algorithm {
    pub fn name(&self) -> String {
        match self {
            Algorithm::Pmv => "pmv".into(),
            Algorithm::Baseline(k) => k.to_string(),
            Algorithm::Mlp => "mlp".into(),
            Algorithm::Transfer { label, .. } => label.clone(),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub k: usize,
    pub seed: u64,
    pub stratified: bool,
    pub feature_set: FeatureSet,
    pub resampler: Resampler,
    pub hidden: Vec<usize>,
    /// Schedule for scratch MLPs and fine-tuning; its seed is replaced per fold.
    pub train: TrainConfig,
    pub baseline: BaselineParams,
    pub retain_output: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            k: 10,
            seed: 42,
            stratified: false,
            feature_set: FeatureSet::xc(),
            resampler: Resampler::Interpolation,
            hidden: vec![64, 64],
            train: TrainConfig::fine_tune(0),
            baseline: BaselineParams::default(),
            retain_output: false,
        }
    }
}

/// Rows that fed each fitted component of one fold.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FoldAudit {
    pub fold: usize,
    pub test: BTreeSet<RowOrigin>,
    pub standardizer_fit: BTreeSet<RowOrigin>,
    pub resampler_input: BTreeSet<RowOrigin>,
    pub model_fit: BTreeSet<RowOrigin>,
}

impl FoldAudit {
    /// Fails if any test row reached a fitted component.
    pub fn check(&self) -> Result<()> {
        let parts = [
            ("standardizer", &self.standardizer_fit),
            ("resampler", &self.resampler_input),
            ("model", &self.model_fit),
        ];
        for (what, set) in parts {
            if let Some(o) = set.iter().find(|o| **o != RowOrigin::Synthetic && self.test.contains(o)) {
                return Err(Error::Leak(format!(
                    "fold {}: test row {o:?} reached the {what}",
                    self.fold
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub accuracy: f64,
    pub weighted_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportManifest {
    pub algorithm: String,
    pub feature_set: String,
    pub seed: u64,
    pub k: usize,
    pub stratified: bool,
    pub resampler: String,
    pub pool: Option<String>,
    /// How the spread columns are computed.
    pub spread: String,
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub manifest: ReportManifest,
    pub folds: Vec<FoldResult>,
    pub confusion: ConfusionMatrix,
    pub audits: Vec<FoldAudit>,
    pub notes: Vec<String>,
}

impl EvalReport {
    pub fn accuracy(&self) -> (f64, f64) {
        mean_std(&self.folds.iter().map(|f| f.accuracy).collect::<Vec<_>>())
    }

    pub fn weighted_f1(&self) -> (f64, f64) {
        mean_std(&self.folds.iter().map(|f| f.weighted_f1).collect::<Vec<_>>())
    }

    /// One row per fold, then `mean` and `stddev` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("fold,n_train,n_test,accuracy,weighted_f1\n");
        for f in &self.folds {
            s.push_str(&format!(
                "{},{},{},{:.6},{:.6}\n",
                f.fold, f.n_train, f.n_test, f.accuracy, f.weighted_f1
            ));
        }
        let (am, asd) = self.accuracy();
        let (fm, fsd) = self.weighted_f1();
        s.push_str(&format!("mean,,,{am:.6},{fm:.6}\n"));
        s.push_str(&format!("stddev,,,{asd:.6},{fsd:.6}\n"));
        s
    }

    pub fn check_no_leak(&self) -> Result<()> {
        self.audits.iter().try_for_each(FoldAudit::check)
    }
}

struct SplitOutcome {
    pred: Vec<SensationClass>,
    truth: Vec<SensationClass>,
    audit: FoldAudit,
    n_train: usize,
    notes: Vec<String>,
}

/// Fit on `train_rows` of `data` and predict `test_rows`.
fn run_split(
    algorithm: &Algorithm,
    records: &[ComfortRecord],
    data: &DomainDataset,
    train_rows: &[usize],
    test_rows: &[usize],
    cfg: &CvConfig,
    fold: usize,
) -> Result<SplitOutcome> {
    let train_set = data.subset(train_rows);
    let test_set = data.subset(test_rows);
    let mut audit = FoldAudit {
        fold,
        test: test_set.origins.iter().copied().collect(),
        ..Default::default()
    };
    let mut notes = Vec::new();
    let seed_for = |label: &str| rng::derive_index(cfg.seed, label, fold as u64);

    let pred = if let Algorithm::Pmv = algorithm {
        let test_records: Vec<ComfortRecord> = test_set
            .origins
            .iter()
            .map(|o| records[o.record().expect("evaluation rows are records")].clone())
            .collect();
        pmv_baseline_predict(&test_records)?
    } else {
        let standardizer = Standardizer::fit(&train_set)?;
        audit.standardizer_fit = standardizer.fitted_on.iter().copied().collect();
        let train_s = standardizer.transform(&train_set)?;
        let test_s = standardizer.transform(&test_set)?;
        let (balanced, report) = resample_dataset(&train_s, &cfg.resampler, seed_for("resample"))?;
        audit.resampler_input = report.consumed;
        audit.model_fit = balanced.origins.iter().copied().collect();
        match algorithm {
            Algorithm::Pmv => unreachable!(),
            Algorithm::Baseline(kind) => {
                let params = BaselineParams {
                    seed: seed_for("baseline"),
                    ..cfg.baseline
                };
                BaselineModel::fit(*kind, &balanced.x, &balanced.labels, &params)?.predict(&test_s.x)?
            }
            Algorithm::Mlp => {
                let mut model = MlpModel::new(balanced.feature_names.clone(), &cfg.hidden, seed_for("mlp-init"))?;
                let tc = TrainConfig {
                    seed: seed_for("mlp-train"),
                    ..cfg.train
                };
                train(&mut model, &balanced.x, &balanced.labels, &tc)?;
                model.predict(&test_s.x)?
            }
            Algorithm::Transfer { source, .. } => {
                let plan = TransferPlan {
                    hidden: source.hidden_widths(),
                    fine_tune: TrainConfig {
                        seed: seed_for("fine-tune"),
                        ..cfg.train
                    },
                    retain_output: cfg.retain_output,
                    resampler: cfg.resampler.clone(),
                    ..Default::default()
                };
                let tuned = transfer_fine_tune(source, &balanced, &plan)?;
                if !tuned.lower_layers_adapted {
                    notes.push(format!("fold {fold}: no lower layers adapted"));
                }
                let test_x = test_s.project(&tuned.model.feature_names)?.x;
                tuned.model.predict(&test_x)?
            }
        }
    };
    audit.check()?;
    Ok(SplitOutcome {
        pred,
        truth: test_set.labels,
        audit,
        n_train: train_rows.len(),
        notes,
    })
}

fn design_matrix(records: &[ComfortRecord], cfg: &CvConfig) -> Result<DomainDataset> {
    if records.is_empty() {
        return Err(Error::EmptyInput("evaluation records"));
    }
    DomainDataset::from_records(records, &cfg.feature_set, Domain::Target)
}

fn manifest(algorithm: &Algorithm, cfg: &CvConfig, pool: Option<String>) -> ReportManifest {
    ReportManifest {
        algorithm: algorithm.name(),
        feature_set: cfg.feature_set.label(),
        seed: cfg.seed,
        k: cfg.k,
        stratified: cfg.stratified,
        resampler: cfg.resampler.name().into(),
        pool,
        spread: "population standard deviation across folds".into(),
    }
}

pub fn split_for(data: &DomainDataset, cfg: &CvConfig) -> Result<FoldSplit> {
    let seed = rng::derive(cfg.seed, "split");
    if cfg.stratified {
        stratified_kfold_split(&data.labels, cfg.k, seed)
    } else {
        kfold_split(data.len(), cfg.k, seed)
    }
}

/// k-fold cross-validation over the records that carry every feature of
/// `cfg.feature_set`. Folds run in parallel; results are merged by fold
/// index, so the report does not depend on scheduling.
pub fn run_cv(algorithm: &Algorithm, records: &[ComfortRecord], cfg: &CvConfig) -> Result<EvalReport> {
    run_cv_with_pool(algorithm, records, cfg, None)
}

/// As [`run_cv`], recording the source pool in the manifest.
pub fn run_cv_with_pool(
    algorithm: &Algorithm,
    records: &[ComfortRecord],
    cfg: &CvConfig,
    pool: Option<String>,
) -> Result<EvalReport> {
    let data = design_matrix(records, cfg)?;
    let split = split_for(&data, cfg)?;

    let present: BTreeSet<SensationClass> = data.labels.iter().copied().collect();
    let mut trained_on = BTreeSet::new();
    let mut notes = Vec::new();
    for f in 0..split.k() {
        let train_classes: BTreeSet<SensationClass> = split.train(f).iter().map(|&i| data.labels[i]).collect();
        for c in split.test(f).iter().map(|&i| data.labels[i]) {
            if !train_classes.contains(&c) {
                let msg = format!("fold {f}: class {c} occurs in the test rows but not in training");
                if !notes.contains(&msg) {
                    warn!("{msg}");
                    notes.push(msg);
                }
            }
        }
        trained_on.extend(train_classes);
    }
    if let Some(c) = present.difference(&trained_on).next() {
        return Err(Error::ClassAbsentFromTraining(c.value()));
    }

    let outcomes = (0..split.k())
        .into_par_iter()
        .map(|f| run_split(algorithm, records, &data, &split.train(f), split.test(f), cfg, f))
        .collect::<Result<Vec<_>>>()?;

    let mut confusion = ConfusionMatrix::default();
    let mut folds = Vec::with_capacity(outcomes.len());
    let mut audits = Vec::with_capacity(outcomes.len());
    for (f, o) in outcomes.into_iter().enumerate() {
        let cm = ConfusionMatrix::from_labels(&o.truth, &o.pred)?;
        confusion.add(&cm);
        folds.push(FoldResult {
            fold: f,
            n_train: o.n_train,
            n_test: o.truth.len(),
            accuracy: accuracy(&o.truth, &o.pred)?,
            weighted_f1: cm.weighted_f1(),
        });
        audits.push(o.audit);
        notes.extend(o.notes);
    }
    Ok(EvalReport {
        manifest: manifest(algorithm, cfg, pool),
        folds,
        confusion,
        audits,
        notes,
    })
}

/// Single train/test evaluation with the same per-fold pipeline.
#[derive(Debug, Clone)]
pub struct HoldoutResult {
    pub accuracy: f64,
    pub weighted_f1: f64,
    pub confusion: ConfusionMatrix,
    pub audit: FoldAudit,
}

pub fn run_holdout(
    algorithm: &Algorithm,
    train_records: &[ComfortRecord],
    test_records: &[ComfortRecord],
    cfg: &CvConfig,
) -> Result<HoldoutResult> {
    let mut all = train_records.to_vec();
    all.extend_from_slice(test_records);
    let data = design_matrix(&all, cfg)?;
    let n = train_records.len();
    let (train_rows, test_rows): (Vec<usize>, Vec<usize>) = (0..data.len())
        .partition(|&i| data.origins[i].record().is_some_and(|r| r < n));
    if train_rows.is_empty() || test_rows.is_empty() {
        return Err(Error::EmptyInput("holdout partition"));
    }
    let o = run_split(algorithm, &all, &data, &train_rows, &test_rows, cfg, 0)?;
    let confusion = ConfusionMatrix::from_labels(&o.truth, &o.pred)?;
    Ok(HoldoutResult {
        accuracy: accuracy(&o.truth, &o.pred)?,
        weighted_f1: confusion.weighted_f1(),
        confusion,
        audit: o.audit,
    })
}
