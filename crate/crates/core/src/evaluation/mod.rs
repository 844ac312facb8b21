//! Cross-validation, metrics and experiment suites.

pub mod cv;
pub mod experiments;
pub mod folds;
pub mod metrics;
pub mod synthetic;

pub use cv::{
    run_cv, run_cv_with_pool, run_holdout, split_for, Algorithm, CvConfig, EvalReport, FoldAudit, FoldResult,
    HoldoutResult, ReportManifest,
};
pub use experiments::{
    run_feature_ablation, run_hidden_layer_sweep, run_transfer_benefit, summary_csv, BenefitConfig, BenefitRow,
    BenefitSummary, SummaryRow,
};
pub use folds::{kfold_split, stratified_kfold_split, FoldSplit};
pub use metrics::{accuracy, mean_std, weighted_f1, ConfusionMatrix};
pub use synthetic::{generate_synthetic_scenario, mean_shift_distance, SyntheticScenario, SyntheticSpec, Teacher};
