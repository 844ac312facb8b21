//! Non-transfer comparison classifiers.

pub mod knn;
pub mod nb;
pub mod random;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::record::SensationClass;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use knn::{brute_force_nearest, fit_knn, KdTree, KnnModel, DEFAULT_K};
pub use nb::{fit_nb, GaussianNb, VARIANCE_FLOOR};
pub use random::{fit_random, RandomBaseline};
pub use tree::{fit_forest, fit_tree, gini, gini_gain, DecisionTree, ForestParams, MaxFeatures, RandomForest, TreeParams};

/// Most frequent class; ties go to the lowest.
pub fn vote(labels: impl IntoIterator<Item = SensationClass>) -> SensationClass {
    let mut counts = [0.0; SensationClass::COUNT];
    for l in labels {
        counts[l.index()] += 1.0;
    }
    SensationClass::from_index(crate::neural::argmax(&counts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Random,
    Knn,
    Nb,
    Tree,
    Forest,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 5] = [
        BaselineKind::Random,
        BaselineKind::Knn,
        BaselineKind::Nb,
        BaselineKind::Tree,
        BaselineKind::Forest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BaselineKind::Random => "random",
            BaselineKind::Knn => "knn",
            BaselineKind::Nb => "nb",
            BaselineKind::Tree => "tree",
            BaselineKind::Forest => "forest",
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BaselineKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BaselineKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown baseline `{s}`")))
    }
}

/// Hyperparameters shared by every baseline kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineParams {
    pub k: usize,
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub seed: u64,
}

impl Default for BaselineParams {
    fn default() -> Self {
        BaselineParams {
            k: DEFAULT_K,
            n_trees: 100,
            max_depth: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub enum BaselineModel {
    Random(RandomBaseline),
    Knn(KnnModel),
    Nb(GaussianNb),
    Tree(DecisionTree),
    Forest(RandomForest),
}

impl BaselineModel {
    pub fn fit(kind: BaselineKind, x: &Matrix, labels: &[SensationClass], params: &BaselineParams) -> Result<Self> {
        Ok(match kind {
            BaselineKind::Random => BaselineModel::Random(fit_random(labels, params.seed)?),
            BaselineKind::Knn => BaselineModel::Knn(fit_knn(x, labels, params.k)?),
            BaselineKind::Nb => BaselineModel::Nb(fit_nb(x, labels)?),
            BaselineKind::Tree => BaselineModel::Tree(fit_tree(
                x,
                labels,
                TreeParams {
                    max_depth: params.max_depth,
                    seed: params.seed,
                    ..Default::default()
                },
            )?),
            BaselineKind::Forest => BaselineModel::Forest(fit_forest(
                x,
                labels,
                ForestParams {
                    n_trees: params.n_trees,
                    max_depth: params.max_depth,
                    seed: params.seed,
                    ..Default::default()
                },
            )?),
        })
    }

    pub fn kind(&self) -> BaselineKind {
        match self {
            BaselineModel::Random(_) => BaselineKind::Random,
            BaselineModel::Knn(_) => BaselineKind::Knn,
            BaselineModel::Nb(_) => BaselineKind::Nb,
            BaselineModel::Tree(_) => BaselineKind::Tree,
            BaselineModel::Forest(_) => BaselineKind::Forest,
        }
    }

    pub fn predict(&self, q: &Matrix) -> Result<Vec<SensationClass>> {
        match self {
            BaselineModel::Random(m) => Ok(m.predict_random(q.rows())),
            BaselineModel::Knn(m) => m.predict_knn(q),
            BaselineModel::Nb(m) => m.predict_nb(q),
            BaselineModel::Tree(m) => m.predict(q),
            BaselineModel::Forest(m) => m.predict(q),
        }
    }
}
