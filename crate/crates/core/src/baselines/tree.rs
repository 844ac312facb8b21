//! CART decision trees (Gini impurity) and bagged random forests.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::vote;
use crate::dataset::record::SensationClass;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{self, Rng};

type Counts = [usize; SensationClass::COUNT];

/// `1 - Σ p_k²`; zero for an empty node.
pub fn gini(counts: &Counts) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

/// Impurity decrease of splitting `parent` into `left` and `right`.
pub fn gini_gain(parent: &Counts, left: &Counts, right: &Counts) -> f64 {
    let n = parent.iter().sum::<usize>() as f64;
    let nl = left.iter().sum::<usize>() as f64;
    let nr = right.iter().sum::<usize>() as f64;
    gini(parent) - (nl / n) * gini(left) - (nr / n) * gini(right)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaxFeatures {
    All,
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::All => d,
            MaxFeatures::Sqrt => ((d as f64).sqrt() as usize).max(1),
            MaxFeatures::Count(n) => n.clamp(1, d.max(1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
    pub seed: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_split: 2,
            max_features: MaxFeatures::All,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(SensationClass),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    width: usize,
}

fn counts_of(labels: &[SensationClass], idx: &[usize]) -> Counts {
    let mut c = [0; SensationClass::COUNT];
    for &i in idx {
        c[labels[i].index()] += 1;
    }
    c
}

fn majority(counts: &Counts) -> SensationClass {
    SensationClass::from_index(crate::neural::argmax(&counts.map(|c| c as f64)))
}

struct Builder<'a> {
    x: &'a Matrix,
    labels: &'a [SensationClass],
    params: TreeParams,
    rng: Rng,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    /// Best `(gain, feature, threshold)` over the sampled features; keeps
    /// drawing features past the quota until a usable split appears.
    fn best_split(&mut self, idx: &[usize], parent: &Counts) -> Option<(f64, usize, f64)> {
        let d = self.x.cols();
        let quota = self.params.max_features.resolve(d);
        let mut features: Vec<usize> = (0..d).collect();
        if quota < d {
            features.shuffle(&mut self.rng);
        }
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted = idx.to_vec();
        for (tried, &f) in features.iter().enumerate() {
            if tried >= quota && best.is_some() {
                break;
            }
            sorted.sort_by(|&a, &b| self.x.get(a, f).total_cmp(&self.x.get(b, f)));
            let mut left = [0; SensationClass::COUNT];
            for w in 0..sorted.len() - 1 {
                left[self.labels[sorted[w]].index()] += 1;
                let (lo, hi) = (self.x.get(sorted[w], f), self.x.get(sorted[w + 1], f));
                if lo == hi {
                    continue;
                }
                let mut right = *parent;
                for k in 0..SensationClass::COUNT {
                    right[k] -= left[k];
                }
                let gain = gini_gain(parent, &left, &right);
                if best.is_none_or(|b| gain > b.0) {
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some((gain, f, threshold));
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let counts = counts_of(self.labels, &idx);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(majority(&counts)));
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_hit = self.params.max_depth.is_some_and(|m| depth >= m);
        if pure || depth_hit || idx.len() < self.params.min_samples_split.max(2) {
            return id;
        }
        let Some((_, feature, threshold)) = self.best_split(&idx, &counts) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| self.x.get(i, feature) <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

fn check_training(x: &Matrix, labels: &[SensationClass]) -> Result<()> {
    if x.rows() == 0 {
        return Err(Error::EmptyInput("tree training set"));
    }
    if x.rows() != labels.len() {
        return Err(Error::InvalidInput("row/label count mismatch".into()));
    }
    if !x.is_finite() {
        return Err(Error::NonFinite("tree training matrix".into()));
    }
    Ok(())
}

fn build_tree(x: &Matrix, labels: &[SensationClass], rows: Vec<usize>, params: TreeParams) -> DecisionTree {
    let mut b = Builder {
        x,
        labels,
        params,
        rng: rng::rng(rng::derive(params.seed, "tree")),
        nodes: Vec::new(),
    };
    b.grow(rows, 0);
    DecisionTree {
        nodes: b.nodes,
        width: x.cols(),
    }
}

pub fn fit_tree(x: &Matrix, labels: &[SensationClass], params: TreeParams) -> Result<DecisionTree> {
    check_training(x, labels)?;
    Ok(build_tree(x, labels, (0..x.rows()).collect(), params))
}

impl DecisionTree {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn predict_row(&self, row: &[f64]) -> SensationClass {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf(c) => return *c,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn predict(&self, q: &Matrix) -> Result<Vec<SensationClass>> {
        if q.cols() != self.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                actual: q.cols(),
            });
        }
        Ok(q.iter_rows().map(|r| self.predict_row(r)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub max_depth: Option<usize>,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            max_depth: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
}

/// Trees are grown in parallel, each from its own derived seed, so the
/// result does not depend on scheduling.
pub fn fit_forest(x: &Matrix, labels: &[SensationClass], params: ForestParams) -> Result<RandomForest> {
    check_training(x, labels)?;
    if params.n_trees == 0 {
        return Err(Error::Config("forest needs at least one tree".into()));
    }
    let n = x.rows();
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let seed = rng::derive_index(params.seed, "forest", t as u64);
            let rows = if params.bootstrap {
                let mut r = rng::rng(rng::derive(seed, "bootstrap"));
                (0..n).map(|_| r.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let tp = TreeParams {
                max_depth: params.max_depth,
                min_samples_split: 2,
                max_features: params.max_features,
                seed,
            };
            build_tree(x, labels, rows, tp)
        })
        .collect();
    Ok(RandomForest { trees })
}

impl RandomForest {
    /// Majority vote of the trees; ties go to the lowest class.
    pub fn predict(&self, q: &Matrix) -> Result<Vec<SensationClass>> {
        let per_tree = self
            .trees
            .iter()
            .map(|t| t.predict(q))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..q.rows())
            .map(|r| vote(per_tree.iter().map(|p| p[r])))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gini_of_even_pair() {
        assert_eq!(gini(&[2, 2, 0, 0, 0]), 0.5);
        assert_eq!(gini(&[0, 0, 4, 0, 0]), 0.0);
        assert_eq!(gini(&[0; 5]), 0.0);
    }

    #[test]
    fn sqrt_features() {
        assert_eq!(MaxFeatures::Sqrt.resolve(10), 3);
        assert_eq!(MaxFeatures::Sqrt.resolve(1), 1);
        assert_eq!(MaxFeatures::Count(50).resolve(4), 4);
    }
}
