//! Seeded k-fold partitions.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::record::SensationClass;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub folds: Vec<Vec<usize>>,
    pub seed: u64,
}

impl FoldSplit {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    pub fn test(&self, fold: usize) -> &[usize] {
        &self.folds[fold]
    }

    /// Every index outside `fold`, ascending.
    pub fn train(&self, fold: usize) -> Vec<usize> {
        let mut t: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != fold)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        t.sort_unstable();
        t
    }
}

fn check(n: usize, k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::Config(format!("k = {k}; need at least 2 folds")));
    }
    if n < k {
        return Err(Error::TooFewRows { needed: k, have: n });
    }
    Ok(())
}

/// Shuffle `0..n` and deal it into `k` contiguous folds whose sizes differ
/// by at most one.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<FoldSplit> {
    check(n, k)?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::rng(rng::derive(seed, "kfold")));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        let mut fold = idx[start..start + len].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += len;
    }
    Ok(FoldSplit { folds, seed })
}

/// Class-preserving variant: each class is shuffled and dealt round-robin,
/// continuing from where the previous class stopped.
pub fn stratified_kfold_split(labels: &[SensationClass], k: usize, seed: u64) -> Result<FoldSplit> {
    check(labels.len(), k)?;
    let mut r = rng::rng(rng::derive(seed, "stratified-kfold"));
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for class in SensationClass::ALL {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut r);
        for i in members {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(FoldSplit { folds, seed })
}
