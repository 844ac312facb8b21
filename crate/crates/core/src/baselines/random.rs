//! Guessing from the empirical class distribution.

use rand::distributions::{Distribution, WeightedIndex};

use crate::dataset::record::SensationClass;
use crate::dataset::table::class_counts;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct RandomBaseline {
    pub counts: [usize; SensationClass::COUNT],
    pub seed: u64,
}

pub fn fit_random(labels: &[SensationClass], seed: u64) -> Result<RandomBaseline> {
    if labels.is_empty() {
        return Err(Error::EmptyInput("random baseline labels"));
    }
    Ok(RandomBaseline {
        counts: class_counts(labels),
        seed,
    })
}

impl RandomBaseline {
    /// `n` i.i.d. draws; the same model always yields the same sequence.
    pub fn predict_random(&self, n: usize) -> Vec<SensationClass> {
        let dist = WeightedIndex::new(self.counts).expect("fitted on non-empty labels");
        let mut r = rng::rng(rng::derive(self.seed, "random-baseline"));
        (0..n).map(|_| SensationClass::from_index(dist.sample(&mut r))).collect()
    }
}
