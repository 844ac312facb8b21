//! Labeled design matrices with per-row provenance.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::record::{ComfortRecord, FeatureSet, SensationClass};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Where a training row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RowOrigin {
    /// Index into the record list the matrix was assembled from.
    Record(usize),
    /// Produced by a resampler.
    Synthetic,
}

impl RowOrigin {
    pub fn record(self) -> Option<usize> {
        match self {
            RowOrigin::Record(i) => Some(i),
            RowOrigin::Synthetic => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    Source,
    Target,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Source => "source",
            Domain::Target => "target",
        })
    }
}

/// Design matrix, labels, ordered feature names and row provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainDataset {
    pub x: Matrix,
    pub labels: Vec<SensationClass>,
    pub feature_names: Vec<String>,
    pub domain: Domain,
    pub origins: Vec<RowOrigin>,
}

impl DomainDataset {
    pub fn new(
        x: Matrix,
        labels: Vec<SensationClass>,
        feature_names: Vec<String>,
        domain: Domain,
    ) -> Result<Self> {
        let origins = (0..labels.len()).map(RowOrigin::Record).collect();
        Self::with_origins(x, labels, feature_names, domain, origins)
    }

    pub fn with_origins(
        x: Matrix,
        labels: Vec<SensationClass>,
        feature_names: Vec<String>,
        domain: Domain,
        origins: Vec<RowOrigin>,
    ) -> Result<Self> {
        if x.rows() != labels.len() || origins.len() != labels.len() {
            return Err(Error::InvalidInput(format!(
                "dataset shape: {} rows, {} labels, {} origins",
                x.rows(),
                labels.len(),
                origins.len()
            )));
        }
        if x.cols() != feature_names.len() {
            return Err(Error::InvalidInput(format!(
                "dataset width {} but {} feature names",
                x.cols(),
                feature_names.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for n in &feature_names {
            if !seen.insert(n) {
                return Err(Error::InvalidInput(format!("duplicate feature name `{n}`")));
            }
        }
        Ok(DomainDataset {
            x,
            labels,
            feature_names,
            domain,
            origins,
        })
    }

    /// Assemble the matrix for a feature set. Records missing any member
    /// are skipped; records are tagged with their index in `records`.
    pub fn from_records(records: &[ComfortRecord], set: &FeatureSet, domain: Domain) -> Result<Self> {
        let mut x = Matrix::empty(set.len());
        let mut labels = Vec::new();
        let mut origins = Vec::new();
        let mut row = vec![0.0; set.len()];
        for (i, r) in records.iter().enumerate() {
            if !r.has_all(set) {
                continue;
            }
            for (slot, &f) in row.iter_mut().zip(&set.members) {
                *slot = r.get(f).expect("checked by has_all");
            }
            x.push_row(&row);
            labels.push(r.sensation()?);
            origins.push(RowOrigin::Record(i));
        }
        Self::with_origins(x, labels, set.names(), domain, origins)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn width(&self) -> usize {
        self.x.cols()
    }

    pub fn subset(&self, rows: &[usize]) -> DomainDataset {
        DomainDataset {
            x: self.x.select_rows(rows),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            domain: self.domain,
            origins: rows.iter().map(|&i| self.origins[i]).collect(),
        }
    }

    /// Reorder / restrict columns to the given names.
    pub fn project(&self, names: &[String]) -> Result<DomainDataset> {
        let idx = names
            .iter()
            .map(|n| {
                self.feature_names
                    .iter()
                    .position(|m| m == n)
                    .ok_or_else(|| Error::FeatureAbsent(n.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DomainDataset {
            x: self.x.select_cols(&idx),
            labels: self.labels.clone(),
            feature_names: names.to_vec(),
            domain: self.domain,
            origins: self.origins.clone(),
        })
    }

    pub fn class_counts(&self) -> [usize; SensationClass::COUNT] {
        class_counts(&self.labels)
    }

    /// Record indices of non-synthetic rows.
    pub fn record_indices(&self) -> Vec<usize> {
        self.origins.iter().filter_map(|o| o.record()).collect()
    }
}

pub fn class_counts(labels: &[SensationClass]) -> [usize; SensationClass::COUNT] {
    let mut counts = [0; SensationClass::COUNT];
    for l in labels {
        counts[l.index()] += 1;
    }
    counts
}
