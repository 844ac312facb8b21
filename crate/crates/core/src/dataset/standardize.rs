//! Zero-mean / unit-variance scaling fitted on training rows only.

use serde::{Deserialize, Serialize};

use crate::dataset::record::{ComfortRecord, Feature, FeatureSet, FeatureSetTag};
use crate::dataset::table::{Domain, DomainDataset, RowOrigin};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Below this a column is treated as constant and its scale clamped to 1.
const DEGENERATE_STD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub feature_names: Vec<String>,
    pub tag: Option<FeatureSetTag>,
    pub mean: Vec<f64>,
    /// Population standard deviation, strictly positive.
    pub std: Vec<f64>,
    /// Provenance of the rows the statistics were computed from.
    #[serde(skip)]
    pub fitted_on: Vec<RowOrigin>,
}

impl Standardizer {
    /// Fit on every row of `data`.
    pub fn fit(data: &DomainDataset) -> Result<Self> {
        Self::fit_matrix(&data.x, data.feature_names.clone(), data.origins.clone())
    }

    pub fn fit_matrix(x: &Matrix, feature_names: Vec<String>, fitted_on: Vec<RowOrigin>) -> Result<Self> {
        if x.rows() == 0 {
            return Err(Error::EmptyInput("standardizer fit"));
        }
        if x.cols() != feature_names.len() {
            return Err(Error::InvalidInput("feature name count".into()));
        }
        let n = x.rows() as f64;
        let mut mean = vec![0.0; x.cols()];
        for row in x.iter_rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; x.cols()];
        for row in x.iter_rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd.is_finite() && sd > DEGENERATE_STD {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Standardizer {
            feature_names,
            tag: None,
            mean,
            std,
            fitted_on,
        })
    }

    pub fn transform_matrix(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.mean.len() {
            return Err(Error::WidthMismatch {
                expected: self.mean.len(),
                actual: x.cols(),
            });
        }
        let mut out = x.clone();
        for r in 0..out.rows() {
            for ((v, m), s) in out.row_mut(r).iter_mut().zip(&self.mean).zip(&self.std) {
                *v = (*v - m) / s;
            }
        }
        Ok(out)
    }

    pub fn inverse_matrix(&self, z: &Matrix) -> Result<Matrix> {
        if z.cols() != self.mean.len() {
            return Err(Error::WidthMismatch {
                expected: self.mean.len(),
                actual: z.cols(),
            });
        }
        let mut out = z.clone();
        for r in 0..out.rows() {
            for ((v, m), s) in out.row_mut(r).iter_mut().zip(&self.mean).zip(&self.std) {
                *v = *v * s + m;
            }
        }
        Ok(out)
    }

    /// Scaled copy of a dataset; labels and provenance are kept.
    pub fn transform(&self, data: &DomainDataset) -> Result<DomainDataset> {
        if data.feature_names != self.feature_names {
            return Err(Error::InvalidInput(format!(
                "standardizer fitted on [{}], applied to [{}]",
                self.feature_names.join(","),
                data.feature_names.join(",")
            )));
        }
        Ok(DomainDataset {
            x: self.transform_matrix(&data.x)?,
            ..data.clone()
        })
    }
}

/// Fit on the records that carry every member of `set`. Gender is encoded
/// numerically before scaling.
pub fn fit_standardizer(records: &[ComfortRecord], set: &FeatureSet) -> Result<Standardizer> {
    if records.is_empty() {
        return Err(Error::EmptyInput("standardizer fit"));
    }
    for &f in &set.members {
        if records.iter().all(|r| r.get(f).is_none()) {
            return Err(Error::FeatureAbsent(f.name().to_string()));
        }
    }
    let data = DomainDataset::from_records(records, set, Domain::Target)?;
    let mut s = Standardizer::fit(&data)?;
    s.tag = set.tag;
    Ok(s)
}

/// Scale the records that carry every feature the standardizer was fitted on.
pub fn apply_standardizer(standardizer: &Standardizer, records: &[ComfortRecord]) -> Result<DomainDataset> {
    let members = standardizer
        .feature_names
        .iter()
        .map(|n| n.parse::<Feature>())
        .collect::<Result<Vec<_>>>()?;
    let set = FeatureSet {
        tag: standardizer.tag,
        members,
    };
    let data = DomainDataset::from_records(records, &set, Domain::Target)?;
    standardizer.transform(&data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("f{i}")).collect()
    }

    #[test]
    fn two_point_case() {
        let x = Matrix::from_rows(&[vec![1.0], vec![3.0]]);
        let s = Standardizer::fit_matrix(&x, names(1), vec![]).unwrap();
        assert_eq!(s.mean, vec![2.0]);
        assert_eq!(s.std, vec![1.0]);
        let t = s.transform_matrix(&Matrix::from_rows(&[vec![3.0]])).unwrap();
        assert_eq!(t.get(0, 0), 1.0);
    }

    #[test]
    fn constant_column_is_clamped() {
        let x = Matrix::from_rows(&[vec![5.0], vec![5.0], vec![5.0]]);
        let s = Standardizer::fit_matrix(&x, names(1), vec![]).unwrap();
        assert_eq!(s.std, vec![1.0]);
        assert_eq!(s.transform_matrix(&x).unwrap().get(1, 0), 0.0);
    }

    #[test]
    fn empty_fit_errors() {
        assert!(matches!(
            Standardizer::fit_matrix(&Matrix::empty(2), names(2), vec![]),
            Err(Error::EmptyInput(_))
        ));
        assert!(fit_standardizer(&[], &FeatureSet::xa()).is_err());
    }

    #[test]
    fn width_mismatch_on_transform() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0]]);
        let s = Standardizer::fit_matrix(&x, names(2), vec![]).unwrap();
        assert!(s.transform_matrix(&Matrix::from_rows(&[vec![1.0]])).is_err());
    }
}
