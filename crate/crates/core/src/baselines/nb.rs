//! Gaussian naive Bayes.

use std::f64::consts::PI;

use crate::dataset::record::SensationClass;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNb {
    /// Classes seen in training, ascending.
    pub classes: Vec<SensationClass>,
    pub log_prior: Vec<f64>,
    pub mean: Vec<Vec<f64>>,
    pub var: Vec<Vec<f64>>,
}

pub fn fit_nb(x: &Matrix, labels: &[SensationClass]) -> Result<GaussianNb> {
    if x.rows() == 0 {
        return Err(Error::EmptyInput("naive Bayes training set"));
    }
    if x.rows() != labels.len() {
        return Err(Error::InvalidInput("row/label count mismatch".into()));
    }
    let mut classes: Vec<SensationClass> = labels.to_vec();
    classes.sort();
    classes.dedup();
    let d = x.cols();
    let mut log_prior = Vec::new();
    let mut mean = Vec::new();
    let mut var = Vec::new();
    for &c in &classes {
        let rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        let n = rows.len() as f64;
        log_prior.push((n / labels.len() as f64).ln());
        let m: Vec<f64> = (0..d)
            .map(|j| rows.iter().map(|&i| x.get(i, j)).sum::<f64>() / n)
            .collect();
        let v: Vec<f64> = (0..d)
            .map(|j| {
                let s = rows.iter().map(|&i| (x.get(i, j) - m[j]).powi(2)).sum::<f64>() / n;
                s.max(VARIANCE_FLOOR)
            })
            .collect();
        mean.push(m);
        var.push(v);
    }
    Ok(GaussianNb {
        classes,
        log_prior,
        mean,
        var,
    })
}

impl GaussianNb {
    /// Unnormalized log-posterior per training class.
    pub fn log_posterior(&self, row: &[f64]) -> Vec<f64> {
        (0..self.classes.len())
            .map(|k| {
                self.log_prior[k]
                    + row
                        .iter()
                        .zip(&self.mean[k])
                        .zip(&self.var[k])
                        .map(|((x, m), v)| -0.5 * (2.0 * PI * v).ln() - (x - m).powi(2) / (2.0 * v))
                        .sum::<f64>()
            })
            .collect()
    }

    pub fn predict_nb(&self, q: &Matrix) -> Result<Vec<SensationClass>> {
        let d = self.mean.first().map_or(0, Vec::len);
        if q.cols() != d {
            return Err(Error::WidthMismatch {
                expected: d,
                actual: q.cols(),
            });
        }
        Ok(q.iter_rows()
            .map(|row| self.classes[crate::neural::argmax(&self.log_posterior(row))])
            .collect())
    }
}
