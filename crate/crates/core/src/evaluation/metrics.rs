//! Accuracy, support-weighted F1 and confusion matrices.

use serde::{Deserialize, Serialize};

use crate::dataset::record::SensationClass;
use crate::error::{Error, Result};

const K: usize = SensationClass::COUNT;

fn check(truth: &[SensationClass], pred: &[SensationClass]) -> Result<()> {
    if truth.is_empty() {
        return Err(Error::EmptyInput("metric input"));
    }
    if truth.len() != pred.len() {
        return Err(Error::InvalidInput(format!(
            "{} true labels but {} predictions",
            truth.len(),
            pred.len()
        )));
    }
    Ok(())
}

/// Percentage of exact matches.
pub fn accuracy(truth: &[SensationClass], pred: &[SensationClass]) -> Result<f64> {
    check(truth, pred)?;
    let hits = truth.iter().zip(pred).filter(|(a, b)| a == b).count();
    Ok(100.0 * hits as f64 / truth.len() as f64)
}

/// Per-class F1 averaged with weights equal to true support, in percent.
/// Undefined precision or recall counts as 0.
pub fn weighted_f1(truth: &[SensationClass], pred: &[SensationClass]) -> Result<f64> {
    check(truth, pred)?;
    Ok(ConfusionMatrix::from_labels(truth, pred)?.weighted_f1())
}

/// Rows are true classes, columns predictions, both in `-2..=+2` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[usize; K]; K],
}

impl ConfusionMatrix {
    pub fn from_labels(truth: &[SensationClass], pred: &[SensationClass]) -> Result<Self> {
        if truth.len() != pred.len() {
            return Err(Error::InvalidInput("label length mismatch".into()));
        }
        let mut m = ConfusionMatrix::default();
        for (t, p) in truth.iter().zip(pred) {
            m.counts[t.index()][p.index()] += 1;
        }
        Ok(m)
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        for i in 0..K {
            for j in 0..K {
                self.counts[i][j] += other.counts[i][j];
            }
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn support(&self, class: usize) -> usize {
        self.counts[class].iter().sum()
    }

    pub fn predicted(&self, class: usize) -> usize {
        self.counts.iter().map(|r| r[class]).sum()
    }

    pub fn f1(&self, class: usize) -> f64 {
        let tp = self.counts[class][class] as f64;
        let (pred, sup) = (self.predicted(class) as f64, self.support(class) as f64);
        if pred == 0.0 || sup == 0.0 || tp == 0.0 {
            return 0.0;
        }
        let (p, r) = (tp / pred, tp / sup);
        2.0 * p * r / (p + r)
    }

    pub fn weighted_f1(&self) -> f64 {
        let n = self.total();
        if n == 0 {
            return 0.0;
        }
        let s: f64 = (0..K).map(|c| self.support(c) as f64 * self.f1(c)).sum();
        100.0 * s / n as f64
    }

    pub fn accuracy(&self) -> f64 {
        let n = self.total();
        if n == 0 {
            return 0.0;
        }
        100.0 * (0..K).map(|c| self.counts[c][c]).sum::<usize>() as f64 / n as f64
    }

    /// Row-normalized proportions. Rows without support are all zeros and
    /// their class is listed in the second element.
    pub fn normalized(&self) -> ([[f64; K]; K], Vec<SensationClass>) {
        let mut out = [[0.0; K]; K];
        let mut empty = Vec::new();
        for (i, row) in self.counts.iter().enumerate() {
            let s = self.support(i);
            if s == 0 {
                empty.push(SensationClass::from_index(i));
                continue;
            }
            for j in 0..K {
                out[i][j] = row[j] as f64 / s as f64;
            }
        }
        (out, empty)
    }

    /// Matrix CSV: header of predicted classes, one row per true class.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("true\\pred");
        for c in SensationClass::ALL {
            s.push_str(&format!(",{c}"));
        }
        s.push('\n');
        for (i, row) in self.counts.iter().enumerate() {
            s.push_str(&SensationClass::from_index(i).to_string());
            for v in row {
                s.push_str(&format!(",{v}"));
            }
            s.push('\n');
        }
        s
    }

    /// Plot-ready long format: `true,pred,count,proportion`.
    pub fn to_long_csv(&self) -> String {
        let (norm, _) = self.normalized();
        let mut s = String::from("true,pred,count,proportion\n");
        for i in 0..K {
            for j in 0..K {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    SensationClass::from_index(i),
                    SensationClass::from_index(j),
                    self.counts[i][j],
                    norm[i][j]
                ));
            }
        }
        s
    }
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    let v = values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    (m, v.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: &[i8]) -> Vec<SensationClass> {
        v.iter().map(|&x| SensationClass::new(x).unwrap()).collect()
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&c(&[0, 1, 2]), &c(&[0, 1, 2])).unwrap(), 100.0);
        assert_eq!(accuracy(&c(&[0, 1]), &c(&[1, 0])).unwrap(), 0.0);
        let a = accuracy(&c(&[0, 0, 1]), &c(&[0, 0, 0])).unwrap();
        assert!((a - 66.6667).abs() < 1e-3);
        assert!(accuracy(&[], &[]).is_err());
    }

    #[test]
    fn weighted_f1_example() {
        let f = weighted_f1(&c(&[0, 0, 1]), &c(&[0, 0, 0])).unwrap();
        assert!((f - 160.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn normalized_flags_empty_rows() {
        let m = ConfusionMatrix::from_labels(&c(&[0, 0, 1]), &c(&[0, 1, 1])).unwrap();
        let (n, empty) = m.normalized();
        assert_eq!(n[2], [0.0, 0.0, 0.5, 0.5, 0.0]);
        assert_eq!(n[3], [0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(empty.len(), 3);
        assert_eq!(n[0], [0.0; 5]);
    }

    #[test]
    fn population_std() {
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!((m, s), (2.0, 1.0));
    }
}
