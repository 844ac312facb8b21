//! Descriptive statistics: class distribution, per-feature ranges and
//! per-class air-temperature quartiles (boxplot data).

use crate::dataset::record::{ComfortRecord, Feature, SensationClass};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Stats {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl Stats {
    /// `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Stats {
            count: v.len(),
            min: v[0],
            q1: quantile_sorted(&v, 0.25),
            median: quantile_sorted(&v, 0.5),
            q3: quantile_sorted(&v, 0.75),
            max: v[v.len() - 1],
            mean: v.iter().sum::<f64>() / v.len() as f64,
        })
    }
}

/// Linear-interpolation quantile of sorted, non-empty data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSummary {
    pub records: usize,
    pub class_counts: [usize; SensationClass::COUNT],
    pub features: Vec<(Feature, Option<Stats>)>,
    pub indoor_at_by_class: Vec<(SensationClass, Option<Stats>)>,
}

pub fn summarize_dataset(records: &[ComfortRecord]) -> Result<DatasetSummary> {
    if records.is_empty() {
        return Err(Error::EmptyInput("summarize"));
    }
    let mut class_counts = [0usize; SensationClass::COUNT];
    let mut by_class: Vec<Vec<f64>> = vec![Vec::new(); SensationClass::COUNT];
    for r in records {
        let c = r.sensation()?;
        class_counts[c.index()] += 1;
        by_class[c.index()].push(r.indoor_at);
    }
    let features = Feature::ALL
        .iter()
        .map(|&f| {
            let vals: Vec<f64> = records.iter().filter_map(|r| r.get(f)).collect();
            (f, Stats::of(&vals))
        })
        .collect();
    let indoor_at_by_class = SensationClass::ALL
        .iter()
        .map(|&c| (c, Stats::of(&by_class[c.index()])))
        .collect();
    Ok(DatasetSummary {
        records: records.len(),
        class_counts,
        features,
        indoor_at_by_class,
    })
}

impl DatasetSummary {
    pub fn count(&self, c: SensationClass) -> usize {
        self.class_counts[c.index()]
    }

    pub fn feature(&self, f: Feature) -> Option<&Stats> {
        self.features
            .iter()
            .find(|(g, _)| *g == f)
            .and_then(|(_, s)| s.as_ref())
    }

    /// Long CSV: `section,name,count,min,q1,median,q3,max,mean`. Class rows
    /// fill only `count`; statistics for absent features are left blank.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["section", "name", "count", "min", "q1", "median", "q3", "max", "mean"])?;
        w.write_record(["records", "all", &self.records.to_string(), "", "", "", "", "", ""])?;
        for c in SensationClass::ALL {
            w.write_record([
                "class",
                &c.to_string(),
                &self.count(c).to_string(),
                "",
                "",
                "",
                "",
                "",
                "",
            ])?;
        }
        let stat_row = |section: &str, name: String, s: &Option<Stats>| -> Vec<String> {
            match s {
                Some(s) => vec![
                    section.into(),
                    name,
                    s.count.to_string(),
                    s.min.to_string(),
                    s.q1.to_string(),
                    s.median.to_string(),
                    s.q3.to_string(),
                    s.max.to_string(),
                    s.mean.to_string(),
                ],
                None => {
                    let mut v = vec![section.into(), name, "0".into()];
                    v.extend(std::iter::repeat_n(String::new(), 6));
                    v
                }
            }
        };
        for (f, s) in &self.features {
            w.write_record(stat_row("feature", f.name().to_string(), s))?;
        }
        for (c, s) in &self.indoor_at_by_class {
            w.write_record(stat_row("indoor_at_by_class", c.to_string(), s))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidInput(format!("csv buffer: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
