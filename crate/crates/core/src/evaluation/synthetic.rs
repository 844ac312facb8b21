//! Synthetic multi-city scenario with a known teacher.
//!
//! Inputs are drawn per city in standardized units around a zone offset
//! plus a small city jitter, then mapped to physical units. Labels come
//! from a teacher whose linear part is shared across zones up to a
//! zone-specific perturbation, plus a fixed random ReLU network, cut into
//! five classes at quantiles of the target city's score distribution.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::record::{ClimateZone, ComfortRecord, FeatureSet, Gender, Ventilation};
use crate::error::{Error, Result};
use crate::rng;

/// Xc order: physical mean, scale and clamp range.
const PHYSICAL: [(f64, f64, f64, f64); 10] = [
    (24.0, 3.0, 10.0, 40.0),   // indoor_at
    (0.2, 0.15, 0.0, 3.0),     // indoor_av
    (50.0, 15.0, 5.0, 95.0),   // indoor_rh
    (24.0, 3.0, 10.0, 40.0),   // indoor_mrt
    (0.7, 0.25, 0.1, 2.5),     // clo
    (1.2, 0.2, 0.8, 3.0),      // met
    (40.0, 12.0, 18.0, 80.0),  // age
    (0.5, 0.5, 0.0, 1.0),      // gender
    (15.0, 10.0, -30.0, 45.0), // outdoor_at
    (60.0, 20.0, 5.0, 100.0),  // outdoor_rh
];
const D: usize = 10;
const GENDER: usize = 7;

/// Baseline teacher weights in Xc order.
const BASE_WEIGHTS: [f64; D] = [1.0, -0.4, 0.25, 0.8, 0.5, 0.5, -0.45, -0.2, 0.3, 0.1];

/// Cumulative class proportions of the target city.
const CLASS_QUANTILES: [f64; 4] = [0.08, 0.25, 0.72, 0.90];

fn zone_offset(zone: ClimateZone) -> [f64; D] {
    let mut o = [0.0; D];
    match zone {
        ClimateZone::A => {
            o[0] = 0.3;
            o[2] = 0.5;
            o[8] = 1.5;
            o[9] = 1.0;
        }
        ClimateZone::B => {
            o[2] = -0.6;
            o[8] = 1.0;
            o[9] = -1.2;
        }
        ClimateZone::C => {}
        ClimateZone::D => {
            o[0] = -0.3;
            o[4] = 0.5;
            o[8] = -1.3;
        }
        ClimateZone::E => {
            o[0] = -0.5;
            o[4] = 1.0;
            o[8] = -2.5;
        }
    }
    o
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub zones: Vec<ClimateZone>,
    pub cities_per_zone: usize,
    pub source_rows: usize,
    pub target_zone: ClimateZone,
    pub target_train: usize,
    pub target_test: usize,
    /// Probability that a label moves one class up or down.
    pub label_noise: f64,
    /// Size of the zone-specific teacher perturbation.
    pub concept_shift: f64,
    /// Weight of the random ReLU part of the teacher.
    pub nonlinearity: f64,
    /// Per-city offset spread, standardized units.
    pub city_jitter: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            zones: vec![ClimateZone::A, ClimateZone::B, ClimateZone::C, ClimateZone::D],
            cities_per_zone: 2,
            source_rows: 5000,
            target_zone: ClimateZone::C,
            target_train: 300,
            target_test: 1000,
            label_noise: 0.1,
            concept_shift: 0.6,
            nonlinearity: 1.0,
            city_jitter: 0.2,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.zones.is_empty() || self.cities_per_zone == 0 {
            return Err(Error::Config("scenario needs at least one source city".into()));
        }
        if self.source_rows < self.zones.len() * self.cities_per_zone || self.target_train == 0 {
            return Err(Error::Config("scenario row counts too small".into()));
        }
        if !(0.0..=1.0).contains(&self.label_noise) {
            return Err(Error::Config(format!("label noise {} outside [0, 1]", self.label_noise)));
        }
        Ok(())
    }
}

/// Random ReLU net `10 → 16 → 16 → 1` plus a linear term. Both the
/// first layer and the linear weights carry a zone-specific perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Teacher {
    w2: Vec<Vec<f64>>,
    w3: Vec<f64>,
    nonlinearity: f64,
    /// Per zone: linear weights and first-layer weights.
    zones: Vec<(ClimateZone, [f64; D], Vec<Vec<f64>>)>,
    pub thresholds: [f64; 4],
}

impl Teacher {
    fn draw(spec: &SyntheticSpec, seed: u64) -> Self {
        let mut r = rng::rng(rng::derive(seed, "teacher"));
        let w1 = gaussian_layer(&mut r, D, HIDDEN);
        let w2 = gaussian_layer(&mut r, HIDDEN, HIDDEN);
        let w3 = gaussian_layer(&mut r, HIDDEN, 1).remove(0);
        let mut zones = spec.zones.clone();
        if !zones.contains(&spec.target_zone) {
            zones.push(spec.target_zone);
        }
        let zones = zones
            .iter()
            .map(|&z| {
                let mut zr = rng::rng(rng::derive_index(seed, "teacher-zone", z as u64));
                let mut lin = BASE_WEIGHTS;
                for v in &mut lin {
                    *v += spec.concept_shift * zr.sample::<f64, _>(StandardNormal);
                }
                let delta = gaussian_layer(&mut zr, D, HIDDEN);
                let first = w1
                    .iter()
                    .zip(&delta)
                    .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + spec.concept_shift * y).collect())
                    .collect();
                (z, lin, first)
            })
            .collect();
        Teacher {
            w2,
            w3,
            nonlinearity: spec.nonlinearity,
            zones,
            thresholds: [0.0; 4],
        }
    }

    /// Continuous comfort score of standardized inputs under `zone`'s rule.
    pub fn score(&self, z: &[f64], zone: ClimateZone) -> f64 {
        let (_, lin, w1) = self.zones.iter().find(|(c, ..)| *c == zone).expect("zone drawn");
        let relu = |v: f64| v.max(0.0);
        let h1: Vec<f64> = w1.iter().map(|w| relu(dot(w, z))).collect();
        let h2: Vec<f64> = self.w2.iter().map(|w| relu(dot(w, &h1))).collect();
        dot(lin, z) + self.nonlinearity * dot(&self.w3, &h2)
    }

    /// Noiseless class in `-2..=2`.
    pub fn classify(&self, z: &[f64], zone: ClimateZone) -> i8 {
        let s = self.score(z, zone);
        self.thresholds.iter().filter(|&&t| s > t).count() as i8 - 2
    }
}

const HIDDEN: usize = 16;

/// He-scaled Gaussian weights, one row per output unit.
fn gaussian_layer(r: &mut rng::Rng, fan_in: usize, fan_out: usize) -> Vec<Vec<f64>> {
    let sd = (2.0 / fan_in as f64).sqrt();
    (0..fan_out)
        .map(|_| (0..fan_in).map(|_| sd * r.sample::<f64, _>(StandardNormal)).collect())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScenario {
    pub source: Vec<ComfortRecord>,
    pub target_train: Vec<ComfortRecord>,
    pub target_test: Vec<ComfortRecord>,
    /// City name and zone of every source city, then the target city.
    pub cities: Vec<(String, ClimateZone)>,
    pub teacher: Teacher,
    /// Noiseless classes of `target_test`.
    pub target_test_clean: Vec<i8>,
}

struct City {
    name: String,
    zone: ClimateZone,
    offset: [f64; D],
}

impl City {
    fn draw_z(&self, r: &mut rng::Rng) -> [f64; D] {
        let mut z = [0.0; D];
        for (i, v) in z.iter_mut().enumerate() {
            *v = self.offset[i] + r.sample::<f64, _>(StandardNormal);
        }
        z[GENDER] = if r.gen_bool(0.5) { 1.0 } else { -1.0 };
        // Clamp in physical units and return to standardized ones.
        for (i, v) in z.iter_mut().enumerate() {
            let (m, s, lo, hi) = PHYSICAL[i];
            *v = ((m + s * *v).clamp(lo, hi) - m) / s;
        }
        z
    }
}

fn record(z: &[f64; D], class: i8, city: &City, dataset_id: &str) -> ComfortRecord {
    let raw = |i: usize| PHYSICAL[i].0 + PHYSICAL[i].1 * z[i];
    ComfortRecord {
        indoor_at: raw(0),
        indoor_av: raw(1),
        indoor_rh: raw(2),
        indoor_mrt: raw(3),
        clo: Some(raw(4)),
        met: Some(raw(5)),
        age: Some(raw(6)),
        gender: if z[GENDER] > 0.0 { Gender::Female } else { Gender::Male },
        outdoor_at: Some(raw(8)),
        outdoor_rh: Some(raw(9)),
        raw_vote: f64::from(class),
        city: city.name.clone(),
        climate_zone: Some(city.zone),
        ventilation: Ventilation::Hvac,
        dataset_id: dataset_id.into(),
    }
}

/// Standardized Xc vector of a scenario record (inverse of the generator).
pub fn standardized_inputs(r: &ComfortRecord) -> Result<[f64; D]> {
    let set = FeatureSet::xc();
    let mut z = [0.0; D];
    for (i, f) in set.members.iter().enumerate() {
        let v = r.get(*f).ok_or_else(|| Error::InvalidInput(format!("record lacks `{f}`")))?;
        z[i] = (v - PHYSICAL[i].0) / PHYSICAL[i].1;
    }
    Ok(z)
}

fn noisy(class: i8, noise: f64, r: &mut rng::Rng) -> i8 {
    if r.gen_bool(noise) {
        let step = if r.gen_bool(0.5) { 1 } else { -1 };
        (class + step).clamp(-2, 2)
    } else {
        class
    }
}

pub fn generate_synthetic_scenario(spec: &SyntheticSpec, seed: u64) -> Result<SyntheticScenario> {
    spec.validate()?;
    let mut teacher = Teacher::draw(spec, seed);
    let mut r = rng::rng(rng::derive(seed, "cities"));
    let jitter = Normal::new(0.0, spec.city_jitter.max(0.0)).map_err(|e| Error::Config(e.to_string()))?;
    let mut cities = Vec::new();
    for &zone in &spec.zones {
        for c in 0..spec.cities_per_zone {
            let mut offset = zone_offset(zone);
            offset.iter_mut().for_each(|v| *v += jitter.sample(&mut r));
            cities.push(City {
                name: format!("{zone}{}", c + 1),
                zone,
                offset,
            });
        }
    }
    let mut target_offset = zone_offset(spec.target_zone);
    target_offset.iter_mut().for_each(|v| *v += jitter.sample(&mut r));
    let target = City {
        name: format!("{}-target", spec.target_zone),
        zone: spec.target_zone,
        offset: target_offset,
    };

    // Thresholds from a large reference draw of the target city.
    let mut reference: Vec<f64> = {
        let mut rr = rng::rng(rng::derive(seed, "reference"));
        (0..20_000)
            .map(|_| teacher.score(&target.draw_z(&mut rr), target.zone))
            .collect()
    };
    reference.sort_by(f64::total_cmp);
    for (t, q) in teacher.thresholds.iter_mut().zip(CLASS_QUANTILES) {
        *t = reference[((reference.len() as f64) * q) as usize];
    }

    let mut source = Vec::with_capacity(spec.source_rows);
    let mut sr = rng::rng(rng::derive(seed, "source-rows"));
    let per_city = spec.source_rows / cities.len();
    let extra = spec.source_rows % cities.len();
    for (ci, city) in cities.iter().enumerate() {
        for _ in 0..per_city + usize::from(ci < extra) {
            let z = city.draw_z(&mut sr);
            let c = noisy(teacher.classify(&z, city.zone), spec.label_noise, &mut sr);
            source.push(record(&z, c, city, "synthetic-source"));
        }
    }

    let mut tr = rng::rng(rng::derive(seed, "target-rows"));
    let mut target_train = Vec::with_capacity(spec.target_train);
    for _ in 0..spec.target_train {
        let z = target.draw_z(&mut tr);
        let c = noisy(teacher.classify(&z, target.zone), spec.label_noise, &mut tr);
        target_train.push(record(&z, c, &target, "synthetic-target"));
    }
    let mut target_test = Vec::with_capacity(spec.target_test);
    let mut target_test_clean = Vec::with_capacity(spec.target_test);
    for _ in 0..spec.target_test {
        let z = target.draw_z(&mut tr);
        let clean = teacher.classify(&z, target.zone);
        target_test_clean.push(clean);
        target_test.push(record(&z, noisy(clean, spec.label_noise, &mut tr), &target, "synthetic-target"));
    }

    let mut listed: Vec<(String, ClimateZone)> = cities.iter().map(|c| (c.name.clone(), c.zone)).collect();
    listed.push((target.name.clone(), target.zone));
    Ok(SyntheticScenario {
        source,
        target_train,
        target_test,
        cities: listed,
        teacher,
        target_test_clean,
    })
}

/// Distance between the feature means of `a` and `b`, in units of `b`'s
/// per-feature standard deviation.
pub fn mean_shift_distance(a: &[ComfortRecord], b: &[ComfortRecord], set: &FeatureSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("mean-shift samples"));
    }
    let mut total = 0.0;
    for &f in &set.members {
        let col = |rs: &[ComfortRecord]| -> Result<Vec<f64>> {
            rs.iter()
                .map(|r| r.get(f).ok_or_else(|| Error::InvalidInput(format!("record lacks `{f}`"))))
                .collect()
        };
        let (xa, xb) = (col(a)?, col(b)?);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (ma, mb) = (mean(&xa), mean(&xb));
        let sd = (xb.iter().map(|v| (v - mb).powi(2)).sum::<f64>() / xb.len() as f64).sqrt();
        let d = (ma - mb) / sd.max(1e-12);
        total += d * d;
    }
    Ok(total.sqrt())
}
