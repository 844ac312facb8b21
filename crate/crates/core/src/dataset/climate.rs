//! City → climate-zone enrichment and source-pool filters.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use log::warn;
use serde::Deserialize;

use crate::dataset::record::{ClimateZone, ComfortRecord, Ventilation};
use crate::error::{Error, Result};

const BUNDLED_TABLE: &str = include_str!("../../data/city_zones.toml");

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    cities: BTreeMap<String, String>,
}

/// Case-insensitive city → Köppen main group lookup.
#[derive(Debug, Clone, Default)]
pub struct CityZoneTable {
    entries: BTreeMap<String, ClimateZone>,
}

fn normalize(city: &str) -> String {
    city.trim().to_lowercase()
}

impl CityZoneTable {
    /// Table shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_toml_str(BUNDLED_TABLE).expect("bundled zone table parses")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: TableFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("zone table: {e}")))?;
        let mut entries = BTreeMap::new();
        for (city, zone) in file.cities {
            let key = normalize(&city);
            let zone: ClimateZone = zone.parse()?;
            if let Some(prev) = entries.insert(key, zone) {
                if prev != zone {
                    return Err(Error::Config(format!("city `{city}` listed with two zones")));
                }
            }
        }
        Ok(CityZoneTable { entries })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn insert(&mut self, city: &str, zone: ClimateZone) {
        self.entries.insert(normalize(city), zone);
    }

    /// Entries of `other` take precedence.
    pub fn extend(&mut self, other: &CityZoneTable) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), *v);
        }
    }

    pub fn lookup(&self, city: &str) -> Option<ClimateZone> {
        self.entries.get(&normalize(city)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnrichReport {
    /// Records left without a zone.
    pub unknown: usize,
    pub unknown_cities: BTreeSet<String>,
}

/// Fill `climate_zone` from the table. Zones already recorded by the
/// dataset are kept; records from unknown cities stay zone-less (and are
/// counted) but are not removed.
pub fn enrich_climate(records: &mut [ComfortRecord], table: &CityZoneTable) -> EnrichReport {
    let mut report = EnrichReport::default();
    for r in records.iter_mut() {
        if r.climate_zone.is_some() {
            continue;
        }
        r.climate_zone = table.lookup(&r.city);
        if r.climate_zone.is_none() {
            report.unknown += 1;
            report.unknown_cities.insert(r.city.clone());
        }
    }
    if report.unknown > 0 {
        warn!(
            "{} records from {} cities without a climate zone",
            report.unknown,
            report.unknown_cities.len()
        );
    }
    report
}

/// Conjunction of optional ventilation and zone predicates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PoolFilter {
    pub ventilation: Option<Ventilation>,
    pub zone: Option<ClimateZone>,
}

impl PoolFilter {
    pub fn hvac() -> Self {
        PoolFilter {
            ventilation: Some(Ventilation::Hvac),
            zone: None,
        }
    }

    pub fn hvac_in(zone: ClimateZone) -> Self {
        PoolFilter {
            ventilation: Some(Ventilation::Hvac),
            zone: Some(zone),
        }
    }

    pub fn matches(&self, r: &ComfortRecord) -> bool {
        self.ventilation.is_none_or(|v| r.ventilation == v)
            && self.zone.is_none_or(|z| r.climate_zone == Some(z))
    }

    /// Filter equivalent to applying `self` then `other`; `None` when the
    /// two predicates contradict each other.
    pub fn and(&self, other: &PoolFilter) -> Option<PoolFilter> {
        fn join<T: PartialEq + Copy>(a: Option<T>, b: Option<T>) -> Option<Option<T>> {
            match (a, b) {
                (Some(x), Some(y)) if x != y => None,
                (Some(x), _) | (_, Some(x)) => Some(Some(x)),
                (None, None) => Some(None),
            }
        }
        Some(PoolFilter {
            ventilation: join(self.ventilation, other.ventilation)?,
            zone: join(self.zone, other.zone)?,
        })
    }
}

/// Records matching every supplied predicate, in input order.
pub fn filter_pool(records: &[ComfortRecord], filter: &PoolFilter) -> Vec<ComfortRecord> {
    records.iter().filter(|r| filter.matches(r)).cloned().collect()
}
