//! Checked-in fixture validation.
//!
//! The fixture directory holds tiny CSVs, their expected canonical outputs
//! and a `manifest.toml` describing each case. [`validate_fixtures`] runs
//! every case and reports field-level differences.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::dataset::climate::{enrich_climate, filter_pool, CityZoneTable, PoolFilter};
use crate::dataset::load::{load_dataset, write_canonical_csv};
use crate::dataset::mapping::ColumnMapping;
use crate::dataset::record::{ClimateZone, ComfortRecord, Gender, Ventilation};
use crate::error::{Error, Result};

/// Fixtures shipped with the crate.
pub fn bundled_fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

#[derive(Debug, Deserialize)]
struct Manifest {
    #[serde(default)]
    load: Vec<LoadCase>,
    zones: Option<ZoneCase>,
    pool: Option<PoolCase>,
}

#[derive(Debug, Deserialize)]
struct LoadCase {
    name: String,
    input: String,
    mapping: String,
    expected: String,
    rows_read: usize,
    dropped: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct ZoneCase {
    input: String,
}

#[derive(Debug, Deserialize)]
struct PoolCase {
    input: String,
    ventilation: String,
    total: usize,
    #[serde(flatten)]
    zones: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureOutcome {
    pub name: String,
    pub mismatches: Vec<String>,
}

impl FixtureOutcome {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FixtureReport {
    pub outcomes: Vec<FixtureOutcome>,
}

impl FixtureReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(FixtureOutcome::passed)
    }

    pub fn get(&self, name: &str) -> Option<&FixtureOutcome> {
        self.outcomes.iter().find(|o| o.name == name)
    }
}

impl fmt::Display for FixtureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in &self.outcomes {
            writeln!(f, "{} {}", if o.passed() { "PASS" } else { "FAIL" }, o.name)?;
            for m in &o.mismatches {
                writeln!(f, "    {m}")?;
            }
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers()?.iter().map(str::to_string).collect();
    let rows = rdr
        .records()
        .map(|r| r.map(|r| r.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<_, _>>()?;
    Ok((header, rows))
}

/// Cell-by-cell comparison of two CSV documents.
pub fn diff_csv(expected: &str, actual: &str) -> Result<Vec<String>> {
    let (eh, erows) = parse_csv(expected)?;
    let (ah, arows) = parse_csv(actual)?;
    let mut out = Vec::new();
    if eh != ah {
        out.push(format!("header: expected {eh:?}, got {ah:?}"));
        return Ok(out);
    }
    if erows.len() != arows.len() {
        out.push(format!("row count: expected {}, got {}", erows.len(), arows.len()));
    }
    for (i, (e, a)) in erows.iter().zip(&arows).enumerate() {
        for ((field, ev), av) in eh.iter().zip(e).zip(a) {
            if ev != av {
                out.push(format!("row {}, field {field}: expected `{ev}`, got `{av}`", i + 1));
            }
        }
    }
    Ok(out)
}

fn check_load(dir: &Path, case: &LoadCase) -> Result<FixtureOutcome> {
    let mapping = ColumnMapping::builtin(&case.mapping)?;
    let loaded = load_dataset(&dir.join(&case.input), &mapping, &case.name)?;
    let mut mismatches = Vec::new();
    if loaded.report.rows_read != case.rows_read {
        mismatches.push(format!(
            "rows read: expected {}, got {}",
            case.rows_read, loaded.report.rows_read
        ));
    }
    let dropped: Vec<String> = loaded
        .report
        .dropped
        .iter()
        .map(|d| format!("row {}: {}", d.row, d.reason))
        .collect();
    if dropped != case.dropped {
        mismatches.push(format!("drops: expected {:?}, got {dropped:?}", case.dropped));
    }
    let mut actual = Vec::new();
    write_canonical_csv(&loaded.records, &mut actual)?;
    let actual = String::from_utf8(actual).map_err(|e| Error::InvalidInput(e.to_string()))?;
    mismatches.extend(diff_csv(&read(&dir.join(&case.expected))?, &actual)?);
    Ok(FixtureOutcome {
        name: case.name.clone(),
        mismatches,
    })
}

fn check_zones(dir: &Path, case: &ZoneCase, table: &CityZoneTable) -> Result<FixtureOutcome> {
    let (_, rows) = parse_csv(&read(&dir.join(&case.input))?)?;
    let mut mismatches = Vec::new();
    for row in rows {
        let (city, want) = (&row[0], row[1].parse::<ClimateZone>()?);
        match table.lookup(city) {
            Some(z) if z == want => {}
            got => mismatches.push(format!("{city}: expected {want}, got {got:?}")),
        }
    }
    Ok(FixtureOutcome {
        name: "zone-lookup".into(),
        mismatches,
    })
}

/// Expand a `city,ventilation,rows` structure file into placeholder records.
pub fn expand_structure(path: &Path) -> Result<Vec<ComfortRecord>> {
    let (header, rows) = parse_csv(&read(path)?)?;
    if header != ["city", "ventilation", "rows"] {
        return Err(Error::MalformedHeader(format!("{}: {header:?}", path.display())));
    }
    let mut out = Vec::new();
    for row in rows {
        let ventilation: Ventilation = row[1].parse()?;
        let n: usize = row[2]
            .parse()
            .map_err(|_| Error::InvalidInput(format!("row count `{}`", row[2])))?;
        out.extend((0..n).map(|_| ComfortRecord {
            indoor_at: 24.0,
            indoor_rh: 50.0,
            indoor_av: 0.1,
            indoor_mrt: 24.0,
            outdoor_at: None,
            outdoor_rh: None,
            clo: None,
            met: None,
            age: None,
            gender: Gender::Unknown,
            raw_vote: 0.0,
            city: row[0].clone(),
            climate_zone: None,
            ventilation,
            dataset_id: "structure".into(),
        }));
    }
    Ok(out)
}

fn check_pool(dir: &Path, case: &PoolCase, table: &CityZoneTable) -> Result<FixtureOutcome> {
    let mut records = expand_structure(&dir.join(&case.input))?;
    let enrich = enrich_climate(&mut records, table);
    let mut mismatches = Vec::new();
    if enrich.unknown > 0 {
        mismatches.push(format!("cities without a zone: {:?}", enrich.unknown_cities));
    }
    let ventilation: Ventilation = case.ventilation.parse()?;
    let all = PoolFilter {
        ventilation: Some(ventilation),
        zone: None,
    };
    let total = filter_pool(&records, &all).len();
    if total != case.total {
        mismatches.push(format!("total: expected {}, got {total}", case.total));
    }
    for (zone, &want) in &case.zones {
        let filter = PoolFilter {
            ventilation: Some(ventilation),
            zone: Some(zone.parse()?),
        };
        let got = filter_pool(&records, &filter).len();
        if got != want {
            mismatches.push(format!("zone {zone}: expected {want}, got {got}"));
        }
    }
    Ok(FixtureOutcome {
        name: "pool-structure".into(),
        mismatches,
    })
}

/// Run every case listed in `dir/manifest.toml`.
pub fn validate_fixtures(dir: &Path) -> Result<FixtureReport> {
    let manifest_path = dir.join("manifest.toml");
    let manifest: Manifest =
        toml::from_str(&read(&manifest_path)?).map_err(|e| Error::Config(format!("{}: {e}", manifest_path.display())))?;
    let table = CityZoneTable::bundled();
    let mut report = FixtureReport::default();
    for case in &manifest.load {
        report.outcomes.push(check_load(dir, case)?);
    }
    if let Some(z) = &manifest.zones {
        report.outcomes.push(check_zones(dir, z, &table)?);
    }
    if let Some(p) = &manifest.pool {
        report.outcomes.push(check_pool(dir, p, &table)?);
    }
    Ok(report)
}
