//! Per-dataset column mapping.
//!
//! A mapping is a TOML document:
//!
//! ```toml
//! name = "medium-us-office"
//! default_city = "Philadelphia"      # used when no `city` column is mapped
//! default_ventilation = "hvac"       # used when no `ventilation` column is mapped
//! missing_values = ["", "NA", "NaN"] # cells read as absent (case-insensitive)
//!
//! [columns]                          # canonical field -> source column
//! raw_vote = "ThermalSensation"
//! indoor_at = "Indoor_AT"
//!
//! [units]                            # optional unit hints
//! indoor_at = "F"                    # C | F ; velocity: m/s | cm/s | fpm ; rh: percent | fraction
//!
//! [gender_values]                    # case-insensitive cell encodings
//! male = ["1", "male"]
//! female = ["2", "female"]
//!
//! [ventilation_values]
//! hvac = ["HVAC"]
//! nv = ["NV"]
//! mixed = ["MM"]
//! ```
//!
//! Canonical fields: `raw_vote`, `indoor_at`, `indoor_rh`, `indoor_av`,
//! `indoor_mrt`, `outdoor_at`, `outdoor_rh`, `clo`, `met`, `age`, `gender`,
//! `city`, `ventilation`, `climate_zone`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::dataset::record::{Gender, Ventilation};
use crate::error::{Error, Result};

pub const CANONICAL_FIELDS: [&str; 14] = [
    "raw_vote",
    "indoor_at",
    "indoor_rh",
    "indoor_av",
    "indoor_mrt",
    "outdoor_at",
    "outdoor_rh",
    "clo",
    "met",
    "age",
    "gender",
    "city",
    "ventilation",
    "climate_zone",
];

const BUILTIN_ASHRAE: &str = include_str!("../../data/mappings/ashrae_rp884.toml");
const BUILTIN_SCALES: &str = include_str!("../../data/mappings/scales.toml");
const BUILTIN_MEDIUM_US: &str = include_str!("../../data/mappings/medium_us_office.toml");
const BUILTIN_CANONICAL: &str = include_str!("../../data/mappings/canonical.toml");

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TemperatureUnit {
    Celsius,
    Fahrenheit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelocityUnit {
    MetresPerSecond,
    CentimetresPerSecond,
    FeetPerMinute,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HumidityUnit {
    Percent,
    Fraction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnitHint {
    Temperature(TemperatureUnit),
    Velocity(VelocityUnit),
    Humidity(HumidityUnit),
}

impl UnitHint {
    /// Convert a source value into canonical units.
    pub fn to_canonical(self, v: f64) -> f64 {
        match self {
            UnitHint::Temperature(TemperatureUnit::Celsius) => v,
            UnitHint::Temperature(TemperatureUnit::Fahrenheit) => (v - 32.0) * 5.0 / 9.0,
            UnitHint::Velocity(VelocityUnit::MetresPerSecond) => v,
            UnitHint::Velocity(VelocityUnit::CentimetresPerSecond) => v / 100.0,
            UnitHint::Velocity(VelocityUnit::FeetPerMinute) => v * 0.00508,
            UnitHint::Humidity(HumidityUnit::Percent) => v,
            UnitHint::Humidity(HumidityUnit::Fraction) => v * 100.0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MappingFile {
    name: String,
    #[serde(default)]
    default_city: Option<String>,
    #[serde(default)]
    default_ventilation: Option<String>,
    #[serde(default)]
    missing_values: Option<Vec<String>>,
    columns: BTreeMap<String, String>,
    #[serde(default)]
    units: BTreeMap<String, String>,
    #[serde(default)]
    gender_values: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    ventilation_values: BTreeMap<String, Vec<String>>,
}

/// Source-column → canonical-field mapping with unit hints and categorical
/// encodings.
#[derive(Debug, Clone)]
pub struct ColumnMapping {
    pub name: String,
    /// canonical field → source column
    pub columns: BTreeMap<String, String>,
    pub units: BTreeMap<String, UnitHint>,
    pub gender_values: Vec<(Gender, Vec<String>)>,
    pub ventilation_values: Vec<(Ventilation, Vec<String>)>,
    pub default_city: Option<String>,
    pub default_ventilation: Ventilation,
    pub missing_values: Vec<String>,
}

impl ColumnMapping {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: MappingFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("column mapping: {e}")))?;
        Self::from_file(file)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Mapping shipped with the crate: `ashrae`, `scales`,
    /// `medium-us-office` or `canonical`.
    pub fn builtin(name: &str) -> Result<Self> {
        let text = match name {
            "ashrae" | "ashrae-rp884" => BUILTIN_ASHRAE,
            "scales" => BUILTIN_SCALES,
            "medium-us-office" | "medium_us_office" => BUILTIN_MEDIUM_US,
            "canonical" => BUILTIN_CANONICAL,
            other => return Err(Error::Config(format!("no builtin mapping `{other}`"))),
        };
        Self::from_toml_str(text)
    }

    /// `builtin:NAME` or a filesystem path.
    pub fn resolve(spec: &str) -> Result<Self> {
        match spec.strip_prefix("builtin:") {
            Some(name) => Self::builtin(name),
            None => Self::from_path(Path::new(spec)),
        }
    }

    /// Identity mapping over the canonical column names.
    pub fn canonical() -> Self {
        Self::builtin("canonical").expect("bundled canonical mapping parses")
    }

    fn from_file(file: MappingFile) -> Result<Self> {
        for key in file.columns.keys() {
            if !CANONICAL_FIELDS.contains(&key.as_str()) {
                return Err(Error::Config(format!(
                    "mapping `{}`: unknown canonical field `{key}`",
                    file.name
                )));
            }
        }
        if !file.columns.contains_key("raw_vote") {
            return Err(Error::Config(format!(
                "mapping `{}` does not map raw_vote",
                file.name
            )));
        }
        let mut units = BTreeMap::new();
        for (field, unit) in &file.units {
            let hint = parse_unit(field, unit)?;
            units.insert(field.clone(), hint);
        }
        let mut gender_values = Vec::new();
        for (key, values) in &file.gender_values {
            let g = match key.to_ascii_lowercase().as_str() {
                "male" => Gender::Male,
                "female" => Gender::Female,
                "unknown" | "other" => Gender::Unknown,
                other => return Err(Error::Config(format!("unknown gender key `{other}`"))),
            };
            gender_values.push((g, lowercase_all(values)));
        }
        if gender_values.is_empty() {
            gender_values = vec![
                (Gender::Male, lowercase_all(&["male", "m"])),
                (Gender::Female, lowercase_all(&["female", "f"])),
            ];
        }
        let mut ventilation_values = Vec::new();
        for (key, values) in &file.ventilation_values {
            let v: Ventilation = key.parse()?;
            ventilation_values.push((v, lowercase_all(values)));
        }
        if ventilation_values.is_empty() {
            ventilation_values = vec![
                (Ventilation::Hvac, lowercase_all(&["hvac"])),
                (Ventilation::Nv, lowercase_all(&["nv"])),
                (Ventilation::Mixed, lowercase_all(&["mixed", "mm"])),
            ];
        }
        let default_ventilation = match &file.default_ventilation {
            Some(v) => v.parse()?,
            None => Ventilation::Unknown,
        };
        let missing_values = file
            .missing_values
            .map(|v| lowercase_all(&v))
            .unwrap_or_else(|| lowercase_all(&["", "na", "nan", "null", "none"]));
        Ok(ColumnMapping {
            name: file.name,
            columns: file.columns,
            units,
            gender_values,
            ventilation_values,
            default_city: file.default_city,
            default_ventilation,
            missing_values,
        })
    }

    pub fn column_for(&self, field: &str) -> Option<&str> {
        self.columns.get(field).map(String::as_str)
    }

    pub fn is_missing(&self, cell: &str) -> bool {
        let c = cell.trim().to_ascii_lowercase();
        self.missing_values.iter().any(|m| *m == c)
    }

    pub fn decode_gender(&self, cell: &str) -> Gender {
        let c = cell.trim().to_ascii_lowercase();
        self.gender_values
            .iter()
            .find(|(_, vals)| vals.contains(&c))
            .map_or(Gender::Unknown, |(g, _)| *g)
    }

    pub fn decode_ventilation(&self, cell: &str) -> Ventilation {
        let c = cell.trim().to_ascii_lowercase();
        self.ventilation_values
            .iter()
            .find(|(_, vals)| vals.contains(&c))
            .map_or(Ventilation::Unknown, |(v, _)| *v)
    }
}

fn lowercase_all<S: AsRef<str>>(values: &[S]) -> Vec<String> {
    values
        .iter()
        .map(|v| v.as_ref().trim().to_ascii_lowercase())
        .collect()
}

fn parse_unit(field: &str, unit: &str) -> Result<UnitHint> {
    let u = unit.trim().to_ascii_lowercase();
    let hint = match field {
        "indoor_at" | "indoor_mrt" | "outdoor_at" => match u.as_str() {
            "c" | "celsius" | "degc" => UnitHint::Temperature(TemperatureUnit::Celsius),
            "f" | "fahrenheit" | "degf" => UnitHint::Temperature(TemperatureUnit::Fahrenheit),
            _ => return Err(Error::Config(format!("unit `{unit}` invalid for {field}"))),
        },
        "indoor_av" => match u.as_str() {
            "m/s" | "mps" => UnitHint::Velocity(VelocityUnit::MetresPerSecond),
            "cm/s" => UnitHint::Velocity(VelocityUnit::CentimetresPerSecond),
            "fpm" | "ft/min" => UnitHint::Velocity(VelocityUnit::FeetPerMinute),
            _ => return Err(Error::Config(format!("unit `{unit}` invalid for {field}"))),
        },
        "indoor_rh" | "outdoor_rh" => match u.as_str() {
            "%" | "percent" => UnitHint::Humidity(HumidityUnit::Percent),
            "fraction" => UnitHint::Humidity(HumidityUnit::Fraction),
            _ => return Err(Error::Config(format!("unit `{unit}` invalid for {field}"))),
        },
        _ => return Err(Error::Config(format!("no unit hints for field `{field}`"))),
    };
    Ok(hint)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse() {
        for name in ["ashrae", "scales", "medium-us-office", "canonical"] {
            let m = ColumnMapping::builtin(name).unwrap();
            assert!(m.column_for("raw_vote").is_some(), "{name}");
        }
        assert!(ColumnMapping::builtin("nope").is_err());
    }

    #[test]
    fn rejects_unknown_canonical_field() {
        let text = "name = \"x\"\n[columns]\nraw_vote = \"v\"\nshoe_size = \"s\"\n";
        assert!(matches!(
            ColumnMapping::from_toml_str(text),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn unit_conversion() {
        let f = parse_unit("indoor_at", "F").unwrap();
        assert!((f.to_canonical(212.0) - 100.0).abs() < 1e-12);
        let fpm = parse_unit("indoor_av", "fpm").unwrap();
        assert!((fpm.to_canonical(100.0) - 0.508).abs() < 1e-12);
        assert!(parse_unit("indoor_av", "F").is_err());
    }

    #[test]
    fn categorical_decoding() {
        let m = ColumnMapping::builtin("ashrae").unwrap();
        assert_eq!(m.decode_ventilation("HVAC"), Ventilation::Hvac);
        assert_eq!(m.decode_ventilation("??"), Ventilation::Unknown);
        assert_eq!(m.decode_gender("zzz"), Gender::Unknown);
        assert!(m.is_missing(" NA "));
    }
}
