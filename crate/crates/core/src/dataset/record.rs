use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Merged five-point thermal sensation, cold (-2) to hot (+2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub struct SensationClass(i8);

impl SensationClass {
    pub const COUNT: usize = 5;

    /// One-hot / output order of the classifiers.
    pub const ALL: [SensationClass; 5] = [
        SensationClass(-2),
        SensationClass(-1),
        SensationClass(0),
        SensationClass(1),
        SensationClass(2),
    ];

    pub fn new(value: i8) -> Result<Self> {
        if (-2..=2).contains(&value) {
            Ok(SensationClass(value))
        } else {
            Err(Error::InvalidInput(format!(
                "sensation class {value} outside -2..=2"
            )))
        }
    }

    pub fn value(self) -> i8 {
        self.0
    }

    /// Position in [`SensationClass::ALL`].
    pub fn index(self) -> usize {
        (self.0 + 2) as usize
    }

    pub fn from_index(index: usize) -> Self {
        assert!(index < Self::COUNT, "class index {index}");
        SensationClass(index as i8 - 2)
    }
}

impl TryFrom<i8> for SensationClass {
    type Error = Error;
    fn try_from(v: i8) -> Result<Self> {
        SensationClass::new(v)
    }
}

impl From<SensationClass> for i8 {
    fn from(c: SensationClass) -> i8 {
        c.0
    }
}

impl fmt::Display for SensationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 > 0 {
            write!(f, "+{}", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Merge a raw seven-point (possibly continuous) vote onto the five-class
/// scale: round half away from zero, then fold ±3 into ±2.
pub fn merge_classes(raw_vote: f64) -> Result<SensationClass> {
    if !(-3.0..=3.0).contains(&raw_vote) {
        return Err(Error::VoteOutOfRange(raw_vote));
    }
    let rounded = raw_vote.round() as i8;
    Ok(SensationClass(rounded.clamp(-2, 2)))
}

/// Köppen main climate group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClimateZone {
    A,
    B,
    C,
    D,
    E,
}

impl ClimateZone {
    pub const ALL: [ClimateZone; 5] = [
        ClimateZone::A,
        ClimateZone::B,
        ClimateZone::C,
        ClimateZone::D,
        ClimateZone::E,
    ];

    pub fn letter(self) -> char {
        match self {
            ClimateZone::A => 'A',
            ClimateZone::B => 'B',
            ClimateZone::C => 'C',
            ClimateZone::D => 'D',
            ClimateZone::E => 'E',
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ClimateZone::A => "tropical",
            ClimateZone::B => "dry",
            ClimateZone::C => "temperate",
            ClimateZone::D => "continental",
            ClimateZone::E => "polar",
        }
    }
}

impl fmt::Display for ClimateZone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for ClimateZone {
    type Err = Error;

    /// Accepts a main-group letter, a full Köppen code (`Cfa`), or the
    /// group's English name.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let lower = t.to_ascii_lowercase();
        let by_name = match lower.as_str() {
            "tropical" => Some(ClimateZone::A),
            "dry" | "arid" => Some(ClimateZone::B),
            "temperate" => Some(ClimateZone::C),
            "continental" | "cold" => Some(ClimateZone::D),
            "polar" => Some(ClimateZone::E),
            _ => None,
        };
        if let Some(z) = by_name {
            return Ok(z);
        }
        match t.chars().next().map(|c| c.to_ascii_uppercase()) {
            Some('A') => Ok(ClimateZone::A),
            Some('B') => Ok(ClimateZone::B),
            Some('C') => Ok(ClimateZone::C),
            Some('D') => Ok(ClimateZone::D),
            Some('E') => Ok(ClimateZone::E),
            _ => Err(Error::Config(format!("unknown climate zone `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ventilation {
    Hvac,
    Nv,
    Mixed,
    Unknown,
}

impl Ventilation {
    pub fn as_str(self) -> &'static str {
        match self {
            Ventilation::Hvac => "hvac",
            Ventilation::Nv => "nv",
            Ventilation::Mixed => "mixed",
            Ventilation::Unknown => "unknown",
        }
    }
}

impl FromStr for Ventilation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hvac" | "ac" => Ok(Ventilation::Hvac),
            "nv" | "natural" => Ok(Ventilation::Nv),
            "mixed" | "mm" => Ok(Ventilation::Mixed),
            "unknown" | "" => Ok(Ventilation::Unknown),
            other => Err(Error::Config(format!("unknown ventilation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
    Unknown,
}

impl Gender {
    /// Single numeric column: male 0, female 1, other/unknown 0.5.
    pub fn encode(self) -> f64 {
        match self {
            Gender::Male => 0.0,
            Gender::Female => 1.0,
            Gender::Unknown => 0.5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
            Gender::Unknown => "unknown",
        }
    }
}

/// The ten model inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    IndoorAt,
    IndoorRh,
    IndoorAv,
    IndoorMrt,
    OutdoorAt,
    OutdoorRh,
    Clo,
    Met,
    Age,
    Gender,
}

impl Feature {
    pub const ALL: [Feature; 10] = [
        Feature::IndoorAt,
        Feature::IndoorRh,
        Feature::IndoorAv,
        Feature::IndoorMrt,
        Feature::OutdoorAt,
        Feature::OutdoorRh,
        Feature::Clo,
        Feature::Met,
        Feature::Age,
        Feature::Gender,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::IndoorAt => "indoor_at",
            Feature::IndoorRh => "indoor_rh",
            Feature::IndoorAv => "indoor_av",
            Feature::IndoorMrt => "indoor_mrt",
            Feature::OutdoorAt => "outdoor_at",
            Feature::OutdoorRh => "outdoor_rh",
            Feature::Clo => "clo",
            Feature::Met => "met",
            Feature::Age => "age",
            Feature::Gender => "gender",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Feature::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown feature `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureSetTag {
    Xa,
    Xb,
    Xc,
}

impl fmt::Display for FeatureSetTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureSetTag::Xa => "Xa",
            FeatureSetTag::Xb => "Xb",
            FeatureSetTag::Xc => "Xc",
        })
    }
}

impl FromStr for FeatureSetTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "xa" | "a" => Ok(FeatureSetTag::Xa),
            "xb" | "b" => Ok(FeatureSetTag::Xb),
            "xc" | "c" => Ok(FeatureSetTag::Xc),
            other => Err(Error::Config(format!("unknown feature set `{other}`"))),
        }
    }
}

/// Ordered list of model inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub tag: Option<FeatureSetTag>,
    pub members: Vec<Feature>,
}

impl FeatureSet {
    /// The six PMV factors.
    pub fn xa() -> Self {
        FeatureSet {
            tag: Some(FeatureSetTag::Xa),
            members: vec![
                Feature::IndoorAt,
                Feature::IndoorAv,
                Feature::IndoorRh,
                Feature::IndoorMrt,
                Feature::Clo,
                Feature::Met,
            ],
        }
    }

    /// PMV factors plus age and gender.
    pub fn xb() -> Self {
        let mut members = Self::xa().members;
        members.extend([Feature::Age, Feature::Gender]);
        FeatureSet {
            tag: Some(FeatureSetTag::Xb),
            members,
        }
    }

    /// All ten inputs.
    pub fn xc() -> Self {
        let mut members = Self::xb().members;
        members.extend([Feature::OutdoorAt, Feature::OutdoorRh]);
        FeatureSet {
            tag: Some(FeatureSetTag::Xc),
            members,
        }
    }

    pub fn from_tag(tag: FeatureSetTag) -> Self {
        match tag {
            FeatureSetTag::Xa => Self::xa(),
            FeatureSetTag::Xb => Self::xb(),
            FeatureSetTag::Xc => Self::xc(),
        }
    }

    /// The eight inputs recorded by both source studies and the target:
    /// four indoor, two outdoor, age and gender.
    pub fn source_shared() -> Self {
        FeatureSet {
            tag: None,
            members: vec![
                Feature::IndoorAt,
                Feature::IndoorAv,
                Feature::IndoorRh,
                Feature::IndoorMrt,
                Feature::Age,
                Feature::Gender,
                Feature::OutdoorAt,
                Feature::OutdoorRh,
            ],
        }
    }

    pub fn custom(members: Vec<Feature>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        if members.is_empty() {
            return Err(Error::InvalidInput("empty feature set".into()));
        }
        for f in &members {
            if !seen.insert(*f) {
                return Err(Error::InvalidInput(format!("duplicate feature `{f}`")));
            }
        }
        Ok(FeatureSet { tag: None, members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.members.iter().map(|f| f.name().to_string()).collect()
    }

    pub fn contains(&self, f: Feature) -> bool {
        self.members.contains(&f)
    }

    pub fn label(&self) -> String {
        match self.tag {
            Some(t) => t.to_string(),
            None => self.names().join("+"),
        }
    }
}

/// One survey response in canonical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComfortRecord {
    /// °C
    pub indoor_at: f64,
    /// %
    pub indoor_rh: f64,
    /// m/s
    pub indoor_av: f64,
    /// °C
    pub indoor_mrt: f64,
    pub outdoor_at: Option<f64>,
    pub outdoor_rh: Option<f64>,
    pub clo: Option<f64>,
    pub met: Option<f64>,
    pub age: Option<f64>,
    pub gender: Gender,
    pub raw_vote: f64,
    pub city: String,
    pub climate_zone: Option<ClimateZone>,
    pub ventilation: Ventilation,
    pub dataset_id: String,
}

impl ComfortRecord {
    /// Numeric value of a feature; gender is always present (encoded).
    pub fn get(&self, f: Feature) -> Option<f64> {
        match f {
            Feature::IndoorAt => Some(self.indoor_at),
            Feature::IndoorRh => Some(self.indoor_rh),
            Feature::IndoorAv => Some(self.indoor_av),
            Feature::IndoorMrt => Some(self.indoor_mrt),
            Feature::OutdoorAt => self.outdoor_at,
            Feature::OutdoorRh => self.outdoor_rh,
            Feature::Clo => self.clo,
            Feature::Met => self.met,
            Feature::Age => self.age,
            Feature::Gender => Some(self.gender.encode()),
        }
    }

    pub fn has_all(&self, set: &FeatureSet) -> bool {
        set.members.iter().all(|&f| self.get(f).is_some())
    }

    pub fn sensation(&self) -> Result<SensationClass> {
        merge_classes(self.raw_vote)
    }

    /// Range envelope check; returns the first violated field.
    pub fn range_violation(&self) -> Option<(&'static str, f64)> {
        fn outside(v: f64, lo: f64, hi: f64) -> bool {
            !(lo..=hi).contains(&v)
        }
        if outside(self.raw_vote, -3.0, 3.0) {
            return Some(("raw_vote", self.raw_vote));
        }
        if outside(self.indoor_at, 0.0, 50.0) {
            return Some(("indoor_at", self.indoor_at));
        }
        if outside(self.indoor_rh, 0.0, 100.0) {
            return Some(("indoor_rh", self.indoor_rh));
        }
        if outside(self.indoor_av, 0.0, 5.0) {
            return Some(("indoor_av", self.indoor_av));
        }
        if let Some(c) = self.clo {
            if outside(c, 0.0, 4.0) {
                return Some(("clo", c));
            }
        }
        if let Some(m) = self.met {
            if outside(m, 0.5, 10.0) {
                return Some(("met", m));
            }
        }
        None
    }
}
