//! Fanger's Predicted Mean Vote (ISO 7730 heat-balance form) and its
//! mapping onto the five sensation classes.

use serde::{Deserialize, Serialize};

use crate::dataset::record::{ComfortRecord, SensationClass};
use crate::error::{Error, Result};

/// W/m² per Met.
pub const MET_TO_WM2: f64 = 58.15;
/// m²K/W per clo.
pub const CLO_TO_M2KW: f64 = 0.155;

/// Iteration cap for the clothing surface temperature.
pub const MAX_ITERATIONS: usize = 150;
/// Convergence threshold on successive clothing temperatures, °C.
pub const TCL_TOLERANCE: f64 = 1e-4;
/// Weight of the new estimate in each damped update.
const DAMPING: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmvInput {
    /// Air temperature, °C.
    pub ta: f64,
    /// Mean radiant temperature, °C.
    pub tr: f64,
    /// Relative air velocity, m/s.
    pub vel: f64,
    /// Relative humidity, %.
    pub rh: f64,
    /// Metabolic rate, Met.
    pub met: f64,
    /// Clothing insulation, clo.
    pub clo: f64,
}

impl PmvInput {
    pub fn validate(&self) -> Result<()> {
        let fields = [self.ta, self.tr, self.vel, self.rh, self.met, self.clo];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("PMV input {self:?}")));
        }
        if self.vel < 0.0 {
            return Err(Error::InvalidInput(format!("air velocity {} < 0", self.vel)));
        }
        if !(0.0..=100.0).contains(&self.rh) {
            return Err(Error::InvalidInput(format!("relative humidity {} outside [0, 100]", self.rh)));
        }
        if self.met <= 0.0 {
            return Err(Error::InvalidInput(format!("metabolic rate {} <= 0", self.met)));
        }
        if self.clo < 0.0 {
            return Err(Error::InvalidInput(format!("clothing {} < 0", self.clo)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct PmvScore(pub f64);

impl PmvScore {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Water vapour partial pressure, Pa.
fn vapour_pressure(ta: f64, rh: f64) -> f64 {
    rh * 10.0 * (16.6536 - 4030.183 / (ta + 235.0)).exp()
}

fn clothing_area_factor(icl: f64) -> f64 {
    if icl <= 0.078 {
        1.0 + 1.29 * icl
    } else {
        1.05 + 0.645 * icl
    }
}

/// Convective heat transfer coefficient: the larger of natural and forced.
fn convective_coefficient(tcl: f64, ta: f64, vel: f64) -> f64 {
    let natural = 2.38 * (tcl - ta).abs().powf(0.25);
    let forced = 12.1 * vel.sqrt();
    natural.max(forced)
}

/// Radiative loss from the clothed body, W/m² of skin.
fn radiative_loss(fcl: f64, tcl: f64, tr: f64) -> f64 {
    3.96e-8 * fcl * ((tcl + 273.0).powi(4) - (tr + 273.0).powi(4))
}

/// Predicted Mean Vote. The clothing surface temperature solves
/// `t_cl = 35.7 - 0.028 (M-W) - I_cl (R + C)` and is found by damped
/// fixed-point iteration.
pub fn compute_pmv(input: &PmvInput) -> Result<PmvScore> {
    input.validate()?;
    let PmvInput {
        ta,
        tr,
        vel,
        rh,
        met,
        clo,
    } = *input;
    let m = met * MET_TO_WM2;
    let internal = m; // external work taken as zero
    let icl = clo * CLO_TO_M2KW;
    let fcl = clothing_area_factor(icl);
    let pa = vapour_pressure(ta, rh);

    let balance = |tcl: f64| {
        let hc = convective_coefficient(tcl, ta, vel);
        35.7 - 0.028 * internal - icl * (radiative_loss(fcl, tcl, tr) + fcl * hc * (tcl - ta))
    };

    // start from the air/skin midpoint weighted by insulation
    let mut tcl = ta + (35.5 - ta) / (3.5 * icl + 0.1);
    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        let next = (1.0 - DAMPING) * tcl + DAMPING * balance(tcl);
        if !next.is_finite() {
            return Err(Error::NonFinite("clothing surface temperature".into()));
        }
        let delta = (next - tcl).abs();
        tcl = next;
        if delta < TCL_TOLERANCE {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::PmvNoConvergence(MAX_ITERATIONS));
    }

    let hc = convective_coefficient(tcl, ta, vel);
    let skin_diffusion = 3.05e-3 * (5733.0 - 6.99 * internal - pa);
    let sweating = if internal > MET_TO_WM2 {
        0.42 * (internal - MET_TO_WM2)
    } else {
        0.0
    };
    let latent_respiration = 1.7e-5 * m * (5867.0 - pa);
    let dry_respiration = 0.0014 * m * (34.0 - ta);
    let radiation = radiative_loss(fcl, tcl, tr);
    let convection = fcl * hc * (tcl - ta);
    let load = internal
        - skin_diffusion
        - sweating
        - latent_respiration
        - dry_respiration
        - radiation
        - convection;
    let pmv = (0.303 * (-0.036 * m).exp() + 0.028) * load;
    if !pmv.is_finite() {
        return Err(Error::NonFinite("PMV".into()));
    }
    Ok(PmvScore(pmv))
}

/// Five-class mapping, first matching branch in order:
/// `≤ -1.5 → -2`, `≤ -0.5 → -1`, `≤ 0.5 → 0`, `≤ 1.5 → +1`, else `+2`.
pub fn pmv_class(score: PmvScore) -> SensationClass {
    let p = score.0;
    let v = if p <= -1.5 {
        -2
    } else if p <= -0.5 {
        -1
    } else if p <= 0.5 {
        0
    } else if p <= 1.5 {
        1
    } else {
        2
    };
    SensationClass::new(v).expect("class in range")
}

impl TryFrom<&ComfortRecord> for PmvInput {
    type Error = Error;
    fn try_from(r: &ComfortRecord) -> Result<Self> {
        let missing = |feature: &str| Error::MissingFeature {
            index: 0,
            feature: feature.into(),
        };
        Ok(PmvInput {
            ta: r.indoor_at,
            tr: r.indoor_mrt,
            vel: r.indoor_av,
            rh: r.indoor_rh,
            met: r.met.ok_or_else(|| missing("met"))?,
            clo: r.clo.ok_or_else(|| missing("clo"))?,
        })
    }
}

/// PMV class per record from the six heat-balance factors.
pub fn pmv_baseline_predict(records: &[ComfortRecord]) -> Result<Vec<SensationClass>> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let input = PmvInput::try_from(r).map_err(|e| match e {
                Error::MissingFeature { feature, .. } => Error::MissingFeature { index: i, feature },
                other => other,
            })?;
            Ok(pmv_class(compute_pmv(&input)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn office(ta: f64) -> PmvInput {
        PmvInput {
            ta,
            tr: ta,
            vel: 0.1,
            rh: 60.0,
            met: 1.2,
            clo: 0.5,
        }
    }

    #[test]
    fn warmer_air_raises_pmv() {
        let cool = compute_pmv(&office(20.0)).unwrap().value();
        let warm = compute_pmv(&office(28.0)).unwrap().value();
        assert!(warm > cool);
    }

    #[test]
    fn class_boundaries_follow_listed_order() {
        let cases = [
            (-1.6, -2),
            (-1.5, -2),
            (-0.5, -1),
            (-0.4, 0),
            (0.3, 0),
            (0.5, 0),
            (0.6, 1),
            (1.5, 1),
            (1.6, 2),
        ];
        for (p, want) in cases {
            assert_eq!(pmv_class(PmvScore(p)).value(), want, "p_s = {p}");
        }
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let mut i = office(22.0);
        i.vel = -0.1;
        assert!(compute_pmv(&i).is_err());
        let mut i = office(22.0);
        i.rh = 101.0;
        assert!(compute_pmv(&i).is_err());
        let mut i = office(22.0);
        i.met = 0.0;
        assert!(compute_pmv(&i).is_err());
        let mut i = office(22.0);
        i.ta = f64::NAN;
        assert!(matches!(compute_pmv(&i), Err(Error::NonFinite(_))));
    }

    #[test]
    fn nude_still_air_converges() {
        let i = PmvInput {
            ta: 30.0,
            tr: 30.0,
            vel: 0.0,
            rh: 50.0,
            met: 1.0,
            clo: 0.0,
        };
        assert!(compute_pmv(&i).unwrap().value().is_finite());
    }

    #[test]
    fn empty_baseline_is_empty() {
        assert!(pmv_baseline_predict(&[]).unwrap().is_empty());
    }
}
