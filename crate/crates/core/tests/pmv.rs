mod common;

use common::pmv_oracle;
use comfort_core::dataset::{ComfortRecord, Gender, Ventilation};
use comfort_core::pmv::{compute_pmv, pmv_baseline_predict, pmv_class, PmvInput, PmvScore};
use proptest::prelude::*;

fn input(v: [f64; 6]) -> PmvInput {
    PmvInput { ta: v[0], tr: v[1], vel: v[2], rh: v[3], met: v[4], clo: v[5] }
}

fn record(ta: f64, met: f64, clo: f64) -> ComfortRecord {
    ComfortRecord {
        indoor_at: ta,
        indoor_rh: 50.0,
        indoor_av: 0.1,
        indoor_mrt: ta,
        outdoor_at: None,
        outdoor_rh: None,
        clo: Some(clo),
        met: Some(met),
        age: None,
        gender: Gender::Unknown,
        raw_vote: 0.0,
        city: "x".into(),
        climate_zone: None,
        ventilation: Ventilation::Hvac,
        dataset_id: "t".into(),
    }
}

#[test]
fn oracle_agrees_with_external_reference() {
    let reference = pmv_oracle::external_reference();
    assert_eq!(reference.len(), 216);
    for (p, want) in reference {
        let got = pmv_oracle::pmv(p[0], p[1], p[2], p[3], p[4], p[5]);
        assert!((got - want).abs() < 1e-2, "{p:?}: oracle {got} vs reference {want}");
    }
}

#[test]
fn office_point_matches_oracle() {
    let p = [22.0, 22.0, 0.10, 60.0, 1.2, 0.5];
    let want = pmv_oracle::pmv(p[0], p[1], p[2], p[3], p[4], p[5]);
    // ISO 7730 tabulated value for this point: -0.75
    assert!((want + 0.75).abs() < 0.01);
    let got = compute_pmv(&input(p)).unwrap().value();
    assert!((got - want).abs() <= 0.05, "{got} vs {want}");
}

#[test]
fn grid_agreement() {
    let grid = pmv_oracle::grid();
    assert_eq!(grid.len(), 216);
    let worst = grid
        .iter()
        .map(|p| {
            let got = compute_pmv(&input(*p)).unwrap().value();
            (got - pmv_oracle::pmv(p[0], p[1], p[2], p[3], p[4], p[5])).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst <= 0.05, "worst deviation {worst}");
}

#[test]
fn neutral_point_reads_zero() {
    let t = pmv_oracle::neutral_temperature(0.1, 50.0, 1.2, 0.5);
    let p = compute_pmv(&input([t, t, 0.1, 50.0, 1.2, 0.5])).unwrap().value();
    assert!(p.abs() < 0.05, "neutral {t} gives {p}");
    let rec = ComfortRecord { indoor_rh: 50.0, ..record(t, 1.2, 0.5) };
    assert_eq!(pmv_baseline_predict(&[rec]).unwrap()[0].value(), 0);
}

#[test]
fn hot_heavy_activity_is_class_plus_two() {
    assert!(pmv_oracle::pmv(35.0, 35.0, 0.1, 50.0, 2.0, 1.0) >= 1.5);
    let pred = pmv_baseline_predict(&[record(35.0, 2.0, 1.0)]).unwrap();
    assert_eq!(pred[0].value(), 2);
}

#[test]
fn baseline_requires_all_factors() {
    let mut r = record(22.0, 1.2, 0.5);
    r.clo = None;
    let err = pmv_baseline_predict(&[record(22.0, 1.2, 0.5), r]).unwrap_err();
    assert!(err.to_string().contains("record 1"), "{err}");
}

proptest! {
    #[test]
    fn class_mapping_is_monotone(a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(pmv_class(PmvScore(lo)) <= pmv_class(PmvScore(hi)));
    }

    #[test]
    fn small_temperature_steps_move_pmv_little(
        ta in 16.0f64..32.0, vel in 0.05f64..0.5, rh in 20.0f64..80.0,
        met in 1.0f64..2.0, clo in 0.3f64..1.2, d in -0.01f64..0.01,
    ) {
        let a = compute_pmv(&PmvInput { ta, tr: ta, vel, rh, met, clo }).unwrap().value();
        let b = compute_pmv(&PmvInput { ta: ta + d, tr: ta, vel, rh, met, clo }).unwrap().value();
        prop_assert!((a - b).abs() < 0.01);
        let again = compute_pmv(&PmvInput { ta, tr: ta, vel, rh, met, clo }).unwrap().value();
        prop_assert_eq!(a.to_bits(), again.to_bits());
    }
}
