mod common;

use std::collections::BTreeSet;

use common::metrics_oracle;
use comfort_core::baselines::{BaselineKind, BaselineParams};
use comfort_core::dataset::{
    ClimateZone, ComfortRecord, FeatureSet, Gender, RowOrigin, SensationClass, Ventilation,
};
use comfort_core::evaluation::synthetic::standardized_inputs;
use comfort_core::evaluation::*;
use comfort_core::neural::TrainConfig;
use comfort_core::resampling::Resampler;
use comfort_core::transfer::SourcePool;
use comfort_core::Error;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn classes(v: &[i8]) -> Vec<SensationClass> {
    v.iter().map(|&x| SensationClass::new(x).unwrap()).collect()
}

fn record(at: f64, rh: f64, vote: i8) -> ComfortRecord {
    ComfortRecord {
        indoor_at: at,
        indoor_rh: rh,
        indoor_av: 0.1,
        indoor_mrt: at,
        outdoor_at: Some(10.0),
        outdoor_rh: Some(50.0),
        clo: Some(0.6),
        met: Some(1.1),
        age: Some(35.0),
        gender: Gender::Female,
        raw_vote: f64::from(vote),
        city: "X".into(),
        climate_zone: Some(ClimateZone::C),
        ventilation: Ventilation::Hvac,
        dataset_id: "t".into(),
    }
}

/// Labels independent of the inputs, in equal shares.
fn noise_records(n: usize, seed: u64) -> Vec<ComfortRecord> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| record(r.gen_range(15.0..30.0), r.gen_range(20.0..80.0), (i % 5) as i8 - 2))
        .collect()
}

/// Votes follow air temperature bands; class sizes are unequal.
fn banded_records(n: usize, seed: u64) -> Vec<ComfortRecord> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let at: f64 = r.gen_range(16.0..31.0);
            let vote = match at {
                a if a < 18.0 => -2,
                a if a < 21.0 => -1,
                a if a < 27.0 => 0,
                a if a < 29.0 => 1,
                _ => 2,
            };
            record(at, r.gen_range(20.0..80.0), vote)
        })
        .collect()
}

fn quick_cfg(seed: u64) -> CvConfig {
    CvConfig {
        seed,
        baseline: BaselineParams {
            n_trees: 20,
            ..Default::default()
        },
        ..Default::default()
    }
}

#[test]
fn weighted_f1_matches_oracle_on_1000_random_pairs() {
    let mut r = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let n = r.gen_range(1..200);
        let t: Vec<i8> = (0..n).map(|_| r.gen_range(-2..=2)).collect();
        let p: Vec<i8> = (0..n).map(|_| r.gen_range(-2..=2)).collect();
        let (tc, pc) = (classes(&t), classes(&p));
        let cm = ConfusionMatrix::from_labels(&tc, &pc).unwrap();
        let got = weighted_f1(&tc, &pc).unwrap();
        assert_eq!(got, metrics_oracle::weighted_f1_from_counts(&cm.counts));
        assert!((got - metrics_oracle::weighted_f1(&t, &p)).abs() < 1e-9);
        for c in 0..5 {
            assert_eq!(cm.support(c), t.iter().filter(|&&v| v == c as i8 - 2).count());
        }
        assert_eq!(cm.total(), n);
        assert!((cm.accuracy() - accuracy(&tc, &pc).unwrap()).abs() < 1e-12);
        assert!((0.0..=100.0).contains(&got));
    }
}

#[test]
fn metric_examples() {
    let (t, p) = (classes(&[0, 0, 1]), classes(&[0, 0, 0]));
    assert!((weighted_f1(&t, &p).unwrap() - 53.333_333).abs() < 1e-4);
    assert!((accuracy(&t, &p).unwrap() - 66.666_667).abs() < 1e-4);
    assert_eq!(weighted_f1(&t, &t).unwrap(), 100.0);
    assert!(matches!(weighted_f1(&[], &[]), Err(Error::EmptyInput(_))));
    let cm = ConfusionMatrix::from_labels(&t, &t).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            if i != j {
                assert_eq!(cm.counts[i][j], 0);
            }
        }
    }
}

proptest! {
    #[test]
    fn weighted_f1_is_order_invariant(pairs in prop::collection::vec((-2i8..=2, -2i8..=2), 1..80), seed in any::<u64>()) {
        let mut shuffled = pairs.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let split = |v: &[(i8, i8)]| {
            let (a, b): (Vec<i8>, Vec<i8>) = v.iter().copied().unzip();
            (classes(&a), classes(&b))
        };
        let (t1, p1) = split(&pairs);
        let (t2, p2) = split(&shuffled);
        prop_assert!((weighted_f1(&t1, &p1).unwrap() - weighted_f1(&t2, &p2).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn kfold_invariants() {
    let s = kfold_split(100, 10, 5).unwrap();
    assert!(s.folds.iter().all(|f| f.len() == 10));
    assert_eq!(s, kfold_split(100, 10, 5).unwrap());
    assert_ne!(s, kfold_split(100, 10, 6).unwrap());
    let mut seen = BTreeSet::new();
    for f in &s.folds {
        for &i in f {
            assert!(seen.insert(i), "index {i} in two folds");
        }
    }
    assert_eq!(seen.len(), 100);
    assert!(matches!(kfold_split(9, 10, 1), Err(Error::TooFewRows { .. })));
}

#[test]
fn random_baseline_scores_near_one_in_five() {
    let records = noise_records(1000, 3);
    let report = run_cv(&Algorithm::Baseline(BaselineKind::Random), &records, &quick_cfg(1)).unwrap();
    let (acc, _) = report.accuracy();
    assert!((acc - 20.0).abs() <= 3.0, "{acc}");
}

#[test]
fn memorizing_model_is_scored_on_unseen_rows() {
    // a 1-NN memorizes its training set; labels are noise, so held-out
    // accuracy must sit near chance
    let records = noise_records(500, 4);
    let cfg = CvConfig {
        baseline: BaselineParams {
            k: 1,
            ..Default::default()
        },
        ..quick_cfg(2)
    };
    let report = run_cv(&Algorithm::Baseline(BaselineKind::Knn), &records, &cfg).unwrap();
    assert!(report.accuracy().0 < 35.0, "{:?}", report.accuracy());
}

#[test]
fn aggregation_recomputes_from_folds() {
    let records = banded_records(400, 5);
    let report = run_cv(&Algorithm::Baseline(BaselineKind::Tree), &records, &quick_cfg(3)).unwrap();
    let accs: Vec<f64> = report.folds.iter().map(|f| f.accuracy).collect();
    let m = accs.iter().sum::<f64>() / accs.len() as f64;
    let sd = (accs.iter().map(|a| (a - m).powi(2)).sum::<f64>() / accs.len() as f64).sqrt();
    assert_eq!(report.accuracy(), (m, sd));
    assert_eq!(report.confusion.total(), 400);
    assert_eq!(report.folds.iter().map(|f| f.n_test).sum::<usize>(), 400);
    let csv = report.to_csv();
    assert_eq!(csv.lines().count(), 1 + 10 + 2);
    assert!(csv.lines().nth(11).unwrap().starts_with("mean,"));
    let strong = report.confusion.normalized().0;
    assert!((0..5).all(|c| strong[c][c] > 0.2), "{strong:?}");
}

#[test]
fn provenance_audit_finds_no_leak_over_ten_folds() {
    let records = banded_records(600, 6);
    for alg in [Algorithm::Baseline(BaselineKind::Knn), Algorithm::Baseline(BaselineKind::Nb)] {
        let report = run_cv(&alg, &records, &quick_cfg(4)).unwrap();
        assert_eq!(report.audits.len(), 10);
        report.check_no_leak().unwrap();
        let mut tested = BTreeSet::new();
        for a in &report.audits {
            assert!(!a.resampler_input.is_empty());
            assert_eq!(a.standardizer_fit.len() + a.test.len(), 600);
            assert!(a.standardizer_fit.is_disjoint(&a.test));
            assert!(a.resampler_input.is_disjoint(&a.test));
            assert!(a.model_fit.contains(&RowOrigin::Synthetic));
            tested.extend(a.test.iter().copied());
        }
        assert_eq!(tested.len(), 600);
    }
}

#[test]
fn audit_rejects_a_leaked_row() {
    let audit = FoldAudit {
        fold: 3,
        test: [RowOrigin::Record(7)].into(),
        standardizer_fit: [RowOrigin::Record(1), RowOrigin::Record(7)].into(),
        ..Default::default()
    };
    assert!(matches!(audit.check(), Err(Error::Leak(_))));
}

#[test]
fn class_missing_from_a_training_portion_is_reported() {
    let mut records = banded_records(200, 7);
    records.retain(|r| r.raw_vote != 2.0);
    records.push(record(30.5, 50.0, 2));
    let report = run_cv(&Algorithm::Baseline(BaselineKind::Nb), &records, &quick_cfg(5)).unwrap();
    assert!(report.notes.iter().any(|n| n.contains("class +2")), "{:?}", report.notes);
}

#[test]
fn pmv_algorithm_runs_without_fitting() {
    let records = banded_records(200, 8);
    let report = run_cv(&Algorithm::Pmv, &records, &quick_cfg(6)).unwrap();
    assert!(report.audits.iter().all(|a| a.standardizer_fit.is_empty()));
    assert_eq!(report.confusion.total(), 200);
}

#[test]
fn scenario_is_deterministic_and_teacher_exact() {
    let spec = SyntheticSpec::default();
    let a = generate_synthetic_scenario(&spec, 9).unwrap();
    assert_eq!(a, generate_synthetic_scenario(&spec, 9).unwrap());
    assert_ne!(a.source, generate_synthetic_scenario(&spec, 10).unwrap().source);
    assert_eq!(a.source.len(), 5000);
    assert_eq!(a.target_train.len(), 300);
    for (r, &clean) in a.target_test.iter().zip(&a.target_test_clean) {
        let z = standardized_inputs(r).unwrap();
        assert_eq!(a.teacher.classify(&z, ClimateZone::C), clean);
    }
    let zones: BTreeSet<_> = a.source.iter().filter_map(|r| r.climate_zone).collect();
    assert_eq!(zones.len(), 4);
}

#[test]
fn zone_matched_pool_is_closer_to_target() {
    let set = FeatureSet::source_shared();
    for seed in 0..3 {
        let s = generate_synthetic_scenario(&SyntheticSpec::default(), seed).unwrap();
        let same: Vec<ComfortRecord> = s
            .source
            .iter()
            .filter(|r| r.climate_zone == Some(ClimateZone::C))
            .cloned()
            .collect();
        let d_zone = mean_shift_distance(&same, &s.target_train, &set).unwrap();
        let d_all = mean_shift_distance(&s.source, &s.target_train, &set).unwrap();
        assert!(d_zone < d_all, "seed {seed}: {d_zone} vs {d_all}");
    }
}

#[test]
fn ablation_has_three_groups_and_age_helps() {
    let algs = [Algorithm::Baseline(BaselineKind::Forest)];
    let (mut xa, mut xb) = (0.0, 0.0);
    for seed in 0..5 {
        let s = generate_synthetic_scenario(
            &SyntheticSpec {
                target_train: 400,
                ..Default::default()
            },
            seed,
        )
        .unwrap();
        let cfg = CvConfig {
            k: 5,
            ..quick_cfg(seed)
        };
        let rows = run_feature_ablation(&s.target_train, &algs, &cfg).unwrap();
        let labels: Vec<&str> = rows.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, ["Xa", "Xb", "Xc"]);
        xa += rows[0].accuracy_mean;
        xb += rows[1].accuracy_mean;
        let csv = summary_csv("feature_set", &rows);
        assert_eq!(csv.lines().count(), 4);
    }
    assert!(xb >= xa, "Xb {} < Xa {}", xb / 5.0, xa / 5.0);
}

#[test]
fn xa_design_matrix_has_only_pmv_factors() {
    let names = FeatureSet::xa().names();
    assert_eq!(names.len(), 6);
    for banned in ["age", "gender", "outdoor_at", "outdoor_rh"] {
        assert!(!names.iter().any(|n| n == banned));
    }
}

#[test]
fn sweep_reports_every_depth() {
    let s = generate_synthetic_scenario(
        &SyntheticSpec {
            source_rows: 800,
            target_train: 120,
            ..Default::default()
        },
        1,
    )
    .unwrap();
    let cfg = CvConfig {
        k: 3,
        train: TrainConfig::fine_tune(0).with_epochs(20),
        resampler: Resampler::None,
        ..Default::default()
    };
    let rows = run_hidden_layer_sweep(
        &s.target_train,
        &s.source,
        &[],
        &[1, 2, 3, 4],
        SourcePool::AllHvac,
        TrainConfig::source(1).with_epochs(10),
        &cfg,
    )
    .unwrap();
    assert_eq!(rows.iter().map(|r| r.label.as_str()).collect::<Vec<_>>(), ["1", "2", "3", "4"]);
    assert_eq!(rows[0].note, "no lower layers adapted");
    assert!(rows[1..].iter().all(|r| r.note.is_empty()));
}
