use std::collections::BTreeMap;

use comfort_core::dataset::{class_counts, Domain, DomainDataset, RowOrigin, SensationClass};
use comfort_core::resampling::{
    make_plan, oversample_gan, oversample_interpolation, plan_for_labels, present_counts, resample_dataset,
    GanConfig, Resampler, SynthesizerTag,
};
use comfort_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn class(v: i8) -> SensationClass {
    SensationClass::new(v).unwrap()
}

fn counts(pairs: &[(i8, usize)]) -> BTreeMap<SensationClass, usize> {
    pairs.iter().map(|&(c, n)| (class(c), n)).collect()
}

/// Random 3-D rows with the given class sizes.
fn labelled(sizes: &[(i8, usize)], seed: u64) -> (Matrix, Vec<SensationClass>) {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Matrix::empty(3);
    let mut y = Vec::new();
    for &(c, n) in sizes {
        for _ in 0..n {
            x.push_row(&[
                f64::from(c) + r.gen_range(-0.5..0.5),
                r.gen_range(-1.0..1.0),
                r.gen_range(0.0..2.0),
            ]);
            y.push(class(c));
        }
    }
    (x, y)
}

#[test]
fn imbalanced_counts_grow_by_half() {
    let plan = make_plan(&counts(&[(0, 981), (-1, 416), (1, 367), (-2, 139), (2, 118)])).unwrap();
    let want = [(0, 981), (-1, 624), (1, 551), (-2, 208), (2, 177)];
    for (c, n) in want {
        let got = plan.targets[&class(c)] as i64;
        assert!((got - n).abs() <= 1, "class {c}: {got} vs {n}");
    }
    assert_eq!(plan.targets[&class(0)], 981);
    assert_eq!(plan.targets[&class(-1)], 624);
    assert_eq!(plan.targets[&class(2)], 177);
}

#[test]
fn cap_at_majority() {
    let plan = make_plan(&counts(&[(0, 100), (1, 80)])).unwrap();
    assert_eq!(plan.targets[&class(1)], 100);
}

#[test]
fn single_synthetic_point_is_on_the_segment() {
    let x = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![5.0, 5.0], vec![6.0, 6.0], vec![7.0, 7.0]]);
    let y = vec![class(1), class(1), class(0), class(0), class(0)];
    let mut plan = make_plan(&present_counts(&y)).unwrap();
    plan.targets.insert(class(1), 3);
    for seed in 0..20 {
        plan.seed = seed;
        let out = oversample_interpolation(&x, &y, &plan).unwrap();
        assert_eq!(out.synthetic(), 1);
        let p = out.x.row(5);
        assert!((p[0] - p[1]).abs() < 1e-12 && (0.0..=1.0).contains(&p[0]), "{p:?}");
        assert_eq!(out.labels[5], class(1));
    }
}

#[test]
fn synthetic_rows_stay_in_the_class_hull_box() {
    let (x, y) = labelled(&[(0, 60), (1, 20), (-1, 9)], 3);
    let out = oversample_interpolation(&x, &y, &plan_for_labels(&y, SynthesizerTag::Interpolation, 4).unwrap()).unwrap();
    for r in out.original..out.labels.len() {
        let c = out.labels[r];
        let members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c).collect();
        for col in 0..3 {
            let lo = members.iter().map(|&i| x.get(i, col)).fold(f64::INFINITY, f64::min);
            let hi = members.iter().map(|&i| x.get(i, col)).fold(f64::NEG_INFINITY, f64::max);
            let v = out.x.get(r, col);
            assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }
}

#[test]
fn plan_equal_to_counts_is_identity() {
    let (x, y) = labelled(&[(0, 10), (1, 10)], 1);
    let plan = plan_for_labels(&y, SynthesizerTag::Interpolation, 1).unwrap();
    let out = oversample_interpolation(&x, &y, &plan).unwrap();
    assert_eq!(out.x, x);
    assert_eq!(out.labels, y);
}

#[test]
fn counts_match_plan_and_originals_are_kept() {
    let (x, y) = labelled(&[(0, 50), (1, 21), (-2, 7), (2, 1)], 5);
    let plan = plan_for_labels(&y, SynthesizerTag::Interpolation, 9).unwrap();
    let out = oversample_interpolation(&x, &y, &plan).unwrap();
    for (c, &t) in &plan.targets {
        assert_eq!(out.labels.iter().filter(|l| *l == c).count(), t);
    }
    for r in 0..x.rows() {
        assert_eq!(out.x.row(r), x.row(r));
    }
    // single-row class is duplicated
    let lone = (0..out.labels.len()).filter(|&i| out.labels[i] == class(2)).collect::<Vec<_>>();
    assert_eq!(lone.len(), 2);
    assert_eq!(out.x.row(lone[0]), out.x.row(lone[1]));
}

#[test]
fn interpolation_is_deterministic() {
    let (x, y) = labelled(&[(0, 40), (1, 12)], 2);
    let plan = plan_for_labels(&y, SynthesizerTag::Interpolation, 11).unwrap();
    let a = oversample_interpolation(&x, &y, &plan).unwrap();
    let b = oversample_interpolation(&x, &y, &plan).unwrap();
    assert_eq!(a, b);
    let other = plan.clone().with_synthesizer(SynthesizerTag::Interpolation, 12);
    assert_ne!(oversample_interpolation(&x, &y, &other).unwrap().x, a.x);
}

#[test]
fn plan_class_without_rows_is_an_error() {
    let (x, y) = labelled(&[(0, 10), (1, 4)], 2);
    let mut plan = plan_for_labels(&y, SynthesizerTag::Interpolation, 1).unwrap();
    plan.targets.insert(class(-2), 3);
    assert!(oversample_interpolation(&x, &y, &plan).is_err());
}

fn gaussian_class(n: usize, d: usize, seed: u64) -> Matrix {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_vec(n, d, (0..n * d).map(|_| StandardNormal.sample(&mut r)).collect())
}

#[test]
fn gan_matches_gaussian_moments() {
    let d = 3;
    let minority = gaussian_class(500, d, 1);
    let majority = gaussian_class(1000, d, 2);
    let x = minority.vstack(&majority);
    let mut y = vec![class(-1); 500];
    y.extend(vec![class(0); 1000]);
    let plan = plan_for_labels(&y, SynthesizerTag::Gan, 3).unwrap();
    let cfg = GanConfig { seed: 4, ..Default::default() };
    let out = oversample_gan(&x, &y, &plan, &cfg).unwrap();
    assert!(out.fallbacks.is_empty());
    assert_eq!(out.synthetic(), 250);
    for col in 0..d {
        let real: Vec<f64> = (0..500).map(|r| minority.get(r, col)).collect();
        let fake: Vec<f64> = (out.original..out.labels.len()).map(|r| out.x.get(r, col)).collect();
        let (rm, rs) = moments(&real);
        let (fm, fs) = moments(&fake);
        assert!((fm - rm).abs() <= 0.3, "column {col}: mean {fm} vs {rm}");
        assert!((fs - rs).abs() <= 0.4, "column {col}: std {fs} vs {rs}");
    }
}

fn moments(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    (m, var.sqrt())
}

#[test]
fn gan_zero_deficit_never_trains() {
    let (x, y) = labelled(&[(0, 30), (1, 30)], 1);
    let plan = plan_for_labels(&y, SynthesizerTag::Gan, 1).unwrap();
    // an epoch count this large would not finish if training ran
    let cfg = GanConfig {
        epochs: usize::MAX,
        ..Default::default()
    };
    let out = oversample_gan(&x, &y, &plan, &cfg).unwrap();
    assert_eq!(out.x, x);
}

#[test]
fn gan_is_deterministic() {
    let (x, y) = labelled(&[(0, 60), (1, 20)], 7);
    let plan = plan_for_labels(&y, SynthesizerTag::Gan, 2).unwrap();
    let cfg = GanConfig {
        epochs: 20,
        seed: 5,
        ..Default::default()
    };
    let a = oversample_gan(&x, &y, &plan, &cfg).unwrap();
    let b = oversample_gan(&x, &y, &plan, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.synthetic(), 10);
}

#[test]
fn gan_divergence_falls_back_to_interpolation() {
    let (x, y) = labelled(&[(0, 60), (1, 20)], 7);
    let plan = plan_for_labels(&y, SynthesizerTag::Gan, 2).unwrap();
    let cfg = GanConfig {
        epochs: 5,
        generator_lr: 1e300,
        discriminator_lr: 1e300,
        ..Default::default()
    };
    let out = oversample_gan(&x, &y, &plan, &cfg).unwrap();
    assert_eq!(out.fallbacks, vec![class(1)]);
    assert_eq!(out.synthetic(), 10);
    assert!(out.x.is_finite());
}

#[test]
fn dataset_resampling_tags_synthetic_rows() {
    let (x, y) = labelled(&[(0, 30), (2, 10)], 3);
    let origins: Vec<RowOrigin> = (100..140).map(RowOrigin::Record).collect();
    let names = vec!["a".to_string(), "b".into(), "c".into()];
    let data = DomainDataset::with_origins(x, y, names, Domain::Target, origins).unwrap();
    let (out, report) = resample_dataset(&data, &Resampler::Interpolation, 1).unwrap();
    assert_eq!(out.len(), 45);
    assert_eq!(report.achieved, class_counts(&out.labels));
    assert_eq!(out.origins.iter().filter(|o| **o == RowOrigin::Synthetic).count(), 5);
    assert_eq!(out.origins[..40], data.origins[..]);
    assert!(report.consumed.iter().all(|o| matches!(o, RowOrigin::Record(i) if *i >= 130)));
    let (same, r) = resample_dataset(&data, &Resampler::None, 1).unwrap();
    assert_eq!(same, data);
    assert!(r.consumed.is_empty());
}
