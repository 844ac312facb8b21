mod common;

use common::knn_oracle;
use comfort_core::baselines::{
    brute_force_nearest, fit_forest, fit_knn, fit_nb, fit_random, fit_tree, gini_gain, BaselineKind, BaselineModel,
    BaselineParams, ForestParams, KdTree, MaxFeatures, TreeParams,
};
use comfort_core::dataset::SensationClass;
use comfort_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn class(v: i8) -> SensationClass {
    SensationClass::new(v).unwrap()
}

fn accuracy(a: &[SensationClass], b: &[SensationClass]) -> f64 {
    a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / a.len() as f64
}

/// Two tight clusters far apart, labelled -1 / +1.
fn separated(n: usize, seed: u64) -> (Matrix, Vec<SensationClass>) {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Matrix::empty(2);
    let mut y = Vec::new();
    for i in 0..n {
        let (c, l) = if i % 2 == 0 { (-5.0, -1) } else { (5.0, 1) };
        x.push_row(&[c + r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)]);
        y.push(class(l));
    }
    (x, y)
}

/// Overlapping clusters with 15% label noise over five classes.
fn noisy_clusters(n: usize, seed: u64) -> (Matrix, Vec<SensationClass>) {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Matrix::empty(4);
    let mut y = Vec::new();
    for _ in 0..n {
        let k = r.gen_range(0..5usize);
        let centre = k as f64 * 1.2;
        x.push_row(&[
            centre + r.gen_range(-1.0..1.0),
            -centre + r.gen_range(-1.0..1.0),
            r.gen_range(-1.0..1.0),
            r.gen_range(-1.0..1.0),
        ]);
        let label = if r.gen_bool(0.15) { r.gen_range(0..5) } else { k };
        y.push(SensationClass::from_index(label));
    }
    (x, y)
}

fn random_points(n: usize, d: usize, seed: u64) -> Matrix {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_vec(n, d, (0..n * d).map(|_| r.gen_range(-3.0..3.0)).collect())
}

#[test]
fn random_degenerate_distribution() {
    let m = fit_random(&[class(0); 20], 1).unwrap();
    assert!(m.predict_random(500).iter().all(|&c| c == class(0)));
    assert!(fit_random(&[], 1).is_err());
}

#[test]
fn random_frequencies_converge() {
    let labels: Vec<_> = (0..100).map(|i| if i % 2 == 0 { class(0) } else { class(1) }).collect();
    let m = fit_random(&labels, 3).unwrap();
    let draws = m.predict_random(100_000);
    let ones = draws.iter().filter(|&&c| c == class(1)).count() as f64 / 1e5;
    assert!((ones - 0.5).abs() <= 0.01, "{ones}");
    assert!(draws.iter().all(|&c| c == class(0) || c == class(1)));
    assert_eq!(m.predict_random(50), fit_random(&labels, 3).unwrap().predict_random(50));
}

#[test]
fn knn_exact_match_with_k1() {
    let (x, y) = separated(40, 2);
    let m = fit_knn(&x, &y, 1).unwrap();
    assert_eq!(m.predict_knn(&x).unwrap(), y);
}

#[test]
fn knn_separable_clusters() {
    let (x, y) = separated(100, 1);
    let (q, truth) = separated(60, 9);
    let m = fit_knn(&x, &y, 5).unwrap();
    assert_eq!(accuracy(&m.predict_knn(&q).unwrap(), &truth), 1.0);
}

#[test]
fn kd_tree_equals_brute_force() {
    for (d, seed) in [(2, 1), (3, 2), (8, 3)] {
        let x = random_points(200, d, seed);
        let rows: Vec<Vec<f64>> = x.iter_rows().map(<[f64]>::to_vec).collect();
        let tree = KdTree::build(&x);
        let queries = random_points(50, d, seed + 100);
        for q in queries.iter_rows() {
            for k in [1, 5, 17] {
                let want = knn_oracle::nearest(&rows, q, k);
                assert_eq!(tree.nearest(&x, q, k), want);
                assert_eq!(brute_force_nearest(&x, q, k), want);
            }
        }
    }
}

#[test]
fn kd_tree_handles_duplicates() {
    let x = Matrix::from_rows(&vec![vec![1.0, 1.0]; 30]);
    let tree = KdTree::build(&x);
    assert_eq!(tree.nearest(&x, &[1.0, 1.0], 3), vec![0, 1, 2]);
}

#[test]
fn knn_rejects_bad_k() {
    let (x, y) = separated(4, 1);
    assert!(fit_knn(&x, &y, 0).is_err());
    assert!(fit_knn(&x, &y, 5).is_err());
}

#[test]
fn knn_vote_tie_goes_low() {
    let x = Matrix::from_rows(&[vec![-1.0], vec![1.0]]);
    let m = fit_knn(&x, &[class(2), class(-1)], 2).unwrap();
    assert_eq!(m.predict_knn(&Matrix::from_rows(&[vec![0.0]])).unwrap(), vec![class(-1)]);
}

#[test]
fn nb_exact_and_separable() {
    let (x, y) = separated(100, 4);
    let m = fit_nb(&x, &y).unwrap();
    assert_eq!(accuracy(&m.predict_nb(&x).unwrap(), &y), 1.0);
    let (q, truth) = separated(50, 5);
    assert_eq!(accuracy(&m.predict_nb(&q).unwrap(), &truth), 1.0);
}

#[test]
fn nb_hand_computed_posterior() {
    // one feature; class -1 at {0, 2} (mean 1, var 1), class 1 at {4, 6} (mean 5, var 1)
    let x = Matrix::from_rows(&[vec![0.0], vec![2.0], vec![4.0], vec![6.0]]);
    let y = [class(-1), class(-1), class(1), class(1)];
    let m = fit_nb(&x, &y).unwrap();
    let lp = m.log_posterior(&[2.5]);
    let norm = -0.5 * (2.0 * std::f64::consts::PI).ln() + 0.5f64.ln();
    assert!((lp[0] - (norm - 1.5f64.powi(2) / 2.0)).abs() < 1e-12);
    assert!((lp[1] - (norm - 2.5f64.powi(2) / 2.0)).abs() < 1e-12);
    assert_eq!(m.predict_nb(&Matrix::from_rows(&[vec![2.5]])).unwrap(), vec![class(-1)]);
}

#[test]
fn nb_constant_feature_uses_variance_floor() {
    let x = Matrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 5.0], vec![1.0, 6.0]]);
    let y = [class(0), class(0), class(2), class(2)];
    let m = fit_nb(&x, &y).unwrap();
    assert!(m.var.iter().all(|v| v[0] == 1e-9));
    assert_eq!(m.predict_nb(&x).unwrap(), y);
}

#[test]
fn gini_gain_of_perfect_split() {
    let parent = [2, 2, 0, 0, 0];
    assert_eq!(gini_gain(&parent, &[2, 0, 0, 0, 0], &[0, 2, 0, 0, 0]), 0.5);
}

#[test]
fn unlimited_tree_memorizes_consistent_data() {
    let x = random_points(300, 4, 8);
    let mut r = ChaCha8Rng::seed_from_u64(1);
    let y: Vec<_> = (0..300).map(|_| SensationClass::from_index(r.gen_range(0..5))).collect();
    let t = fit_tree(&x, &y, TreeParams::default()).unwrap();
    assert_eq!(t.predict(&x).unwrap(), y);
}

#[test]
fn xor_is_memorized() {
    let x = Matrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]);
    let y = [class(0), class(1), class(1), class(0)];
    assert_eq!(fit_tree(&x, &y, TreeParams::default()).unwrap().predict(&x).unwrap(), y);
}

#[test]
fn single_tree_forest_without_bootstrap_is_the_tree() {
    let (x, y) = noisy_clusters(200, 3);
    let tree = fit_tree(&x, &y, TreeParams::default()).unwrap();
    let forest = fit_forest(
        &x,
        &y,
        ForestParams {
            n_trees: 1,
            bootstrap: false,
            max_features: MaxFeatures::All,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(forest.trees[0], tree);
    let q = random_points(100, 4, 4);
    assert_eq!(forest.predict(&q).unwrap(), tree.predict(&q).unwrap());
}

#[test]
fn forest_beats_tree_on_noisy_clusters() {
    let (mut tree_acc, mut forest_acc) = (0.0, 0.0);
    for seed in 0..10 {
        let (x, y) = noisy_clusters(400, seed);
        let (q, truth) = noisy_clusters(400, seed + 1000);
        let t = fit_tree(&x, &y, TreeParams { seed, ..Default::default() }).unwrap();
        let f = fit_forest(&x, &y, ForestParams { seed, ..Default::default() }).unwrap();
        tree_acc += accuracy(&t.predict(&q).unwrap(), &truth);
        forest_acc += accuracy(&f.predict(&q).unwrap(), &truth);
    }
    assert!(forest_acc >= tree_acc, "forest {forest_acc} < tree {tree_acc}");
}

#[test]
fn every_baseline_is_deterministic_and_length_preserving() {
    let (x, y) = noisy_clusters(150, 2);
    let q = random_points(37, 4, 3);
    let params = BaselineParams {
        n_trees: 10,
        seed: 5,
        ..Default::default()
    };
    for kind in BaselineKind::ALL {
        let a = BaselineModel::fit(kind, &x, &y, &params).unwrap().predict(&q).unwrap();
        let b = BaselineModel::fit(kind, &x, &y, &params).unwrap().predict(&q).unwrap();
        assert_eq!(a.len(), 37, "{kind}");
        assert_eq!(a, b, "{kind}");
        assert_eq!(kind.as_str().parse::<BaselineKind>().unwrap(), kind);
    }
}

#[test]
fn empty_training_sets_rejected() {
    let x = Matrix::empty(3);
    assert!(fit_tree(&x, &[], TreeParams::default()).is_err());
    assert!(fit_forest(&x, &[], ForestParams::default()).is_err());
    assert!(fit_nb(&x, &[]).is_err());
}
