mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relprop::metrics::{auc_pr, auc_roc, mean_std};

fn random_instance<R: Rng>(rng: &mut R) -> (Vec<f64>, Vec<bool>) {
    let n = rng.gen_range(1..=20);
    let levels = rng.gen_range(1..=10);
    let scores = (0..n).map(|_| rng.gen_range(0..levels) as f64 / levels as f64).collect();
    let labels = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    (scores, labels)
}

#[test]
fn roc_equals_pair_count_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..2000 {
        let (s, l) = random_instance(&mut rng);
        assert_eq!(auc_roc(&s, &l), pairwise_auc(&s, &l), "{s:?} {l:?}");
    }
}

#[test]
fn pr_equals_threshold_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..2000 {
        let (s, l) = random_instance(&mut rng);
        match (auc_pr(&s, &l), threshold_ap(&s, &l)) {
            (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-12, "{a} vs {b}"),
            (a, b) => assert_eq!(a, b),
        }
    }
}

#[test]
fn documented_metric_cases() {
    assert_eq!(auc_roc(&[0.9, 0.8, 0.4, 0.3], &[true, true, false, false]), Some(1.0));
    assert_eq!(auc_roc(&[0.4, 0.8], &[true, false]), Some(0.0));
    assert_eq!(auc_roc(&[0.4, 0.8], &[true, true]), None);
    assert_eq!(auc_pr(&[0.9, 0.8, 0.4, 0.3], &[true, true, false, false]), Some(1.0));
    let prevalence = auc_pr(&[0.5; 5], &[true, false, false, true, false]).unwrap();
    assert!((prevalence - 0.4).abs() <= 1e-15);
    assert_eq!(auc_pr(&[0.5, 0.1], &[false, false]), None);
}

#[test]
fn sample_standard_deviation() {
    let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
    assert_eq!(m, 2.5);
    assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    assert_eq!(mean_std(&[7.0]), (7.0, 0.0));
}
