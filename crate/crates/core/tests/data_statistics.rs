//! Monte-Carlo checks of the generators and noise models.

use lossforge::data::{
    add_input_noise, corrupt_labels, gen_checkerboard, gen_random_labels, gen_spiral, spiral_point, Dataset,
    NoiseScale,
};
use lossforge::numerics::{Dense2, Rng};
use proptest::prelude::*;

fn fractions(counts: &[usize]) -> Vec<f64> {
    let total: usize = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

#[test]
fn checkerboard_classes_are_balanced() {
    let (train, test) = gen_checkerboard(50_000, &mut Rng::new(1)).unwrap();
    let mut counts = train.class_counts();
    for (c, t) in counts.iter_mut().zip(test.class_counts()) {
        *c += t;
    }
    for f in fractions(&counts) {
        assert!((f - 0.25).abs() < 0.01, "{counts:?}");
    }
}

#[test]
fn checkerboard_labels_follow_cells() {
    let (train, _) = gen_checkerboard(2000, &mut Rng::new(2)).unwrap();
    for (row, &label) in train.x().row_iter().zip(train.labels()) {
        assert!(row.iter().all(|v| (-1.0..=1.0).contains(v)));
        // independent restatement of the cell rule
        let ix = (((row[0] + 1.0) * 4.0).floor() as usize).min(7);
        let iy = (((row[1] + 1.0) * 4.0).floor() as usize).min(7);
        assert_eq!(label, (ix + iy) % 4);
    }
}

#[test]
fn random_labels_are_uniform() {
    let data = gen_random_labels(100_000, 2, 4, &mut Rng::new(3)).unwrap();
    for f in fractions(&data.class_counts()) {
        assert!((f - 0.25).abs() < 0.01);
    }
}

#[test]
fn spiral_points_stay_near_their_arm() {
    let (train, _) = gen_spiral(900, 3, 0.0, &mut Rng::new(4)).unwrap();
    assert_eq!(train.class_counts(), vec![300, 300, 300]);
    for (row, &label) in train.x().row_iter().zip(train.labels()) {
        let t = (row[0] * row[0] + row[1] * row[1]).sqrt();
        let p = spiral_point(t, label, 3);
        assert!((p[0] - row[0]).abs() < 1e-12 && (p[1] - row[1]).abs() < 1e-12);
    }
}

fn zeros(n: usize, d: usize) -> Dataset {
    Dataset::new(Dense2::zeros(n, d), vec![0; n], 2).unwrap()
}

fn sample_moments(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[test]
fn noise_variance_matches_interpretation() {
    let base = zeros(100_000, 10);
    let eps = 0.3;
    for (scale, expected_var) in [(NoiseScale::StdDev, eps * eps), (NoiseScale::Variance, eps)] {
        let noisy = add_input_noise(&base, eps, scale, &mut Rng::new(5)).unwrap();
        let values = noisy.x().as_slice();
        let (mean, var) = sample_moments(values);
        assert!((var / expected_var - 1.0).abs() < 0.01, "{scale}: {var}");
        let bound = 3.0 * expected_var.sqrt() / (values.len() as f64).sqrt();
        assert!(mean.abs() < bound, "{scale}: mean {mean}");
    }
}

#[test]
fn label_corruption_rate_is_exact() {
    let data = gen_random_labels(10_000, 2, 10, &mut Rng::new(6)).unwrap();
    for fraction in [0.0, 0.1, 0.333, 0.5, 1.0] {
        let corrupted = corrupt_labels(&data, fraction, &mut Rng::new(7)).unwrap();
        let changed = data.labels().iter().zip(corrupted.labels()).filter(|(a, b)| a != b).count();
        assert_eq!(changed, (fraction * 10_000.0_f64).round() as usize);
        assert_eq!(corrupted.x(), data.x());
    }
}

#[test]
fn corrupted_labels_are_spread_over_other_classes() {
    let data = Dataset::new(Dense2::zeros(40_000, 1), vec![0; 40_000], 5).unwrap();
    let corrupted = corrupt_labels(&data, 1.0, &mut Rng::new(8)).unwrap();
    let counts = corrupted.class_counts();
    assert_eq!(counts[0], 0);
    for f in &fractions(&counts)[1..] {
        assert!((f - 0.25).abs() < 0.01, "{counts:?}");
    }
}

proptest! {
    #[test]
    fn corruption_changes_exactly_the_requested_count(
        seed in any::<u64>(),
        n in 1usize..300,
        classes in 2usize..12,
        fraction in 0.0..=1.0f64,
    ) {
        let data = gen_random_labels(n, 1, classes, &mut Rng::new(seed)).unwrap();
        let corrupted = corrupt_labels(&data, fraction, &mut Rng::new(seed ^ 1)).unwrap();
        let changed = data.labels().iter().zip(corrupted.labels()).filter(|(a, b)| a != b).count();
        prop_assert_eq!(changed, (fraction * n as f64).round() as usize);
        prop_assert!(corrupted.labels().iter().all(|&l| l < classes));
    }
}
