//! Analytic loss gradients against central finite differences, plus the
//! shape properties of the loss zoo.

use lossforge::losses::{LossId, LossSpec, Sigma};
use lossforge::numerics::{finite_diff_grad, max_relative_error, softmax, Dense2, Rng, DEFAULT_STEP};
use proptest::prelude::*;

/// Distance from every kink an evaluation point must keep.
const KINK_CLEARANCE: f64 = 1e-3;

fn random_batch(rng: &mut Rng) -> (Dense2, Dense2) {
    let n = 1 + rng.below(4);
    let k = 2 + rng.below(9);
    let mut y = Dense2::zeros(n, k);
    let mut o = Dense2::zeros(n, k);
    for r in 0..n {
        y.set(r, rng.below(k), 1.0);
        for c in 0..k {
            o.set(r, c, 2.0 * rng.normal());
        }
    }
    (y, o)
}

fn probabilities(spec: &LossSpec, o: &[f64]) -> Vec<f64> {
    match spec.sigma {
        Sigma::Softmax => softmax(o).unwrap(),
        Sigma::Sigmoid => o.iter().map(|&v| 1.0 / (1.0 + (-v).exp())).collect(),
    }
}

/// Whether `o` keeps clear of every point where `spec` is not differentiable.
fn clear_of_kinks(spec: &LossSpec, y: &Dense2, o: &Dense2) -> bool {
    match spec.id {
        LossId::L1 => o
            .as_slice()
            .iter()
            .zip(y.as_slice())
            .all(|(o, y)| (o - y).abs() > KINK_CLEARANCE),
        LossId::Hinge | LossId::Hinge2 | LossId::Hinge3 => {
            o.as_slice().iter().zip(y.as_slice()).all(|(o, y)| {
                let s = 2.0 * y - 1.0;
                (spec.hinge_margin - s * o).abs() > KINK_CLEARANCE
            })
        }
        LossId::Chebyshev => y.row_iter().zip(o.row_iter()).all(|(y, o)| {
            let p = probabilities(spec, o);
            let mut d: Vec<f64> = p.iter().zip(y).map(|(p, y)| (p - y).abs()).collect();
            d.sort_by(|a, b| b.total_cmp(a));
            d[0] - d[1] > 1e-4
        }),
        _ => true,
    }
}

fn gradient_error(spec: &LossSpec, y: &Dense2, o: &Dense2) -> f64 {
    let analytic = spec.evaluate(y, o).unwrap().grad;
    let (rows, cols) = o.shape();
    let numeric = finite_diff_grad(
        |flat| {
            let probe = Dense2::new(rows, cols, flat.to_vec()).unwrap();
            spec.evaluate(y, &probe).unwrap().value
        },
        o.as_slice(),
        DEFAULT_STEP,
    );
    max_relative_error(analytic.as_slice(), &numeric)
}

fn check_all_points(spec: LossSpec, seed: u64) {
    let mut rng = Rng::new(seed);
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    while checked < 200 {
        let (y, o) = random_batch(&mut rng);
        if !clear_of_kinks(&spec, &y, &o) {
            continue;
        }
        worst = worst.max(gradient_error(&spec, &y, &o));
        checked += 1;
    }
    assert!(worst < 1e-5, "{:?}/{:?}: worst relative error {worst:e}", spec.id, spec.sigma);
}

#[test]
fn every_loss_matches_finite_differences_under_softmax() {
    for (i, loss) in LossId::ALL.into_iter().enumerate() {
        check_all_points(LossSpec::new(loss), 100 + i as u64);
    }
}

#[test]
fn probability_losses_match_finite_differences_under_sigmoid() {
    for (i, loss) in LossId::ALL.into_iter().enumerate() {
        if loss.default_sigma().is_some() {
            check_all_points(LossSpec::new(loss).with_sigma(Sigma::Sigmoid), 200 + i as u64);
        }
    }
}

#[test]
fn log_loss_gradient_is_p_minus_y() {
    let mut rng = Rng::new(3);
    for _ in 0..50 {
        let (y, o) = random_batch(&mut rng);
        let eval = LossSpec::new(LossId::Log).evaluate(&y, &o).unwrap();
        let n = y.rows() as f64;
        for r in 0..y.rows() {
            let p = softmax(o.row(r)).unwrap();
            for c in 0..y.cols() {
                let expected = (p[c] - y.get(r, c)) / n;
                assert!((eval.grad.get(r, c) - expected).abs() < 1e-15);
            }
        }
        assert!(gradient_error(&LossSpec::new(LossId::Log), &y, &o) < 1e-7);
    }
}

fn per_coordinate_gradient(loss: LossId, y: &[f64], o: &[f64]) -> Vec<f64> {
    let y = Dense2::from_rows(&[y]).unwrap();
    let o = Dense2::from_rows(&[o]).unwrap();
    LossSpec::new(loss).evaluate(&y, &o).unwrap().grad.into_vec()
}

fn second_difference(loss: LossId, y: &[f64], o: &[f64], dir: &[f64], t: f64) -> f64 {
    let at = |s: f64| -> Vec<f64> {
        let point: Vec<f64> = o.iter().zip(dir).map(|(o, d)| o + s * d).collect();
        per_coordinate_gradient(loss, y, &point)
    };
    let (a, b, c) = (at(0.0), at(t), at(2.0 * t));
    a.iter()
        .zip(&b)
        .zip(&c)
        .map(|((a, b), c)| (a - 2.0 * b + c).abs())
        .fold(0.0, f64::max)
}

#[test]
fn l2_and_squared_hinge_have_piecewise_linear_gradients() {
    let y = [0.0, 1.0, 0.0];
    let dir = [0.3, -0.2, 0.1];
    // all three probes violate every margin, so they share one linear piece
    let o = [0.1, 0.2, -0.1];
    assert!(second_difference(LossId::L2, &y, &o, &dir, 0.1) < 1e-12);
    assert!(second_difference(LossId::Hinge2, &y, &o, &dir, 0.1) < 1e-12);
    // gradient is not constant on the piece
    assert!(per_coordinate_gradient(LossId::Hinge2, &y, &o) != per_coordinate_gradient(LossId::Hinge2, &y, &[0.4, 0.0, 0.0]));
    // softmax-based losses bend
    assert!(second_difference(LossId::Log, &y, &o, &dir, 0.5) > 1e-4);
    assert!(second_difference(LossId::ExpectationL2, &y, &o, &dir, 0.5) > 1e-4);
}

#[test]
fn sigmoid_expectation_slope_is_non_monotonic() {
    let y = Dense2::from_rows(&[[1.0]]).unwrap();
    let spec = LossSpec::new(LossId::ExpectationL1).with_sigma(Sigma::Sigmoid);
    let slope = |o: f64| spec.evaluate(&y, &Dense2::from_rows(&[[o]]).unwrap()).unwrap().grad.get(0, 0);
    let (left, mid, right) = (slope(-30.0), slope(0.0), slope(30.0));
    assert_eq!(mid, -0.25);
    assert!(left.abs() < 1e-10 && right.abs() < 1e-10);
    assert!(mid.abs() > left.abs() && mid.abs() > right.abs());
}

/// Output at which each loss attains its minimum for one-hot `y`.
fn ideal_output(loss: LossId, y: &[f64]) -> Vec<f64> {
    match loss {
        LossId::L1 | LossId::L2 => y.to_vec(),
        LossId::Hinge | LossId::Hinge2 | LossId::Hinge3 => y.iter().map(|v| 5.0 * (2.0 * v - 1.0)).collect(),
        _ => y.iter().map(|v| 40.0 * v).collect(),
    }
}

#[test]
fn ideal_outputs_are_minimisers() {
    let mut rng = Rng::new(17);
    for loss in LossId::ALL {
        let spec = LossSpec::new(loss);
        for _ in 0..5 {
            let k = 2 + rng.below(8);
            let mut y = vec![0.0; k];
            y[rng.below(k)] = 1.0;
            let yd = Dense2::from_rows(&[&y]).unwrap();
            let best = ideal_output(loss, &y);
            let best_value = spec.evaluate(&yd, &Dense2::from_rows(&[&best]).unwrap()).unwrap().value;
            let infimum = if loss == LossId::Tanimoto { -1.0 } else { 0.0 };
            assert!((best_value - infimum).abs() < 1e-12, "{loss}: {best_value}");
            for _ in 0..100 {
                let scale = 0.1 + 3.0 * rng.uniform();
                let other: Vec<f64> = best.iter().map(|b| b + scale * rng.normal()).collect();
                let value = spec.evaluate(&yd, &Dense2::from_rows(&[&other]).unwrap()).unwrap().value;
                // softmax outputs only approach the infimum, so allow the tail mass
                assert!(best_value <= value + 1e-12, "{loss}: {best_value} > {value}");
            }
        }
    }
}

proptest! {
    #[test]
    fn permuting_classes_permutes_gradients(
        seed in any::<u64>(),
        loss_index in 0usize..12,
        k in 2usize..8,
    ) {
        let loss = LossId::ALL[loss_index];
        let spec = LossSpec::new(loss);
        let mut rng = Rng::new(seed);
        let mut y = vec![0.0; k];
        y[rng.below(k)] = 1.0;
        let o: Vec<f64> = (0..k).map(|_| 2.0 * rng.normal()).collect();
        let mut perm: Vec<usize> = (0..k).collect();
        rng.shuffle(&mut perm);
        let py: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
        let po: Vec<f64> = perm.iter().map(|&i| o[i]).collect();

        let base = spec.evaluate(&Dense2::from_rows(&[&y]).unwrap(), &Dense2::from_rows(&[&o]).unwrap()).unwrap();
        let permuted = spec.evaluate(&Dense2::from_rows(&[&py]).unwrap(), &Dense2::from_rows(&[&po]).unwrap()).unwrap();
        prop_assert!((base.value - permuted.value).abs() < 1e-12);
        // Chebyshev routes ties to the lowest index, which a permutation moves
        let tied = loss == LossId::Chebyshev && {
            let p = softmax(&o).unwrap();
            let mut d: Vec<f64> = p.iter().zip(&y).map(|(p, y)| (p - y).abs()).collect();
            d.sort_by(|a, b| b.total_cmp(a));
            d[0] == d[1]
        };
        if !tied {
            for (j, &i) in perm.iter().enumerate() {
                prop_assert!((permuted.grad.get(0, j) - base.grad.get(0, i)).abs() < 1e-12);
            }
        }
    }
}
