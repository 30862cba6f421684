use lossforge::losses::{LossId, LossSpec};
use lossforge::nn::{mlp_specs, Mode, MlpModel};
use lossforge::numerics::{finite_diff_grad, max_relative_error, softmax, Dense2, Rng, DEFAULT_STEP};

/// A 2 → 3 → 3 rectifier net and a batch whose hidden pre-activations and
/// loss inputs all stay clear of kinks.
fn smooth_problem(loss: LossSpec, rng: &mut Rng) -> (MlpModel, Dense2, Dense2) {
    loop {
        let mut model = MlpModel::init(&mlp_specs(2, 1, 3, 3, 1.0), rng).unwrap();
        for b in model.layers_mut().iter_mut().flat_map(|l| l.bias.iter_mut()) {
            *b = 0.3 * rng.normal();
        }
        model.set_mode(Mode::Train);
        let x = Dense2::new(4, 2, (0..8).map(|_| rng.normal()).collect()).unwrap();
        let mut y = Dense2::zeros(4, 3);
        for r in 0..4 {
            y.set(r, rng.below(3), 1.0);
        }

        let first = &model.layers()[0];
        let mut pre = x.matmul(&first.weights).unwrap();
        pre.add_bias(&first.bias).unwrap();
        if pre.as_slice().iter().any(|v| v.abs() < 1e-3) {
            continue;
        }
        let o = model.forward_eval(&x).unwrap();
        let kinked = match loss.id {
            LossId::L1 => o.as_slice().iter().zip(y.as_slice()).any(|(o, y)| (o - y).abs() < 1e-3),
            LossId::Hinge | LossId::Hinge2 | LossId::Hinge3 => {
                o.as_slice().iter().zip(y.as_slice()).any(|(o, y)| {
                    (loss.hinge_margin - (2.0 * y - 1.0) * o).abs() < 1e-3
                })
            }
            LossId::Chebyshev => y.row_iter().zip(o.row_iter()).any(|(y, o)| {
                let p = softmax(o).unwrap();
                let mut d: Vec<f64> = p.iter().zip(y).map(|(p, y)| (p - y).abs()).collect();
                d.sort_by(|a, b| b.total_cmp(a));
                d[0] - d[1] < 1e-3
            }),
            _ => false,
        };
        if !kinked {
            return (model, x, y);
        }
    }
}

#[test]
fn backprop_matches_finite_differences_for_every_loss() {
    let mut rng = Rng::new(2024);
    for loss in LossId::ALL {
        let spec = LossSpec::new(loss);
        for _ in 0..5 {
            let (model, x, y) = smooth_problem(spec, &mut rng);
            let (o, cache) = model.forward(&x, &mut rng).unwrap();
            let eval = spec.evaluate(&y, &o).unwrap();
            let analytic = model.backward(&cache, &eval.grad).unwrap().flatten();

            let numeric = finite_diff_grad(
                |params| {
                    let mut probe = model.clone();
                    probe.set_params_flat(params).unwrap();
                    let o = probe.forward_eval(&x).unwrap();
                    spec.evaluate(&y, &o).unwrap().value
                },
                &model.params_flat(),
                DEFAULT_STEP,
            );
            let err = max_relative_error(&analytic, &numeric);
            assert!(err < 1e-4, "{loss}: relative error {err:e}");
        }
    }
}

#[test]
fn dropout_is_unbiased_in_expectation() {
    let mut rng = Rng::new(5);
    let mut model = MlpModel::init(&mlp_specs(3, 1, 50, 2, 0.5), &mut rng).unwrap();
    // nonnegative weights keep the outputs away from zero so a relative bound is meaningful
    for layer in model.layers_mut() {
        for w in layer.weights.as_mut_slice() {
            *w = w.abs();
        }
    }
    let x = Dense2::from_rows(&[[0.5, 1.0, 0.2], [1.5, 0.1, 0.7]]).unwrap();
    let expected = model.forward_eval(&x).unwrap();

    model.set_mode(Mode::Train);
    let trials = 10_000;
    let mut sum = vec![0.0; expected.as_slice().len()];
    for _ in 0..trials {
        let (o, _) = model.forward(&x, &mut rng).unwrap();
        for (s, v) in sum.iter_mut().zip(o.as_slice()) {
            *s += v;
        }
    }
    for (s, e) in sum.iter().zip(expected.as_slice()) {
        let mean = s / trials as f64;
        assert!((mean - e).abs() <= 0.02 * e.abs(), "mean {mean} vs eval {e}");
    }
}

#[test]
fn untrained_ten_class_model_is_at_chance() {
    let mut rng = Rng::new(9);
    let n = 5000;
    let x = Dense2::new(n, 20, (0..n * 20).map(|_| rng.normal()).collect()).unwrap();
    let labels: Vec<usize> = (0..n).map(|_| rng.below(10)).collect();
    let model = MlpModel::init(&mlp_specs(20, 2, 64, 10, 1.0), &mut rng).unwrap();
    let acc = model.accuracy(&x, &labels).unwrap();
    assert!((acc - 0.1).abs() <= 0.03, "{acc}");
}

#[test]
fn evaluation_is_identical_across_threads() {
    let mut rng = Rng::new(12);
    let model = MlpModel::init(&mlp_specs(10, 3, 40, 4, 0.5), &mut rng).unwrap();
    let x = Dense2::new(2500, 10, (0..25_000).map(|_| rng.normal()).collect()).unwrap();
    let serial = model.forward_eval(&x).unwrap();
    let outputs: Vec<Dense2> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..4).map(|_| s.spawn(|| model.forward_eval(&x).unwrap())).collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for o in outputs {
        assert_eq!(o.as_slice(), serial.as_slice());
    }
}
