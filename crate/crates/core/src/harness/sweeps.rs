use std::collections::BTreeMap;

use crate::data::{add_input_noise, corrupt_labels, Dataset, NoiseScale};
use crate::error::{Error, Result};
use crate::nn::MlpModel;
use crate::numerics::Rng;

use super::{train, RunRecord, RunStatus, TrainConfig};

const INPUT_NOISE_STREAM: u64 = 0x1000;
const LABEL_NOISE_STREAM: u64 = 0x2000;

/// Expected accuracy when the evaluation iteration is drawn uniformly from
/// the checkpoints inside a window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpeedMetric {
    pub train_acc: f64,
    pub test_acc: f64,
    pub checkpoints: usize,
}

/// Mean train/test accuracy over checkpoints with `lo ≤ iteration ≤ hi`.
/// Repeated iterations count once (first occurrence wins).
pub fn speed_metric(records: &[RunRecord], lo: usize, hi: usize) -> Result<SpeedMetric> {
    let mut window = BTreeMap::new();
    for r in records.iter().filter(|r| (lo..=hi).contains(&r.iteration)) {
        window.entry(r.iteration).or_insert(r);
    }
    if window.is_empty() {
        return Err(Error::EmptyRange { lo, hi });
    }
    let n = window.len() as f64;
    Ok(SpeedMetric {
        train_acc: window.values().map(|r| r.train_acc).sum::<f64>() / n,
        test_acc: window.values().map(|r| r.test_acc).sum::<f64>() / n,
        checkpoints: window.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoisePoint {
    pub epsilon: f64,
    pub accuracy: f64,
}

/// Accuracy of `model` on `data` perturbed with fresh Gaussian noise for each
/// ε. The noise for a given ε depends only on `(seed, ε)`.
pub fn input_noise_sweep(
    model: &MlpModel,
    data: &Dataset,
    epsilons: &[f64],
    scale: NoiseScale,
    seed: u64,
) -> Result<Vec<NoisePoint>> {
    epsilons
        .iter()
        .map(|&epsilon| {
            let mut rng = Rng::with_stream(seed, INPUT_NOISE_STREAM ^ epsilon.to_bits());
            let noisy = add_input_noise(data, epsilon, scale, &mut rng)?;
            Ok(NoisePoint {
                epsilon,
                accuracy: model.accuracy(noisy.x(), noisy.labels())?,
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct LabelNoiseRun {
    pub fraction: f64,
    pub records: Vec<RunRecord>,
    pub status: RunStatus,
}

/// Retrains from scratch on training labels corrupted at each fraction.
///
/// The corruption draw is seeded from `(config.seed, fraction)`; the training
/// run itself uses `config.seed` unchanged, so fraction 0 reproduces
/// [`train`] exactly.
pub fn label_noise_sweep(
    config: &TrainConfig,
    train_set: &Dataset,
    test_set: &Dataset,
    fractions: &[f64],
) -> Result<Vec<LabelNoiseRun>> {
    fractions
        .iter()
        .map(|&fraction| {
            let mut rng = Rng::with_stream(config.seed, LABEL_NOISE_STREAM ^ fraction.to_bits());
            let corrupted = corrupt_labels(train_set, fraction, &mut rng)?;
            let outcome = train(config, &corrupted, test_set)?;
            Ok(LabelNoiseRun {
                fraction,
                records: outcome.records,
                status: outcome.status,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(iteration: usize, acc: f64) -> RunRecord {
        RunRecord {
            iteration,
            train_loss: 0.0,
            train_acc: acc,
            test_acc: acc / 2.0,
        }
    }

    #[test]
    fn constant_accuracy() {
        let records: Vec<_> = (1..=100).map(|i| rec(i * 1000, 0.8)).collect();
        let m = speed_metric(&records, 10_000, 100_000).unwrap();
        assert!((m.train_acc - 0.8).abs() < 1e-12);
        assert!((m.test_acc - 0.4).abs() < 1e-12);
        assert_eq!(m.checkpoints, 91);
    }

    #[test]
    fn two_checkpoints() {
        let m = speed_metric(&[rec(10, 0.5), rec(20, 1.0)], 10, 20).unwrap();
        assert_eq!(m.train_acc, 0.75);
    }

    #[test]
    fn linear_ramp_averages_to_one_half() {
        // accuracy rises linearly from 0 at lo to 1 at hi on an even grid;
        // the closed-form mean of a linear ramp is 1/2
        let (lo, hi, step) = (10_000, 100_000, 100);
        let records: Vec<_> = (lo..=hi)
            .step_by(step)
            .map(|i| rec(i, (i - lo) as f64 / (hi - lo) as f64))
            .collect();
        let m = speed_metric(&records, lo, hi).unwrap();
        assert!((m.train_acc - 0.5).abs() < step as f64 / (hi - lo) as f64);
    }

    #[test]
    fn duplicated_checkpoints_do_not_change_the_metric() {
        let records: Vec<_> = (1..=10).map(|i| rec(i, i as f64 / 10.0)).collect();
        let mut doubled = Vec::new();
        for r in &records {
            doubled.push(*r);
            doubled.push(*r);
        }
        assert_eq!(
            speed_metric(&records, 3, 8).unwrap(),
            speed_metric(&doubled, 3, 8).unwrap()
        );
    }

    #[test]
    fn empty_window_is_an_error() {
        assert!(matches!(
            speed_metric(&[rec(5, 1.0)], 10, 20),
            Err(Error::EmptyRange { lo: 10, hi: 20 })
        ));
    }
}
