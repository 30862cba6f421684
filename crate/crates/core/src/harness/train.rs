use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::{mlp_specs, MlpModel, Mode};
use crate::numerics::Rng;
use crate::optim::AdamState;

use super::TrainConfig;

// Independent generator streams derived from the run seed.
const INIT_STREAM: u64 = 1;
const BATCH_STREAM: u64 = 2;
const DROPOUT_STREAM: u64 = 3;

/// Metrics at one checkpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunRecord {
    pub iteration: usize,
    /// Mean minibatch loss since the previous checkpoint.
    pub train_loss: f64,
    pub train_acc: f64,
    pub test_acc: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunStatus {
    Completed,
    /// Loss or gradient went non-finite at `iteration`; parameters are those
    /// of the previous iteration.
    Diverged {
        iteration: usize,
        last_checkpoint: Option<usize>,
        reason: String,
    },
}

impl RunStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, RunStatus::Completed)
    }

    pub fn describe(&self) -> String {
        match self {
            RunStatus::Completed => "completed".into(),
            RunStatus::Diverged {
                iteration,
                last_checkpoint,
                reason,
            } => format!(
                "diverged at iteration {iteration} (last checkpoint {}): {reason}",
                last_checkpoint.map_or("none".to_string(), |c| c.to_string())
            ),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub records: Vec<RunRecord>,
    /// In eval mode.
    pub model: MlpModel,
    pub status: RunStatus,
}

/// Cycles through shuffled epochs of `0..n`, reshuffling after every pass.
struct EpochSampler {
    order: Vec<usize>,
    cursor: usize,
    rng: Rng,
}

impl EpochSampler {
    fn new(n: usize, mut rng: Rng) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut order);
        EpochSampler { order, cursor: 0, rng }
    }

    fn next_batch(&mut self, size: usize, out: &mut Vec<usize>) {
        out.clear();
        while out.len() < size {
            if self.cursor == self.order.len() {
                self.rng.shuffle(&mut self.order);
                self.cursor = 0;
            }
            let take = (size - out.len()).min(self.order.len() - self.cursor);
            out.extend_from_slice(&self.order[self.cursor..self.cursor + take]);
            self.cursor += take;
        }
    }
}

pub fn train(config: &TrainConfig, train_set: &Dataset, test_set: &Dataset) -> Result<TrainOutcome> {
    train_observed(config, train_set, test_set, |_| {})
}

/// [`train`], calling `observer` with every checkpoint as it is produced.
pub fn train_observed(
    config: &TrainConfig,
    train_set: &Dataset,
    test_set: &Dataset,
    mut observer: impl FnMut(&RunRecord),
) -> Result<TrainOutcome> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    if train_set.dim() != test_set.dim() || train_set.classes() != test_set.classes() {
        return Err(Error::InvalidArgument(format!(
            "train set is {}-d with {} classes, test set is {}-d with {} classes",
            train_set.dim(),
            train_set.classes(),
            test_set.dim(),
            test_set.classes()
        )));
    }

    let specs = mlp_specs(
        train_set.dim(),
        config.hidden_layers,
        config.hidden_width,
        train_set.classes(),
        config.dropout_keep,
    );
    let mut model = MlpModel::init(&specs, &mut Rng::with_stream(config.seed, INIT_STREAM))?;
    model.set_mode(Mode::Train);
    let mut adam = AdamState::for_model(config.adam, &mut model);
    let mut sampler = EpochSampler::new(train_set.len(), Rng::with_stream(config.seed, BATCH_STREAM));
    let mut dropout_rng = Rng::with_stream(config.seed, DROPOUT_STREAM);

    let targets = train_set.one_hot();
    let mut batch = Vec::with_capacity(config.batch_size);
    let mut records = Vec::with_capacity(config.iterations / config.eval_every);
    let mut loss_sum = 0.0;
    let mut loss_count = 0usize;
    let mut status = RunStatus::Completed;

    for iteration in 1..=config.iterations {
        sampler.next_batch(config.batch_size, &mut batch);
        let xb = train_set.x().select_rows(&batch);
        let yb = targets.select_rows(&batch);

        let step = (|| -> Result<f64> {
            let (o, cache) = model.forward(&xb, &mut dropout_rng)?;
            let eval = config.loss.evaluate(&yb, &o)?;
            if !eval.value.is_finite() {
                return Err(Error::NonFinite { op: "loss value" });
            }
            let grads = model.backward(&cache, &eval.grad)?;
            adam.step(&mut model.param_slices_mut(), &grads.slices())?;
            Ok(eval.value)
        })();

        match step {
            Ok(value) => {
                loss_sum += value;
                loss_count += 1;
            }
            Err(e @ (Error::NonFinite { .. } | Error::NonFiniteGradient { .. })) => {
                status = RunStatus::Diverged {
                    iteration,
                    last_checkpoint: records.last().map(|r: &RunRecord| r.iteration),
                    reason: e.to_string(),
                };
                break;
            }
            Err(e) => return Err(e),
        }

        if iteration % config.eval_every == 0 {
            let record = RunRecord {
                iteration,
                train_loss: loss_sum / loss_count as f64,
                train_acc: model.accuracy(train_set.x(), train_set.labels())?,
                test_acc: model.accuracy(test_set.x(), test_set.labels())?,
            };
            observer(&record);
            records.push(record);
            loss_sum = 0.0;
            loss_count = 0;
        }
    }

    model.set_mode(Mode::Eval);
    Ok(TrainOutcome {
        records,
        model,
        status,
    })
}
