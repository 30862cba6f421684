use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use lossforge::data::{gen_checkerboard, gen_random_labels, gen_spiral, load_mnist_dir, Dataset, TOY_SPLIT_SIZE};
use lossforge::harness::{parse_manifest, TrainConfig};
use lossforge::losses::{LossId, Sigma};
use lossforge::numerics::Rng;

use crate::{CliError, CliResult};

pub const RESULTS_DIR_ENV: &str = "LOSSFORGE_RESULTS_DIR";
pub const MNIST_DIR_ENV: &str = "LOSSFORGE_MNIST_DIR";

const DEFAULT_RESULTS_DIR: &str = "results";
const DEFAULT_MNIST_DIR: &str = "data/mnist";

/// Training examples and iterations used for MNIST unless `--full` is given.
pub const MNIST_DESK_SUBSET: usize = 10_000;
pub const MNIST_DESK_ITERATIONS: usize = 20_000;

const SPIRAL_ARMS: usize = 4;
const TOY_CLASSES: usize = 4;

/// Manifest keys that describe a run but are not config fields.
const INFORMATIONAL_KEYS: &[&str] = &[
    "dataset",
    "data_seed",
    "train_size",
    "test_size",
    "status",
    "model",
    "noise_interpretation",
    "noise_seed",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DatasetName {
    Checkerboard,
    Spiral,
    Random,
    Mnist,
}

impl DatasetName {
    pub fn name(self) -> &'static str {
        match self {
            DatasetName::Checkerboard => "checkerboard",
            DatasetName::Spiral => "spiral",
            DatasetName::Random => "random",
            DatasetName::Mnist => "mnist",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        <Self as ValueEnum>::from_str(s, false).ok()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SigmaArg {
    Softmax,
    Sigmoid,
}

impl From<SigmaArg> for Sigma {
    fn from(s: SigmaArg) -> Sigma {
        match s {
            SigmaArg::Softmax => Sigma::Softmax,
            SigmaArg::Sigmoid => Sigma::Sigmoid,
        }
    }
}

pub fn parse_loss(s: &str) -> Result<LossId, String> {
    s.parse::<LossId>().map_err(|e| e.to_string())
}

/// Losses chosen on the command line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LossSet(pub Vec<LossId>);

/// `all`, or comma-separated loss ids.
pub fn parse_loss_set(s: &str) -> Result<LossSet, String> {
    if s == "all" {
        return Ok(LossSet(LossId::ALL.to_vec()));
    }
    s.split(',').map(|part| parse_loss(part.trim())).collect::<Result<_, _>>().map(LossSet)
}

/// Where the data comes from.
#[derive(Clone, Debug, Args)]
pub struct DataArgs {
    /// Seed for generating toy datasets
    #[arg(long, default_value_t = 0)]
    pub data_seed: u64,
    /// Directory holding the four MNIST IDX files [env: LOSSFORGE_MNIST_DIR, default: data/mnist]
    #[arg(long)]
    pub mnist_dir: Option<PathBuf>,
    /// MNIST only: train on all 60k examples with the 100k-iteration protocol
    #[arg(long)]
    pub full: bool,
}

/// Hyperparameters shared by every training command. Flags override values
/// read from `--config`, which override the dataset's built-in defaults.
#[derive(Clone, Debug, Default, Args)]
pub struct HyperArgs {
    /// key=value manifest to start from, e.g. a manifest.txt written by a previous run
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Units per hidden layer
    #[arg(long)]
    pub width: Option<usize>,
    /// Probability of keeping a hidden unit during training
    #[arg(long)]
    pub dropout_keep: Option<f64>,
    /// Adam learning rate
    #[arg(long)]
    pub lr: Option<f64>,
    /// Training iterations
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Minibatch size
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Seed for initialisation, batch order and dropout
    #[arg(long)]
    pub seed: Option<u64>,
    /// Iterations between recorded checkpoints; must divide --iterations
    #[arg(long)]
    pub eval_every: Option<usize>,
    /// Squashing function for probability-based losses
    #[arg(long, value_enum)]
    pub sigma: Option<SigmaArg>,
}

/// Resolved configuration for one run or one grid.
pub struct Resolved {
    pub dataset: DatasetName,
    pub config: TrainConfig,
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Builds the config for `loss`/`depth` from defaults, then `--config`, then flags.
pub fn resolve(
    dataset: Option<DatasetName>,
    data: &DataArgs,
    hyper: &HyperArgs,
    loss: Option<LossId>,
    depth: Option<usize>,
) -> CliResult<Resolved> {
    let manifest = match &hyper.config {
        Some(path) => Some(read_text(path)?),
        None => None,
    };
    let entries = match &manifest {
        Some(text) => parse_manifest(text).map_err(|e| CliError::Usage(e.to_string()))?,
        None => Vec::new(),
    };
    let manifest_dataset = entries
        .iter()
        .find(|(k, _)| k == "dataset")
        .map(|(_, v)| DatasetName::parse(v).ok_or_else(|| CliError::Usage(format!("config: unknown dataset `{v}`"))))
        .transpose()?;
    let dataset = dataset.or(manifest_dataset).unwrap_or(DatasetName::Checkerboard);

    let mut config = if dataset == DatasetName::Mnist {
        let mut c = TrainConfig::mnist(LossId::Log);
        if !data.full {
            c.iterations = MNIST_DESK_ITERATIONS;
        }
        c
    } else {
        TrainConfig::toy(LossId::Log)
    };

    if let Some(text) = &manifest {
        let unknown = config.apply_manifest(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        for key in unknown.iter().filter(|k| !INFORMATIONAL_KEYS.contains(&k.as_str()) && !k.starts_with("status_")) {
            eprintln!("warning: config: ignoring unknown key `{key}`");
        }
    }

    if let Some(loss) = loss {
        config.loss.id = loss;
    }
    if let Some(depth) = depth {
        config.hidden_layers = depth;
    }
    if let Some(v) = hyper.width {
        config.hidden_width = v;
    }
    if let Some(v) = hyper.dropout_keep {
        config.dropout_keep = v;
    }
    if let Some(v) = hyper.lr {
        config.adam.lr = v;
    }
    if let Some(v) = hyper.iterations {
        config.iterations = v;
    }
    if let Some(v) = hyper.batch_size {
        config.batch_size = v;
    }
    if let Some(v) = hyper.seed {
        config.seed = v;
    }
    if let Some(v) = hyper.eval_every {
        config.eval_every = v;
    }
    if let Some(v) = hyper.sigma {
        config.loss.sigma = v.into();
    }
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(Resolved { dataset, config })
}

pub fn results_root(flag: Option<&Path>) -> PathBuf {
    match flag {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(RESULTS_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_RESULTS_DIR)),
    }
}

fn mnist_dir(flag: Option<&Path>) -> PathBuf {
    match flag {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(MNIST_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_MNIST_DIR)),
    }
}

/// Train/test splits for `dataset`, generated or loaded.
pub fn load_dataset(dataset: DatasetName, data: &DataArgs) -> CliResult<(Dataset, Dataset)> {
    let failed = |e: lossforge::Error| CliError::Failed(e.to_string());
    let mut rng = Rng::new(data.data_seed);
    match dataset {
        DatasetName::Checkerboard => gen_checkerboard(TOY_SPLIT_SIZE, &mut rng).map_err(failed),
        DatasetName::Spiral => {
            gen_spiral(TOY_SPLIT_SIZE, SPIRAL_ARMS, lossforge::data::SPIRAL_DEFAULT_NOISE, &mut rng).map_err(failed)
        }
        DatasetName::Random => {
            let train = gen_random_labels(TOY_SPLIT_SIZE, 2, TOY_CLASSES, &mut rng).map_err(failed)?;
            let test = gen_random_labels(TOY_SPLIT_SIZE, 2, TOY_CLASSES, &mut rng).map_err(failed)?;
            Ok((train, test))
        }
        DatasetName::Mnist => {
            let dir = mnist_dir(data.mnist_dir.as_deref());
            let (train, test) = load_mnist_dir(&dir)
                .map_err(|e| CliError::Usage(format!("cannot load MNIST from {}: {e}", dir.display())))?;
            if data.full {
                Ok((train, test))
            } else {
                Ok((train.head(MNIST_DESK_SUBSET), test))
            }
        }
    }
}

/// Manifest lines describing where the data came from.
pub fn data_manifest(dataset: DatasetName, data: &DataArgs, train: &Dataset, test: &Dataset) -> Vec<(String, String)> {
    let mut out = vec![("dataset".to_string(), dataset.name().to_string())];
    if dataset != DatasetName::Mnist {
        out.push(("data_seed".into(), data.data_seed.to_string()));
    }
    out.push(("train_size".into(), train.len().to_string()));
    out.push(("test_size".into(), test.len().to_string()));
    out
}

/// Comma-separated numbers from the command line.
#[derive(Clone, Debug, PartialEq)]
pub struct NumberList(pub Vec<f64>);

pub fn parse_f64_list(s: &str) -> Result<NumberList, String> {
    s.split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<f64>().map_err(|_| format!("`{part}` is not a number"))
        })
        .collect::<Result<_, _>>()
        .map(NumberList)
}

pub fn parse_usize_list(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<usize>().map_err(|_| format!("`{part}` is not a count"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> DataArgs {
        DataArgs {
            data_seed: 0,
            mnist_dir: None,
            full: false,
        }
    }

    #[test]
    fn flags_beat_manifest_beat_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        fs::write(&path, "dataset=mnist\nlr=0.001\nseed=9\nstatus=completed\n").unwrap();
        let hyper = HyperArgs {
            config: Some(path),
            seed: Some(4),
            ..HyperArgs::default()
        };
        let r = resolve(None, &data(), &hyper, Some(LossId::Hinge2), None).unwrap();
        assert_eq!(r.dataset, DatasetName::Mnist);
        assert_eq!(r.config.adam.lr, 0.001);
        assert_eq!(r.config.seed, 4);
        assert_eq!(r.config.loss.id, LossId::Hinge2);
        assert_eq!(r.config.iterations, MNIST_DESK_ITERATIONS);
        assert_eq!(r.config.batch_size, 100);
    }

    #[test]
    fn toy_defaults() {
        let r = resolve(None, &data(), &HyperArgs::default(), None, None).unwrap();
        assert_eq!(r.dataset, DatasetName::Checkerboard);
        assert_eq!(r.config, TrainConfig::toy(LossId::Log));
    }

    #[test]
    fn invalid_combination_is_a_usage_error() {
        let hyper = HyperArgs {
            iterations: Some(100),
            eval_every: Some(7),
            ..HyperArgs::default()
        };
        assert!(matches!(resolve(None, &data(), &hyper, None, None), Err(CliError::Usage(_))));
    }

    #[test]
    fn loss_sets() {
        assert_eq!(parse_loss_set("all").unwrap().0.len(), 12);
        assert_eq!(parse_loss_set("log, hinge2").unwrap().0, vec![LossId::Log, LossId::Hinge2]);
        assert!(parse_loss_set("log,nope").unwrap_err().contains("tanimoto"));
    }
}
