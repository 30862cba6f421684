use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use lossforge::data::{Dataset, NoiseScale};
use lossforge::harness::io::{curve_csv, input_noise_csv, label_noise_csv, manifest_text, write_atomic};
use lossforge::harness::{
    cell_dir, grid_run, input_noise_sweep, label_noise_sweep, train_observed, CellStatus, GridDataset, GridOptions,
    GridSpec, RunRecord, RunStatus, TrainConfig, TrainOutcome, CURVE_FILE, MANIFEST_FILE, MODEL_FILE,
};
use lossforge::losses::LossId;
use lossforge::nn::{load_checkpoint, save_checkpoint, MlpModel};

use crate::options::{
    data_manifest, load_dataset, parse_f64_list, parse_loss, parse_loss_set, parse_usize_list, resolve, results_root,
    DataArgs, DatasetName, HyperArgs, LossSet, NumberList,
};
use crate::{CliError, CliResult};

pub const INPUT_NOISE_FILE: &str = "input_noise.csv";
pub const LABEL_NOISE_FILE: &str = "label_noise.csv";

const DEFAULT_EPSILONS: &str = "0,0.001,0.003,0.01,0.03,0.1,0.3,1,3,10,30,100";
const DEFAULT_FRACTIONS: &str = "0,0.2,0.5,0.8";

/// One loss at one depth.
#[derive(Debug, Args)]
pub struct RunArgs {
    /// Loss id [default: log, or the loss named in --config]
    #[arg(long, value_parser = parse_loss)]
    pub loss: Option<LossId>,
    /// Hidden layers, 0-5 [default: 5 on toys, 0 on mnist]
    #[arg(long)]
    pub depth: Option<usize>,
    /// Dataset [default: checkerboard, or the dataset named in --config]
    #[arg(long, value_enum)]
    pub dataset: Option<DatasetName>,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Results root [env: LOSSFORGE_RESULTS_DIR, default: results]
    #[arg(long)]
    pub results_dir: Option<PathBuf>,
    /// Do not print checkpoints to stderr
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Directory for curve.csv, manifest.txt and model.txt [default: <results-dir>/<dataset>/<loss>/<depth>]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Comma-separated datasets
    #[arg(long, default_value = "checkerboard,spiral", value_parser = parse_dataset_set)]
    pub datasets: DatasetSet,
    /// Loss ids, comma-separated, or `all`
    #[arg(long, default_value = "all", value_parser = parse_loss_set)]
    pub losses: LossSet,
    /// Comma-separated hidden-layer counts
    #[arg(long, default_value = "0,1,2,3,4,5", value_parser = parse_depth_set)]
    pub depths: DepthSet,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Worker threads; results do not depend on this
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Also write model.txt for every cell
    #[arg(long)]
    pub save_models: bool,
    /// Results root [env: LOSSFORGE_RESULTS_DIR, default: results]
    #[arg(long)]
    pub results_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NoiseInterpretation {
    /// ε is the per-coordinate variance
    Variance,
    /// ε is the per-coordinate standard deviation
    Sd,
}

impl From<NoiseInterpretation> for NoiseScale {
    fn from(n: NoiseInterpretation) -> NoiseScale {
        match n {
            NoiseInterpretation::Variance => NoiseScale::Variance,
            NoiseInterpretation::Sd => NoiseScale::StdDev,
        }
    }
}

#[derive(Debug, Args)]
pub struct NoiseInputArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Evaluate this checkpoint instead of training a model first
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Comma-separated noise levels ε
    #[arg(long, default_value = DEFAULT_EPSILONS, value_parser = parse_f64_list)]
    pub epsilons: NumberList,
    /// How ε in N(0, εI) is read
    #[arg(long, value_enum, default_value_t = NoiseInterpretation::Variance)]
    pub noise_interpretation: NoiseInterpretation,
    /// Seed for the noise draws [default: the training seed]
    #[arg(long)]
    pub noise_seed: Option<u64>,
    /// CSV to write [default: <results-dir>/<dataset>/<loss>/<depth>/input_noise.csv]
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NoiseLabelArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Comma-separated fractions of training labels to corrupt
    #[arg(long, default_value = DEFAULT_FRACTIONS, value_parser = parse_f64_list)]
    pub fractions: NumberList,
    /// CSV to write [default: <results-dir>/<dataset>/<loss>/<depth>/label_noise.csv]
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct DatasetSet(pub Vec<DatasetName>);

#[derive(Clone, Debug)]
pub struct DepthSet(pub Vec<usize>);

fn parse_dataset_set(s: &str) -> Result<DatasetSet, String> {
    s.split(',')
        .map(|part| DatasetName::from_str(part.trim(), false))
        .collect::<Result<_, _>>()
        .map(DatasetSet)
}

fn parse_depth_set(s: &str) -> Result<DepthSet, String> {
    parse_usize_list(s).map(DepthSet)
}

fn failed(e: lossforge::Error) -> CliError {
    CliError::Failed(e.to_string())
}

/// `<output>` plus a `key=value` manifest beside it.
fn manifest_path(output: &Path) -> PathBuf {
    output.with_extension("manifest.txt")
}

fn describe(record: Option<&RunRecord>) -> String {
    match record {
        Some(r) => format!(
            "iteration {} train_loss {:.6} train_acc {:.4} test_acc {:.4}",
            r.iteration, r.train_loss, r.train_acc, r.test_acc
        ),
        None => "no checkpoints".into(),
    }
}

struct Prepared {
    dataset: DatasetName,
    config: TrainConfig,
    train: Dataset,
    test: Dataset,
    manifest: Vec<(String, String)>,
}

fn prepare(run: &RunArgs) -> CliResult<Prepared> {
    let resolved = resolve(run.dataset, &run.data, &run.hyper, run.loss, run.depth)?;
    let (train, test) = load_dataset(resolved.dataset, &run.data)?;
    let mut manifest = data_manifest(resolved.dataset, &run.data, &train, &test);
    manifest.extend(
        resolved
            .config
            .manifest_entries()
            .into_iter()
            .map(|(k, v)| (k.to_string(), v)),
    );
    Ok(Prepared {
        dataset: resolved.dataset,
        config: resolved.config,
        train,
        test,
        manifest,
    })
}

fn run_training(p: &Prepared, quiet: bool) -> CliResult<TrainOutcome> {
    train_observed(&p.config, &p.train, &p.test, |r| {
        if !quiet {
            eprintln!("{}", describe(Some(r)));
        }
    })
    .map_err(failed)
}

fn default_dir(run: &RunArgs, p: &Prepared) -> PathBuf {
    cell_dir(
        &results_root(run.results_dir.as_deref()),
        p.dataset.name(),
        p.config.loss.id,
        p.config.hidden_layers,
    )
}

fn diverged(status: &RunStatus) -> CliResult {
    match status {
        RunStatus::Completed => Ok(()),
        other => Err(CliError::Failed(other.describe())),
    }
}

pub fn train(args: &TrainArgs) -> CliResult {
    let p = prepare(&args.run)?;
    let outcome = run_training(&p, args.run.quiet)?;
    let dir = args.out.clone().unwrap_or_else(|| default_dir(&args.run, &p));

    let mut manifest = p.manifest.clone();
    manifest.push(("status".into(), outcome.status.describe()));
    write_atomic(&dir.join(CURVE_FILE), curve_csv(&outcome.records).as_bytes()).map_err(failed)?;
    let mut model = Vec::new();
    save_checkpoint(&outcome.model, &mut model).map_err(failed)?;
    write_atomic(&dir.join(MODEL_FILE), &model).map_err(failed)?;
    write_atomic(&dir.join(MANIFEST_FILE), manifest_text(&manifest).as_bytes()).map_err(failed)?;

    println!(
        "{} {} depth {}: {} ({})",
        p.dataset.name(),
        p.config.loss.id,
        p.config.hidden_layers,
        describe(outcome.records.last()),
        outcome.status.describe()
    );
    println!("wrote {}", dir.display());
    diverged(&outcome.status)
}

pub fn grid(args: &GridArgs) -> CliResult {
    if args.jobs == 0 {
        return Err(CliError::Usage("--jobs must be positive".into()));
    }
    if let Some(&d) = args.depths.0.iter().find(|&&d| d > lossforge::harness::MAX_HIDDEN_LAYERS) {
        return Err(CliError::Usage(format!(
            "depth {d} exceeds the maximum of {}",
            lossforge::harness::MAX_HIDDEN_LAYERS
        )));
    }
    let root = results_root(args.results_dir.as_deref());
    let options = GridOptions {
        jobs: args.jobs,
        save_models: args.save_models,
    };

    let mut cells = Vec::new();
    for &dataset in &args.datasets.0 {
        let resolved = resolve(Some(dataset), &args.data, &args.hyper, None, None)?;
        let (train, test) = load_dataset(dataset, &args.data)?;
        let mut extra = data_manifest(dataset, &args.data, &train, &test);
        // the cell writer records the dataset itself
        extra.retain(|(k, _)| k != "dataset");
        let spec = GridSpec {
            losses: args.losses.0.clone(),
            depths: args.depths.0.clone(),
            base: resolved.config,
            extra_manifest: extra,
        };
        let data = [GridDataset {
            name: dataset.name(),
            train: &train,
            test: &test,
        }];
        let report = grid_run(&spec, &data, &root, options, |cell| {
            eprintln!(
                "{}/{}/{}: {}",
                cell.dataset,
                cell.loss,
                cell.depth,
                describe(cell.final_record())
            );
        });
        cells.extend(report.cells);
    }

    println!("{:<14} {:<15} {:>5} {:>9} {:>9}  status", "dataset", "loss", "depth", "train_acc", "test_acc");
    let mut failures = 0;
    for cell in &cells {
        let (train_acc, test_acc) = cell
            .final_record()
            .map_or((f64::NAN, f64::NAN), |r| (r.train_acc, r.test_acc));
        let status = match &cell.status {
            CellStatus::Completed => "completed".to_string(),
            CellStatus::Diverged(msg) => msg.clone(),
            CellStatus::Failed(msg) => {
                failures += 1;
                format!("failed: {msg}")
            }
        };
        println!(
            "{:<14} {:<15} {:>5} {:>9.4} {:>9.4}  {status}",
            cell.dataset,
            cell.loss.id(),
            cell.depth,
            train_acc,
            test_acc
        );
    }
    println!("wrote {} cells under {}", cells.len(), root.display());
    if failures > 0 {
        return Err(CliError::Failed(format!("{failures} grid cells failed")));
    }
    Ok(())
}

fn read_model(path: &Path) -> CliResult<MlpModel> {
    let file = fs::File::open(path).map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))?;
    load_checkpoint(std::io::BufReader::new(file)).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn noise_input(args: &NoiseInputArgs) -> CliResult {
    let p = prepare(&args.run)?;
    let mut manifest = p.manifest.clone();
    let model = match &args.model {
        Some(path) => {
            manifest.push(("model".into(), path.display().to_string()));
            read_model(path)?
        }
        None => {
            let outcome = run_training(&p, args.run.quiet)?;
            diverged(&outcome.status)?;
            outcome.model
        }
    };
    if model.input_dim() != p.train.dim() || model.output_dim() != p.train.classes() {
        return Err(CliError::Usage(format!(
            "model maps {} inputs to {} classes but the dataset has {} inputs and {} classes",
            model.input_dim(),
            model.output_dim(),
            p.train.dim(),
            p.train.classes()
        )));
    }

    let noise_seed = args.noise_seed.unwrap_or(p.config.seed);
    let scale: NoiseScale = args.noise_interpretation.into();
    let points = input_noise_sweep(&model, &p.train, &args.epsilons.0, scale, noise_seed).map_err(failed)?;
    manifest.push(("noise_interpretation".into(), scale.name().into()));
    manifest.push(("noise_seed".into(), noise_seed.to_string()));

    let output = args
        .output
        .clone()
        .unwrap_or_else(|| default_dir(&args.run, &p).join(INPUT_NOISE_FILE));
    write_atomic(&output, input_noise_csv(&points).as_bytes()).map_err(failed)?;
    write_atomic(&manifest_path(&output), manifest_text(&manifest).as_bytes()).map_err(failed)?;
    for point in &points {
        println!("epsilon {:<8} accuracy {:.4}", point.epsilon, point.accuracy);
    }
    println!("wrote {}", output.display());
    Ok(())
}

pub fn noise_label(args: &NoiseLabelArgs) -> CliResult {
    if let Some(f) = args.fractions.0.iter().find(|f| !(0.0..=1.0).contains(*f)) {
        return Err(CliError::Usage(format!("fraction {f} outside [0, 1]")));
    }
    let p = prepare(&args.run)?;
    let runs = label_noise_sweep(&p.config, &p.train, &p.test, &args.fractions.0).map_err(failed)?;

    let output = args
        .output
        .clone()
        .unwrap_or_else(|| default_dir(&args.run, &p).join(LABEL_NOISE_FILE));
    let mut manifest = p.manifest.clone();
    for run in &runs {
        manifest.push((format!("status_{}", run.fraction), run.status.describe()));
    }
    write_atomic(&output, label_noise_csv(&runs).as_bytes()).map_err(failed)?;
    write_atomic(&manifest_path(&output), manifest_text(&manifest).as_bytes()).map_err(failed)?;
    for run in &runs {
        println!(
            "fraction {:<5} {} ({})",
            run.fraction,
            describe(run.records.last()),
            run.status.describe()
        );
    }
    println!("wrote {}", output.display());
    Ok(())
}
