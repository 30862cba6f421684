use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::data::Dataset;
use crate::losses::LossId;
use crate::nn::save_checkpoint;

use super::io::{curve_csv, manifest_text, write_atomic};
use super::{train, RunRecord, RunStatus, TrainConfig};

pub const CURVE_FILE: &str = "curve.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const MODEL_FILE: &str = "model.txt";

/// A named train/test pair.
#[derive(Clone, Copy, Debug)]
pub struct GridDataset<'a> {
    pub name: &'a str,
    pub train: &'a Dataset,
    pub test: &'a Dataset,
}

#[derive(Clone, Debug)]
pub struct GridSpec {
    pub losses: Vec<LossId>,
    pub depths: Vec<usize>,
    /// Every cell starts from this config with its loss id and depth swapped in.
    pub base: TrainConfig,
    /// Informational `key=value` pairs added to every cell manifest.
    pub extra_manifest: Vec<(String, String)>,
}

#[derive(Clone, Copy, Debug)]
pub struct GridOptions {
    /// Worker threads; cells are independent so any value gives the same files.
    pub jobs: usize,
    pub save_models: bool,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            jobs: 1,
            save_models: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CellStatus {
    Completed,
    Diverged(String),
    Failed(String),
}

#[derive(Clone, Debug)]
pub struct CellResult {
    pub dataset: String,
    pub loss: LossId,
    pub depth: usize,
    pub status: CellStatus,
    pub dir: PathBuf,
    pub records: Vec<RunRecord>,
}

impl CellResult {
    pub fn final_record(&self) -> Option<&RunRecord> {
        self.records.last()
    }
}

#[derive(Clone, Debug, Default)]
pub struct GridReport {
    pub cells: Vec<CellResult>,
}

impl GridReport {
    pub fn cell(&self, dataset: &str, loss: LossId, depth: usize) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.dataset == dataset && c.loss == loss && c.depth == depth)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CellResult> {
        self.cells.iter().filter(|c| matches!(c.status, CellStatus::Failed(_)))
    }
}

/// `<root>/<dataset>/<loss>/<depth>`
pub fn cell_dir(root: &Path, dataset: &str, loss: LossId, depth: usize) -> PathBuf {
    root.join(dataset).join(loss.id()).join(depth.to_string())
}

struct Cell<'a> {
    data: GridDataset<'a>,
    loss: LossId,
    depth: usize,
}

fn run_cell(cell: &Cell<'_>, spec: &GridSpec, root: &Path, options: GridOptions) -> CellResult {
    let mut config = spec.base;
    config.loss.id = cell.loss;
    config.hidden_layers = cell.depth;
    let dir = cell_dir(root, cell.data.name, cell.loss, cell.depth);

    let (status, records, model) = match train(&config, cell.data.train, cell.data.test) {
        Ok(outcome) => {
            let status = match outcome.status {
                RunStatus::Completed => CellStatus::Completed,
                ref diverged => CellStatus::Diverged(diverged.describe()),
            };
            (status, outcome.records, Some(outcome.model))
        }
        Err(e) => (CellStatus::Failed(e.to_string()), Vec::new(), None),
    };

    let mut manifest: Vec<(String, String)> = vec![("dataset".into(), cell.data.name.into())];
    manifest.extend(config.manifest_entries().into_iter().map(|(k, v)| (k.to_string(), v)));
    manifest.extend(spec.extra_manifest.iter().cloned());
    manifest.push((
        "status".into(),
        match &status {
            CellStatus::Completed => "completed".into(),
            CellStatus::Diverged(msg) => msg.clone(),
            CellStatus::Failed(msg) => format!("failed: {msg}"),
        },
    ));

    let mut status = status;
    let write = || -> crate::Result<()> {
        write_atomic(&dir.join(CURVE_FILE), curve_csv(&records).as_bytes())?;
        if let (true, Some(model)) = (options.save_models, &model) {
            let mut buf = Vec::new();
            save_checkpoint(model, &mut buf)?;
            write_atomic(&dir.join(MODEL_FILE), &buf)?;
        }
        write_atomic(&dir.join(MANIFEST_FILE), manifest_text(&manifest).as_bytes())
    };
    if let Err(e) = write() {
        status = CellStatus::Failed(format!("writing results: {e}"));
    }

    CellResult {
        dataset: cell.data.name.to_string(),
        loss: cell.loss,
        depth: cell.depth,
        status,
        dir,
        records,
    }
}

/// Trains every (dataset, loss, depth) cell and writes its curve and manifest
/// under `root`. Failing cells are recorded in the report, never fatal.
pub fn grid_run(
    spec: &GridSpec,
    datasets: &[GridDataset<'_>],
    root: &Path,
    options: GridOptions,
    progress: impl Fn(&CellResult) + Sync,
) -> GridReport {
    let mut cells = Vec::new();
    for &data in datasets {
        for &loss in &spec.losses {
            for &depth in &spec.depths {
                cells.push(Cell { data, loss, depth });
            }
        }
    }

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<CellResult>>> = Mutex::new(vec![None; cells.len()]);
    let workers = options.jobs.clamp(1, cells.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(cell) = cells.get(i) else { break };
                let result = run_cell(cell, spec, root, options);
                progress(&result);
                results.lock().expect("worker panicked")[i] = Some(result);
            });
        }
    });

    GridReport {
        cells: results
            .into_inner()
            .expect("worker panicked")
            .into_iter()
            .map(|c| c.expect("every cell ran"))
            .collect(),
    }
}
