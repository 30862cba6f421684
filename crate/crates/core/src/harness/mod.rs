//! Experiment orchestration: training runs, the learning-speed statistic,
//! noise sweeps and loss × depth grids persisted as CSV.

mod config;
mod grid;
pub mod io;
mod sweeps;
mod train;

pub use config::{parse_manifest, TrainConfig, MAX_HIDDEN_LAYERS};
pub use grid::{
    cell_dir, grid_run, CellResult, CellStatus, GridDataset, GridOptions, GridReport, GridSpec,
    CURVE_FILE, MANIFEST_FILE, MODEL_FILE,
};
pub use sweeps::{
    input_noise_sweep, label_noise_sweep, speed_metric, LabelNoiseRun, NoisePoint, SpeedMetric,
};
pub use train::{train, train_observed, RunRecord, RunStatus, TrainOutcome};
