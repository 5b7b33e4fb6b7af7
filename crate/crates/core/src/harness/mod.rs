//! Training, evaluation and experiment orchestration.

mod baseline;
mod grid;
mod metrics;
mod results;
mod train;

pub use baseline::{frequency_random_baseline, labels_with_counts};
pub use grid::{
    default_grid, grid_search, grid_search_with, multi_seed_eval, multi_seed_with, run_config, select_best, CellResult,
    ExperimentData, GridCell, GridResult, MultiSeedResult, SeedRun, GRID_DROPOUT, GRID_FILTERS,
};
pub use metrics::{evaluate, predict_all, Metrics};
pub use results::{read_results, results_table, results_to_csv, ResultRow};
pub use train::{run_epoch, train, train_and_test, EarlyStopping, EpochRecord, RunResult, StopDecision, TrainConfig};
