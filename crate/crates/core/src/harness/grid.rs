use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::train::{train_and_test, RunResult, TrainConfig};
use crate::error::{Error, Result};
use crate::model::{EncodedInstance, FakeNewsModel, ModelConfig};
use crate::nn::Matrix;
use crate::stats::mean_std;

pub const GRID_FILTERS: [usize; 3] = [10, 20, 40];
pub const GRID_DROPOUT: [f64; 4] = [0.0, 0.2, 0.4, 0.6];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub num_filters: usize,
    pub dropout: f64,
}

/// The 12 cells ordered by filter count, then dropout.
pub fn default_grid() -> Vec<GridCell> {
    GRID_FILTERS
        .iter()
        .flat_map(|&num_filters| {
            GRID_DROPOUT
                .iter()
                .map(move |&dropout| GridCell { num_filters, dropout })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub cell: GridCell,
    pub run: RunResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub cells: Vec<CellResult>,
    pub best: usize,
}

impl GridResult {
    pub fn best_cell(&self) -> &CellResult {
        &self.cells[self.best]
    }
}

/// Index of the cell with the highest validation F. Ties go to fewer
/// filters, then lower dropout.
pub fn select_best(cells: &[CellResult]) -> Option<usize> {
    (0..cells.len()).reduce(|best, i| {
        let (a, b) = (&cells[best], &cells[i]);
        let better = b.run.best_val_f() > a.run.best_val_f()
            || (b.run.best_val_f() == a.run.best_val_f()
                && (b.cell.num_filters, b.cell.dropout) < (a.cell.num_filters, a.cell.dropout));
        if better {
            i
        } else {
            best
        }
    })
}

/// Runs `run_cell` on every cell in parallel and picks the best.
pub fn grid_search_with<F>(cells: &[GridCell], run_cell: F) -> Result<GridResult>
where
    F: Fn(&GridCell) -> Result<RunResult> + Sync,
{
    let cells = cells
        .par_iter()
        .map(|cell| run_cell(cell).map(|run| CellResult { cell: *cell, run }))
        .collect::<Result<Vec<_>>>()?;
    let best = select_best(&cells).ok_or_else(|| Error::InvalidArgument("empty grid".into()))?;
    Ok(GridResult { cells, best })
}

/// Instances and optional pretrained embeddings shared by every run.
#[derive(Debug, Clone, Copy)]
pub struct ExperimentData<'a> {
    pub train: &'a [EncodedInstance],
    pub val: &'a [EncodedInstance],
    pub test: &'a [EncodedInstance],
    pub embeddings: Option<&'a Matrix>,
}

/// Builds, trains and tests one model. The model seed also seeds training.
pub fn run_config(
    data: ExperimentData<'_>,
    config: &ModelConfig,
    train_cfg: &TrainConfig,
) -> Result<(FakeNewsModel, RunResult)> {
    let mut model = FakeNewsModel::new(config.clone(), data.embeddings)?;
    let cfg = TrainConfig {
        seed: config.seed,
        ..train_cfg.clone()
    };
    let run = train_and_test(&mut model, data.train, data.val, data.test, &cfg)?;
    Ok((model, run))
}

pub fn grid_search(
    data: ExperimentData<'_>,
    base: &ModelConfig,
    train_cfg: &TrainConfig,
    cells: &[GridCell],
) -> Result<GridResult> {
    grid_search_with(cells, |cell| {
        let config = ModelConfig {
            num_filters: cell.num_filters,
            dropout: cell.dropout,
            ..base.clone()
        };
        run_config(data, &config, train_cfg).map(|(_, run)| run)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub run: RunResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiSeedResult {
    pub runs: Vec<SeedRun>,
    pub mean_f: f64,
    pub std_f: f64,
}

/// Runs seeds `seed0..seed0+k` in parallel and summarises test F with the
/// mean and sample standard deviation.
pub fn multi_seed_with<F>(k: usize, seed0: u64, run_seed: F) -> Result<MultiSeedResult>
where
    F: Fn(u64) -> Result<RunResult> + Sync,
{
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let runs = (0..k as u64)
        .into_par_iter()
        .map(|i| run_seed(seed0 + i).map(|run| SeedRun { seed: seed0 + i, run }))
        .collect::<Result<Vec<_>>>()?;
    let fs: Vec<f64> = runs.iter().map(|r| r.run.test.map_or(0.0, |m| m.f1)).collect();
    let (mean_f, std_f) = mean_std(&fs)?;
    Ok(MultiSeedResult { runs, mean_f, std_f })
}

pub fn multi_seed_eval(
    data: ExperimentData<'_>,
    config: &ModelConfig,
    train_cfg: &TrainConfig,
    k: usize,
    seed0: u64,
) -> Result<MultiSeedResult> {
    multi_seed_with(k, seed0, |seed| {
        let config = ModelConfig { seed, ..config.clone() };
        run_config(data, &config, train_cfg).map(|(_, run)| run)
    })
}
