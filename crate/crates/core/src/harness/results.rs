use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::Metrics;
use crate::error::{Error, Result};
use crate::model::Setup;

/// One result row per (dataset, setup, seed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub setup: Setup,
    pub seed: u64,
    pub num_filters: usize,
    pub dropout: f64,
    pub best_epoch: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ResultRow {
    pub fn new(
        dataset: &str,
        setup: Setup,
        seed: u64,
        num_filters: usize,
        dropout: f64,
        best_epoch: usize,
        m: &Metrics,
    ) -> Self {
        Self {
            dataset: dataset.to_string(),
            setup,
            seed,
            num_filters,
            dropout,
            best_epoch,
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
        }
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("{other:?}"),
        },
    }
}

pub fn results_to_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(Path::new("<memory>"), e))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    if !path.is_file() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| csv_err(path, e))).collect()
}

/// Mean test F per dataset and setup, one line per dataset with the seven
/// setups as columns. Missing cells are left empty.
pub fn results_table(rows: &[ResultRow]) -> String {
    let mut cells: BTreeMap<&str, BTreeMap<Setup, Vec<f64>>> = BTreeMap::new();
    for r in rows {
        cells
            .entry(&r.dataset)
            .or_default()
            .entry(r.setup)
            .or_default()
            .push(r.f1);
    }
    let mut out = String::from("dataset");
    for s in Setup::ALL {
        out.push(',');
        out.push_str(s.name());
    }
    out.push('\n');
    for (dataset, by_setup) in cells {
        out.push_str(dataset);
        for s in Setup::ALL {
            out.push(',');
            if let Some(fs) = by_setup.get(&s) {
                out.push_str(&format!("{:.3}", fs.iter().sum::<f64>() / fs.len() as f64));
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(dataset: &str, setup: Setup, seed: u64, f1: f64) -> ResultRow {
        ResultRow::new(
            dataset,
            setup,
            seed,
            10,
            0.2,
            3,
            &Metrics {
                f1,
                ..Metrics::default()
            },
        )
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![row("PF", Setup::NewsTl, 0, 0.5), row("GC", Setup::TlDe, 1, 0.25)];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        std::fs::write(&path, results_to_csv(&rows).unwrap()).unwrap();
        assert_eq!(read_results(&path).unwrap(), rows);
    }

    #[test]
    fn table_has_one_line_per_dataset() {
        let rows = vec![
            row("PF", Setup::News, 0, 0.5),
            row("PF", Setup::News, 1, 0.7),
            row("GC", Setup::De, 0, 0.3),
        ];
        let t = results_table(&rows);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "dataset,News,TL,DE,TL+DE,N+TL,N+DE,N+TL+DE");
        assert_eq!(lines[1], "GC,,,0.300,,,,");
        assert_eq!(lines[2], "PF,0.600,,,,,,");
    }
}
