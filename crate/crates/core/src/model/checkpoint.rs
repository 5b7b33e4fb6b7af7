//! Binary checkpoint layout:
//!
//! ```text
//! magic    8 bytes   "LSPRCKP1"
//! hlen     u64 LE    length of the JSON header
//! header   hlen bytes {"config": {...}, "params": [{"name", "rows", "cols"}, ...]}
//! values   f64 LE    every parameter value, row-major, in header order
//! ```
//!
//! Only parameter values are stored; optimizer state is not.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FakeNewsModel, ModelConfig};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"LSPRCKP1";

#[derive(Debug, Serialize, Deserialize)]
struct ParamHeader {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    config: ModelConfig,
    params: Vec<ParamHeader>,
}

pub fn checkpoint_bytes(model: &FakeNewsModel) -> Result<Vec<u8>> {
    let header = Header {
        config: model.config.clone(),
        params: model
            .store
            .iter()
            .map(|p| ParamHeader {
                name: p.name.clone(),
                rows: p.value.rows(),
                cols: p.value.cols(),
            })
            .collect(),
    };
    let json = serde_json::to_vec(&header)?;
    let n_values: usize = model.store.iter().map(|p| p.value.len()).sum();
    let mut out = Vec::with_capacity(16 + json.len() + 8 * n_values);
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for p in model.store.iter() {
        for v in p.value.as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<FakeNewsModel> {
    let bad = |m: &str| Error::Checkpoint(m.to_string());
    if bytes.len() < 16 || &bytes[..8] != CHECKPOINT_MAGIC {
        return Err(bad("missing magic"));
    }
    let hlen = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let header_end = 16usize
        .checked_add(hlen)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| bad("truncated header"))?;
    let header: Header = serde_json::from_slice(&bytes[16..header_end])?;
    let mut model = FakeNewsModel::new(header.config, None)?;
    if model.store.len() != header.params.len() {
        return Err(bad("parameter count differs from the architecture"));
    }
    let mut values = bytes[header_end..].chunks_exact(8);
    for (p, h) in model.store.iter_mut().zip(&header.params) {
        if p.name != h.name || p.value.shape() != (h.rows, h.cols) {
            return Err(Error::Checkpoint(format!(
                "parameter {} {:?} does not match {} {:?}",
                h.name,
                (h.rows, h.cols),
                p.name,
                p.value.shape()
            )));
        }
        for v in p.value.as_mut_slice() {
            let chunk = values.next().ok_or_else(|| bad("truncated values"))?;
            *v = f64::from_le_bytes(chunk.try_into().expect("8 bytes"));
        }
    }
    if values.next().is_some() || !values.remainder().is_empty() {
        return Err(bad("trailing bytes"));
    }
    Ok(model)
}

pub fn write_checkpoint(model: &FakeNewsModel, path: &Path) -> Result<()> {
    let bytes = checkpoint_bytes(model)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: &Path) -> Result<FakeNewsModel> {
    if !path.is_file() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    model_from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Setup;

    #[test]
    fn bit_exact_round_trip() {
        let cfg = ModelConfig {
            setup: Setup::NewsTlDe,
            num_filters: 5,
            embedding_dim: 3,
            dropout: 0.2,
            seed: 11,
            vocab_size: 9,
        };
        let mut m = FakeNewsModel::new(cfg, None).unwrap();
        // values that do not survive decimal formatting
        m.store.value_mut(m.arch.classifier_bias).as_mut_slice()[0] = 0.1 + 0.2;
        m.store.value_mut(m.arch.classifier_bias).as_mut_slice()[1] = f64::MIN_POSITIVE;
        let bytes = checkpoint_bytes(&m).unwrap();
        let back = model_from_bytes(&bytes).unwrap();
        assert_eq!(back.config, m.config);
        for (a, b) in back.store.iter().zip(m.store.iter()) {
            let bits = |p: &crate::nn::Parameter| p.value.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(a), bits(b), "{}", a.name);
        }
        assert_eq!(checkpoint_bytes(&back).unwrap(), bytes);
    }

    #[test]
    fn rejects_garbage() {
        assert!(model_from_bytes(b"nope").is_err());
        let cfg = ModelConfig::new(Setup::News, 8);
        let m = FakeNewsModel::new(
            ModelConfig {
                embedding_dim: 2,
                ..cfg
            },
            None,
        )
        .unwrap();
        let mut bytes = checkpoint_bytes(&m).unwrap();
        bytes.pop();
        assert!(matches!(model_from_bytes(&bytes), Err(Error::Checkpoint(_))));
    }
}
