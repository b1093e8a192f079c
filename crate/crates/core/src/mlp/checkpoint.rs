//! Checkpoints: `model.json` (manifest) plus `model.bin` (little-endian f64
//! parameters, W1 b1 W2 b2 W3 b3, followed by a CRC32 of those bytes).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{Dense, MlpModel};
use super::train::TrainConfig;
use crate::dataset::NormStats;
use crate::error::{Error, Result};
use crate::planner::Variant;

pub const CHECKPOINT_FORMAT: &str = "wakeplan-mlp-1";
pub const MANIFEST_FILE: &str = "model.json";
pub const PARAMS_FILE: &str = "model.bin";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub format: String,
    pub variant: Variant,
    /// Layer widths, input first.
    pub dims: Vec<usize>,
    pub param_count: usize,
    /// Units of the start and goal input coordinates.
    pub input_units: String,
    pub train_config: TrainConfig,
    pub norm_stats: NormStats,
    pub params_crc32: u32,
}

fn params_bytes(model: &MlpModel) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 * model.param_count() + 4);
    for block in model.blocks() {
        for v in block {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn save_checkpoint(dir: impl AsRef<Path>, model: &MlpModel, cfg: &TrainConfig) -> Result<()> {
    let dir = dir.as_ref();
    model.validate()?;
    fs::create_dir_all(dir).map_err(Error::file(dir))?;
    let mut bytes = params_bytes(model);
    let crc = crc32fast::hash(&bytes);
    bytes.extend_from_slice(&crc.to_le_bytes());
    let manifest = CheckpointManifest {
        format: CHECKPOINT_FORMAT.into(),
        variant: model.variant,
        dims: model.dims(),
        param_count: model.param_count(),
        input_units: "meters".into(),
        train_config: cfg.clone(),
        norm_stats: model.norm_stats.clone(),
        params_crc32: crc,
    };
    let bin = dir.join(PARAMS_FILE);
    fs::write(&bin, bytes).map_err(Error::file(&bin))?;
    let json = dir.join(MANIFEST_FILE);
    fs::write(&json, serde_json::to_string_pretty(&manifest)?).map_err(Error::file(&json))?;
    Ok(())
}

pub fn load_checkpoint(dir: impl AsRef<Path>) -> Result<(MlpModel, CheckpointManifest)> {
    let dir = dir.as_ref();
    let json = dir.join(MANIFEST_FILE);
    let manifest: CheckpointManifest =
        serde_json::from_str(&fs::read_to_string(&json).map_err(Error::file(&json))?)?;
    if manifest.format != CHECKPOINT_FORMAT {
        return Err(Error::Format(format!("checkpoint format {:?}, expected {CHECKPOINT_FORMAT:?}", manifest.format)));
    }
    if manifest.dims.len() < 2 || manifest.dims.contains(&0) {
        return Err(Error::Shape(format!("bad layer widths {:?}", manifest.dims)));
    }
    let bin = dir.join(PARAMS_FILE);
    let bytes = fs::read(&bin).map_err(Error::file(&bin))?;
    let expected: usize = manifest.dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
    if expected != manifest.param_count {
        return Err(Error::Shape(format!("manifest declares {} parameters, widths imply {expected}", manifest.param_count)));
    }
    let needed = 8 * expected + 4;
    if bytes.len() != needed {
        return Err(if bytes.len() < needed {
            Error::Truncated { needed, found: bytes.len() }
        } else {
            Error::Format(format!("{} trailing bytes", bytes.len() - needed))
        });
    }
    let (payload, tail) = bytes.split_at(8 * expected);
    let stored = u32::from_le_bytes(tail.try_into().unwrap());
    let computed = crc32fast::hash(payload);
    if stored != computed || stored != manifest.params_crc32 {
        return Err(Error::Checksum { stored, computed });
    }
    let mut values = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let layers = manifest
        .dims
        .windows(2)
        .map(|w| {
            let (n_in, n_out) = (w[0], w[1]);
            Dense { n_in, n_out, w: values.by_ref().take(n_in * n_out).collect(), b: values.by_ref().take(n_out).collect() }
        })
        .collect();
    let model = MlpModel { layers, norm_stats: manifest.norm_stats.clone(), variant: manifest.variant };
    model.validate()?;
    Ok((model, manifest))
}
