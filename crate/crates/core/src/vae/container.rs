//! Binary model container.
//!
//! Layout: the 8-byte magic `LEVAE001`, a little-endian `u32` header length,
//! a JSON header (grid dims, tile count, config echo, training metadata and
//! the ordered tensor list), then every tensor as little-endian `f32`,
//! row-major, in header order.

use super::{TrainingMeta, Vae, VaeConfig, VaeModel};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"LEVAE001";
const MAGIC_FAMILY: &[u8; 5] = b"LEVAE";

#[derive(Debug, Error, PartialEq)]
pub enum ContainerError {
    #[error("not a model container (bad magic)")]
    BadMagic,
    #[error("unsupported container version {found:?}, expected {expected:?}")]
    Version { found: String, expected: String },
    #[error("container truncated: expected {expected} bytes, got {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("{0} unexpected trailing bytes")]
    Trailing(usize),
    #[error("bad header: {0}")]
    Header(String),
    #[error("tensor {index} is {found:?}{found_shape:?}, model expects {expected:?}{expected_shape:?}")]
    Shape {
        index: usize,
        found: String,
        found_shape: Vec<usize>,
        expected: String,
        expected_shape: Vec<usize>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    grid_height: usize,
    grid_width: usize,
    channels: usize,
    input_dim: usize,
    tile_count: usize,
    config: VaeConfig,
    meta: TrainingMeta,
    tensors: Vec<TensorEntry>,
}

/// File name of a theme's model inside a model directory.
pub fn model_file_name(theme: crate::level::Theme) -> String {
    format!("vae-{}.levae", theme.name())
}

pub fn save_model(model: &VaeModel) -> Vec<u8> {
    let cfg = model.config();
    let state = model.state();
    let header = Header {
        grid_height: cfg.grid_height,
        grid_width: cfg.grid_width,
        channels: crate::level::OneHotGrid::CHANNELS,
        input_dim: cfg.input_dim(),
        tile_count: cfg.tile_count(),
        config: cfg.clone(),
        meta: model.meta.clone(),
        tensors: state
            .iter()
            .map(|(name, shape, _)| TensorEntry {
                name: name.clone(),
                shape: shape.clone(),
            })
            .collect(),
    };
    let header = serde_json::to_vec(&header).expect("header serializes");
    let floats: usize = state.iter().map(|(_, _, d)| d.len()).sum();
    let mut out = Vec::with_capacity(12 + header.len() + 4 * floats);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    for (_, _, data) in state {
        for v in data {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn load_model(bytes: &[u8]) -> Result<VaeModel, ContainerError> {
    if bytes.len() < MAGIC.len() {
        return if MAGIC.starts_with(bytes) && !bytes.is_empty() {
            Err(ContainerError::Truncated {
                expected: MAGIC.len() + 4,
                actual: bytes.len(),
            })
        } else {
            Err(ContainerError::BadMagic)
        };
    }
    let magic = &bytes[..MAGIC.len()];
    if magic != MAGIC {
        if magic.starts_with(MAGIC_FAMILY) {
            return Err(ContainerError::Version {
                found: String::from_utf8_lossy(magic).into_owned(),
                expected: String::from_utf8_lossy(MAGIC).into_owned(),
            });
        }
        return Err(ContainerError::BadMagic);
    }
    if bytes.len() < 12 {
        return Err(ContainerError::Truncated {
            expected: 12,
            actual: bytes.len(),
        });
    }
    let hlen = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let body = 12 + hlen;
    if bytes.len() < body {
        return Err(ContainerError::Truncated {
            expected: body,
            actual: bytes.len(),
        });
    }
    let header: Header = serde_json::from_slice(&bytes[12..body]).map_err(|e| ContainerError::Header(e.to_string()))?;
    if header.input_dim != header.config.input_dim()
        || header.grid_height != header.config.grid_height
        || header.grid_width != header.config.grid_width
        || header.tile_count != header.config.tile_count()
        || header.channels != crate::level::OneHotGrid::CHANNELS
    {
        return Err(ContainerError::Header(
            "grid dimensions disagree with the config echo".into(),
        ));
    }
    let floats: usize = header.tensors.iter().map(|t| t.shape.iter().product::<usize>()).sum();
    let expected = body + 4 * floats;
    if bytes.len() < expected {
        return Err(ContainerError::Truncated {
            expected,
            actual: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(ContainerError::Trailing(bytes.len() - expected));
    }

    let mut model = Vae::<f32>::new(header.config.clone()).map_err(|e| ContainerError::Header(e.to_string()))?;
    model.meta = header.meta;
    let mut state = model.state_mut();
    if state.len() != header.tensors.len() {
        return Err(ContainerError::Header(format!(
            "{} tensors listed, model has {}",
            header.tensors.len(),
            state.len()
        )));
    }
    let mut offset = body;
    for (index, (entry, (name, shape, dst))) in header.tensors.iter().zip(state.iter_mut()).enumerate() {
        if entry.name != *name || entry.shape != *shape {
            return Err(ContainerError::Shape {
                index,
                found: entry.name.clone(),
                found_shape: entry.shape.clone(),
                expected: name.clone(),
                expected_shape: shape.clone(),
            });
        }
        for v in dst.iter_mut() {
            *v = f32::from_le_bytes(bytes[offset..offset + 4].try_into().expect("4 bytes"));
            offset += 4;
        }
    }
    drop(state);
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::level::{encode_onehot, Level};

    fn model() -> VaeModel {
        let mut m = Vae::<f32>::new(VaeConfig {
            hidden_dims: vec![8, 6],
            latent_dim: 3,
            seed: 99,
            ..VaeConfig::desk()
        })
        .unwrap();
        m.meta.dataset = "gold".into();
        m
    }

    #[test]
    fn round_trip_gives_identical_inference() {
        let m = model();
        let bytes = save_model(&m);
        assert_eq!(&bytes[..8], MAGIC);
        let back = load_model(&bytes).unwrap();
        let probe = encode_onehot(&Level::empty(), 5).unwrap();
        let (a, b) = (m.encode(&probe).unwrap(), back.encode(&probe).unwrap());
        assert_eq!(a, b);
        assert_eq!(m.decode(&a.mean()).unwrap(), back.decode(&b.mean()).unwrap());
        assert_eq!(back.meta.dataset, "gold");
        assert_eq!(save_model(&back), bytes);
    }

    #[test]
    fn corrupted_magic() {
        let mut bytes = save_model(&model());
        bytes[7] = b'9';
        assert!(matches!(load_model(&bytes), Err(ContainerError::Version { .. })));
        bytes[0] = b'X';
        assert_eq!(load_model(&bytes).unwrap_err(), ContainerError::BadMagic);
    }

    #[test]
    fn truncation_reports_sizes() {
        let bytes = save_model(&model());
        let cut = &bytes[..bytes.len() - 10];
        assert_eq!(
            load_model(cut).unwrap_err(),
            ContainerError::Truncated {
                expected: bytes.len(),
                actual: bytes.len() - 10
            }
        );
        let mut extra = bytes.clone();
        extra.push(0);
        assert_eq!(load_model(&extra).unwrap_err(), ContainerError::Trailing(1));
    }
}
