//! Checkpoint files: named f64 tensors with shape headers plus string
//! metadata, all little-endian.
//!
//! Layout (stable; bump the version for any change):
//!
//! ```text
//! magic   b"SRLC"
//! version u32
//! meta    u32 count, then count x (string key, string value)
//! tensors u32 count, then count x (string name, u32 ndim,
//!         ndim x u64 dims, prod(dims) x f64 data)
//! string  u32 byte length, then UTF-8 bytes
//! ```

use super::{Layer, NetworkParams};
use std::io::{self, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"SRLC";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Checkpoint {
    pub meta: Vec<(String, String)>,
    pub tensors: Vec<NamedTensor>,
}

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    BadVersion(u32),
    #[error("malformed checkpoint: {0}")]
    Malformed(String),
    #[error("checkpoint is missing tensor {0}")]
    MissingTensor(String),
}

impl Checkpoint {
    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn tensor(&self, name: &str) -> Option<&NamedTensor> {
        self.tensors.iter().find(|t| t.name == name)
    }

    /// Add the network's layers and log-spread under a name prefix.
    pub fn push_network(&mut self, prefix: &str, params: &NetworkParams) {
        for (i, layer) in params.layers.iter().enumerate() {
            self.tensors.push(NamedTensor {
                name: format!("{prefix}.layer{i}.w"),
                dims: vec![layer.rows, layer.cols],
                data: layer.w.clone(),
            });
            self.tensors.push(NamedTensor {
                name: format!("{prefix}.layer{i}.b"),
                dims: vec![layer.rows],
                data: layer.b.clone(),
            });
        }
        self.tensors.push(NamedTensor {
            name: format!("{prefix}.log_spread"),
            dims: vec![params.log_spread.len()],
            data: params.log_spread.clone(),
        });
    }

    /// Rebuild a network stored by `push_network`.
    pub fn network(&self, prefix: &str) -> Result<NetworkParams, CheckpointError> {
        let mut layers = Vec::new();
        for i in 0.. {
            let wname = format!("{prefix}.layer{i}.w");
            let Some(w) = self.tensor(&wname) else { break };
            if w.dims.len() != 2 {
                return Err(CheckpointError::Malformed(format!(
                    "{wname} must be two-dimensional"
                )));
            }
            let bname = format!("{prefix}.layer{i}.b");
            let b = self
                .tensor(&bname)
                .ok_or_else(|| CheckpointError::MissingTensor(bname.clone()))?;
            layers.push(Layer {
                rows: w.dims[0],
                cols: w.dims[1],
                w: w.data.clone(),
                b: b.data.clone(),
            });
        }
        if layers.is_empty() {
            return Err(CheckpointError::MissingTensor(format!(
                "{prefix}.layer0.w"
            )));
        }
        let spread_name = format!("{prefix}.log_spread");
        let spread = self
            .tensor(&spread_name)
            .ok_or(CheckpointError::MissingTensor(spread_name))?;
        Ok(NetworkParams {
            layers,
            log_spread: spread.data.clone(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.meta.len() as u32).to_le_bytes());
        for (k, v) in &self.meta {
            write_string(&mut buf, k);
            write_string(&mut buf, v);
        }
        buf.extend_from_slice(&(self.tensors.len() as u32).to_le_bytes());
        for t in &self.tensors {
            write_string(&mut buf, &t.name);
            buf.extend_from_slice(&(t.dims.len() as u32).to_le_bytes());
            for &d in &t.dims {
                buf.extend_from_slice(&(d as u64).to_le_bytes());
            }
            let expect: usize = t.dims.iter().product();
            assert_eq!(expect, t.data.len(), "tensor {} shape mismatch", t.name);
            for &x in &t.data {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        }
        let mut f = std::fs::File::create(path)?;
        f.write_all(&buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint, CheckpointError> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let mut cur = Cursor { bytes: &bytes, at: 0 };
        let magic = cur.take(4)?;
        if magic != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let version = cur.u32()?;
        if version != VERSION {
            return Err(CheckpointError::BadVersion(version));
        }
        let meta_count = cur.u32()? as usize;
        let mut meta = Vec::with_capacity(meta_count);
        for _ in 0..meta_count {
            let k = cur.string()?;
            let v = cur.string()?;
            meta.push((k, v));
        }
        let tensor_count = cur.u32()? as usize;
        let mut tensors = Vec::with_capacity(tensor_count);
        for _ in 0..tensor_count {
            let name = cur.string()?;
            let ndim = cur.u32()? as usize;
            let mut dims = Vec::with_capacity(ndim);
            for _ in 0..ndim {
                dims.push(cur.u64()? as usize);
            }
            let len: usize = dims.iter().product();
            let mut data = Vec::with_capacity(len);
            for _ in 0..len {
                data.push(cur.f64()?);
            }
            tensors.push(NamedTensor { name, dims, data });
        }
        Ok(Checkpoint { meta, tensors })
    }
}

fn write_string(buf: &mut Vec<u8>, s: &str) {
    buf.extend_from_slice(&(s.len() as u32).to_le_bytes());
    buf.extend_from_slice(s.as_bytes());
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.at + n > self.bytes.len() {
            return Err(CheckpointError::Malformed("truncated file".into()));
        }
        let s = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String, CheckpointError> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec())
            .map_err(|_| CheckpointError::Malformed("non-utf8 string".into()))
    }
}
