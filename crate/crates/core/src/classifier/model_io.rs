//! Binary model files.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! magic                   10 bytes  "GLYPHMODEL"
//! format_version          u32       MODEL_FORMAT_VERSION
//! feature_layout_version  u32       FEATURE_LAYOUT_VERSION
//! category                u8        0 digits, 1 uppercase, 2 lowercase, 3 custom
//! seed                    u64
//! dimension               u32       256
//! class_count             u32
//! class_count × {
//!     label_len           u32
//!     label               label_len bytes, UTF-8
//!     k                   u32       requested cluster count
//!     training_count      u32
//!     centroid_count      u32
//!     centroids           centroid_count × dimension × f64
//! }
//! ```
//!
//! Nothing may follow the last class block.

use std::path::Path;

use super::model::{Category, Codebook, Model};
use crate::error::{Error, Result};
use crate::features::{FEATURE_DIM, FEATURE_LAYOUT_VERSION};

pub const MODEL_MAGIC: &[u8; 10] = b"GLYPHMODEL";
pub const MODEL_FORMAT_VERSION: u32 = 1;

impl Model {
    pub fn to_bytes(&self) -> Vec<u8> {
        let centroid_bytes: usize = self
            .codebooks()
            .iter()
            .map(|cb| cb.centroids.len() * FEATURE_DIM * 8 + cb.label.len() + 16)
            .sum();
        let mut out = Vec::with_capacity(64 + centroid_bytes);
        out.extend_from_slice(MODEL_MAGIC);
        out.extend_from_slice(&MODEL_FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&self.feature_layout_version().to_le_bytes());
        out.push(self.category().code());
        out.extend_from_slice(&self.seed().to_le_bytes());
        out.extend_from_slice(&(FEATURE_DIM as u32).to_le_bytes());
        out.extend_from_slice(&(self.codebooks().len() as u32).to_le_bytes());
        for cb in self.codebooks() {
            out.extend_from_slice(&(cb.label.len() as u32).to_le_bytes());
            out.extend_from_slice(cb.label.as_bytes());
            out.extend_from_slice(&(cb.k as u32).to_le_bytes());
            out.extend_from_slice(&(cb.training_count as u32).to_le_bytes());
            out.extend_from_slice(&(cb.centroids.len() as u32).to_le_bytes());
            for x in cb.centroids.iter().flatten() {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(MODEL_MAGIC.len())? != MODEL_MAGIC {
            return Err(Error::CorruptModel("bad magic, not a model file".into()));
        }
        let format = r.u32()?;
        if format != MODEL_FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                what: "format version",
                found: format,
                expected: MODEL_FORMAT_VERSION,
            });
        }
        let layout = r.u32()?;
        if layout != FEATURE_LAYOUT_VERSION {
            return Err(Error::VersionMismatch {
                what: "feature layout version",
                found: layout,
                expected: FEATURE_LAYOUT_VERSION,
            });
        }
        let code = r.u8()?;
        let category = Category::from_code(code)
            .ok_or_else(|| Error::CorruptModel(format!("unknown category code {code}")))?;
        let seed = r.u64()?;
        let dim = r.u32()? as usize;
        if dim != FEATURE_DIM {
            return Err(Error::DimensionMismatch {
                expected: FEATURE_DIM,
                found: dim,
            });
        }
        let class_count = r.u32()? as usize;
        let mut codebooks = Vec::with_capacity(class_count.min(1024));
        for _ in 0..class_count {
            let len = r.u32()? as usize;
            let label = std::str::from_utf8(r.take(len)?)
                .map_err(|_| Error::CorruptModel("class label is not UTF-8".into()))?
                .to_string();
            let k = r.u32()? as usize;
            let training_count = r.u32()? as usize;
            let centroid_count = r.u32()? as usize;
            let raw = r.take(
                centroid_count
                    .checked_mul(FEATURE_DIM * 8)
                    .ok_or_else(|| Error::CorruptModel("centroid count overflows".into()))?,
            )?;
            let values: Vec<f64> = raw
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            codebooks.push(Codebook {
                label,
                k,
                training_count,
                centroids: values.chunks_exact(FEATURE_DIM).map(<[f64]>::to_vec).collect(),
            });
        }
        if r.pos != bytes.len() {
            return Err(Error::CorruptModel(format!(
                "{} trailing bytes after the last class",
                bytes.len() - r.pos
            )));
        }
        Model::new(category, seed, codebooks).map_err(|e| match e {
            Error::InvalidArgument(msg) => Error::CorruptModel(msg),
            other => other,
        })
    }
}

pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    std::fs::write(path, model.to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<Model> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Model::from_bytes(&bytes)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&end| end <= self.bytes.len())
            .ok_or_else(|| {
                Error::CorruptModel(format!("truncated at byte {} of {}", self.pos, self.bytes.len()))
            })?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
