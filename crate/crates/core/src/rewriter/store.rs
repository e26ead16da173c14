//! The gzip-wrapped JSON function store.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use flate2::read::GzDecoder;
use flate2::{Compression, GzBuilder};
use serde::{Deserialize, Serialize};

pub const STORE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoreRecord {
    pub source: String,
    pub signature: String,
    pub free_names: Vec<String>,
    pub defining_module: String,
    pub original_line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionStore {
    pub version: u32,
    pub functions: BTreeMap<String, StoreRecord>,
}

impl Default for FunctionStore {
    fn default() -> Self {
        FunctionStore {
            version: STORE_VERSION,
            functions: BTreeMap::new(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("store is not valid gzip: {0}")]
    Gzip(#[source] std::io::Error),
    #[error("store payload is not valid UTF-8 JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported store version {0}")]
    Version(u32),
}

impl FunctionStore {
    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("store serializes")
    }

    /// Deterministic gzip: zero mtime, no file name.
    pub fn to_gzip(&self) -> Vec<u8> {
        let mut enc = GzBuilder::new()
            .mtime(0)
            .write(Vec::new(), Compression::best());
        enc.write_all(&self.to_json()).expect("in-memory write");
        enc.finish().expect("in-memory write")
    }

    pub fn from_json(bytes: &[u8]) -> Result<FunctionStore, StoreError> {
        let store: FunctionStore = serde_json::from_slice(bytes)?;
        if store.version != STORE_VERSION {
            return Err(StoreError::Version(store.version));
        }
        Ok(store)
    }

    pub fn decompress(bytes: &[u8]) -> Result<Vec<u8>, StoreError> {
        let mut out = Vec::new();
        GzDecoder::new(bytes)
            .read_to_end(&mut out)
            .map_err(StoreError::Gzip)?;
        Ok(out)
    }

    pub fn from_gzip(bytes: &[u8]) -> Result<FunctionStore, StoreError> {
        Self::from_json(&Self::decompress(bytes)?)
    }
}
