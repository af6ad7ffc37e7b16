//! The `dm1` density-matrix store: a JSON manifest naming the words plus a
//! little-endian blob of row-major `d×d` matrices in word order.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{self, Dtype};
use crate::linalg::{DensityMatrix, LinalgError};

pub const DM1_FORMAT: &str = "dm1";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Dm1Manifest {
    pub format: String,
    pub dim: usize,
    pub dtype: Dtype,
    pub words: Vec<String>,
}

/// Word → density matrix lookup used by composition and evaluation.
pub trait MatrixLookup {
    fn lookup(&self, word: &str) -> Option<&DensityMatrix>;
}

impl MatrixLookup for HashMap<String, DensityMatrix> {
    fn lookup(&self, word: &str) -> Option<&DensityMatrix> {
        self.get(word)
    }
}

impl<T: MatrixLookup + ?Sized> MatrixLookup for &T {
    fn lookup(&self, word: &str) -> Option<&DensityMatrix> {
        (**self).lookup(word)
    }
}

/// An ordered collection of named density matrices of one dimension.
#[derive(Debug, Clone, Default)]
pub struct DensityStore {
    dim: usize,
    words: Vec<String>,
    matrices: Vec<DensityMatrix>,
    index: HashMap<String, usize>,
}

impl DensityStore {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            ..Default::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Inserts or replaces the matrix for `word`, keeping first-insertion order.
    pub fn insert(
        &mut self,
        word: impl Into<String>,
        m: DensityMatrix,
    ) -> std::result::Result<(), LinalgError> {
        if m.dim() != self.dim {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim,
                found: m.dim(),
            });
        }
        let word = word.into();
        match self.index.get(&word) {
            Some(&i) => self.matrices[i] = m,
            None => {
                self.index.insert(word.clone(), self.words.len());
                self.words.push(word);
                self.matrices.push(m);
            }
        }
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<&DensityMatrix> {
        self.index.get(word).map(|&i| &self.matrices[i])
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &DensityMatrix)> {
        self.words
            .iter()
            .map(String::as_str)
            .zip(self.matrices.iter())
    }

    pub fn manifest(&self, dtype: Dtype) -> Dm1Manifest {
        Dm1Manifest {
            format: DM1_FORMAT.to_string(),
            dim: self.dim,
            dtype,
            words: self.words.clone(),
        }
    }

    pub fn blob(&self, dtype: Dtype) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len() * self.dim * self.dim * dtype.size());
        for m in &self.matrices {
            // nalgebra is column-major; the transpose's storage order is our row-major order
            let t = m.as_matrix().transpose();
            io::f64s_to_le(t.iter().copied(), dtype, &mut out);
        }
        out
    }

    /// Writes `manifest_path` and its `.bin` blob atomically.
    pub fn save(&self, manifest_path: &Path, dtype: Dtype) -> Result<()> {
        let manifest =
            serde_json::to_vec_pretty(&self.manifest(dtype)).expect("manifest serializes");
        io::write_atomic(&io::blob_path(manifest_path), &self.blob(dtype))?;
        io::write_atomic(manifest_path, &manifest)
    }

    pub fn load(manifest_path: &Path) -> Result<Self> {
        let text = io::read_to_string(manifest_path)?;
        let manifest: Dm1Manifest =
            serde_json::from_str(&text).map_err(|e| Error::format(manifest_path, e.to_string()))?;
        if manifest.format != DM1_FORMAT {
            return Err(Error::format(
                manifest_path,
                format!("expected format `dm1`, found `{}`", manifest.format),
            ));
        }
        let blob_path = io::blob_path(manifest_path);
        let bytes = io::read_bytes(&blob_path)?;
        let d = manifest.dim;
        let expected = manifest.words.len() * d * d * manifest.dtype.size();
        if bytes.len() != expected {
            return Err(Error::format(
                &blob_path,
                format!(
                    "blob holds {} bytes, manifest implies {expected}",
                    bytes.len()
                ),
            ));
        }
        let values = io::le_to_f64s(&bytes, manifest.dtype);
        let mut store = DensityStore::new(d);
        for (word, chunk) in manifest.words.iter().zip(values.chunks_exact(d * d.max(1))) {
            let m = DMatrix::from_row_slice(d, d, chunk);
            let dm = DensityMatrix::from_matrix(m)
                .map_err(|e| Error::format(&blob_path, format!("matrix for `{word}`: {e}")))?;
            if store.contains(word) {
                return Err(Error::format(
                    manifest_path,
                    format!("duplicate word `{word}`"),
                ));
            }
            store.insert(word.clone(), dm)?;
        }
        Ok(store)
    }
}

impl MatrixLookup for DensityStore {
    fn lookup(&self, word: &str) -> Option<&DensityMatrix> {
        self.get(word)
    }
}
