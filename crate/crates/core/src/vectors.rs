//! Plain word vectors in the text format `V d` followed by `word v1 … vd` lines.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::io;
use crate::train::EmbeddingTable;

#[derive(Debug, Clone, PartialEq)]
pub struct WordVectors {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
}

impl WordVectors {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Self {
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
        }
    }

    /// Target embeddings of a trained table, one row per vocabulary entry.
    pub fn from_table(table: &EmbeddingTable, vocab: &Vocabulary) -> Self {
        let mut out = Self::new(table.dim());
        for (id, token) in vocab.tokens().enumerate() {
            out.insert(token, table.target_row(id as u32));
        }
        out
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

    /// Inserts or replaces a vector. Panics on a dimension mismatch.
    pub fn insert(&mut self, word: &str, v: &[f64]) {
        assert_eq!(v.len(), self.dim, "vector dimension mismatch");
        match self.index.get(word) {
            Some(&i) => self.data[i * self.dim..(i + 1) * self.dim].copy_from_slice(v),
            None => {
                self.index.insert(word.to_string(), self.words.len());
                self.words.push(word.to_string());
                self.data.extend_from_slice(v);
            }
        }
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index
            .get(word)
            .map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    pub fn vector(&self, word: &str) -> Option<DVector<f64>> {
        self.get(word).map(DVector::from_column_slice)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.words.len(), self.dim);
        for (i, w) in self.words.iter().enumerate() {
            out.push_str(w);
            for x in &self.data[i * self.dim..(i + 1) * self.dim] {
                write!(out, " {x}").expect("writing to a string");
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::write_atomic(path, self.to_text().as_bytes())
    }

    /// Reads the text format. A header line is optional, as in GloVe files.
    pub fn load(path: &Path) -> Result<Self> {
        let text = io::read_to_string(path)?;
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .peekable();
        let mut declared = None;
        if let Some((_, first)) = lines.peek() {
            let parts: Vec<&str> = first.split_whitespace().collect();
            if parts.len() == 2 {
                if let (Ok(v), Ok(d)) = (parts[0].parse::<usize>(), parts[1].parse::<usize>()) {
                    declared = Some((v, d));
                    lines.next();
                }
            }
        }
        let mut out: Option<Self> = None;
        for (i, line) in lines {
            let mut parts = line.split_whitespace();
            let word = parts.next().expect("line is not blank");
            let values = parts
                .map(|p| p.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(path, i + 1, format!("bad number: {e}")))?;
            if values.iter().any(|x| !x.is_finite()) {
                return Err(Error::parse(path, i + 1, "non-finite value"));
            }
            let d = declared.map_or(values.len(), |(_, d)| d);
            if values.len() != d || d == 0 {
                return Err(Error::parse(
                    path,
                    i + 1,
                    format!("expected {d} values, found {}", values.len()),
                ));
            }
            let table = out.get_or_insert_with(|| Self::new(d));
            if table.dim != d {
                return Err(Error::parse(
                    path,
                    i + 1,
                    format!("expected {} values, found {d}", table.dim),
                ));
            }
            table.insert(word, &values);
        }
        let out = out.ok_or_else(|| Error::format(path, "no vectors"))?;
        if let Some((v, _)) = declared {
            if v != out.len() {
                return Err(Error::format(
                    path,
                    format!("header declares {v} words, found {}", out.len()),
                ));
            }
        }
        Ok(out)
    }
}
