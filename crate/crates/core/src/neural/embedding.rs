//! Word embedding tables: text-format loading, zero-vector unknown-token
//! policy, and headline-first sequence embedding with truncation.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_SEQ_LEN: usize = 100;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTable {
    pub dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            vectors: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn insert(&mut self, token: impl Into<String>, vector: Vec<f64>) {
        assert_eq!(vector.len(), self.dim, "embedding dim mismatch");
        self.vectors.insert(token.into(), vector);
    }

    pub fn get(&self, token: &str) -> Option<&Vec<f64>> {
        self.vectors.get(token)
    }

    /// Unknown tokens map to the zero vector.
    pub fn lookup(&self, token: &str) -> Vec<f64> {
        self.vectors
            .get(token)
            .cloned()
            .unwrap_or_else(|| vec![0.0; self.dim])
    }
}

/// Load a text embedding file: one line per token, `token v1 .. v_dim`,
/// space-separated. Duplicate tokens keep the last entry (with a warning on
/// stderr); a wrong value count is an error naming the line.
pub fn load_embeddings(path: &Path, dim: usize) -> Result<EmbeddingTable> {
    let content = std::fs::read_to_string(path)?;
    let mut table = EmbeddingTable::new(dim);
    for (lineno, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let token = fields
            .next()
            .ok_or_else(|| Error::invalid(format!("embeddings line {}: empty", lineno + 1)))?;
        let values: Vec<f64> = fields
            .map(|f| {
                f.parse::<f64>().map_err(|_| {
                    Error::invalid(format!(
                        "embeddings line {}: bad value {f:?}",
                        lineno + 1
                    ))
                })
            })
            .collect::<Result<_>>()?;
        if values.len() != dim {
            return Err(Error::invalid(format!(
                "embeddings line {}: expected {dim} values, got {}",
                lineno + 1,
                values.len()
            )));
        }
        if table.get(token).is_some() {
            eprintln!("warning: duplicate embedding token {token:?} at line {}, keeping last", lineno + 1);
        }
        table.insert(token, values);
    }
    Ok(table)
}

/// Embed headline tokens first, then body tokens, truncated to `max_len`
/// total; an empty result is padded with a single zero vector.
pub fn embed_sequence(
    headline_tokens: &[&str],
    body_tokens: &[&str],
    table: &EmbeddingTable,
    max_len: usize,
) -> Vec<Vec<f64>> {
    let mut sequence = Vec::new();
    for token in headline_tokens.iter().chain(body_tokens).take(max_len) {
        sequence.push(table.lookup(token));
    }
    if sequence.is_empty() {
        sequence.push(vec![0.0; table.dim]);
    }
    sequence
}
