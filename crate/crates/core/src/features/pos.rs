//! Pluggable POS annotations: a token-aligned sidecar file with a coarse
//! {NOUN, VERB, OTHER} tagset, consumed by the word-similarity and
//! POS-count features instead of an embedded tagger.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PosTag {
    Noun,
    Verb,
    Other,
}

impl PosTag {
    pub fn parse(s: &str) -> Result<PosTag> {
        match s {
            "NOUN" => Ok(PosTag::Noun),
            "VERB" => Ok(PosTag::Verb),
            "OTHER" => Ok(PosTag::Other),
            other => Err(Error::invalid(format!("unknown POS tag {other:?}"))),
        }
    }
}

/// Tags of one instance, keyed by token index within each side.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InstancePos {
    pub headline: HashMap<usize, PosTag>,
    pub body: HashMap<usize, PosTag>,
}

impl InstancePos {
    pub fn side(&self, headline: bool) -> &HashMap<usize, PosTag> {
        if headline {
            &self.headline
        } else {
            &self.body
        }
    }
}

/// Sidecar annotations for a corpus, keyed by instance index.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PosAnnotations {
    pub instances: HashMap<usize, InstancePos>,
}

impl PosAnnotations {
    pub fn get(&self, instance_index: usize) -> Option<&InstancePos> {
        self.instances.get(&instance_index)
    }
}

/// Load a TSV sidecar: `instance_index<TAB>side<TAB>token_index<TAB>tag`,
/// side in {headline, body}, `#` comments allowed.
pub fn load_pos_sidecar(path: &Path) -> Result<PosAnnotations> {
    let content = std::fs::read_to_string(path)?;
    let mut annotations = PosAnnotations::default();
    for (lineno, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::invalid(format!(
                "pos sidecar line {}: expected 4 tab-separated fields",
                lineno + 1
            )));
        }
        let instance: usize = fields[0].parse().map_err(|_| {
            Error::invalid(format!("pos sidecar line {}: bad instance index", lineno + 1))
        })?;
        let token: usize = fields[2].parse().map_err(|_| {
            Error::invalid(format!("pos sidecar line {}: bad token index", lineno + 1))
        })?;
        let tag = PosTag::parse(fields[3])?;
        let entry = annotations.instances.entry(instance).or_default();
        match fields[1] {
            "headline" => entry.headline.insert(token, tag),
            "body" => entry.body.insert(token, tag),
            other => {
                return Err(Error::invalid(format!(
                    "pos sidecar line {}: unknown side {other:?}",
                    lineno + 1
                )))
            }
        };
    }
    Ok(annotations)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pos.tsv");
        std::fs::write(&path, "# comment\n0\theadline\t0\tNOUN\n0\tbody\t2\tVERB\n3\tbody\t0\tOTHER\n").unwrap();
        let pos = load_pos_sidecar(&path).unwrap();
        assert_eq!(pos.get(0).unwrap().headline[&0], PosTag::Noun);
        assert_eq!(pos.get(0).unwrap().body[&2], PosTag::Verb);
        assert_eq!(pos.get(3).unwrap().body[&0], PosTag::Other);
        assert!(pos.get(1).is_none());
    }

    #[test]
    fn sidecar_rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pos.tsv");
        std::fs::write(&path, "0\theadline\t0\n").unwrap();
        assert!(load_pos_sidecar(&path).is_err());
        std::fs::write(&path, "0\tmiddle\t0\tNOUN\n").unwrap();
        assert!(load_pos_sidecar(&path).is_err());
    }
}
