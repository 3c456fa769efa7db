//! Hand-crafted feature extraction: bag-of-words/characters, co-occurrence,
//! lexicon, readability, lexical-diversity, structural, TF-IDF-cosine, and
//! word-similarity features, plus vocabulary fitting, feature-group
//! assembly, and fitted-pipeline persistence.

pub mod extractors;
pub mod lexdiv;
pub mod lexicon;
pub mod pipeline;
pub mod pos;
pub mod readability;
pub mod vocab;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use extractors::{
    boc_vector, bow_vector, cooc_vector, polarity_vector, refuting_vector, structural_vector,
    tfidf_cosine, word_overlap, wsim_vector, DEFAULT_REFUTING_WORDS,
};
pub use lexdiv::lexdiv_vector;
pub use lexicon::{lexicon_vector, Lexicon, LexiconKind};
pub use pipeline::{extract, FeatureMatrix, FittedPipeline, PipelineConfig};
pub use pos::{load_pos_sidecar, InstancePos, PosAnnotations, PosTag};
pub use readability::readability_vector;
pub use vocab::{fit_vocabulary, idf_table, GramUnit, Vocabulary};

/// A named, ordered numeric feature vector. Values are checked finite at
/// construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if names.len() != values.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} names vs {} values",
                names.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("feature {}", names[i])));
        }
        debug_assert!(
            {
                let mut seen = std::collections::HashSet::new();
                names.iter().all(|n| seen.insert(n))
            },
            "duplicate feature names"
        );
        Ok(FeatureVector { names, values })
    }

    pub fn width(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }

    /// Append another vector's entries.
    pub fn extend(&mut self, other: FeatureVector) {
        self.names.extend(other.names);
        self.values.extend(other.values);
    }
}

/// The ablation partition of Table-4 style experiments plus the FNC
/// baseline and the remaining extras.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GroupId {
    BoWC,
    Topic,
    Oth,
    Baseline,
    Extra,
}

impl GroupId {
    pub const ALL: [GroupId; 5] = [
        GroupId::BoWC,
        GroupId::Topic,
        GroupId::Oth,
        GroupId::Baseline,
        GroupId::Extra,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GroupId::BoWC => "bowc",
            GroupId::Topic => "topic",
            GroupId::Oth => "oth",
            GroupId::Baseline => "baseline",
            GroupId::Extra => "extra",
        }
    }

    pub fn parse(s: &str) -> Result<GroupId> {
        match s {
            "bowc" => Ok(GroupId::BoWC),
            "topic" => Ok(GroupId::Topic),
            "oth" => Ok(GroupId::Oth),
            "baseline" => Ok(GroupId::Baseline),
            "extra" => Ok(GroupId::Extra),
            other => Err(Error::invalid(format!("unknown feature group {other:?}"))),
        }
    }
}

/// A feature group: its id and member extractors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureGroup {
    pub id: GroupId,
    pub members: Vec<ExtractorKind>,
}

/// Every configurable feature extractor.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ExtractorKind {
    Bow,
    Boc,
    Cooc,
    Refuting,
    Polarity,
    WordOverlap,
    Structural,
    Readability,
    LexDiv,
    TfidfCosine,
    /// Scores over a named lexicon (e.g. "nrc", "sent140", "mpqa",
    /// "maxdiff", "emolex").
    Lexicon(String),
    PosCounts,
    Wsim,
    NmfConcat,
    LsiConcat,
    NmfCosine,
    LdaCosine,
}

impl ExtractorKind {
    pub fn name(&self) -> String {
        match self {
            ExtractorKind::Bow => "bow".to_string(),
            ExtractorKind::Boc => "boc".to_string(),
            ExtractorKind::Cooc => "cooc".to_string(),
            ExtractorKind::Refuting => "refuting".to_string(),
            ExtractorKind::Polarity => "polarity".to_string(),
            ExtractorKind::WordOverlap => "overlap".to_string(),
            ExtractorKind::Structural => "structural".to_string(),
            ExtractorKind::Readability => "readability".to_string(),
            ExtractorKind::LexDiv => "lexdiv".to_string(),
            ExtractorKind::TfidfCosine => "tfidf_cos".to_string(),
            ExtractorKind::Lexicon(name) => format!("lexicon:{name}"),
            ExtractorKind::PosCounts => "pos_counts".to_string(),
            ExtractorKind::Wsim => "wsim".to_string(),
            ExtractorKind::NmfConcat => "nmf_topics".to_string(),
            ExtractorKind::LsiConcat => "lsi_topics".to_string(),
            ExtractorKind::NmfCosine => "nmf_cos".to_string(),
            ExtractorKind::LdaCosine => "lda_cos".to_string(),
        }
    }

    pub fn parse(s: &str) -> Result<ExtractorKind> {
        if let Some(name) = s.strip_prefix("lexicon:") {
            return Ok(ExtractorKind::Lexicon(name.to_string()));
        }
        match s {
            "bow" => Ok(ExtractorKind::Bow),
            "boc" => Ok(ExtractorKind::Boc),
            "cooc" => Ok(ExtractorKind::Cooc),
            "refuting" => Ok(ExtractorKind::Refuting),
            "polarity" => Ok(ExtractorKind::Polarity),
            "overlap" => Ok(ExtractorKind::WordOverlap),
            "structural" => Ok(ExtractorKind::Structural),
            "readability" => Ok(ExtractorKind::Readability),
            "lexdiv" => Ok(ExtractorKind::LexDiv),
            "tfidf_cos" => Ok(ExtractorKind::TfidfCosine),
            "pos_counts" => Ok(ExtractorKind::PosCounts),
            "wsim" => Ok(ExtractorKind::Wsim),
            "nmf_topics" => Ok(ExtractorKind::NmfConcat),
            "lsi_topics" => Ok(ExtractorKind::LsiConcat),
            "nmf_cos" => Ok(ExtractorKind::NmfCosine),
            "lda_cos" => Ok(ExtractorKind::LdaCosine),
            other => Err(Error::invalid(format!("unknown extractor {other:?}"))),
        }
    }

    /// Group membership for ablation: BoW/C = {bow, boc},
    /// Topic = {lsi_topics, nmf_topics, nmf_cos, lda_cos},
    /// Oth = {lexicon:nrc, pos_counts, wsim},
    /// Baseline = the FNC baseline features, Extra = everything else.
    pub fn group(&self) -> GroupId {
        match self {
            ExtractorKind::Bow | ExtractorKind::Boc => GroupId::BoWC,
            ExtractorKind::NmfConcat
            | ExtractorKind::LsiConcat
            | ExtractorKind::NmfCosine
            | ExtractorKind::LdaCosine => GroupId::Topic,
            ExtractorKind::Lexicon(name) if name == "nrc" => GroupId::Oth,
            ExtractorKind::PosCounts | ExtractorKind::Wsim => GroupId::Oth,
            ExtractorKind::Cooc
            | ExtractorKind::Refuting
            | ExtractorKind::Polarity
            | ExtractorKind::WordOverlap => GroupId::Baseline,
            _ => GroupId::Extra,
        }
    }
}

/// Partition the configured extractors into their groups (empty groups
/// dropped).
pub fn group_partition(extractors: &[ExtractorKind]) -> Vec<FeatureGroup> {
    GroupId::ALL
        .iter()
        .filter_map(|&id| {
            let members: Vec<ExtractorKind> = extractors
                .iter()
                .filter(|e| e.group() == id)
                .cloned()
                .collect();
            if members.is_empty() {
                None
            } else {
                Some(FeatureGroup { id, members })
            }
        })
        .collect()
}
