//! Gram vocabularies: frequency-ranked word or character n-gram inventories
//! with deterministic tie-breaking, shared by bag-of-X features, TF-IDF, and
//! the topic models.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc;

/// What a vocabulary counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GramUnit {
    /// Word n-grams of the given orders, optionally over negation-tagged
    /// tokens.
    Word { orders: Vec<usize>, negation: bool },
    /// Character n-grams of one order (lowercased, whitespace collapsed).
    Char { order: usize },
}

impl GramUnit {
    pub fn words(orders: &[usize]) -> Self {
        GramUnit::Word {
            orders: orders.to_vec(),
            negation: false,
        }
    }

    pub fn negated_words(orders: &[usize]) -> Self {
        GramUnit::Word {
            orders: orders.to_vec(),
            negation: true,
        }
    }

    pub fn chars(order: usize) -> Self {
        GramUnit::Char { order }
    }

    /// All grams of this unit occurring in `text`, with multiplicity.
    pub fn grams(&self, text: &str) -> Vec<String> {
        match self {
            GramUnit::Word { orders, negation } => {
                let tokens = textproc::tokenize(text);
                let tokens = if *negation {
                    textproc::tag_negation(&tokens)
                } else {
                    tokens
                };
                let mut grams = Vec::new();
                for &n in orders {
                    grams.extend(textproc::ngrams(&tokens, n));
                }
                grams
            }
            GramUnit::Char { order } => textproc::char_ngrams(text, *order),
        }
    }
}

/// A fitted gram inventory with dense indices `0..len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub unit: GramUnit,
    pub entries: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn index_of(&self, gram: &str) -> Option<usize> {
        if self.index.is_empty() && !self.entries.is_empty() {
            // Deserialized vocabularies rebuild lazily via `rebuild_index`.
            return self.entries.iter().position(|e| e == gram);
        }
        self.index.get(gram).copied()
    }

    pub fn contains(&self, gram: &str) -> bool {
        self.index_of(gram).is_some()
    }

    /// Restore the lookup table after deserialization.
    pub fn rebuild_index(&mut self) {
        self.index = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
    }

    /// Term-frequency counts of `text` over this vocabulary.
    pub fn count_vector(&self, text: &str) -> Vec<f64> {
        let mut counts = vec![0.0; self.entries.len()];
        for gram in self.unit.grams(text) {
            if let Some(i) = self.index_of(&gram) {
                counts[i] += 1.0;
            }
        }
        counts
    }

    /// Document frequency of every entry over `texts`.
    pub fn doc_frequencies(&self, texts: &[&str]) -> Vec<u64> {
        let mut df = vec![0u64; self.entries.len()];
        for text in texts {
            let mut seen = vec![false; self.entries.len()];
            for gram in self.unit.grams(text) {
                if let Some(i) = self.index_of(&gram) {
                    if !seen[i] {
                        seen[i] = true;
                        df[i] += 1;
                    }
                }
            }
        }
        df
    }
}

/// Fit the top-`size` grams by total corpus frequency; ties break by
/// ascending lexicographic order.
pub fn fit_vocabulary(texts: &[&str], unit: GramUnit, size: usize) -> Result<Vocabulary> {
    if size == 0 {
        return Err(Error::invalid("vocabulary size must be at least 1"));
    }
    if texts.is_empty() {
        return Err(Error::invalid("cannot fit a vocabulary on no texts"));
    }
    let mut frequency: HashMap<String, u64> = HashMap::new();
    for text in texts {
        for gram in unit.grams(text) {
            *frequency.entry(gram).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<(String, u64)> = frequency.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(size);
    let mut vocab = Vocabulary {
        unit,
        entries: ranked.into_iter().map(|(gram, _)| gram).collect(),
        index: HashMap::new(),
    };
    vocab.rebuild_index();
    Ok(vocab)
}

/// Smoothed inverse document frequency: `ln((1 + N) / (1 + df)) + 1`.
pub fn idf_table(vocab: &Vocabulary, texts: &[&str]) -> Vec<f64> {
    let n = texts.len() as f64;
    vocab
        .doc_frequencies(texts)
        .into_iter()
        .map(|df| ((1.0 + n) / (1.0 + df as f64)).ln() + 1.0)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top_frequency_wins() {
        let vocab = fit_vocabulary(&["a a b"], GramUnit::words(&[1]), 1).unwrap();
        assert_eq!(vocab.entries, vec!["a"]);
    }

    #[test]
    fn ties_break_lexicographically() {
        let vocab = fit_vocabulary(&["a a c b"], GramUnit::words(&[1]), 2).unwrap();
        assert_eq!(vocab.entries, vec!["a", "b"]);
    }

    #[test]
    fn cap_larger_than_distinct_grams() {
        let vocab = fit_vocabulary(&["x y"], GramUnit::words(&[1]), 100).unwrap();
        assert_eq!(vocab.len(), 2);
    }

    #[test]
    fn empty_texts_rejected() {
        assert!(fit_vocabulary(&[], GramUnit::words(&[1]), 5).is_err());
    }

    #[test]
    fn word_bigrams_counted() {
        let vocab = fit_vocabulary(&["a b a b"], GramUnit::words(&[1, 2]), 10).unwrap();
        assert!(vocab.contains("a b"));
        let counts = vocab.count_vector("a b");
        let idx = vocab.index_of("a b").unwrap();
        assert_eq!(counts[idx], 1.0);
    }

    #[test]
    fn char_grams_overlapping() {
        let vocab = fit_vocabulary(&["aaaa"], GramUnit::chars(3), 10).unwrap();
        let counts = vocab.count_vector("aaaa");
        assert_eq!(counts[vocab.index_of("aaa").unwrap()], 2.0);
    }

    #[test]
    fn negation_tagged_vocabulary() {
        let vocab = fit_vocabulary(&["not good"], GramUnit::negated_words(&[1]), 10).unwrap();
        assert!(vocab.contains("_NEGgood"));
        assert_eq!(
            vocab.count_vector("this is not good")[vocab.index_of("_NEGgood").unwrap()],
            1.0
        );
    }

    #[test]
    fn idf_monotone_in_rarity() {
        let texts = ["common rare", "common", "common"];
        let vocab = fit_vocabulary(&texts, GramUnit::words(&[1]), 10).unwrap();
        let idf = idf_table(&vocab, &texts);
        let common = idf[vocab.index_of("common").unwrap()];
        let rare = idf[vocab.index_of("rare").unwrap()];
        assert!(rare > common);
    }
}
