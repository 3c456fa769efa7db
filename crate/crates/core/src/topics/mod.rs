//! From-scratch topic models over term-document matrices: non-negative
//! matrix factorization (multiplicative updates), latent semantic indexing
//! (iterative truncated SVD), and latent Dirichlet allocation (collapsed
//! Gibbs sampling), plus fold-in of unseen texts and conversion to instance
//! features.

pub mod lda;
pub mod linalg;
pub mod lsi;
pub mod nmf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureVector, Vocabulary};

pub use lda::{fit_lda, LdaModel};
pub use linalg::{cosine, Mat};
pub use lsi::{fit_lsi, LsiModel};
pub use nmf::{fit_nmf, NmfModel};

/// Term weighting for the term-document matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Weighting {
    Tf,
    TfIdf,
}

/// Turns raw text into a weighted term vector; carried by every fitted
/// model so fold-in matches the training representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermVectorizer {
    pub vocab: Vocabulary,
    pub weighting: Weighting,
    pub idf: Option<Vec<f64>>,
}

impl TermVectorizer {
    pub fn vectorize(&self, text: &str) -> Vec<f64> {
        let mut counts = self.vocab.count_vector(text);
        if let (Weighting::TfIdf, Some(idf)) = (self.weighting, &self.idf) {
            for (c, w) in counts.iter_mut().zip(idf) {
                *c *= w;
            }
        }
        counts
    }

    pub fn n_terms(&self) -> usize {
        self.vocab.len()
    }
}

/// A weighted term-document matrix, rows = documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermDocMatrix {
    pub matrix: Mat,
    pub vectorizer: TermVectorizer,
}

impl TermDocMatrix {
    pub fn n_docs(&self) -> usize {
        self.matrix.rows
    }

    pub fn n_terms(&self) -> usize {
        self.matrix.cols
    }
}

/// Build a term-document matrix over a fitted vocabulary. TF-IDF weighting
/// fits the idf table on the same texts.
pub fn build_term_doc(texts: &[&str], vocab: &Vocabulary, weighting: Weighting) -> TermDocMatrix {
    let idf = match weighting {
        Weighting::Tf => None,
        Weighting::TfIdf => Some(crate::features::idf_table(vocab, texts)),
    };
    let vectorizer = TermVectorizer {
        vocab: vocab.clone(),
        weighting,
        idf,
    };
    let rows: Vec<Vec<f64>> = texts.iter().map(|t| vectorizer.vectorize(t)).collect();
    let mut matrix = if rows.is_empty() {
        Mat::zeros(0, vocab.len())
    } else {
        Mat::from_rows(rows)
    };
    matrix.cols = vocab.len();
    TermDocMatrix { matrix, vectorizer }
}

/// Any fitted topic model, with a uniform fold-in interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TopicModel {
    Nmf(NmfModel),
    Lsi(LsiModel),
    Lda(LdaModel),
}

impl TopicModel {
    pub fn k(&self) -> usize {
        match self {
            TopicModel::Nmf(m) => m.k,
            TopicModel::Lsi(m) => m.k(),
            TopicModel::Lda(m) => m.k,
        }
    }

    /// Project an unseen text into topic space. Texts with no in-vocabulary
    /// grams map to the zero vector.
    pub fn fold_in(&self, text: &str) -> Vec<f64> {
        match self {
            TopicModel::Nmf(m) => m.fold_in(text),
            TopicModel::Lsi(m) => m.fold_in(text),
            TopicModel::Lda(m) => m.fold_in(text),
        }
    }

    /// Rebuild vocabulary lookup tables after deserialization.
    pub fn rebuild_index(&mut self) {
        match self {
            TopicModel::Nmf(m) => m.vectorizer.vocab.rebuild_index(),
            TopicModel::Lsi(m) => m.vectorizer.vocab.rebuild_index(),
            TopicModel::Lda(m) => m.vectorizer.vocab.rebuild_index(),
        }
    }
}

/// Topic feature mode: concatenated topic vectors or their cosine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TopicFeatureMode {
    Concat,
    Cosine,
}

/// Fold headline and body into topic space and emit either the
/// concatenation (width 2k) or the cosine of the two vectors.
pub fn topic_features(
    model: &TopicModel,
    name: &str,
    headline: &str,
    body: &str,
    mode: TopicFeatureMode,
) -> Result<FeatureVector> {
    if model.k() == 0 {
        return Err(Error::Unfitted(format!("topic model {name}")));
    }
    let h = model.fold_in(headline);
    let b = model.fold_in(body);
    match mode {
        TopicFeatureMode::Concat => {
            let mut names = Vec::with_capacity(2 * model.k());
            let mut values = Vec::with_capacity(2 * model.k());
            for (side, vec) in [("h", &h), ("d", &b)] {
                for (i, v) in vec.iter().enumerate() {
                    names.push(format!("{name}_{side}_t{i}"));
                    values.push(*v);
                }
            }
            FeatureVector::new(names, values)
        }
        TopicFeatureMode::Cosine => {
            FeatureVector::new(vec![format!("{name}_cos")], vec![cosine(&h, &b)])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{fit_vocabulary, GramUnit};

    #[test]
    fn term_doc_counts() {
        let vocab = fit_vocabulary(&["a a b"], GramUnit::words(&[1]), 10).unwrap();
        let td = build_term_doc(&["a a", "c"], &vocab, Weighting::Tf);
        assert_eq!(td.n_docs(), 2);
        let a = vocab.index_of("a").unwrap();
        assert_eq!(td.matrix.at(0, a), 2.0);
        // Out-of-vocabulary text becomes a zero row.
        assert!(td.matrix.row(1).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn tfidf_downweights_ubiquitous_grams() {
        let texts = ["common rare", "common", "common other"];
        let vocab = fit_vocabulary(&texts, GramUnit::words(&[1]), 10).unwrap();
        let td = build_term_doc(&texts, &vocab, Weighting::TfIdf);
        let common = vocab.index_of("common").unwrap();
        let rare = vocab.index_of("rare").unwrap();
        assert!(td.matrix.at(0, rare) > td.matrix.at(0, common));
    }
}
