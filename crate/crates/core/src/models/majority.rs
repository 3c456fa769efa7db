//! The majority-vote baseline: always predict the most frequent training
//! label.

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, StanceLabel};
use crate::error::{Error, Result};

/// Tie priority UNR > DSC > AGR > DSG as rank (higher wins a tie).
pub(crate) fn frequency_tie_rank(label: StanceLabel) -> usize {
    match label {
        StanceLabel::Unrelated => 3,
        StanceLabel::Discuss => 2,
        StanceLabel::Agree => 1,
        StanceLabel::Disagree => 0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorityModel {
    pub label: StanceLabel,
    pub class_counts: [u64; 4],
}

impl MajorityModel {
    pub fn fit(corpus: &Corpus) -> Result<MajorityModel> {
        if corpus.is_empty() {
            return Err(Error::invalid("cannot fit majority vote on an empty corpus"));
        }
        let labels = corpus.labels()?;
        let mut counts = [0u64; 4];
        for label in labels {
            counts[label.index()] += 1;
        }
        let label = StanceLabel::ALL
            .iter()
            .copied()
            .max_by_key(|&l| (counts[l.index()], frequency_tie_rank(l)))
            .expect("four classes");
        Ok(MajorityModel {
            label,
            class_counts: counts,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn corpus_of(labels: &[StanceLabel]) -> Corpus {
        let mut corpus = Corpus::new("m");
        corpus.bodies.insert(0, Arc::from("body"));
        for &label in labels {
            corpus.instances.push(crate::corpus::Instance {
                headline: "h".to_string(),
                body_id: 0,
                body: corpus.bodies[&0].clone(),
                stance: Some(label),
            });
        }
        corpus
    }

    #[test]
    fn most_frequent_wins() {
        use StanceLabel::*;
        let model = MajorityModel::fit(&corpus_of(&[Unrelated, Unrelated, Agree])).unwrap();
        assert_eq!(model.label, Unrelated);
    }

    #[test]
    fn tie_prefers_unr_then_dsc() {
        use StanceLabel::*;
        let model = MajorityModel::fit(&corpus_of(&[Unrelated, Discuss])).unwrap();
        assert_eq!(model.label, Unrelated);
        let model = MajorityModel::fit(&corpus_of(&[Agree, Discuss])).unwrap();
        assert_eq!(model.label, Discuss);
        let model = MajorityModel::fit(&corpus_of(&[Agree, Disagree])).unwrap();
        assert_eq!(model.label, Agree);
    }

    #[test]
    fn empty_corpus_rejected() {
        assert!(MajorityModel::fit(&Corpus::new("e")).is_err());
    }
}
