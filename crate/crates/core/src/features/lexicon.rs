//! Sentiment/emotion lexicons and the features built from them. A lexicon
//! maps 1- or 2-grams either to a polarity score or to an 8-emotion count
//! vector; the feature layouts follow the per-side summary statistics used
//! by the reproduced systems.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Instance;
use crate::error::{Error, Result};
use crate::textproc;

use super::FeatureVector;

pub const N_EMOTIONS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LexiconKind {
    Polarity,
    Emotion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lexicon {
    pub kind: LexiconKind,
    pub scores: HashMap<String, f64>,
    pub emotions: HashMap<String, [u32; N_EMOTIONS]>,
    pub has_bigrams: bool,
}

impl Lexicon {
    pub fn len(&self) -> usize {
        match self.kind {
            LexiconKind::Polarity => self.scores.len(),
            LexiconKind::Emotion => self.emotions.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Parse a lexicon TSV: `gram<TAB>score` (polarity) or
/// `gram<TAB>e1,...,e8` (emotion); `#` comments and blank lines skipped.
/// The kind is inferred from the first data line and must be consistent.
pub fn parse_lexicon(content: &str) -> Result<Lexicon> {
    let mut kind: Option<LexiconKind> = None;
    let mut scores = HashMap::new();
    let mut emotions = HashMap::new();
    let mut has_bigrams = false;
    for (lineno, line) in content.lines().enumerate() {
        let line = line.trim_end();
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (gram, value) = line.split_once('\t').ok_or_else(|| {
            Error::invalid(format!("lexicon line {}: expected gram<TAB>value", lineno + 1))
        })?;
        let gram = gram.trim().to_lowercase();
        if gram.split(' ').count() > 2 {
            return Err(Error::invalid(format!(
                "lexicon line {}: only 1- and 2-grams supported",
                lineno + 1
            )));
        }
        if gram.contains(' ') {
            has_bigrams = true;
        }
        let line_kind = if value.contains(',') {
            LexiconKind::Emotion
        } else {
            LexiconKind::Polarity
        };
        match kind {
            None => kind = Some(line_kind),
            Some(k) if k != line_kind => {
                return Err(Error::invalid(format!(
                    "lexicon line {}: mixed polarity and emotion entries",
                    lineno + 1
                )))
            }
            _ => {}
        }
        match line_kind {
            LexiconKind::Polarity => {
                let score: f64 = value.trim().parse().map_err(|_| {
                    Error::invalid(format!("lexicon line {}: bad score {value:?}", lineno + 1))
                })?;
                if !score.is_finite() {
                    return Err(Error::invalid(format!(
                        "lexicon line {}: non-finite score",
                        lineno + 1
                    )));
                }
                scores.insert(gram, score);
            }
            LexiconKind::Emotion => {
                let parts: Vec<&str> = value.split(',').collect();
                if parts.len() != N_EMOTIONS {
                    return Err(Error::invalid(format!(
                        "lexicon line {}: expected {N_EMOTIONS} emotion counts",
                        lineno + 1
                    )));
                }
                let mut vector = [0u32; N_EMOTIONS];
                for (slot, part) in vector.iter_mut().zip(&parts) {
                    *slot = part.trim().parse().map_err(|_| {
                        Error::invalid(format!(
                            "lexicon line {}: bad emotion count {part:?}",
                            lineno + 1
                        ))
                    })?;
                }
                emotions.insert(gram, vector);
            }
        }
    }
    let kind = kind.ok_or_else(|| Error::invalid("empty lexicon"))?;
    Ok(Lexicon {
        kind,
        scores,
        emotions,
        has_bigrams,
    })
}

pub fn load_lexicon(path: &Path) -> Result<Lexicon> {
    parse_lexicon(&std::fs::read_to_string(path)?)
}

const POLARITY_STATS: [&str; 8] = [
    "count_pos", "count_neg", "count_zero", "sum_pos", "sum_neg", "max_pos", "min_neg", "last",
];

/// Scored grams of a text in scan order: 1-grams always, 2-grams when the
/// lexicon holds any.
fn scored_hits<'a>(lexicon: &'a Lexicon, text: &str) -> Vec<(&'a str, f64)> {
    let tokens = textproc::tokenize(text);
    let forms = tokens.forms();
    let mut hits = Vec::new();
    for i in 0..forms.len() {
        if lexicon.has_bigrams && i + 1 < forms.len() {
            let bigram = format!("{} {}", forms[i], forms[i + 1]);
            if let Some((gram, score)) = lexicon.scores.get_key_value(bigram.as_str()) {
                hits.push((gram.as_str(), *score));
            }
        }
        if let Some((gram, score)) = lexicon.scores.get_key_value(forms[i]) {
            hits.push((gram.as_str(), *score));
        }
    }
    hits
}

fn polarity_side(lexicon: &Lexicon, text: &str) -> [f64; 8] {
    let hits = scored_hits(lexicon, text);
    let mut out = [0.0f64; 8];
    for &(_, score) in &hits {
        if score > 0.0 {
            out[0] += 1.0;
            out[3] += score;
            out[5] = out[5].max(score);
        } else if score < 0.0 {
            out[1] += 1.0;
            out[4] += score;
            out[6] = out[6].min(score);
        } else {
            out[2] += 1.0;
        }
    }
    out[7] = hits.last().map(|&(_, s)| s).unwrap_or(0.0);
    out
}

fn emotion_side(lexicon: &Lexicon, text: &str) -> [f64; N_EMOTIONS] {
    let tokens = textproc::tokenize(text);
    let forms = tokens.forms();
    let mut out = [0.0f64; N_EMOTIONS];
    for i in 0..forms.len() {
        if lexicon.has_bigrams && i + 1 < forms.len() {
            let bigram = format!("{} {}", forms[i], forms[i + 1]);
            if let Some(vector) = lexicon.emotions.get(bigram.as_str()) {
                for (o, &v) in out.iter_mut().zip(vector) {
                    *o += v as f64;
                }
            }
        }
        if let Some(vector) = lexicon.emotions.get(forms[i]) {
            for (o, &v) in out.iter_mut().zip(vector) {
                *o += v as f64;
            }
        }
    }
    out
}

pub fn lexicon_feature_names(name: &str, kind: LexiconKind) -> Vec<String> {
    let mut names = Vec::new();
    for side in ["h", "d"] {
        match kind {
            LexiconKind::Polarity => {
                for stat in POLARITY_STATS {
                    names.push(format!("lex_{name}_{side}_{stat}"));
                }
            }
            LexiconKind::Emotion => {
                for e in 0..N_EMOTIONS {
                    names.push(format!("lex_{name}_{side}_emo{e}"));
                }
            }
        }
    }
    names
}

/// Per-side lexicon summary statistics, headline then body.
pub fn lexicon_vector(instance: &Instance, name: &str, lexicon: &Lexicon) -> Result<FeatureVector> {
    if lexicon.is_empty() {
        return Err(Error::invalid(format!("lexicon {name:?} is empty")));
    }
    let mut values = Vec::new();
    for text in [instance.headline.as_str(), &instance.body] {
        match lexicon.kind {
            LexiconKind::Polarity => values.extend(polarity_side(lexicon, text)),
            LexiconKind::Emotion => values.extend(emotion_side(lexicon, text)),
        }
    }
    FeatureVector::new(lexicon_feature_names(name, lexicon.kind), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn instance(headline: &str, body: &str) -> Instance {
        Instance {
            headline: headline.to_string(),
            body_id: 0,
            body: Arc::from(body),
            stance: None,
        }
    }

    #[test]
    fn parse_polarity_and_emotion() {
        let pol = parse_lexicon("good\t2.0\nbad\t-1\nvery good\t3.5\n").unwrap();
        assert_eq!(pol.kind, LexiconKind::Polarity);
        assert!(pol.has_bigrams);
        let emo = parse_lexicon("joy\t0,0,0,0,0,0,3,0\n").unwrap();
        assert_eq!(emo.kind, LexiconKind::Emotion);
        assert!(parse_lexicon("# only comments\n").is_err());
        assert!(parse_lexicon("a\t1\nb\t1,2,3,4,5,6,7,8\n").is_err());
    }

    #[test]
    fn polarity_stats_rule_trace() {
        let lexicon = parse_lexicon("good\t2\nbad\t-1\n").unwrap();
        let v = lexicon_vector(&instance("", "good bad good"), "t", &lexicon).unwrap();
        assert_eq!(v.get("lex_t_d_count_pos"), Some(2.0));
        assert_eq!(v.get("lex_t_d_count_neg"), Some(1.0));
        assert_eq!(v.get("lex_t_d_sum_pos"), Some(4.0));
        assert_eq!(v.get("lex_t_d_sum_neg"), Some(-1.0));
        assert_eq!(v.get("lex_t_d_max_pos"), Some(2.0));
        assert_eq!(v.get("lex_t_d_min_neg"), Some(-1.0));
        assert_eq!(v.get("lex_t_d_last"), Some(2.0));
        // The empty headline side is all zeros.
        assert!(v.values[..8].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn emotion_counts() {
        let lexicon = parse_lexicon("happy\t0,0,0,0,0,0,3,0\n").unwrap();
        let v = lexicon_vector(&instance("", "happy happy happy"), "emo", &lexicon).unwrap();
        assert_eq!(v.get("lex_emo_d_emo6"), Some(9.0));
        let others: f64 = v
            .values
            .iter()
            .sum::<f64>();
        assert_eq!(others, 9.0);
    }

    #[test]
    fn bigrams_only_consulted_when_present() {
        let unigrams = parse_lexicon("good\t1\n").unwrap();
        let v = lexicon_vector(&instance("", "very good"), "u", &unigrams).unwrap();
        assert_eq!(v.get("lex_u_d_count_pos"), Some(1.0));

        let bigrams = parse_lexicon("very good\t5\ngood\t1\n").unwrap();
        let v = lexicon_vector(&instance("", "very good"), "b", &bigrams).unwrap();
        // Both the bigram and the unigram hit.
        assert_eq!(v.get("lex_b_d_count_pos"), Some(2.0));
        assert_eq!(v.get("lex_b_d_max_pos"), Some(5.0));
    }
}
