//! The hand-crafted extractors that need no fitted state beyond
//! vocabularies: bag-of-words/characters, n-gram co-occurrence, refuting and
//! polarity word features, word overlap, structural statistics, TF-IDF
//! cosine, word-similarity, and POS counts.

use std::collections::HashMap;

use crate::corpus::Instance;
use crate::error::{Error, Result};
use crate::neural::EmbeddingTable;
use crate::textproc::{
    char_ngrams, ngrams, split_sentences, tokenize, TokenSeq, DEFAULT_NEGATION_KEYWORDS,
};
use crate::topics::cosine;

use super::pos::{InstancePos, PosTag};
use super::vocab::Vocabulary;
use super::FeatureVector;

/// Refuting-word list of the FNC-1 baseline; overridable by file.
pub const DEFAULT_REFUTING_WORDS: &[&str] = &[
    "fake", "fraud", "hoax", "false", "deny", "denies", "not", "despite", "nope", "doubt",
    "doubts", "bogus", "debunk", "pranks", "retract",
];

/// Compact English stopword list used by the co-occurrence feature.
pub const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for", "from",
    "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself", "him",
    "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just", "me",
    "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once", "only",
    "or", "other", "our", "ours", "ourselves", "out", "over", "own", "same", "she", "should",
    "so", "some", "such", "than", "that", "the", "their", "theirs", "them", "themselves", "then",
    "there", "these", "they", "this", "those", "through", "to", "too", "under", "until", "up",
    "very", "was", "we", "were", "what", "when", "where", "which", "while", "who", "whom", "why",
    "will", "with", "you", "your", "yours", "yourself", "yourselves",
];

fn side_names(prefix: &str, vocab: &Vocabulary, side: &str) -> Vec<String> {
    vocab
        .entries
        .iter()
        .map(|gram| format!("{prefix}_{side}_{gram}"))
        .collect()
}

pub fn bow_feature_names(vocab_h: &Vocabulary, vocab_d: &Vocabulary) -> Vec<String> {
    let mut names = side_names("bow", vocab_h, "h");
    names.extend(side_names("bow", vocab_d, "d"));
    names
}

/// Term-frequency counts of headline grams over `vocab_h` concatenated with
/// body counts over `vocab_d`. Negation tagging happens inside the
/// vocabularies' gram unit.
pub fn bow_vector(
    instance: &Instance,
    vocab_h: &Vocabulary,
    vocab_d: &Vocabulary,
) -> Result<FeatureVector> {
    let mut values = vocab_h.count_vector(&instance.headline);
    values.extend(vocab_d.count_vector(&instance.body));
    FeatureVector::new(bow_feature_names(vocab_h, vocab_d), values)
}

pub fn boc_feature_names(vocab_h: &Vocabulary, vocab_d: &Vocabulary) -> Vec<String> {
    let mut names = side_names("boc", vocab_h, "h");
    names.extend(side_names("boc", vocab_d, "d"));
    names
}

/// Character-3-gram term frequencies, as [`bow_vector`] but without
/// negation tagging.
pub fn boc_vector(
    instance: &Instance,
    vocab_h: &Vocabulary,
    vocab_d: &Vocabulary,
) -> Result<FeatureVector> {
    let mut values = vocab_h.count_vector(&instance.headline);
    values.extend(vocab_d.count_vector(&instance.body));
    FeatureVector::new(boc_feature_names(vocab_h, vocab_d), values)
}

const COOC_UNITS: [&str; 8] = [
    "word1", "word2", "word4", "char2", "char4", "char8", "char16", "stop",
];
const COOC_SCOPES: [&str; 3] = ["first100", "first255", "whole"];

fn unit_grams(unit: &str, text: &str, tokens: &TokenSeq) -> Vec<String> {
    match unit {
        "word1" => ngrams(tokens, 1),
        "word2" => ngrams(tokens, 2),
        "word4" => ngrams(tokens, 4),
        "char2" => char_ngrams(text, 2),
        "char4" => char_ngrams(text, 4),
        "char8" => char_ngrams(text, 8),
        "char16" => char_ngrams(text, 16),
        "stop" => tokens
            .forms()
            .into_iter()
            .filter(|f| STOPWORDS.contains(f))
            .map(str::to_string)
            .collect(),
        _ => unreachable!("unknown co-occurrence unit"),
    }
}

pub fn cooc_feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(24);
    for unit in COOC_UNITS {
        for scope in COOC_SCOPES {
            names.push(format!("cooc_{unit}_{scope}"));
        }
    }
    names
}

/// For every unit (word 1/2/4-grams, char 2/4/8/16-grams, stopwords) and
/// every scope (first 100 chars, first 255 chars, whole body): the total
/// occurrence count of the headline's grams within the scope. Fixed
/// 24-dimensional layout.
pub fn cooc_vector(instance: &Instance) -> Result<FeatureVector> {
    let headline_tokens = tokenize(&instance.headline);
    let scope_texts: [String; 3] = [
        instance.body.chars().take(100).collect(),
        instance.body.chars().take(255).collect(),
        instance.body.to_string(),
    ];
    let scope_tokens: Vec<TokenSeq> = scope_texts.iter().map(|t| tokenize(t)).collect();

    let mut values = Vec::with_capacity(24);
    for unit in COOC_UNITS {
        let headline_grams = unit_grams(unit, &instance.headline, &headline_tokens);
        for (scope_text, scope_toks) in scope_texts.iter().zip(&scope_tokens) {
            let mut scope_counts: HashMap<String, f64> = HashMap::new();
            for gram in unit_grams(unit, scope_text, scope_toks) {
                *scope_counts.entry(gram).or_insert(0.0) += 1.0;
            }
            let total: f64 = headline_grams
                .iter()
                .map(|gram| scope_counts.get(gram).copied().unwrap_or(0.0))
                .sum();
            values.push(total);
        }
    }
    FeatureVector::new(cooc_feature_names(), values)
}

pub fn refuting_feature_names(words: &[String]) -> Vec<String> {
    words.iter().map(|w| format!("refu_{w}")).collect()
}

/// One 0/1 entry per refuting word, set when the word occurs in the body
/// token set.
pub fn refuting_vector(instance: &Instance, words: &[String]) -> Result<FeatureVector> {
    let body_tokens = tokenize(&instance.body);
    let forms: std::collections::HashSet<&str> = body_tokens.forms().into_iter().collect();
    let values = words
        .iter()
        .map(|w| if forms.contains(w.as_str()) { 1.0 } else { 0.0 })
        .collect();
    FeatureVector::new(refuting_feature_names(words), values)
}

fn refuting_count(text: &str, words: &[String]) -> u64 {
    let tokens = tokenize(text);
    tokens
        .forms()
        .iter()
        .filter(|f| words.iter().any(|w| w == *f))
        .count() as u64
}

/// Refuting-word count per side, modulo 2 (the FNC baseline's polarity
/// parity feature).
pub fn polarity_vector(instance: &Instance, words: &[String]) -> Result<FeatureVector> {
    FeatureVector::new(
        vec!["pola_h".to_string(), "pola_d".to_string()],
        vec![
            (refuting_count(&instance.headline, words) % 2) as f64,
            (refuting_count(&instance.body, words) % 2) as f64,
        ],
    )
}

/// Jaccard similarity of the lowercase token sets; 0 when the union is
/// empty.
pub fn word_overlap(instance: &Instance) -> f64 {
    let h: std::collections::HashSet<String> = tokenize(&instance.headline)
        .forms()
        .into_iter()
        .map(str::to_string)
        .collect();
    let d: std::collections::HashSet<String> = tokenize(&instance.body)
        .forms()
        .into_iter()
        .map(str::to_string)
        .collect();
    let intersection = h.intersection(&d).count() as f64;
    let union = h.union(&d).count() as f64;
    if union == 0.0 {
        0.0
    } else {
        intersection / union
    }
}

/// Split on blank lines; a paragraph is a run of non-blank lines.
fn paragraphs(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
        } else {
            if !current.is_empty() {
                current.push('\n');
            }
            current.push_str(line);
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

pub fn structural_feature_names() -> Vec<String> {
    ["struc_avg_word_len_h", "struc_avg_word_len_d", "struc_paragraphs", "struc_avg_par_len"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

/// Average word length per side, body paragraph count, and average
/// paragraph length in tokens; zeros for empty sides.
pub fn structural_vector(instance: &Instance) -> Result<FeatureVector> {
    let avg_word_len = |text: &str| -> f64 {
        let tokens = tokenize(text);
        let words = tokens.words();
        if words.is_empty() {
            0.0
        } else {
            words.iter().map(|t| t.chars as f64).sum::<f64>() / words.len() as f64
        }
    };
    let paragraphs = paragraphs(&instance.body);
    let avg_par_len = if paragraphs.is_empty() {
        0.0
    } else {
        paragraphs
            .iter()
            .map(|p| tokenize(p).len() as f64)
            .sum::<f64>()
            / paragraphs.len() as f64
    };
    FeatureVector::new(
        structural_feature_names(),
        vec![
            avg_word_len(&instance.headline),
            avg_word_len(&instance.body),
            paragraphs.len() as f64,
            avg_par_len,
        ],
    )
}

/// Cosine of the TF-IDF vectors of headline and body over a shared
/// vocabulary; 0 when either vector is zero.
pub fn tfidf_cosine(instance: &Instance, vocab: &Vocabulary, idf: &[f64]) -> Result<f64> {
    if vocab.is_empty() || idf.len() != vocab.len() {
        return Err(Error::Unfitted("tfidf vocabulary".to_string()));
    }
    let weigh = |text: &str| -> Vec<f64> {
        vocab
            .count_vector(text)
            .into_iter()
            .zip(idf)
            .map(|(tf, w)| tf * w)
            .collect()
    };
    Ok(cosine(&weigh(&instance.headline), &weigh(&instance.body)))
}

const WSIM_STATS: [&str; 6] = [
    "verb_cos",
    "noun_cos",
    "wps_h",
    "wps_d",
    "neg_count_h",
    "neg_count_d",
];

pub fn wsim_feature_names(pos_available: bool) -> Vec<String> {
    let suffix = if pos_available { "" } else { "_alltok" };
    WSIM_STATS
        .iter()
        .enumerate()
        .map(|(i, stat)| {
            // Only the two cosine features degrade without POS tags.
            if i < 2 {
                format!("wsim_{stat}{suffix}")
            } else {
                format!("wsim_{stat}")
            }
        })
        .collect()
}

fn mean_embedding(
    tokens: &TokenSeq,
    table: &EmbeddingTable,
    tags: Option<&HashMap<usize, PosTag>>,
    wanted: PosTag,
) -> Vec<f64> {
    let mut sum = vec![0.0; table.dim];
    let mut n = 0usize;
    for (i, token) in tokens.iter().enumerate() {
        let selected = match tags {
            Some(tags) => tags.get(&i) == Some(&wanted),
            None => token.alphabetic,
        };
        if !selected {
            continue;
        }
        if let Some(vector) = table.get(&token.form) {
            for (s, v) in sum.iter_mut().zip(vector) {
                *s += v;
            }
            n += 1;
        }
    }
    if n > 0 {
        for s in sum.iter_mut() {
            *s /= n as f64;
        }
    }
    sum
}

fn negation_trigger_count(tokens: &TokenSeq) -> f64 {
    tokens
        .iter()
        .filter(|t| {
            DEFAULT_NEGATION_KEYWORDS.contains(&t.form.as_str()) || t.form.ends_with("n't")
        })
        .count() as f64
}

/// Word-similarity features: cosine of averaged verb embeddings and of
/// averaged noun embeddings between headline and body, words per sentence
/// per side, and negation-keyword counts per side. Without POS annotations
/// the verb/noun selections degrade to all alphabetic tokens.
pub fn wsim_vector(
    instance: &Instance,
    table: &EmbeddingTable,
    pos: Option<&InstancePos>,
    pos_available: bool,
) -> Result<FeatureVector> {
    let headline = tokenize(&instance.headline);
    let body = tokenize(&instance.body);

    let verb_h = mean_embedding(&headline, table, pos.map(|p| &p.headline), PosTag::Verb);
    let verb_d = mean_embedding(&body, table, pos.map(|p| &p.body), PosTag::Verb);
    let noun_h = mean_embedding(&headline, table, pos.map(|p| &p.headline), PosTag::Noun);
    let noun_d = mean_embedding(&body, table, pos.map(|p| &p.body), PosTag::Noun);

    let wps = |text: &str, tokens: &TokenSeq| -> f64 {
        let sentences = split_sentences(text).len();
        if sentences == 0 {
            0.0
        } else {
            tokens.words().len() as f64 / sentences as f64
        }
    };

    FeatureVector::new(
        wsim_feature_names(pos_available),
        vec![
            cosine(&verb_h, &verb_d),
            cosine(&noun_h, &noun_d),
            wps(&instance.headline, &headline),
            wps(&instance.body, &body),
            negation_trigger_count(&headline),
            negation_trigger_count(&body),
        ],
    )
}

pub fn pos_count_feature_names() -> Vec<String> {
    let mut names = Vec::new();
    for side in ["h", "d"] {
        for stat in ["nouns", "verbs", "other", "noun_frac", "verb_frac"] {
            names.push(format!("pos_{side}_{stat}"));
        }
    }
    names
}

/// Coarse POS counts per side: noun/verb/other counts and noun/verb
/// fractions over tagged tokens. Untagged instances yield zeros.
pub fn pos_counts_vector(instance_pos: Option<&InstancePos>) -> Result<FeatureVector> {
    let side_stats = |tags: Option<&HashMap<usize, PosTag>>| -> [f64; 5] {
        let Some(tags) = tags else { return [0.0; 5] };
        let mut nouns = 0.0;
        let mut verbs = 0.0;
        let mut other = 0.0;
        for tag in tags.values() {
            match tag {
                PosTag::Noun => nouns += 1.0,
                PosTag::Verb => verbs += 1.0,
                PosTag::Other => other += 1.0,
            }
        }
        let total = nouns + verbs + other;
        let frac = |x: f64| if total == 0.0 { 0.0 } else { x / total };
        [nouns, verbs, other, frac(nouns), frac(verbs)]
    };
    let mut values = Vec::with_capacity(10);
    values.extend(side_stats(instance_pos.map(|p| &p.headline)));
    values.extend(side_stats(instance_pos.map(|p| &p.body)));
    FeatureVector::new(pos_count_feature_names(), values)
}
