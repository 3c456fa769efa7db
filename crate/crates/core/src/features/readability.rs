//! Readability formulas over headline and body: Flesch reading ease,
//! Flesch-Kincaid grade, Gunning fog, Coleman-Liau, ARI, LIX, RIX,
//! McAlpine EFLAW, Strain, and (body only) SMOG with its validity flag.

use crate::corpus::Instance;
use crate::error::Result;
use crate::textproc::{count_syllables, split_sentences, tokenize, Token};

use super::FeatureVector;

const SMOG_MIN_SENTENCES: usize = 30;

struct TextStats {
    words: f64,
    sentences: f64,
    syllables: f64,
    complex_words: f64,
    letters: f64,
    alnum_chars: f64,
    long_words: f64,
    mini_words: f64,
    strain_syllables: f64,
}

fn stats(text: &str) -> TextStats {
    let sentences = split_sentences(text);
    let tokens = tokenize(text);
    let words: Vec<&Token> = tokens.words();
    let syllable = |t: &Token| count_syllables(&t.text) as f64;

    let mut strain_syllables = 0.0;
    for sentence in sentences.0.iter().take(3) {
        strain_syllables += sentence.words().iter().map(|t| syllable(t)).sum::<f64>();
    }

    TextStats {
        words: words.len() as f64,
        sentences: sentences.len() as f64,
        syllables: words.iter().map(|t| syllable(t)).sum(),
        complex_words: words.iter().filter(|t| count_syllables(&t.text) >= 3).count() as f64,
        letters: words.iter().map(|t| t.letters() as f64).sum(),
        alnum_chars: words.iter().map(|t| t.alnum_chars() as f64).sum(),
        long_words: words.iter().filter(|t| t.chars > 6).count() as f64,
        mini_words: words.iter().filter(|t| t.chars <= 3).count() as f64,
        strain_syllables,
    }
}

/// The nine per-side metrics in layout order.
fn side_metrics(s: &TextStats) -> [f64; 9] {
    if s.words == 0.0 || s.sentences == 0.0 {
        return [0.0; 9];
    }
    let wps = s.words / s.sentences;
    let spw = s.syllables / s.words;
    let flesch_re = 206.835 - 1.015 * wps - 84.6 * spw;
    let fk_grade = 0.39 * wps + 11.8 * spw - 15.59;
    let fog = 0.4 * (wps + 100.0 * s.complex_words / s.words);
    let l = 100.0 * s.letters / s.words;
    let sent_per_100 = 100.0 * s.sentences / s.words;
    let coleman_liau = 0.0588 * l - 0.296 * sent_per_100 - 15.8;
    let ari = 4.71 * (s.alnum_chars / s.words) + 0.5 * wps - 21.43;
    let lix = wps + 100.0 * s.long_words / s.words;
    let rix = s.long_words / s.sentences;
    let eflaw = (s.words + s.mini_words) / s.sentences;
    let strain = s.strain_syllables / 10.0;
    [
        flesch_re,
        fk_grade,
        fog,
        coleman_liau,
        ari,
        lix,
        rix,
        eflaw,
        strain,
    ]
}

const SIDE_METRIC_NAMES: [&str; 9] = [
    "flesch_re",
    "fk_grade",
    "fog",
    "coleman_liau",
    "ari",
    "lix",
    "rix",
    "eflaw",
    "strain",
];

pub fn readability_feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(20);
    for side in ["h", "d"] {
        for metric in SIDE_METRIC_NAMES {
            names.push(format!("read_{side}_{metric}"));
        }
    }
    names.push("read_d_smog".to_string());
    names.push("read_d_smog_valid".to_string());
    names
}

/// All readability metrics: nine per side, then body SMOG and its validity
/// flag (0 below 30 sentences). Empty sides yield zeros.
pub fn readability_vector(instance: &Instance) -> Result<FeatureVector> {
    let headline = stats(&instance.headline);
    let body = stats(&instance.body);
    let mut values = Vec::with_capacity(20);
    values.extend(side_metrics(&headline));
    values.extend(side_metrics(&body));

    if body.sentences >= SMOG_MIN_SENTENCES as f64 {
        let smog = 1.043 * (body.complex_words * 30.0 / body.sentences).sqrt() + 3.1291;
        values.push(smog);
        values.push(1.0);
    } else {
        values.push(0.0);
        values.push(0.0);
    }
    FeatureVector::new(readability_feature_names(), values)
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
    fn flesch_direct_evaluation() {
        // 3 words, 1 sentence, 3 syllables.
        let v = readability_vector(&instance("x", "The cat sat.")).unwrap();
        let flesch = v.get("read_d_flesch_re").unwrap();
        assert!((flesch - 119.19).abs() < 0.01, "flesch = {flesch}");
    }

    #[test]
    fn lix_single_long_word() {
        let v = readability_vector(&instance("x", "aaaaaaa.")).unwrap();
        assert_eq!(v.get("read_d_lix"), Some(101.0));
        assert_eq!(v.get("read_d_rix"), Some(1.0));
    }

    #[test]
    fn smog_invalid_below_30_sentences() {
        let v = readability_vector(&instance("x", "One. Two. Three.")).unwrap();
        assert_eq!(v.get("read_d_smog"), Some(0.0));
        assert_eq!(v.get("read_d_smog_valid"), Some(0.0));
    }

    #[test]
    fn smog_valid_at_30_sentences() {
        // Per sentence: considerable, elephantine, animal, wandered are
        // polysyllabic (>= 3 vowel groups), so 120 over 30 sentences.
        let body = "The considerable elephantine animal wandered. ".repeat(30);
        let v = readability_vector(&instance("x", &body)).unwrap();
        assert_eq!(v.get("read_d_smog_valid"), Some(1.0));
        let expected = 1.043 * (120.0f64 * 30.0 / 30.0).sqrt() + 3.1291;
        assert!((v.get("read_d_smog").unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn empty_sides_are_zero_and_finite() {
        let v = readability_vector(&instance("", "")).unwrap();
        assert!(v.values.iter().all(|&x| x == 0.0));
        let v = readability_vector(&instance("...", "?!")).unwrap();
        assert!(v.values.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn width_is_fixed() {
        for (h, b) in [("a", "b"), ("", ""), ("Some headline here", "A body. With two sentences.")] {
            let v = readability_vector(&instance(h, b)).unwrap();
            assert_eq!(v.width(), 20);
        }
    }
}
