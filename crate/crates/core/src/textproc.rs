//! Deterministic text primitives shared by every feature extractor:
//! tokenization, sentence splitting, syllable counting, negation tagging,
//! and n-gram generation. Everything here is a pure, total function of its
//! input, so extractors built on top stay reproducible.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Negation keywords that open a `_NEG` scope. Tokens ending in "n't"
/// (e.g. "don't") trigger the scope as well.
pub const DEFAULT_NEGATION_KEYWORDS: &[&str] = &[
    "no", "not", "never", "none", "nobody", "nothing", "neither", "nor", "nowhere", "n't",
    "cannot", "without",
];

/// Abbreviations that suppress a sentence split at a following period.
pub const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "prof.", "st.", "jr.", "sr.", "u.s.", "u.k.", "u.n.", "etc.",
    "e.g.", "i.e.", "vs.", "inc.", "ltd.", "co.", "no.", "fig.", "gen.", "sen.", "gov.", "rep.",
];

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// A single token with its precomputed counting form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// Original text as it appeared in the input.
    pub text: String,
    /// Counting form: the lowercase text, possibly carrying a `_NEG` prefix
    /// after [`tag_negation`]. All gram extraction operates on this form.
    pub form: String,
    /// True when every character is a letter or an apostrophe and at least
    /// one is a letter.
    pub alphabetic: bool,
    /// Character (not byte) length of the original text.
    pub chars: usize,
}

impl Token {
    fn from_run(text: String) -> Self {
        let chars = text.chars().count();
        let alphabetic = text.chars().any(|c| c.is_alphabetic())
            && text.chars().all(|c| c.is_alphabetic() || is_apostrophe(c));
        Token {
            form: text.to_lowercase(),
            alphabetic,
            chars,
            text,
        }
    }

    /// Word tokens contain at least one letter or digit; everything else is
    /// punctuation.
    pub fn is_word(&self) -> bool {
        self.text.chars().any(|c| c.is_alphanumeric())
    }

    pub fn is_punctuation(&self) -> bool {
        !self.is_word()
    }

    /// Number of alphabetic characters (used by letter-based readability
    /// formulas).
    pub fn letters(&self) -> usize {
        self.text.chars().filter(|c| c.is_alphabetic()).count()
    }

    /// Number of alphanumeric characters.
    pub fn alnum_chars(&self) -> usize {
        self.text.chars().filter(|c| c.is_alphanumeric()).count()
    }
}

/// An ordered token sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSeq(pub Vec<Token>);

impl TokenSeq {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Token> {
        self.0.iter()
    }

    /// Counting forms of all tokens.
    pub fn forms(&self) -> Vec<&str> {
        self.0.iter().map(|t| t.form.as_str()).collect()
    }

    /// Word tokens only (punctuation dropped).
    pub fn words(&self) -> Vec<&Token> {
        self.0.iter().filter(|t| t.is_word()).collect()
    }
}

/// An ordered sequence of sentences, each a token sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SentenceSeq(pub Vec<TokenSeq>);

impl SentenceSeq {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Unicode-aware tokenizer: maximal runs of letters, digits, and apostrophes
/// form tokens; every other non-whitespace character is its own token.
pub fn tokenize(text: &str) -> TokenSeq {
    let mut tokens = Vec::new();
    let mut run = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() || is_apostrophe(c) {
            run.push(c);
        } else {
            if !run.is_empty() {
                tokens.push(Token::from_run(std::mem::take(&mut run)));
            }
            if !c.is_whitespace() {
                tokens.push(Token::from_run(c.to_string()));
            }
        }
    }
    if !run.is_empty() {
        tokens.push(Token::from_run(run));
    }
    TokenSeq(tokens)
}

/// Split text into sentences after `.`, `!`, or `?` followed by whitespace or
/// end of text, then tokenize each sentence. A configurable abbreviation list
/// suppresses splits after strings like "Mr." or "U.S.". Non-blank text
/// yields at least one sentence.
pub fn split_sentences(text: &str) -> SentenceSeq {
    split_sentences_with(text, DEFAULT_ABBREVIATIONS)
}

pub fn split_sentences_with<S: AsRef<str>>(text: &str, abbreviations: &[S]) -> SentenceSeq {
    if text.trim().is_empty() {
        return SentenceSeq(Vec::new());
    }
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    for i in 0..chars.len() {
        let c = chars[i];
        if c != '.' && c != '!' && c != '?' {
            continue;
        }
        let at_boundary = i + 1 == chars.len() || chars[i + 1].is_whitespace();
        if !at_boundary {
            continue;
        }
        if c == '.' && ends_with_abbreviation(&chars[start..=i], abbreviations) {
            continue;
        }
        let segment: String = chars[start..=i].iter().collect();
        if !segment.trim().is_empty() {
            sentences.push(tokenize(&segment));
        }
        start = i + 1;
    }
    if start < chars.len() {
        let segment: String = chars[start..].iter().collect();
        if !segment.trim().is_empty() {
            sentences.push(tokenize(&segment));
        }
    }
    if sentences.is_empty() {
        sentences.push(tokenize(text));
    }
    SentenceSeq(sentences)
}

/// True when the chunk of non-whitespace characters ending the slice matches
/// an abbreviation (case-insensitive).
fn ends_with_abbreviation<S: AsRef<str>>(chars: &[char], abbreviations: &[S]) -> bool {
    let mut j = chars.len();
    while j > 0 && !chars[j - 1].is_whitespace() {
        j -= 1;
    }
    let chunk: String = chars[j..].iter().collect::<String>().to_lowercase();
    abbreviations.iter().any(|a| a.as_ref().to_lowercase() == chunk)
}

/// Heuristic syllable count: vowel groups (a, e, i, o, u, y) in the lowercase
/// form, minus one for a silent trailing "e" unless the word ends in "le"
/// preceded by a consonant. Never less than 1.
pub fn count_syllables(word: &str) -> usize {
    let lower: Vec<char> = word.to_lowercase().chars().collect();
    let is_vowel = |c: char| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
    let mut groups = 0usize;
    let mut in_group = false;
    for &c in &lower {
        if is_vowel(c) {
            if !in_group {
                groups += 1;
            }
            in_group = true;
        } else {
            in_group = false;
        }
    }
    let n = lower.len();
    if n > 0 && lower[n - 1] == 'e' {
        let consonant_le = n >= 3 && lower[n - 2] == 'l' && !is_vowel(lower[n - 3]);
        if !consonant_le {
            groups = groups.saturating_sub(1);
        }
    }
    groups.max(1)
}

/// Prefix every token inside a negation scope with `_NEG`. A scope opens
/// after a negation keyword (or a token ending in "n't") and closes at the
/// next punctuation token. Keywords themselves are left untouched, and an
/// already-tagged token is never re-tagged.
pub fn tag_negation(tokens: &TokenSeq) -> TokenSeq {
    tag_negation_with(tokens, DEFAULT_NEGATION_KEYWORDS)
}

pub fn tag_negation_with<S: AsRef<str>>(tokens: &TokenSeq, keywords: &[S]) -> TokenSeq {
    let is_keyword = |form: &str| {
        keywords.iter().any(|k| k.as_ref() == form) || form.ends_with("n't") || form.ends_with("n\u{2019}t")
    };
    let mut out = Vec::with_capacity(tokens.len());
    let mut in_scope = false;
    for token in tokens.iter() {
        let mut token = token.clone();
        if token.is_punctuation() {
            in_scope = false;
        } else if is_keyword(&token.form) {
            in_scope = true;
        } else if in_scope && !token.form.starts_with("_NEG") {
            token.form = format!("_NEG{}", token.form);
            token.text = format!("_NEG{}", token.text);
        }
        out.push(token);
    }
    TokenSeq(out)
}

/// Contiguous word n-grams over token counting forms, joined with spaces.
pub fn ngrams(tokens: &TokenSeq, n: usize) -> Vec<String> {
    assert!(n >= 1, "n-gram order must be >= 1");
    let forms = tokens.forms();
    if forms.len() < n {
        return Vec::new();
    }
    forms.windows(n).map(|w| w.join(" ")).collect()
}

/// Contiguous character n-grams over the lowercase text with whitespace runs
/// collapsed to single spaces and ends trimmed.
pub fn char_ngrams(text: &str, n: usize) -> Vec<String> {
    assert!(n >= 1, "n-gram order must be >= 1");
    let collapsed = collapse_whitespace(&text.to_lowercase());
    let chars: Vec<char> = collapsed.chars().collect();
    if chars.len() < n {
        return Vec::new();
    }
    chars.windows(n).map(|w| w.iter().collect()).collect()
}

/// Collapse whitespace runs to single spaces and trim the ends.
pub fn collapse_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut last_space = true;
    for c in text.chars() {
        if c.is_whitespace() {
            if !last_space {
                out.push(' ');
            }
            last_space = true;
        } else {
            out.push(c);
            last_space = false;
        }
    }
    if out.ends_with(' ') {
        out.pop();
    }
    out
}

/// Load a one-entry-per-line word list (negation keywords, abbreviations,
/// refuting words). Blank lines and `#` comments are skipped.
pub fn load_wordlist(path: &Path) -> Result<Vec<String>> {
    let content = std::fs::read_to_string(path)?;
    Ok(parse_wordlist(&content))
}

pub fn parse_wordlist(content: &str) -> Vec<String> {
    content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn forms(seq: &TokenSeq) -> Vec<String> {
        seq.iter().map(|t| t.form.clone()).collect()
    }

    #[test]
    fn tokenize_empty() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("   \t\n").is_empty());
    }

    #[test]
    fn tokenize_splits_punctuation() {
        let seq = tokenize("Israel opens dams.");
        assert_eq!(forms(&seq), vec!["israel", "opens", "dams", "."]);
    }

    #[test]
    fn tokenize_keeps_apostrophes() {
        let seq = tokenize("don't stop");
        assert_eq!(forms(&seq), vec!["don't", "stop"]);
    }

    #[test]
    fn tokenize_token_metadata() {
        let seq = tokenize("Ab1 x.");
        assert!(!seq.0[0].alphabetic); // contains a digit
        assert_eq!(seq.0[0].chars, 3);
        assert!(seq.0[1].alphabetic);
        assert!(seq.0[2].is_punctuation());
    }

    #[test]
    fn sentences_basic() {
        assert_eq!(split_sentences("A. B? C!").len(), 3);
        assert_eq!(split_sentences("no terminal punctuation").len(), 1);
    }

    #[test]
    fn sentences_abbreviation() {
        assert_eq!(split_sentences("Mr. Smith left.").len(), 1);
        assert_eq!(split_sentences("He works in the U.S. now").len(), 1);
    }

    #[test]
    fn sentences_terminator_mid_word_does_not_split() {
        assert_eq!(split_sentences("version 2.5 is out").len(), 1);
    }

    #[test]
    fn syllables_examples() {
        assert_eq!(count_syllables("cat"), 1);
        assert_eq!(count_syllables("syllable"), 3);
        assert_eq!(count_syllables("make"), 1);
        assert_eq!(count_syllables("the"), 1);
        assert_eq!(count_syllables("apple"), 2);
    }

    #[test]
    fn negation_scope() {
        let tagged = tag_negation(&tokenize("not good. fine"));
        assert_eq!(forms(&tagged), vec!["not", "_NEGgood", ".", "fine"]);
    }

    #[test]
    fn negation_empty_scope_and_identity() {
        let tagged = tag_negation(&tokenize("never! ok"));
        assert_eq!(forms(&tagged), vec!["never", "!", "ok"]);
        let plain = tokenize("all fine here");
        assert_eq!(tag_negation(&plain), plain);
    }

    #[test]
    fn negation_contraction_trigger() {
        let tagged = tag_negation(&tokenize("don't stop me"));
        assert_eq!(forms(&tagged), vec!["don't", "_NEGstop", "_NEGme"]);
    }

    #[test]
    fn ngrams_examples() {
        let seq = tokenize("a b c");
        assert_eq!(ngrams(&seq, 2), vec!["a b", "b c"]);
        assert_eq!(ngrams(&seq, 1), vec!["a", "b", "c"]);
        assert!(ngrams(&seq, 4).is_empty());
    }

    #[test]
    fn char_ngrams_examples() {
        assert_eq!(char_ngrams("abc", 2), vec!["ab", "bc"]);
        assert_eq!(char_ngrams("abc", 3), vec!["abc"]);
        assert_eq!(char_ngrams("a  b", 3), vec!["a b"]);
    }

    #[test]
    fn wordlist_parsing() {
        let list = parse_wordlist("# comment\nno\n\n  not  \n");
        assert_eq!(list, vec!["no", "not"]);
    }

    proptest! {
        #[test]
        fn tokenize_total_and_lowercase_idempotent(text in "\\PC{0,200}") {
            let seq = tokenize(&text);
            for t in seq.iter() {
                prop_assert_eq!(t.form.to_lowercase(), t.form.clone());
                prop_assert_eq!(t.chars, t.text.chars().count());
            }
        }

        #[test]
        fn sentence_tokens_match_tokenize(text in "\\PC{0,200}") {
            let direct = tokenize(&text);
            let sentences = split_sentences(&text);
            let rejoined: Vec<Token> =
                sentences.0.iter().flat_map(|s| s.0.iter().cloned()).collect();
            prop_assert_eq!(rejoined, direct.0);
        }

        #[test]
        fn ngram_count_law(words in proptest::collection::vec("[a-z]{1,5}", 0..12), n in 1usize..5) {
            let text = words.join(" ");
            let seq = tokenize(&text);
            let grams = ngrams(&seq, n);
            prop_assert_eq!(grams.len(), (seq.len() + 1).saturating_sub(n));
        }

        #[test]
        fn negation_idempotent(text in "\\PC{0,120}") {
            let once = tag_negation(&tokenize(&text));
            let twice = tag_negation(&once);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn syllables_at_least_one(word in "[a-zA-Z]{1,12}") {
            prop_assert!(count_syllables(&word) >= 1);
        }
    }
}
