//! Lexical diversity: type-token ratio and the measure of textual lexical
//! diversity (MTLD) with its 50-token validity rule.

use std::collections::HashSet;

use crate::corpus::Instance;
use crate::error::Result;
use crate::textproc::tokenize;

use super::FeatureVector;

const MTLD_TTR_THRESHOLD: f64 = 0.72;
const MTLD_MIN_TOKENS: usize = 50;

/// Distinct lowercase tokens over total tokens; 0 for empty text.
pub fn type_token_ratio(forms: &[&str]) -> f64 {
    if forms.is_empty() {
        return 0.0;
    }
    let distinct: HashSet<&str> = forms.iter().copied().collect();
    distinct.len() as f64 / forms.len() as f64
}

/// One direction of MTLD: count full factors wherever the running TTR drops
/// below 0.72, plus the partial factor of the remainder. A text whose TTR
/// never drops (factor count 0) maps to its token count.
fn mtld_directional(forms: &[&str]) -> f64 {
    let mut factors = 0.0f64;
    let mut types: HashSet<&str> = HashSet::new();
    let mut tokens = 0usize;
    for &form in forms {
        tokens += 1;
        types.insert(form);
        let ttr = types.len() as f64 / tokens as f64;
        if ttr < MTLD_TTR_THRESHOLD {
            factors += 1.0;
            types.clear();
            tokens = 0;
        }
    }
    if tokens > 0 {
        let ttr = types.len() as f64 / tokens as f64;
        factors += (1.0 - ttr) / (1.0 - MTLD_TTR_THRESHOLD);
    }
    if factors == 0.0 {
        forms.len() as f64
    } else {
        forms.len() as f64 / factors
    }
}

/// MTLD per McCarthy: mean of the forward and backward factor computations.
pub fn mtld(forms: &[&str]) -> f64 {
    if forms.is_empty() {
        return 0.0;
    }
    let forward = mtld_directional(forms);
    let reversed: Vec<&str> = forms.iter().rev().copied().collect();
    let backward = mtld_directional(&reversed);
    (forward + backward) / 2.0
}

/// `[TTR(headline), TTR(body), MTLD(body), MTLD validity flag]`; MTLD is 0
/// with flag 0 when the body has fewer than 50 tokens.
pub fn lexdiv_vector(instance: &Instance) -> Result<FeatureVector> {
    let headline = tokenize(&instance.headline);
    let body = tokenize(&instance.body);
    let headline_forms = headline.forms();
    let body_forms = body.forms();

    let (mtld_value, mtld_valid) = if body_forms.len() >= MTLD_MIN_TOKENS {
        (mtld(&body_forms), 1.0)
    } else {
        (0.0, 0.0)
    };
    FeatureVector::new(
        vec![
            "lexdiv_ttr_h".to_string(),
            "lexdiv_ttr_d".to_string(),
            "lexdiv_mtld_d".to_string(),
            "lexdiv_mtld_d_valid".to_string(),
        ],
        vec![
            type_token_ratio(&headline_forms),
            type_token_ratio(&body_forms),
            mtld_value,
            mtld_valid,
        ],
    )
}
