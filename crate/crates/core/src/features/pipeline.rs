//! Fitted feature pipelines: fit vocabularies, the TF-IDF table, and the
//! topic models on a training corpus once, then extract deterministic
//! feature matrices for any corpus. Pipelines persist as a versioned JSON
//! artifact.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Instance};
use crate::error::{Error, Result};
use crate::neural::EmbeddingTable;
use crate::topics::{
    build_term_doc, fit_lda, fit_lsi, fit_nmf, topic_features, TopicFeatureMode, TopicModel,
    Weighting,
};

use super::extractors::{
    boc_feature_names, boc_vector, bow_feature_names, bow_vector, cooc_feature_names,
    cooc_vector, pos_count_feature_names, pos_counts_vector, polarity_vector,
    refuting_feature_names, refuting_vector, structural_feature_names, structural_vector,
    tfidf_cosine, word_overlap, wsim_feature_names, wsim_vector, DEFAULT_REFUTING_WORDS,
};
use super::lexdiv::lexdiv_vector;
use super::lexicon::{lexicon_feature_names, lexicon_vector, Lexicon};
use super::pos::PosAnnotations;
use super::readability::{readability_feature_names, readability_vector};
use super::vocab::{fit_vocabulary, idf_table, GramUnit, Vocabulary};
use super::{ExtractorKind, FeatureVector, GroupId};

pub const PIPELINE_VERSION_TAG: &str = "stancebench-pipeline-v1";

/// What to fit and how.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub extractors: Vec<ExtractorKind>,
    pub bow_vocab_size: usize,
    /// Word n-gram orders for BoW (the "unigrams only" switch).
    pub bow_orders: Vec<usize>,
    pub boc_vocab_size: usize,
    pub boc_order: usize,
    pub tfidf_vocab_size: usize,
    pub topic_vocab_size: usize,
    pub topics_k: usize,
    pub nmf_iters: usize,
    pub lda_iters: usize,
    pub seed: u64,
    pub refuting_words: Vec<String>,
    pub lexicons: BTreeMap<String, Lexicon>,
    /// POS sidecar supplied: verb/noun selection uses tags and POS counts
    /// are meaningful; otherwise WSim degrades to all alphabetic tokens.
    pub pos_available: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            extractors: vec![
                ExtractorKind::Bow,
                ExtractorKind::Boc,
                ExtractorKind::Cooc,
                ExtractorKind::Refuting,
                ExtractorKind::Polarity,
                ExtractorKind::WordOverlap,
            ],
            bow_vocab_size: 5000,
            bow_orders: vec![1, 2],
            boc_vocab_size: 5000,
            boc_order: 3,
            tfidf_vocab_size: 5000,
            topic_vocab_size: 5000,
            topics_k: 300,
            nmf_iters: 200,
            lda_iters: 100,
            seed: 0,
            refuting_words: DEFAULT_REFUTING_WORDS.iter().map(|s| s.to_string()).collect(),
            lexicons: BTreeMap::new(),
            pos_available: false,
        }
    }
}

/// A feature matrix with its column layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn width(&self) -> usize {
        self.names.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }
}

/// Everything fitted on the training corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPipeline {
    pub version_tag: String,
    pub config: PipelineConfig,
    pub bow_vocab_h: Option<Vocabulary>,
    pub bow_vocab_d: Option<Vocabulary>,
    pub boc_vocab_h: Option<Vocabulary>,
    pub boc_vocab_d: Option<Vocabulary>,
    pub tfidf_vocab: Option<Vocabulary>,
    pub tfidf_idf: Option<Vec<f64>>,
    pub nmf: Option<TopicModel>,
    pub lsi: Option<TopicModel>,
    pub lda: Option<TopicModel>,
    /// Full feature-name layout in extractor order.
    pub layout: Vec<String>,
    /// (extractor, width) spans covering the layout in order.
    pub spans: Vec<(ExtractorKind, usize)>,
    #[serde(skip)]
    pub embeddings: Option<Arc<EmbeddingTable>>,
}

fn distinct_texts(corpus: &Corpus) -> (Vec<&str>, Vec<&str>) {
    let mut seen = std::collections::HashSet::new();
    let mut headlines = Vec::new();
    for instance in &corpus.instances {
        if seen.insert(instance.headline.as_str()) {
            headlines.push(instance.headline.as_str());
        }
    }
    let bodies: Vec<&str> = corpus.bodies.values().map(|b| &**b).collect();
    (headlines, bodies)
}

impl FittedPipeline {
    /// Fit every component the configured extractors need on the training
    /// corpus.
    pub fn fit(config: PipelineConfig, corpus: &Corpus) -> Result<FittedPipeline> {
        Self::fit_with_embeddings(config, corpus, None)
    }

    pub fn fit_with_embeddings(
        config: PipelineConfig,
        corpus: &Corpus,
        embeddings: Option<Arc<EmbeddingTable>>,
    ) -> Result<FittedPipeline> {
        if corpus.is_empty() {
            return Err(Error::invalid("cannot fit a pipeline on an empty corpus"));
        }
        let (headlines, bodies) = distinct_texts(corpus);
        let mut all_texts: Vec<&str> = headlines.clone();
        all_texts.extend(bodies.iter().copied());

        let has = |kind: &ExtractorKind| config.extractors.contains(kind);
        let mut pipeline = FittedPipeline {
            version_tag: PIPELINE_VERSION_TAG.to_string(),
            config: config.clone(),
            bow_vocab_h: None,
            bow_vocab_d: None,
            boc_vocab_h: None,
            boc_vocab_d: None,
            tfidf_vocab: None,
            tfidf_idf: None,
            nmf: None,
            lsi: None,
            lda: None,
            layout: Vec::new(),
            spans: Vec::new(),
            embeddings,
        };

        if has(&ExtractorKind::Wsim) && pipeline.embeddings.is_none() {
            return Err(Error::Unfitted(
                "wsim configured but no embedding table attached".to_string(),
            ));
        }
        for kind in &config.extractors {
            if let ExtractorKind::Lexicon(name) = kind {
                if !config.lexicons.contains_key(name) {
                    return Err(Error::Unfitted(format!("lexicon {name:?} not loaded")));
                }
            }
        }

        if has(&ExtractorKind::Bow) {
            let unit = GramUnit::negated_words(&config.bow_orders);
            pipeline.bow_vocab_h =
                Some(fit_vocabulary(&headlines, unit.clone(), config.bow_vocab_size)?);
            pipeline.bow_vocab_d = Some(fit_vocabulary(&bodies, unit, config.bow_vocab_size)?);
        }
        if has(&ExtractorKind::Boc) {
            let unit = GramUnit::chars(config.boc_order);
            pipeline.boc_vocab_h =
                Some(fit_vocabulary(&headlines, unit.clone(), config.boc_vocab_size)?);
            pipeline.boc_vocab_d = Some(fit_vocabulary(&bodies, unit, config.boc_vocab_size)?);
        }
        if has(&ExtractorKind::TfidfCosine) {
            let vocab = fit_vocabulary(&all_texts, GramUnit::words(&[1, 2]), config.tfidf_vocab_size)?;
            pipeline.tfidf_idf = Some(idf_table(&vocab, &all_texts));
            pipeline.tfidf_vocab = Some(vocab);
        }

        let needs_nmf = has(&ExtractorKind::NmfConcat) || has(&ExtractorKind::NmfCosine);
        let needs_lsi = has(&ExtractorKind::LsiConcat);
        let needs_lda = has(&ExtractorKind::LdaCosine);
        if needs_nmf || needs_lsi || needs_lda {
            let vocab = fit_vocabulary(&all_texts, GramUnit::words(&[1]), config.topic_vocab_size)?;
            let k = config.topics_k;
            let max_k = all_texts.len().min(vocab.len());
            if k > max_k {
                return Err(Error::invalid(format!(
                    "topics_k = {k} exceeds min(docs, terms) = {max_k}"
                )));
            }
            if needs_nmf || needs_lsi {
                let td = build_term_doc(&all_texts, &vocab, Weighting::TfIdf);
                if needs_nmf {
                    pipeline.nmf = Some(TopicModel::Nmf(fit_nmf(
                        &td,
                        k,
                        config.nmf_iters,
                        config.seed.wrapping_add(1),
                    )?));
                }
                if needs_lsi {
                    pipeline.lsi = Some(TopicModel::Lsi(fit_lsi(&td, k)?));
                }
            }
            if needs_lda {
                let td = build_term_doc(&all_texts, &vocab, Weighting::Tf);
                pipeline.lda = Some(TopicModel::Lda(fit_lda(
                    &td,
                    k.max(2),
                    None,
                    None,
                    config.lda_iters,
                    config.seed.wrapping_add(2),
                )?));
            }
        }

        let (layout, spans) = pipeline.build_layout()?;
        pipeline.layout = layout;
        pipeline.spans = spans;
        Ok(pipeline)
    }

    pub fn attach_embeddings(&mut self, embeddings: Arc<EmbeddingTable>) {
        self.embeddings = Some(embeddings);
    }

    fn topic_model(&self, kind: &ExtractorKind) -> Result<&TopicModel> {
        let model = match kind {
            ExtractorKind::NmfConcat | ExtractorKind::NmfCosine => self.nmf.as_ref(),
            ExtractorKind::LsiConcat => self.lsi.as_ref(),
            ExtractorKind::LdaCosine => self.lda.as_ref(),
            _ => None,
        };
        model.ok_or_else(|| Error::Unfitted(format!("topic model for {}", kind.name())))
    }

    /// Feature names of one extractor, in emission order.
    fn extractor_names(&self, kind: &ExtractorKind) -> Result<Vec<String>> {
        let unfitted = |what: &str| Error::Unfitted(what.to_string());
        Ok(match kind {
            ExtractorKind::Bow => bow_feature_names(
                self.bow_vocab_h.as_ref().ok_or_else(|| unfitted("bow vocabulary"))?,
                self.bow_vocab_d.as_ref().ok_or_else(|| unfitted("bow vocabulary"))?,
            ),
            ExtractorKind::Boc => boc_feature_names(
                self.boc_vocab_h.as_ref().ok_or_else(|| unfitted("boc vocabulary"))?,
                self.boc_vocab_d.as_ref().ok_or_else(|| unfitted("boc vocabulary"))?,
            ),
            ExtractorKind::Cooc => cooc_feature_names(),
            ExtractorKind::Refuting => refuting_feature_names(&self.config.refuting_words),
            ExtractorKind::Polarity => vec!["pola_h".to_string(), "pola_d".to_string()],
            ExtractorKind::WordOverlap => vec!["overlap".to_string()],
            ExtractorKind::Structural => structural_feature_names(),
            ExtractorKind::Readability => readability_feature_names(),
            ExtractorKind::LexDiv => vec![
                "lexdiv_ttr_h".to_string(),
                "lexdiv_ttr_d".to_string(),
                "lexdiv_mtld_d".to_string(),
                "lexdiv_mtld_d_valid".to_string(),
            ],
            ExtractorKind::TfidfCosine => vec!["tfidf_cos".to_string()],
            ExtractorKind::Lexicon(name) => {
                let lexicon = self
                    .config
                    .lexicons
                    .get(name)
                    .ok_or_else(|| unfitted(&format!("lexicon {name}")))?;
                lexicon_feature_names(name, lexicon.kind)
            }
            ExtractorKind::PosCounts => pos_count_feature_names(),
            ExtractorKind::Wsim => wsim_feature_names(self.config.pos_available),
            ExtractorKind::NmfConcat | ExtractorKind::LsiConcat => {
                let model = self.topic_model(kind)?;
                let prefix = if *kind == ExtractorKind::NmfConcat { "nmf" } else { "lsi" };
                let mut names = Vec::with_capacity(2 * model.k());
                for side in ["h", "d"] {
                    for i in 0..model.k() {
                        names.push(format!("{prefix}_{side}_t{i}"));
                    }
                }
                names
            }
            ExtractorKind::NmfCosine => vec!["nmf_cos".to_string()],
            ExtractorKind::LdaCosine => vec!["lda_cos".to_string()],
        })
    }

    fn build_layout(&self) -> Result<(Vec<String>, Vec<(ExtractorKind, usize)>)> {
        let mut layout = Vec::new();
        let mut spans = Vec::new();
        for kind in &self.config.extractors {
            let names = self.extractor_names(kind)?;
            spans.push((kind.clone(), names.len()));
            layout.extend(names);
        }
        Ok((layout, spans))
    }

    /// One extractor's values for one instance.
    pub fn extractor_vector(
        &self,
        kind: &ExtractorKind,
        instance: &Instance,
        pos: Option<&super::pos::InstancePos>,
    ) -> Result<FeatureVector> {
        let unfitted = |what: &str| Error::Unfitted(what.to_string());
        match kind {
            ExtractorKind::Bow => bow_vector(
                instance,
                self.bow_vocab_h.as_ref().ok_or_else(|| unfitted("bow vocabulary"))?,
                self.bow_vocab_d.as_ref().ok_or_else(|| unfitted("bow vocabulary"))?,
            ),
            ExtractorKind::Boc => boc_vector(
                instance,
                self.boc_vocab_h.as_ref().ok_or_else(|| unfitted("boc vocabulary"))?,
                self.boc_vocab_d.as_ref().ok_or_else(|| unfitted("boc vocabulary"))?,
            ),
            ExtractorKind::Cooc => cooc_vector(instance),
            ExtractorKind::Refuting => refuting_vector(instance, &self.config.refuting_words),
            ExtractorKind::Polarity => polarity_vector(instance, &self.config.refuting_words),
            ExtractorKind::WordOverlap => FeatureVector::new(
                vec!["overlap".to_string()],
                vec![word_overlap(instance)],
            ),
            ExtractorKind::Structural => structural_vector(instance),
            ExtractorKind::Readability => readability_vector(instance),
            ExtractorKind::LexDiv => lexdiv_vector(instance),
            ExtractorKind::TfidfCosine => {
                let vocab = self.tfidf_vocab.as_ref().ok_or_else(|| unfitted("tfidf vocabulary"))?;
                let idf = self.tfidf_idf.as_ref().ok_or_else(|| unfitted("tfidf idf table"))?;
                FeatureVector::new(
                    vec!["tfidf_cos".to_string()],
                    vec![tfidf_cosine(instance, vocab, idf)?],
                )
            }
            ExtractorKind::Lexicon(name) => {
                let lexicon = self
                    .config
                    .lexicons
                    .get(name)
                    .ok_or_else(|| unfitted(&format!("lexicon {name}")))?;
                lexicon_vector(instance, name, lexicon)
            }
            ExtractorKind::PosCounts => pos_counts_vector(pos),
            ExtractorKind::Wsim => {
                let table = self
                    .embeddings
                    .as_ref()
                    .ok_or_else(|| unfitted("embedding table (wsim)"))?;
                wsim_vector(instance, table, pos, self.config.pos_available)
            }
            ExtractorKind::NmfConcat => topic_features(
                self.topic_model(kind)?,
                "nmf",
                &instance.headline,
                &instance.body,
                TopicFeatureMode::Concat,
            ),
            ExtractorKind::LsiConcat => topic_features(
                self.topic_model(kind)?,
                "lsi",
                &instance.headline,
                &instance.body,
                TopicFeatureMode::Concat,
            ),
            ExtractorKind::NmfCosine => topic_features(
                self.topic_model(kind)?,
                "nmf",
                &instance.headline,
                &instance.body,
                TopicFeatureMode::Cosine,
            ),
            ExtractorKind::LdaCosine => topic_features(
                self.topic_model(kind)?,
                "lda",
                &instance.headline,
                &instance.body,
                TopicFeatureMode::Cosine,
            ),
        }
    }

    /// Concatenated values of the selected extractors for one instance.
    pub fn extract_instance_subset(
        &self,
        kinds: &[ExtractorKind],
        instance: &Instance,
        pos: Option<&super::pos::InstancePos>,
    ) -> Result<Vec<f64>> {
        let mut values = Vec::new();
        for kind in kinds {
            let vector = self.extractor_vector(kind, instance, pos)?;
            values.extend(vector.values);
        }
        Ok(values)
    }

    /// Full configured feature vector for one instance.
    pub fn extract_instance(
        &self,
        instance: &Instance,
        pos: Option<&super::pos::InstancePos>,
    ) -> Result<Vec<f64>> {
        let values = self.extract_instance_subset(&self.config.extractors, instance, pos)?;
        if values.len() != self.layout.len() {
            return Err(Error::ShapeMismatch(format!(
                "extracted {} values but the fitted layout has {}",
                values.len(),
                self.layout.len()
            )));
        }
        Ok(values)
    }

    /// Width of the full configured layout.
    pub fn width(&self) -> usize {
        self.layout.len()
    }

    /// The extractor subset selected by a set of group ids, in configured
    /// order.
    pub fn extractors_in_groups(&self, groups: &[GroupId]) -> Vec<ExtractorKind> {
        self.config
            .extractors
            .iter()
            .filter(|e| groups.contains(&e.group()))
            .cloned()
            .collect()
    }

    /// Feature matrix over an explicit extractor subset.
    pub fn extract_matrix_subset(
        &self,
        kinds: &[ExtractorKind],
        corpus: &Corpus,
        pos: Option<&PosAnnotations>,
    ) -> Result<FeatureMatrix> {
        for kind in kinds {
            if !self.config.extractors.contains(kind) {
                return Err(Error::Unfitted(format!(
                    "extractor {} not part of the fitted pipeline",
                    kind.name()
                )));
            }
        }
        let mut names = Vec::new();
        for kind in kinds {
            names.extend(self.extractor_names(kind)?);
        }
        let mut rows = Vec::with_capacity(corpus.len());
        for (idx, instance) in corpus.instances.iter().enumerate() {
            let instance_pos = pos.and_then(|p| p.get(idx));
            let row = self.extract_instance_subset(kinds, instance, instance_pos)?;
            if row.len() != names.len() {
                return Err(Error::ShapeMismatch(format!(
                    "row {idx} has {} values, layout has {}",
                    row.len(),
                    names.len()
                )));
            }
            rows.push(row);
        }
        Ok(FeatureMatrix { names, rows })
    }
}

/// Row-per-instance feature matrix for the extractors in the selected
/// groups (an empty selection yields a 0-column matrix).
pub fn extract(
    pipeline: &FittedPipeline,
    corpus: &Corpus,
    groups: &[GroupId],
    pos: Option<&PosAnnotations>,
) -> Result<FeatureMatrix> {
    let kinds = pipeline.extractors_in_groups(groups);
    let mut matrix = pipeline.extract_matrix_subset(&kinds, corpus, pos)?;
    if kinds.is_empty() {
        matrix.rows = vec![Vec::new(); corpus.len()];
    }
    Ok(matrix)
}

/// Persist a pipeline as versioned JSON.
pub fn save_pipeline(pipeline: &FittedPipeline, path: &Path) -> Result<()> {
    let json = serde_json::to_string(pipeline)
        .map_err(|e| Error::Artifact(format!("pipeline serialization failed: {e}")))?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn load_pipeline(path: &Path) -> Result<FittedPipeline> {
    let content = std::fs::read_to_string(path)?;
    let mut pipeline: FittedPipeline = serde_json::from_str(&content)
        .map_err(|e| Error::Artifact(format!("pipeline parse failed: {e}")))?;
    if pipeline.version_tag != PIPELINE_VERSION_TAG {
        return Err(Error::Artifact(format!(
            "pipeline version {:?} does not match {PIPELINE_VERSION_TAG:?}",
            pipeline.version_tag
        )));
    }
    for vocab in [
        pipeline.bow_vocab_h.as_mut(),
        pipeline.bow_vocab_d.as_mut(),
        pipeline.boc_vocab_h.as_mut(),
        pipeline.boc_vocab_d.as_mut(),
        pipeline.tfidf_vocab.as_mut(),
    ]
    .into_iter()
    .flatten()
    {
        vocab.rebuild_index();
    }
    for model in [pipeline.nmf.as_mut(), pipeline.lsi.as_mut(), pipeline.lda.as_mut()]
        .into_iter()
        .flatten()
    {
        model.rebuild_index();
    }
    Ok(pipeline)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::StanceLabel;
    use std::sync::Arc as StdArc;

    pub(crate) fn tiny_corpus() -> Corpus {
        let mut corpus = Corpus::new("tiny");
        let texts = [
            ("israel opens dams", "hundreds flee floods in gaza. israel denies the dams claim."),
            ("apple hairgate is a stunt", "apple says the hairgate issue is not real but a stunt."),
            ("three boobs hoax", "the woman who claimed a third breast was proved a hoax."),
            ("nhl expansion ahead", "it was not long ago that expansion talk was treated as a joke."),
        ];
        for (i, (headline, body)) in texts.iter().enumerate() {
            let id = i as i64;
            corpus.bodies.insert(id, StdArc::from(*body));
            corpus.instances.push(Instance {
                headline: headline.to_string(),
                body_id: id,
                body: corpus.bodies[&id].clone(),
                stance: Some(StanceLabel::ALL[i % 4]),
            });
        }
        corpus
    }

    fn small_config() -> PipelineConfig {
        PipelineConfig {
            extractors: vec![
                ExtractorKind::Bow,
                ExtractorKind::Boc,
                ExtractorKind::Cooc,
                ExtractorKind::Refuting,
                ExtractorKind::Polarity,
                ExtractorKind::WordOverlap,
                ExtractorKind::Structural,
                ExtractorKind::Readability,
                ExtractorKind::LexDiv,
                ExtractorKind::TfidfCosine,
                ExtractorKind::NmfConcat,
                ExtractorKind::LsiConcat,
                ExtractorKind::NmfCosine,
                ExtractorKind::LdaCosine,
            ],
            bow_vocab_size: 50,
            boc_vocab_size: 50,
            tfidf_vocab_size: 50,
            topic_vocab_size: 50,
            topics_k: 2,
            nmf_iters: 50,
            lda_iters: 20,
            ..PipelineConfig::default()
        }
    }

    #[test]
    fn fit_and_extract_deterministic() {
        let corpus = tiny_corpus();
        let pipeline = FittedPipeline::fit(small_config(), &corpus).unwrap();
        let a = extract(&pipeline, &corpus, &GroupId::ALL, None).unwrap();
        let b = extract(&pipeline, &corpus, &GroupId::ALL, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_rows(), corpus.len());
        assert_eq!(a.width(), pipeline.width());
        for row in &a.rows {
            assert!(row.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn empty_group_selection_yields_zero_columns() {
        let corpus = tiny_corpus();
        let pipeline = FittedPipeline::fit(small_config(), &corpus).unwrap();
        let matrix = extract(&pipeline, &corpus, &[], None).unwrap();
        assert_eq!(matrix.width(), 0);
        assert_eq!(matrix.n_rows(), corpus.len());
    }

    #[test]
    fn group_widths_add_up() {
        let corpus = tiny_corpus();
        let pipeline = FittedPipeline::fit(small_config(), &corpus).unwrap();
        let bowc = extract(&pipeline, &corpus, &[GroupId::BoWC], None).unwrap();
        let topic = extract(&pipeline, &corpus, &[GroupId::Topic], None).unwrap();
        let both = extract(&pipeline, &corpus, &[GroupId::BoWC, GroupId::Topic], None).unwrap();
        assert_eq!(bowc.width() + topic.width(), both.width());
    }

    #[test]
    fn extraction_is_permutation_equivariant() {
        let corpus = tiny_corpus();
        let pipeline = FittedPipeline::fit(small_config(), &corpus).unwrap();
        let straight = extract(&pipeline, &corpus, &GroupId::ALL, None).unwrap();

        let mut reversed = corpus.clone();
        reversed.instances.reverse();
        let backwards = extract(&pipeline, &reversed, &GroupId::ALL, None).unwrap();
        let mut expected = straight.rows.clone();
        expected.reverse();
        assert_eq!(backwards.rows, expected);
    }

    #[test]
    fn persistence_round_trip() {
        let corpus = tiny_corpus();
        let pipeline = FittedPipeline::fit(small_config(), &corpus).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pipeline.json");
        save_pipeline(&pipeline, &path).unwrap();
        let reloaded = load_pipeline(&path).unwrap();
        let before = extract(&pipeline, &corpus, &GroupId::ALL, None).unwrap();
        let after = extract(&reloaded, &corpus, &GroupId::ALL, None).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn version_tag_checked() {
        let corpus = tiny_corpus();
        let mut pipeline = FittedPipeline::fit(small_config(), &corpus).unwrap();
        pipeline.version_tag = "something-else".to_string();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pipeline.json");
        save_pipeline(&pipeline, &path).unwrap();
        assert!(load_pipeline(&path).is_err());
    }

    #[test]
    fn unfitted_extractor_is_an_error() {
        let corpus = tiny_corpus();
        let config = PipelineConfig {
            extractors: vec![ExtractorKind::Cooc],
            ..small_config()
        };
        let pipeline = FittedPipeline::fit(config, &corpus).unwrap();
        let err = pipeline
            .extract_matrix_subset(&[ExtractorKind::Bow], &corpus, None)
            .unwrap_err();
        assert!(matches!(err, Error::Unfitted(_)));
    }

    #[test]
    fn fixed_width_across_weird_inputs() {
        let corpus = tiny_corpus();
        let pipeline = FittedPipeline::fit(small_config(), &corpus).unwrap();
        let weird = [
            ("", ""),
            ("...", "?!"),
            ("ünïcödé hëädlïné", "ünïcödé bödy tëxt"),
            ("a", "b"),
        ];
        for (headline, body) in weird {
            let instance = Instance {
                headline: headline.to_string(),
                body_id: 0,
                body: StdArc::from(body),
                stance: None,
            };
            let row = pipeline.extract_instance(&instance, None).unwrap();
            assert_eq!(row.len(), pipeline.width());
            assert!(row.iter().all(|v| v.is_finite()));
        }
    }
}
