//! Corpus data model and ingestion: FNC-format CSV loading/writing, ARC-style
//! corpus derivation, seeded splits, class resampling, and corpus statistics.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc;

/// The four stance classes, in the fixed reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StanceLabel {
    Agree,
    Disagree,
    Discuss,
    Unrelated,
}

impl StanceLabel {
    pub const ALL: [StanceLabel; 4] = [
        StanceLabel::Agree,
        StanceLabel::Disagree,
        StanceLabel::Discuss,
        StanceLabel::Unrelated,
    ];

    /// Index in the fixed class order `[AGR, DSG, DSC, UNR]`.
    pub fn index(self) -> usize {
        match self {
            StanceLabel::Agree => 0,
            StanceLabel::Disagree => 1,
            StanceLabel::Discuss => 2,
            StanceLabel::Unrelated => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<StanceLabel> {
        StanceLabel::ALL.get(i).copied()
    }

    /// CSV serialization string (bit-exact for round-trips).
    pub fn as_str(self) -> &'static str {
        match self {
            StanceLabel::Agree => "agree",
            StanceLabel::Disagree => "disagree",
            StanceLabel::Discuss => "discuss",
            StanceLabel::Unrelated => "unrelated",
        }
    }

    pub fn parse(s: &str) -> Result<StanceLabel> {
        match s {
            "agree" => Ok(StanceLabel::Agree),
            "disagree" => Ok(StanceLabel::Disagree),
            "discuss" => Ok(StanceLabel::Discuss),
            "unrelated" => Ok(StanceLabel::Unrelated),
            other => Err(Error::UnknownStance(other.to_string())),
        }
    }

    /// Everything except `unrelated` counts as related.
    pub fn is_related(self) -> bool {
        self != StanceLabel::Unrelated
    }
}

impl fmt::Display for StanceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A (headline, body) pair with an optional gold stance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub headline: String,
    pub body_id: i64,
    pub body: Arc<str>,
    pub stance: Option<StanceLabel>,
}

/// An ordered instance collection with the shared body texts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub name: String,
    pub instances: Vec<Instance>,
    pub bodies: BTreeMap<i64, Arc<str>>,
}

/// Counts and label fractions for a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_headlines: usize,
    pub n_bodies: usize,
    pub n_instances: usize,
    pub mean_tokens_per_body: f64,
    pub label_fractions: BTreeMap<StanceLabel, f64>,
}

/// Crowd choice between the two opposing claims of an ARC record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WorkerChoice {
    A,
    B,
    Neither,
}

impl WorkerChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            WorkerChoice::A => "A",
            WorkerChoice::B => "B",
            WorkerChoice::Neither => "NEITHER",
        }
    }

    pub fn parse(s: &str) -> Result<WorkerChoice> {
        match s {
            "A" => Ok(WorkerChoice::A),
            "B" => Ok(WorkerChoice::B),
            "NEITHER" => Ok(WorkerChoice::Neither),
            other => Err(Error::invalid(format!("unknown worker choice {other:?}"))),
        }
    }
}

/// One user post with its topic and the two opposing claims.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcRecord {
    pub topic_id: String,
    pub post: String,
    pub claim_a: String,
    pub claim_b: String,
    pub worker_choice: WorkerChoice,
}

impl Corpus {
    pub fn new(name: impl Into<String>) -> Self {
        Corpus {
            name: name.into(),
            instances: Vec::new(),
            bodies: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Gold labels of all instances; error when any instance is unlabeled.
    pub fn labels(&self) -> Result<Vec<StanceLabel>> {
        self.instances
            .iter()
            .map(|inst| {
                inst.stance
                    .ok_or_else(|| Error::invalid("corpus contains unlabeled instances"))
            })
            .collect()
    }

    /// Build a corpus around a subset of instances, keeping only the bodies
    /// they reference.
    fn subset(&self, name: String, indices: &[usize]) -> Corpus {
        let instances: Vec<Instance> = indices.iter().map(|&i| self.instances[i].clone()).collect();
        let used: HashSet<i64> = instances.iter().map(|i| i.body_id).collect();
        let bodies = self
            .bodies
            .iter()
            .filter(|(id, _)| used.contains(id))
            .map(|(id, text)| (*id, text.clone()))
            .collect();
        Corpus {
            name,
            instances,
            bodies,
        }
    }
}

fn csv_err(err: &csv::Error, fallback_line: u64) -> Error {
    let line = err
        .position()
        .map(|p| p.line())
        .unwrap_or(fallback_line);
    Error::Csv {
        line,
        msg: err.to_string(),
    }
}

fn column_index(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers.iter().position(|h| h == name).ok_or_else(|| Error::Csv {
        line: 1,
        msg: format!("missing column {name:?} in {}", path.display()),
    })
}

fn parse_body_id(raw: &str, line: u64) -> Result<i64> {
    raw.trim().parse::<i64>().map_err(|_| Error::Csv {
        line,
        msg: format!("invalid body id {raw:?}"),
    })
}

/// Load an FNC-format corpus from its stances/bodies CSV pair. A stances
/// file without a `Stance` column yields an unlabeled corpus (prediction
/// input).
pub fn load_fnc(stances_path: &Path, bodies_path: &Path) -> Result<Corpus> {
    let mut bodies: BTreeMap<i64, Arc<str>> = BTreeMap::new();
    let mut reader = csv::ReaderBuilder::new()
        .flexible(false)
        .from_path(bodies_path)?;
    let headers = reader.headers().map_err(|e| csv_err(&e, 1))?.clone();
    let id_col = column_index(&headers, "Body ID", bodies_path)?;
    let body_col = column_index(&headers, "articleBody", bodies_path)?;
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(&e, 0))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let id = parse_body_id(&record[id_col], line)?;
        bodies.insert(id, Arc::from(&record[body_col]));
    }

    let mut reader = csv::ReaderBuilder::new()
        .flexible(false)
        .from_path(stances_path)?;
    let headers = reader.headers().map_err(|e| csv_err(&e, 1))?.clone();
    let headline_col = column_index(&headers, "Headline", stances_path)?;
    let id_col = column_index(&headers, "Body ID", stances_path)?;
    let stance_col = headers.iter().position(|h| h == "Stance");

    let mut instances = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(&e, 0))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let body_id = parse_body_id(&record[id_col], line)?;
        let body = bodies
            .get(&body_id)
            .cloned()
            .ok_or(Error::UnresolvedBodyId(body_id))?;
        let stance = match stance_col {
            Some(col) => Some(StanceLabel::parse(&record[col])?),
            None => None,
        };
        instances.push(Instance {
            headline: record[headline_col].to_string(),
            body_id,
            body,
            stance,
        });
    }

    let name = stances_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".to_string());
    Ok(Corpus {
        name,
        instances,
        bodies,
    })
}

/// Write a corpus as an FNC-format stances/bodies CSV pair (UTF-8, LF,
/// quotes doubled). Unlabeled corpora are written without the `Stance`
/// column.
pub fn write_fnc(corpus: &Corpus, stances_path: &Path, bodies_path: &Path) -> Result<()> {
    let labeled = corpus.instances.iter().all(|i| i.stance.is_some());

    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(stances_path)?;
    if labeled {
        writer.write_record(["Headline", "Body ID", "Stance"])?;
    } else {
        writer.write_record(["Headline", "Body ID"])?;
    }
    for instance in &corpus.instances {
        let id = instance.body_id.to_string();
        if labeled {
            let stance = instance.stance.expect("checked above").as_str();
            writer.write_record([instance.headline.as_str(), id.as_str(), stance])?;
        } else {
            writer.write_record([instance.headline.as_str(), id.as_str()])?;
        }
    }
    writer.flush()?;

    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(bodies_path)?;
    writer.write_record(["Body ID", "articleBody"])?;
    for (id, text) in &corpus.bodies {
        writer.write_record([id.to_string().as_str(), text])?;
    }
    writer.flush()?;
    Ok(())
}

/// Load ARC records from a CSV with header
/// `topic_id,post,claim_a,claim_b,worker_choice`.
pub fn load_arc_records(path: &Path) -> Result<Vec<ArcRecord>> {
    let mut reader = csv::ReaderBuilder::new().from_path(path)?;
    let headers = reader.headers().map_err(|e| csv_err(&e, 1))?.clone();
    let cols: Vec<usize> = ["topic_id", "post", "claim_a", "claim_b", "worker_choice"]
        .iter()
        .map(|name| column_index(&headers, name, path))
        .collect::<Result<_>>()?;
    let mut records = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(&e, 0))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let arc = ArcRecord {
            topic_id: record[cols[0]].to_string(),
            post: record[cols[1]].to_string(),
            claim_a: record[cols[2]].to_string(),
            claim_b: record[cols[3]].to_string(),
            worker_choice: WorkerChoice::parse(&record[cols[4]])?,
        };
        if arc.claim_a == arc.claim_b {
            return Err(Error::Csv {
                line,
                msg: "claim_a equals claim_b".to_string(),
            });
        }
        records.push(arc);
    }
    Ok(records)
}

/// FNV-1a over the record content; keys each record's random stream so the
/// derivation does not depend on record order.
fn record_stream_key(seed: u64, record: &ArcRecord) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
    };
    eat(record.topic_id.as_bytes());
    eat(&[0]);
    eat(record.post.as_bytes());
    eat(&[0]);
    eat(record.claim_a.as_bytes());
    eat(&[0]);
    eat(record.claim_b.as_bytes());
    hash ^ seed.wrapping_mul(0x9e3779b97f4a7c15)
}

/// Derive an FNC-style stance corpus from ARC records: one related instance
/// per record (headline = a fair-coin choice between the two claims) plus
/// `unrelated_per_post` UNR instances with claims drawn from other topics
/// only, without replacement per post.
pub fn derive_arc(
    records: &[ArcRecord],
    unrelated_per_post: usize,
    seed: u64,
) -> Result<Corpus> {
    for record in records {
        if record.claim_a == record.claim_b {
            return Err(Error::invalid("ArcRecord with identical claims"));
        }
    }
    let topics: HashSet<&str> = records.iter().map(|r| r.topic_id.as_str()).collect();
    if unrelated_per_post > 0 && topics.len() < 2 {
        return Err(Error::invalid(
            "unrelated sampling requires at least 2 distinct topics",
        ));
    }

    // Pool of (topic, claim) pairs for cross-topic sampling, in record order.
    let mut claim_pool: Vec<(&str, &str)> = Vec::with_capacity(records.len() * 2);
    for record in records {
        claim_pool.push((record.topic_id.as_str(), record.claim_a.as_str()));
        claim_pool.push((record.topic_id.as_str(), record.claim_b.as_str()));
    }

    let mut corpus = Corpus::new("arc-derived");
    for (idx, record) in records.iter().enumerate() {
        let body_id = idx as i64;
        let body: Arc<str> = Arc::from(record.post.as_str());
        corpus.bodies.insert(body_id, body.clone());

        let mut rng = ChaCha8Rng::seed_from_u64(record_stream_key(seed, record));
        let pick_a = rng.gen::<bool>();
        let headline = if pick_a { &record.claim_a } else { &record.claim_b };
        let stance = match record.worker_choice {
            WorkerChoice::Neither => StanceLabel::Discuss,
            WorkerChoice::A => {
                if pick_a {
                    StanceLabel::Agree
                } else {
                    StanceLabel::Disagree
                }
            }
            WorkerChoice::B => {
                if pick_a {
                    StanceLabel::Disagree
                } else {
                    StanceLabel::Agree
                }
            }
        };
        corpus.instances.push(Instance {
            headline: headline.clone(),
            body_id,
            body: body.clone(),
            stance: Some(stance),
        });

        if unrelated_per_post == 0 {
            continue;
        }
        let mut foreign: Vec<&str> = claim_pool
            .iter()
            .filter(|(topic, _)| *topic != record.topic_id)
            .map(|(_, claim)| *claim)
            .collect();
        if foreign.len() < unrelated_per_post {
            return Err(Error::invalid(format!(
                "unrelated_per_post = {unrelated_per_post} exceeds {} cross-topic claims",
                foreign.len()
            )));
        }
        // Partial Fisher-Yates: draw without replacement for this post.
        for slot in 0..unrelated_per_post {
            let j = slot + rng.gen_range(0..foreign.len() - slot);
            foreign.swap(slot, j);
            corpus.instances.push(Instance {
                headline: foreign[slot].to_string(),
                body_id,
                body: body.clone(),
                stance: Some(StanceLabel::Unrelated),
            });
        }
    }
    Ok(corpus)
}

/// Counts, mean body length in tokens, and label fractions.
pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let headlines: HashSet<&str> = corpus.instances.iter().map(|i| i.headline.as_str()).collect();
    let token_total: usize = corpus
        .bodies
        .values()
        .map(|b| textproc::tokenize(b).len())
        .sum();
    let mean_tokens = if corpus.bodies.is_empty() {
        0.0
    } else {
        token_total as f64 / corpus.bodies.len() as f64
    };
    let mut counts: HashMap<StanceLabel, usize> = HashMap::new();
    let mut labeled = 0usize;
    for instance in &corpus.instances {
        if let Some(stance) = instance.stance {
            *counts.entry(stance).or_insert(0) += 1;
            labeled += 1;
        }
    }
    let label_fractions = if labeled == 0 {
        BTreeMap::new()
    } else {
        counts
            .into_iter()
            .map(|(label, count)| (label, count as f64 / labeled as f64))
            .collect()
    };
    CorpusStats {
        n_headlines: headlines.len(),
        n_bodies: corpus.bodies.len(),
        n_instances: corpus.instances.len(),
        mean_tokens_per_body: mean_tokens,
        label_fractions,
    }
}

/// Seeded shuffled holdout split. The test side gets `round(n * fraction)`
/// instances, clamped so both sides are non-empty.
pub fn split_holdout(corpus: &Corpus, test_fraction: f64, seed: u64) -> Result<(Corpus, Corpus)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid("test_fraction must be in (0, 1)"));
    }
    let n = corpus.len();
    if n < 2 {
        return Err(Error::invalid("holdout split needs at least 2 instances"));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let test_n = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
    let (test_idx, train_idx) = indices.split_at(test_n);
    let mut train_idx = train_idx.to_vec();
    let mut test_idx = test_idx.to_vec();
    // Keep original instance order inside each side.
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((
        corpus.subset(format!("{}-train", corpus.name), &train_idx),
        corpus.subset(format!("{}-test", corpus.name), &test_idx),
    ))
}

/// Seeded k-fold split: each instance lands in exactly one dev fold, fold
/// sizes differ by at most one, earlier folds take the remainder.
pub fn kfold(corpus: &Corpus, k: usize, seed: u64) -> Result<Vec<(Corpus, Corpus)>> {
    let n = corpus.len();
    if k < 2 {
        return Err(Error::invalid("k must be at least 2"));
    }
    if k > n {
        return Err(Error::invalid(format!("k = {k} exceeds {n} instances")));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);

    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut cursor = 0usize;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        let dev_idx: Vec<usize> = indices[cursor..cursor + size].to_vec();
        let train_idx: Vec<usize> = indices[..cursor]
            .iter()
            .chain(indices[cursor + size..].iter())
            .copied()
            .collect();
        cursor += size;
        let mut dev_idx = dev_idx;
        let mut train_idx = train_idx;
        dev_idx.sort_unstable();
        train_idx.sort_unstable();
        folds.push((
            corpus.subset(format!("{}-fold{fold}-train", corpus.name), &train_idx),
            corpus.subset(format!("{}-fold{fold}-dev", corpus.name), &dev_idx),
        ));
    }
    Ok(folds)
}

/// Class-balance resampling strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResampleStrategy {
    Undersample,
    Oversample,
}

/// Balance the class distribution: undersampling draws every class down to
/// the minority count (without replacement), oversampling draws every class
/// up to the majority count (with replacement, originals kept). The output
/// order is a seeded shuffle.
pub fn resample(corpus: &Corpus, strategy: ResampleStrategy, seed: u64) -> Result<Corpus> {
    let labels = corpus.labels()?;
    if labels.is_empty() {
        return Err(Error::invalid("cannot resample an empty corpus"));
    }
    let mut by_class: BTreeMap<StanceLabel, Vec<usize>> = BTreeMap::new();
    for (i, label) in labels.iter().enumerate() {
        by_class.entry(*label).or_default().push(i);
    }
    let min_count = by_class.values().map(Vec::len).min().unwrap_or(0);
    let max_count = by_class.values().map(Vec::len).max().unwrap_or(0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut selected: Vec<usize> = Vec::new();
    for (_, members) in by_class.iter() {
        match strategy {
            ResampleStrategy::Undersample => {
                let mut pool = members.clone();
                pool.shuffle(&mut rng);
                pool.truncate(min_count);
                selected.extend(pool);
            }
            ResampleStrategy::Oversample => {
                selected.extend(members.iter().copied());
                for _ in members.len()..max_count {
                    selected.push(members[rng.gen_range(0..members.len())]);
                }
            }
        }
    }
    selected.shuffle(&mut rng);
    Ok(corpus.subset(format!("{}-resampled", corpus.name), &selected))
}
