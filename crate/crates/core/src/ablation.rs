//! The mention × emoji normalization ablation.
//!
//! [`prepare`] normalizes the corpus under every grid configuration and
//! draws one split shared by all of them. Only records that survive every
//! configuration take part, so each row sees the same validation ids and
//! differs only in how the text was normalized. The split is redrawn with
//! `seed + 1, seed + 2, ...` until every configuration passes the balance
//! check. [`evaluate`] then trains the baseline classifier or scores
//! externally produced probabilities for each row.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::classifier::{self, ClassifierError, Hyperparams};
use crate::cleaner::{normalize_all, NormalizationConfig, NormalizedTweet, SymbolMode, TweetStats};
use crate::dataset::{
    self, check_balance, summarize_tweets, Corpus, DatasetError, DistributionSummary, Gender, Split, Violation,
};
use crate::emoji::{EmojiTable, EmoticonLexicon};
use crate::emotion::{self, EmotionError, EmotionGenderReport, EmotionLexicon};
use crate::literal::LiteralError;
use crate::metrics::{self, ClassBreakdown, ConfusionMatrix, MetricsError, MetricsRow, DEFAULT_THRESHOLD};

/// Default number of reseeds after the first split attempt.
pub const DEFAULT_MAX_RETRIES: u32 = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridEntry {
    pub name: String,
    pub config: NormalizationConfig,
}

impl GridEntry {
    pub fn new(name: impl Into<String>, config: NormalizationConfig) -> Self {
        GridEntry { name: name.into(), config }
    }

    /// Lowercase, hyphen-separated form of the name for file names.
    pub fn slug(&self) -> String {
        slugify(&self.name)
    }
}

pub fn slugify(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    out
}

/// The four mention × emoji rows, in table order.
pub fn default_grid() -> Vec<GridEntry> {
    use SymbolMode::{ReplaceWithText, Strip};
    alloc::vec![
        GridEntry::new("With mention+no emoji", NormalizationConfig::grid_cell(false, Strip)),
        GridEntry::new("With mention+with emoji", NormalizationConfig::grid_cell(false, ReplaceWithText)),
        GridEntry::new("No mention+no emoji", NormalizationConfig::grid_cell(true, Strip)),
        GridEntry::new("No mention+with emoji", NormalizationConfig::grid_cell(true, ReplaceWithText)),
    ]
}

/// Looks up a default-grid row by name or slug.
pub fn preset(name: &str) -> Option<GridEntry> {
    default_grid().into_iter().find(|g| g.name == name || g.slug() == name)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Backend {
    Baseline,
    /// Probability of female per validation id, keyed by grid entry name.
    ExternalPredictions(BTreeMap<String, BTreeMap<u64, f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub seed: u64,
    pub val_fraction: f64,
    pub hyperparams: Hyperparams,
    pub grid: Vec<GridEntry>,
    pub tol_gender: f64,
    pub tol_len_rel: f64,
    pub max_retries: u32,
    /// Split by account instead of by tweet.
    pub split_by_account: bool,
    pub threshold: f64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            seed: 42,
            val_fraction: 0.25,
            hyperparams: Hyperparams::default(),
            grid: default_grid(),
            tol_gender: dataset::DEFAULT_TOL_GENDER,
            tol_len_rel: dataset::DEFAULT_TOL_LEN_REL,
            max_retries: DEFAULT_MAX_RETRIES,
            split_by_account: false,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

/// Tables the pipeline needs.
#[derive(Debug, Clone, Copy)]
pub struct Resources<'a> {
    pub emoji: &'a EmojiTable,
    pub emoticons: &'a EmoticonLexicon,
    pub emotions: &'a EmotionLexicon,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AblationError {
    #[error("experiment grid is empty")]
    EmptyGrid,
    #[error("duplicate grid entry name {0:?}")]
    DuplicateName(String),
    #[error("record {id}: {source}")]
    Literal { id: u64, source: LiteralError },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("corpus must contain both genders after normalization")]
    MissingGender,
    #[error("no split passed the balance check after {attempts} attempts")]
    BalanceRetriesExhausted { attempts: u32 },
    #[error("{config}: {source}")]
    Classifier { config: String, source: ClassifierError },
    #[error("{config}: {source}")]
    Metrics { config: String, source: MetricsError },
    #[error("{config}: {source}")]
    Emotion { config: String, source: EmotionError },
    #[error("no predictions supplied for {0:?}")]
    MissingPredictions(String),
    #[error("{config}: no prediction for validation id {id}")]
    MissingPrediction { config: String, id: u64 },
    #[error("{config}: prediction for id {id} which is not in the validation set")]
    UnexpectedPrediction { config: String, id: u64 },
    #[error("{config}: probability {value} for id {id} is outside [0, 1]")]
    BadProbability { config: String, id: u64, value: f64 },
}

/// A rejected split attempt and why.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectedSeed {
    pub seed: u64,
    pub violations: Vec<(String, Violation)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedRow {
    pub entry: GridEntry,
    pub train: Vec<NormalizedTweet>,
    pub val: Vec<NormalizedTweet>,
    pub train_summary: DistributionSummary,
    pub val_summary: DistributionSummary,
    pub dropped_retweets: usize,
    pub dropped_empty: usize,
    pub totals: TweetStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedGrid {
    pub split: Split,
    pub seed_requested: u64,
    pub rejected: Vec<RejectedSeed>,
    /// Records kept by at least one configuration but dropped by another.
    pub excluded: Vec<u64>,
    pub rows: Vec<PreparedRow>,
}

fn validate_grid(grid: &[GridEntry]) -> Result<(), AblationError> {
    if grid.is_empty() {
        return Err(AblationError::EmptyGrid);
    }
    let mut names = BTreeSet::new();
    for g in grid {
        if !names.insert(g.name.as_str()) {
            return Err(AblationError::DuplicateName(g.name.clone()));
        }
    }
    Ok(())
}

pub fn prepare(corpus: &Corpus, spec: &ExperimentSpec, res: Resources<'_>) -> Result<PreparedGrid, AblationError> {
    validate_grid(&spec.grid)?;

    let mut batches = Vec::with_capacity(spec.grid.len());
    for entry in &spec.grid {
        let batch = normalize_all(&corpus.records, &entry.config, res.emoji, res.emoticons)
            .map_err(|(id, source)| AblationError::Literal { id, source })?;
        batches.push(batch);
    }

    // ids kept by every configuration, in corpus order
    let kept_sets: Vec<BTreeSet<u64>> = batches.iter().map(|b| b.tweets.iter().map(|t| t.id).collect()).collect();
    let mut common = Vec::new();
    let mut excluded = Vec::new();
    for r in &corpus.records {
        let kept = kept_sets.iter().filter(|s| s.contains(&r.id)).count();
        if kept == kept_sets.len() {
            common.push(r.id);
        } else if kept > 0 {
            excluded.push(r.id);
        }
    }
    let common_set: BTreeSet<u64> = common.iter().copied().collect();

    let by_id: Vec<BTreeMap<u64, &NormalizedTweet>> = batches
        .iter()
        .map(|b| b.tweets.iter().filter(|t| common_set.contains(&t.id)).map(|t| (t.id, t)).collect())
        .collect();

    let genders: BTreeSet<Gender> = by_id[0].values().map(|t| t.gender).collect();
    if genders.len() < 2 {
        return Err(AblationError::MissingGender);
    }

    let accounts: BTreeMap<u64, &str> = corpus.records.iter().map(|r| (r.id, r.account.as_str())).collect();
    let mut rejected = Vec::new();
    for attempt in 0..=spec.max_retries {
        let seed = spec.seed.wrapping_add(u64::from(attempt));
        let split = if spec.split_by_account {
            let items: Vec<(u64, &str)> = common.iter().map(|id| (*id, accounts[id])).collect();
            dataset::account_split(&items, seed, spec.val_fraction)?
        } else {
            dataset::shuffle_split(&common, seed, spec.val_fraction)?
        };

        let mut rows = Vec::with_capacity(spec.grid.len());
        let mut violations = Vec::new();
        for ((entry, batch), tweets) in spec.grid.iter().zip(&batches).zip(&by_id) {
            let pick = |ids: &[u64]| ids.iter().map(|id| tweets[id].clone()).collect::<Vec<_>>();
            let train = pick(&split.train);
            let val = pick(&split.val);
            let train_summary = summarize_tweets(&train);
            let val_summary = summarize_tweets(&val);
            for v in check_balance(&train_summary, &val_summary, spec.tol_gender, spec.tol_len_rel) {
                violations.push((entry.name.clone(), v));
            }
            rows.push(PreparedRow {
                entry: entry.clone(),
                train,
                val,
                train_summary,
                val_summary,
                dropped_retweets: batch.dropped_retweets.len(),
                dropped_empty: batch.dropped_empty.len(),
                totals: batch.totals(),
            });
        }
        if violations.is_empty() {
            return Ok(PreparedGrid { split, seed_requested: spec.seed, rejected, excluded, rows });
        }
        rejected.push(RejectedSeed { seed, violations });
    }
    Err(AblationError::BalanceRetriesExhausted { attempts: spec.max_retries + 1 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowResult {
    pub entry: GridEntry,
    pub metrics: MetricsRow,
    pub confusion: ConfusionMatrix,
    pub breakdown: ClassBreakdown,
    pub train_summary: DistributionSummary,
    pub val_summary: DistributionSummary,
    pub dropped_retweets: usize,
    pub dropped_empty: usize,
    pub totals: TweetStats,
    pub emotion: EmotionGenderReport,
    /// `(id, probability of female)` in validation order.
    pub predictions: Vec<(u64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub seed_requested: u64,
    pub seed_used: u64,
    pub rejected: Vec<RejectedSeed>,
    pub excluded: Vec<u64>,
    pub split: Split,
    pub rows: Vec<RowResult>,
}

/// Prepares the grid and evaluates it with `backend`.
pub fn run_grid(
    corpus: &Corpus,
    spec: &ExperimentSpec,
    backend: &Backend,
    res: Resources<'_>,
) -> Result<ExperimentResult, AblationError> {
    let prepared = prepare(corpus, spec, res)?;
    evaluate(prepared, spec, backend, res)
}

pub fn evaluate(
    prepared: PreparedGrid,
    spec: &ExperimentSpec,
    backend: &Backend,
    res: Resources<'_>,
) -> Result<ExperimentResult, AblationError> {
    let mut rows = Vec::with_capacity(prepared.rows.len());
    for row in prepared.rows {
        let name = row.entry.name.clone();
        let predictions = match backend {
            Backend::Baseline => baseline_predictions(&row, &spec.hyperparams)?,
            Backend::ExternalPredictions(all) => {
                let given = all.get(&name).ok_or_else(|| AblationError::MissingPredictions(name.clone()))?;
                external_predictions(&row, given)?
            }
        };
        rows.push(score_row(row, predictions, spec.threshold, res)?);
    }
    Ok(ExperimentResult {
        seed_requested: prepared.seed_requested,
        seed_used: prepared.split.seed,
        rejected: prepared.rejected,
        excluded: prepared.excluded,
        split: prepared.split,
        rows,
    })
}

fn baseline_predictions(row: &PreparedRow, hp: &Hyperparams) -> Result<Vec<(u64, f64)>, AblationError> {
    let examples: Vec<(&str, u8)> = row.train.iter().map(|t| (t.text.as_str(), t.gender.label())).collect();
    let model = classifier::train(&examples, hp)
        .map_err(|source| AblationError::Classifier { config: row.entry.name.clone(), source })?;
    Ok(row.val.iter().map(|t| (t.id, model.predict(&t.text))).collect())
}

fn external_predictions(row: &PreparedRow, given: &BTreeMap<u64, f64>) -> Result<Vec<(u64, f64)>, AblationError> {
    let config = &row.entry.name;
    let val_ids: BTreeSet<u64> = row.val.iter().map(|t| t.id).collect();
    if let Some(&id) = given.keys().find(|id| !val_ids.contains(id)) {
        return Err(AblationError::UnexpectedPrediction { config: config.clone(), id });
    }
    row.val
        .iter()
        .map(|t| {
            let p = *given
                .get(&t.id)
                .ok_or_else(|| AblationError::MissingPrediction { config: config.clone(), id: t.id })?;
            if !(0.0..=1.0).contains(&p) {
                return Err(AblationError::BadProbability { config: config.clone(), id: t.id, value: p });
            }
            Ok((t.id, p))
        })
        .collect()
}

fn score_row(
    row: PreparedRow,
    predictions: Vec<(u64, f64)>,
    threshold: f64,
    res: Resources<'_>,
) -> Result<RowResult, AblationError> {
    let name = row.entry.name.clone();
    let metrics_err = |source| AblationError::Metrics { config: name.clone(), source };
    let probs: Vec<f64> = predictions.iter().map(|(_, p)| *p).collect();
    let labels: Vec<u8> = row.val.iter().map(|t| t.gender.label()).collect();
    let confusion = metrics::confusion(&probs, &labels, threshold).map_err(metrics_err)?;
    let metrics_row = metrics::scores(name.clone(), &confusion).map_err(metrics_err)?;
    let breakdown = metrics::class_breakdown(&confusion).map_err(metrics_err)?;
    let tagged = row.val.iter().zip(&probs).map(|(t, &p)| {
        let predicted = if p >= threshold { Gender::Female } else { Gender::Male };
        (emotion::tag(&t.text, res.emotions), predicted)
    });
    let emotion = emotion::emotion_gender_report(tagged)
        .map_err(|source| AblationError::Emotion { config: name.clone(), source })?;
    Ok(RowResult {
        entry: row.entry,
        metrics: metrics_row,
        confusion,
        breakdown,
        train_summary: row.train_summary,
        val_summary: row.val_summary,
        dropped_retweets: row.dropped_retweets,
        dropped_empty: row.dropped_empty,
        totals: row.totals,
        emotion,
        predictions,
    })
}
