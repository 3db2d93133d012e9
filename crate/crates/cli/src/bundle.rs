//! The report bundle written by `ablate`.
//!
//! A bundle is built in memory as a sorted map from relative path to file
//! contents, then written out. Nothing in it depends on the clock, the
//! host or iteration order of a hash map, so identical runs give
//! byte-identical directories.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use polarity_core::ablation::{Backend, ExperimentResult, ExperimentSpec, Resources, RowResult};
use polarity_core::classifier::{Hyperparams, NgramRange};
use polarity_core::dataset::{Corpus, DistributionSummary};
use polarity_core::metrics::{render_records, render_table, MetricsRow};

use crate::formats::{self, render_predictions, render_split, FormatError, SplitFile};

pub type Bundle = BTreeMap<String, String>;

pub fn hyperparams_line(hp: &Hyperparams) -> String {
    let range = |r: Option<NgramRange>| r.map_or("off".to_string(), |r| format!("{}-{}", r.min, r.max));
    format!(
        "dims={} word_ngrams={} char_ngrams={} lr={:?} epochs={} l2={:?} dropout={:?} seed={}",
        hp.dims,
        range(hp.word_ngrams),
        range(hp.char_ngrams),
        hp.lr,
        hp.epochs,
        hp.l2,
        hp.dropout,
        hp.seed
    )
}

fn backend_name(backend: &Backend) -> &'static str {
    match backend {
        Backend::Baseline => "baseline",
        Backend::ExternalPredictions(_) => "external-predictions",
    }
}

/// Run header: seeds and retries, digests of the corpus and of every
/// configuration, and the versions of all tables used.
pub fn render_header(
    corpus: &Corpus,
    spec: &ExperimentSpec,
    backend: &Backend,
    res: Resources<'_>,
    result: &ExperimentResult,
) -> String {
    let mut out = String::from("# polarity ablation report\n");
    let mut kv = |k: &str, v: &dyn std::fmt::Display| {
        let _ = writeln!(out, "{k}: {v}");
    };
    kv("requested_seed", &result.seed_requested);
    kv("seed_used", &result.seed_used);
    kv("retries", &result.rejected.len());
    kv("val_fraction", &format!("{:?}", spec.val_fraction));
    kv("split_unit", &if spec.split_by_account { "account" } else { "tweet" });
    kv("train_size", &result.split.train.len());
    kv("val_size", &result.split.val.len());
    kv("balance_tolerances", &format!("female_fraction={:?} mean_len_rel={:?}", spec.tol_gender, spec.tol_len_rel));
    kv("max_retries", &spec.max_retries);
    kv("corpus_sha256", &corpus.provenance.as_deref().unwrap_or("in-memory"));
    kv("corpus_records", &corpus.records.len());
    kv("excluded_records", &result.excluded.len());
    kv("emoji_table", &format!("{} ({} entries)", res.emoji.version(), res.emoji.len()));
    kv("emoticon_lexicon", &format!("{} ({} entries)", res.emoticons.version(), res.emoticons.len()));
    kv("emotion_lexicon", &format!("{} ({} entries)", res.emotions.version(), res.emotions.len()));
    kv("backend", &backend_name(backend));
    if matches!(backend, Backend::Baseline) {
        kv("hyperparams", &hyperparams_line(&spec.hyperparams));
    }
    kv("threshold", &format!("{:?}", spec.threshold));
    kv("positive_class", &"female");
    for entry in &spec.grid {
        let canonical = entry.config.canonical();
        let _ = writeln!(
            out,
            "config: {} | {} | sha256={}",
            entry.name,
            canonical,
            formats::sha256_hex(canonical.as_bytes())
        );
    }
    for r in &result.rejected {
        for (config, v) in &r.violations {
            let _ = writeln!(out, "rejected_seed: {} | {} | {}", r.seed, config, v);
        }
    }
    out
}

fn summary_line(out: &mut String, config: &str, side: &str, s: &DistributionSummary) {
    let _ = writeln!(out, "{config},{side},{},{:.6},{:.6},{}", s.n_tweets, s.female_fraction, s.mean_len, s.max_len);
}

fn render_distribution(rows: &[RowResult]) -> String {
    let mut out = String::from("config_name,side,n_tweets,female_fraction,mean_len,max_len\n");
    for r in rows {
        summary_line(&mut out, &r.entry.name, "train", &r.train_summary);
        summary_line(&mut out, &r.entry.name, "val", &r.val_summary);
    }
    out
}

fn render_per_class(rows: &[RowResult]) -> String {
    let mut out = String::from(
        "config_name,female_precision,female_recall,male_precision,male_recall,macro_precision,macro_recall\n",
    );
    for r in rows {
        let b = &r.breakdown;
        let _ = writeln!(
            out,
            "{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}",
            r.entry.name,
            b.female_precision,
            b.female_recall,
            b.male_precision,
            b.male_recall,
            b.macro_precision,
            b.macro_recall
        );
    }
    out
}

fn render_drops(rows: &[RowResult]) -> String {
    let mut out = String::from(
        "config_name,dropped_retweets,dropped_empty,emoji_replaced,emoticons_replaced,mentions_stripped,decode_replacements,unmapped_emoji\n",
    );
    for r in rows {
        let t = &r.totals;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.entry.name,
            r.dropped_retweets,
            r.dropped_empty,
            t.emoji_replaced,
            t.emoticons_replaced,
            t.mentions_stripped,
            t.decode_replacements,
            t.unmapped_emoji
        );
    }
    out
}

/// Every file of the bundle, keyed by path relative to the bundle root.
pub fn build(
    corpus: &Corpus,
    spec: &ExperimentSpec,
    backend: &Backend,
    res: Resources<'_>,
    result: &ExperimentResult,
) -> Result<Bundle, FormatError> {
    let metric_rows: Vec<MetricsRow> = result.rows.iter().map(|r| r.metrics.clone()).collect();
    let metrics_err = |e: polarity_core::metrics::MetricsError| FormatError::Unwritable(e.to_string());
    let mut b = Bundle::new();
    b.insert("header.txt".into(), render_header(corpus, spec, backend, res, result));
    b.insert("metrics.txt".into(), render_table(&metric_rows).map_err(metrics_err)?);
    b.insert("metrics.csv".into(), render_records(&metric_rows).map_err(metrics_err)?);
    b.insert("per_class.csv".into(), render_per_class(&result.rows));
    b.insert("distribution.csv".into(), render_distribution(&result.rows));
    b.insert("drops.csv".into(), render_drops(&result.rows));
    b.insert(
        "split.tsv".into(),
        render_split(&SplitFile {
            split: result.split.clone(),
            requested_seed: result.seed_requested,
            rejected: result.rejected.iter().map(|r| r.seed).collect(),
        }),
    );
    for r in &result.rows {
        let slug = r.entry.slug();
        b.insert(format!("confusion/{slug}.txt"), r.confusion.render(&r.entry.name));
        b.insert(format!("confusion/{slug}.csv"), r.confusion.to_csv());
        b.insert(format!("emotion/{slug}.txt"), r.emotion.render());
        b.insert(format!("emotion/{slug}.csv"), r.emotion.to_csv());
        b.insert(format!("predictions/{slug}.tsv"), render_predictions(&r.predictions));
    }
    Ok(b)
}

pub fn write(dir: &Path, bundle: &Bundle) -> Result<(), FormatError> {
    for (rel, contents) in bundle {
        formats::write_text(&dir.join(rel), contents)?;
    }
    Ok(())
}
