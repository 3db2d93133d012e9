use std::collections::{BTreeMap, BTreeSet};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use polarity_core::ablation::{
    self, default_grid, preset, Backend, ExperimentSpec, GridEntry, PreparedGrid, Resources,
};
use polarity_core::classifier::{self, Hyperparams, Model};
use polarity_core::cleaner::{normalize_all, NormalizationConfig, NormalizedTweet, SymbolMode};
use polarity_core::dataset::{Corpus, Gender, Split};
use polarity_core::emoji::{EmojiTable, EmoticonLexicon};
use polarity_core::emotion::{self, EmotionLexicon};
use polarity_core::metrics::{self, render_table};
use polarity_core::synth::{generate_synthetic_corpus, SignalProfile, SynthSpec};

use crate::bundle;
use crate::formats::{self, Example};

#[derive(Debug, Parser)]
#[command(name = "polarity", version, about = "Tweet normalization and gender-polarity ablation toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for splits, training and synthesis.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Share of tweets held out for validation (floor rule).
    #[arg(long, global = true, default_value_t = 0.25)]
    pub val_fraction: f64,
    /// A grid row by name or slug, e.g. `no-mention-with-emoji`.
    #[arg(long, global = true)]
    pub config: Option<String>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Remove @handles.
    #[arg(long, global = true)]
    pub strip_mentions: bool,
    #[arg(long, global = true, value_enum)]
    pub emoji_mode: Option<Mode>,
    /// Defaults to the emoji mode.
    #[arg(long, global = true, value_enum)]
    pub emoticon_mode: Option<Mode>,
    #[arg(long, global = true)]
    pub keep_retweets: bool,
    /// Replace the built-in emoji table.
    #[arg(long, global = true)]
    pub emoji_table: Option<PathBuf>,
    /// Replace the built-in emoticon lexicon.
    #[arg(long, global = true)]
    pub emoticons: Option<PathBuf>,
    /// Replace the built-in emotion lexicon.
    #[arg(long, global = true)]
    pub emotion_lexicon: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Replace,
    Strip,
    Keep,
}

impl From<Mode> for SymbolMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Replace => SymbolMode::ReplaceWithText,
            Mode::Strip => SymbolMode::Strip,
            Mode::Keep => SymbolMode::KeepRaw,
        }
    }
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Corpus file: account, gender, career, text per line.
    pub corpus: PathBuf,
    /// Accounts file to check the corpus against.
    #[arg(long)]
    pub accounts: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// log2 of the number of hash buckets.
    #[arg(long, default_value_t = 18)]
    pub hash_bits: u32,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub l2: f64,
    #[arg(long, default_value_t = 0.1)]
    pub dropout: f64,
}

impl TrainArgs {
    fn hyperparams(&self, seed: u64) -> Result<Hyperparams> {
        if self.hash_bits == 0 || self.hash_bits > 30 {
            bail!("--hash-bits must be between 1 and 30");
        }
        let hp = Hyperparams {
            dims: 1 << self.hash_bits,
            lr: self.lr,
            epochs: self.epochs,
            l2: self.l2,
            dropout: self.dropout,
            seed,
            ..Hyperparams::default()
        };
        hp.validate()?;
        Ok(hp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    Baseline,
    External,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalize a corpus and write `id<TAB>label<TAB>text` records.
    Normalize {
        #[command(flatten)]
        input: CorpusArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Draw a balance-checked train/validation split.
    Split {
        #[command(flatten)]
        input: CorpusArgs,
        /// Keep each account on one side of the split.
        #[arg(long)]
        by_account: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Train the baseline classifier on the training side of a split.
    Train {
        #[command(flatten)]
        input: CorpusArgs,
        /// Split file from `split`; drawn afresh when absent.
        #[arg(long)]
        split: Option<PathBuf>,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        model_out: Option<PathBuf>,
    },
    /// Score a model or a predictions file on the validation side.
    Evaluate {
        #[command(flatten)]
        input: CorpusArgs,
        #[arg(long)]
        split: Option<PathBuf>,
        #[arg(long, conflicts_with = "predictions", required_unless_present = "predictions")]
        model: Option<PathBuf>,
        /// `id<TAB>probability_female` records.
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[arg(long, default_value_t = metrics::DEFAULT_THRESHOLD)]
        threshold: f64,
    },
    /// Run the mention × emoji grid and write a report bundle.
    Ablate {
        #[command(flatten)]
        input: CorpusArgs,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long, value_enum, default_value_t = BackendKind::Baseline)]
        backend: BackendKind,
        /// Directory holding `<slug>/predictions.tsv` for the external backend.
        #[arg(long)]
        predictions_dir: Option<PathBuf>,
        /// Write the interchange files and stop.
        #[arg(long)]
        interchange_only: bool,
        #[arg(long)]
        by_account: bool,
        #[arg(long, default_value_t = ablation::DEFAULT_MAX_RETRIES)]
        max_retries: u32,
    },
    /// Cross-tabulate dominant emotion against gender.
    EmotionReport {
        #[command(flatten)]
        input: CorpusArgs,
        /// Tag predicted gender from this model instead of the gold label.
        #[arg(long, conflicts_with = "predictions")]
        model: Option<PathBuf>,
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[arg(long, default_value_t = metrics::DEFAULT_THRESHOLD)]
        threshold: f64,
    },
    /// Generate a synthetic corpus with a planted gender signal.
    Synth {
        #[arg(long, default_value = "none")]
        profile: SignalProfile,
        #[arg(long, default_value_t = 10_000)]
        n_tweets: usize,
        #[arg(long, default_value_t = 37)]
        n_accounts: usize,
        #[arg(long, default_value_t = 0.6)]
        signal_rate: f64,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        accounts_out: Option<PathBuf>,
    },
}

/// Loaded tables, either built in or from override files.
pub struct Tables {
    pub emoji: EmojiTable,
    pub emoticons: EmoticonLexicon,
    pub emotions: EmotionLexicon,
}

impl Tables {
    pub fn load(g: &GlobalArgs) -> Result<Self> {
        let read = |p: &Path| formats::read_text(p).map_err(anyhow::Error::from);
        let emoji = match &g.emoji_table {
            Some(p) => EmojiTable::parse(&read(p)?).with_context(|| format!("{}", p.display()))?,
            None => EmojiTable::builtin(),
        };
        let emoticons = match &g.emoticons {
            Some(p) => EmoticonLexicon::parse(&read(p)?).with_context(|| format!("{}", p.display()))?,
            None => EmoticonLexicon::builtin(),
        };
        let emotions = match &g.emotion_lexicon {
            Some(p) => EmotionLexicon::parse(&read(p)?).with_context(|| format!("{}", p.display()))?,
            None => EmotionLexicon::builtin(),
        };
        Ok(Tables { emoji, emoticons, emotions })
    }

    pub fn resources(&self) -> Resources<'_> {
        Resources { emoji: &self.emoji, emoticons: &self.emoticons, emotions: &self.emotions }
    }
}

fn has_config_flags(g: &GlobalArgs) -> bool {
    g.strip_mentions || g.emoji_mode.is_some() || g.emoticon_mode.is_some() || g.keep_retweets
}

/// The single configuration selected by `--config` and the config flags,
/// flags applied on top of the preset.
pub fn selected_config(g: &GlobalArgs) -> Result<GridEntry> {
    let mut entry = match &g.config {
        Some(name) => preset(name).with_context(|| {
            let known: Vec<String> = default_grid().iter().map(GridEntry::slug).collect();
            format!("unknown config {name:?}; known: {}", known.join(", "))
        })?,
        None => GridEntry::new("custom", NormalizationConfig::default()),
    };
    if !has_config_flags(g) {
        return Ok(entry);
    }
    let c = &mut entry.config;
    c.strip_mentions |= g.strip_mentions;
    if let Some(m) = g.emoji_mode {
        c.emoji_mode = m.into();
        c.emoticon_mode = m.into();
    }
    if let Some(m) = g.emoticon_mode {
        c.emoticon_mode = m.into();
    }
    if g.keep_retweets {
        c.drop_retweets = false;
    }
    entry.name =
        default_grid().into_iter().find(|d| d.config == entry.config).map_or_else(|| "custom".to_string(), |d| d.name);
    Ok(entry)
}

fn load_corpus(input: &CorpusArgs) -> Result<Corpus> {
    Ok(formats::read_corpus(&input.corpus, input.accounts.as_deref())?)
}

/// Writes to `--output`, else `<out-dir>/<default_name>`, else stdout.
fn emit(output: Option<&Path>, out_dir: Option<&Path>, default_name: &str, contents: &str) -> Result<()> {
    match (output, out_dir) {
        (Some(p), _) => formats::write_text(p, contents)?,
        (None, Some(d)) => formats::write_text(&d.join(default_name), contents)?,
        (None, None) => std::io::stdout().write_all(contents.as_bytes())?,
    }
    Ok(())
}

fn spec_for(g: &GlobalArgs, grid: Vec<GridEntry>) -> ExperimentSpec {
    ExperimentSpec { seed: g.seed, val_fraction: g.val_fraction, grid, ..ExperimentSpec::default() }
}

fn examples(tweets: &[NormalizedTweet]) -> Vec<Example> {
    tweets.iter().map(|t| Example { id: t.id, label: t.gender.label(), text: t.text.clone() }).collect()
}

pub fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    if !(g.val_fraction > 0.0 && g.val_fraction < 1.0) {
        bail!("--val-fraction must lie strictly between 0 and 1");
    }
    match &cli.command {
        Command::Normalize { input, output } => normalize_cmd(g, input, output.as_deref()),
        Command::Split { input, by_account, output } => split_cmd(g, input, *by_account, output.as_deref()),
        Command::Train { input, split, train, model_out } => {
            train_cmd(g, input, split.as_deref(), train, model_out.as_deref())
        }
        Command::Evaluate { input, split, model, predictions, threshold } => {
            evaluate_cmd(g, input, split.as_deref(), model.as_deref(), predictions.as_deref(), *threshold)
        }
        Command::Ablate { input, train, backend, predictions_dir, interchange_only, by_account, max_retries } => {
            ablate_cmd(
                g,
                input,
                train,
                *backend,
                predictions_dir.as_deref(),
                *interchange_only,
                *by_account,
                *max_retries,
            )
        }
        Command::EmotionReport { input, model, predictions, threshold } => {
            emotion_cmd(g, input, model.as_deref(), predictions.as_deref(), *threshold)
        }
        Command::Synth { profile, n_tweets, n_accounts, signal_rate, output, accounts_out } => {
            let spec = SynthSpec {
                seed: g.seed,
                n_accounts: *n_accounts,
                n_tweets: *n_tweets,
                profile: *profile,
                signal_rate: *signal_rate,
                ..SynthSpec::default()
            };
            let corpus = generate_synthetic_corpus(&spec)?;
            if let Some(p) = accounts_out {
                formats::write_text(p, &formats::render_accounts(&corpus.accounts))?;
            }
            emit(output.as_deref(), g.out_dir.as_deref(), "corpus.tsv", &formats::render_corpus(&corpus)?)
        }
    }
}

fn normalize_cmd(g: &GlobalArgs, input: &CorpusArgs, output: Option<&Path>) -> Result<()> {
    let tables = Tables::load(g)?;
    let corpus = load_corpus(input)?;
    let entry = selected_config(g)?;
    let batch = normalize_all(&corpus.records, &entry.config, &tables.emoji, &tables.emoticons)
        .map_err(|(id, e)| anyhow::anyhow!("record {id}: {e}"))?;
    let t = batch.totals();
    eprintln!(
        "{}: kept {} of {}; dropped {} retweets, {} empty; replaced {} emoji, {} emoticons; stripped {} mentions",
        entry.config.canonical(),
        batch.tweets.len(),
        batch.input_len(),
        batch.dropped_retweets.len(),
        batch.dropped_empty.len(),
        t.emoji_replaced,
        t.emoticons_replaced,
        t.mentions_stripped
    );
    emit(output, g.out_dir.as_deref(), "normalized.tsv", &formats::render_examples(&examples(&batch.tweets))?)
}

/// Grid used to draw a split: the selected config if one was given, the
/// full default grid otherwise (which reproduces the split of `ablate`).
fn split_grid(g: &GlobalArgs) -> Result<Vec<GridEntry>> {
    if g.config.is_some() || has_config_flags(g) {
        Ok(vec![selected_config(g)?])
    } else {
        Ok(default_grid())
    }
}

fn prepare_split(g: &GlobalArgs, corpus: &Corpus, tables: &Tables, by_account: bool) -> Result<PreparedGrid> {
    let spec = ExperimentSpec { split_by_account: by_account, ..spec_for(g, split_grid(g)?) };
    let prepared = ablation::prepare(corpus, &spec, tables.resources())?;
    for r in &prepared.rejected {
        for (config, v) in &r.violations {
            eprintln!("seed {} rejected for {config}: {v}", r.seed);
        }
    }
    Ok(prepared)
}

fn split_cmd(g: &GlobalArgs, input: &CorpusArgs, by_account: bool, output: Option<&Path>) -> Result<()> {
    let tables = Tables::load(g)?;
    let corpus = load_corpus(input)?;
    let prepared = prepare_split(g, &corpus, &tables, by_account)?;
    for row in &prepared.rows {
        let (t, v) = (&row.train_summary, &row.val_summary);
        eprintln!(
            "{}: train {} (female {:.4}, mean len {:.2}), val {} (female {:.4}, mean len {:.2})",
            row.entry.name, t.n_tweets, t.female_fraction, t.mean_len, v.n_tweets, v.female_fraction, v.mean_len
        );
    }
    let file = formats::SplitFile {
        requested_seed: prepared.seed_requested,
        rejected: prepared.rejected.iter().map(|r| r.seed).collect(),
        split: prepared.split,
    };
    emit(output, g.out_dir.as_deref(), "split.tsv", &formats::render_split(&file))
}

/// Normalized tweets of the selected config on each side of the split.
struct Sides {
    entry: GridEntry,
    train: Vec<NormalizedTweet>,
    val: Vec<NormalizedTweet>,
}

fn sides(g: &GlobalArgs, input: &CorpusArgs, split: Option<&Path>, tables: &Tables) -> Result<Sides> {
    let corpus = load_corpus(input)?;
    let entry = selected_config(g)?;
    let split: Split = match split {
        Some(p) => formats::parse_split(p, &formats::read_text(p)?)?.split,
        None => prepare_split(g, &corpus, tables, false)?.split,
    };
    let batch = normalize_all(&corpus.records, &entry.config, &tables.emoji, &tables.emoticons)
        .map_err(|(id, e)| anyhow::anyhow!("record {id}: {e}"))?;
    let mut by_id: BTreeMap<u64, NormalizedTweet> = batch.tweets.into_iter().map(|t| (t.id, t)).collect();
    let known: BTreeSet<u64> = corpus.records.iter().map(|r| r.id).collect();
    let mut take = |ids: &[u64]| -> Result<Vec<NormalizedTweet>> {
        let mut out = Vec::with_capacity(ids.len());
        let mut skipped = 0;
        for id in ids {
            if !known.contains(id) {
                bail!("split names id {id}, which is not in the corpus");
            }
            match by_id.remove(id) {
                Some(t) => out.push(t),
                None => skipped += 1,
            }
        }
        if skipped > 0 {
            eprintln!("{skipped} split ids were dropped by normalization and are skipped");
        }
        Ok(out)
    };
    let train = take(&split.train)?;
    let val = take(&split.val)?;
    Ok(Sides { entry, train, val })
}

fn train_cmd(
    g: &GlobalArgs,
    input: &CorpusArgs,
    split: Option<&Path>,
    args: &TrainArgs,
    model_out: Option<&Path>,
) -> Result<()> {
    let out = match (model_out, &g.out_dir) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(d)) => d.join("model.txt"),
        (None, None) => bail!("give --model-out or --out-dir"),
    };
    let hp = args.hyperparams(g.seed)?;
    let tables = Tables::load(g)?;
    let s = sides(g, input, split, &tables)?;
    let data: Vec<(&str, u8)> = s.train.iter().map(|t| (t.text.as_str(), t.gender.label())).collect();
    let model = classifier::train(&data, &hp)?;
    formats::write_text(&out, &model.to_text())?;
    eprintln!("trained on {} tweets under {}; model written to {}", data.len(), s.entry.name, out.display());
    Ok(())
}

fn read_model(p: &Path) -> Result<Model> {
    Model::from_text(&formats::read_text(p)?).with_context(|| format!("{}", p.display()))
}

fn evaluate_cmd(
    g: &GlobalArgs,
    input: &CorpusArgs,
    split: Option<&Path>,
    model: Option<&Path>,
    predictions: Option<&Path>,
    threshold: f64,
) -> Result<()> {
    let tables = Tables::load(g)?;
    let s = sides(g, input, split, &tables)?;
    let probs: Vec<(u64, f64)> = match (model, predictions) {
        (Some(m), _) => {
            let model = read_model(m)?;
            s.val.iter().map(|t| (t.id, model.predict(&t.text))).collect()
        }
        (None, Some(p)) => {
            let given = formats::parse_predictions(p, &formats::read_text(p)?)?;
            s.val
                .iter()
                .map(|t| given.get(&t.id).map(|&v| (t.id, v)).with_context(|| format!("no prediction for id {}", t.id)))
                .collect::<Result<_>>()?
        }
        (None, None) => bail!("give --model or --predictions"),
    };
    let preds: Vec<f64> = probs.iter().map(|(_, p)| *p).collect();
    let labels: Vec<u8> = s.val.iter().map(|t| t.gender.label()).collect();
    let cm = metrics::confusion(&preds, &labels, threshold)?;
    let row = metrics::scores(s.entry.name.clone(), &cm)?;
    let table = render_table(std::slice::from_ref(&row))?;
    let matrix = cm.render(&s.entry.name);
    match &g.out_dir {
        Some(d) => {
            formats::write_text(&d.join("metrics.txt"), &table)?;
            formats::write_text(&d.join("metrics.csv"), &metrics::render_records(std::slice::from_ref(&row))?)?;
            formats::write_text(&d.join("confusion.txt"), &matrix)?;
            formats::write_text(&d.join("confusion.csv"), &cm.to_csv())?;
            formats::write_text(&d.join("predictions.tsv"), &formats::render_predictions(&probs))?;
        }
        None => print!("{table}\n{matrix}"),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn ablate_cmd(
    g: &GlobalArgs,
    input: &CorpusArgs,
    args: &TrainArgs,
    backend: BackendKind,
    predictions_dir: Option<&Path>,
    interchange_only: bool,
    by_account: bool,
    max_retries: u32,
) -> Result<()> {
    let Some(out_dir) = g.out_dir.as_deref() else {
        bail!("ablate needs --out-dir");
    };
    if has_config_flags(g) {
        bail!("ablate runs the mention × emoji grid; use --config to pick one row instead of config flags");
    }
    let grid = match &g.config {
        Some(_) => vec![selected_config(g)?],
        None => default_grid(),
    };
    let tables = Tables::load(g)?;
    let corpus = load_corpus(input)?;
    let spec = ExperimentSpec {
        hyperparams: args.hyperparams(g.seed)?,
        split_by_account: by_account,
        max_retries,
        ..spec_for(g, grid)
    };
    let prepared = ablation::prepare(&corpus, &spec, tables.resources())?;

    let mut interchange = bundle::Bundle::new();
    if backend == BackendKind::External || interchange_only {
        for row in &prepared.rows {
            let slug = row.entry.slug();
            interchange
                .insert(format!("interchange/{slug}/train.tsv"), formats::render_examples(&examples(&row.train))?);
            interchange.insert(format!("interchange/{slug}/val.tsv"), formats::render_examples(&examples(&row.val))?);
        }
    }
    if interchange_only {
        bundle::write(out_dir, &interchange)?;
        eprintln!("interchange files written under {}", out_dir.join("interchange").display());
        return Ok(());
    }

    let backend = match backend {
        BackendKind::Baseline => Backend::Baseline,
        BackendKind::External => {
            let dir = predictions_dir.context("the external backend needs --predictions-dir")?;
            let mut all = BTreeMap::new();
            for row in &prepared.rows {
                let p = dir.join(row.entry.slug()).join("predictions.tsv");
                all.insert(row.entry.name.clone(), formats::parse_predictions(&p, &formats::read_text(&p)?)?);
            }
            Backend::ExternalPredictions(all)
        }
    };
    let result = ablation::evaluate(prepared, &spec, &backend, tables.resources())?;
    let mut files = bundle::build(&corpus, &spec, &backend, tables.resources(), &result)?;
    files.append(&mut interchange);
    bundle::write(out_dir, &files)?;
    print!("{}", files["metrics.txt"]);
    Ok(())
}

fn emotion_cmd(
    g: &GlobalArgs,
    input: &CorpusArgs,
    model: Option<&Path>,
    predictions: Option<&Path>,
    threshold: f64,
) -> Result<()> {
    let tables = Tables::load(g)?;
    let corpus = load_corpus(input)?;
    let entry = selected_config(g)?;
    let batch = normalize_all(&corpus.records, &entry.config, &tables.emoji, &tables.emoticons)
        .map_err(|(id, e)| anyhow::anyhow!("record {id}: {e}"))?;
    let predicted = |p: f64| if p >= threshold { Gender::Female } else { Gender::Male };
    let (basis, items): (&str, Vec<_>) = match (model, predictions) {
        (Some(m), _) => {
            let model = read_model(m)?;
            ("predicted", batch.tweets.iter().map(|t| (t.text.as_str(), predicted(model.predict(&t.text)))).collect())
        }
        (None, Some(p)) => {
            // only tweets with a prediction are tagged
            let given = formats::parse_predictions(p, &formats::read_text(p)?)?;
            let items = batch.tweets.iter().filter_map(|t| given.get(&t.id).map(|&v| (t.text.as_str(), predicted(v))));
            ("predicted", items.collect())
        }
        (None, None) => ("gold", batch.tweets.iter().map(|t| (t.text.as_str(), t.gender)).collect()),
    };
    let report =
        emotion::emotion_gender_report(items.into_iter().map(|(t, g)| (emotion::tag(t, &tables.emotions), g)))?;
    match &g.out_dir {
        Some(d) => {
            formats::write_text(&d.join("emotion.txt"), &format!("# gender: {basis}\n{}", report.render()))?;
            formats::write_text(&d.join("emotion.csv"), &report.to_csv())?;
        }
        None => print!("# gender: {basis}\n{}", report.render()),
    }
    Ok(())
}
