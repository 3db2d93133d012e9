//! Keyword-lexicon emotion tagging into angry, fear, happy, sad and
//! surprise, and the emotion × predicted-gender cross-tabulation.
//!
//! The shipped lexicon is a small hand-built word list. It approximates the
//! behaviour of common keyword emotion taggers and does not reproduce any
//! particular library's scores.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::dataset::Gender;

const BUILTIN_LEXICON: &str = include_str!("../data/emotion_lexicon.tsv");

/// The five emotion classes, in tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Emotion {
    Angry,
    Fear,
    Happy,
    Sad,
    Surprise,
}

impl Emotion {
    pub const ALL: [Emotion; 5] = [Emotion::Angry, Emotion::Fear, Emotion::Happy, Emotion::Sad, Emotion::Surprise];

    pub fn as_str(self) -> &'static str {
        match self {
            Emotion::Angry => "angry",
            Emotion::Fear => "fear",
            Emotion::Happy => "happy",
            Emotion::Sad => "sad",
            Emotion::Surprise => "surprise",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim().to_ascii_lowercase();
        Emotion::ALL.into_iter().find(|e| e.as_str() == s)
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Dominant emotion, or neutral when no lexicon word was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dominant {
    Emotion(Emotion),
    Neutral,
}

impl Dominant {
    /// Report rows: the five emotions then neutral.
    pub const ROWS: [Dominant; 6] = [
        Dominant::Emotion(Emotion::Angry),
        Dominant::Emotion(Emotion::Fear),
        Dominant::Emotion(Emotion::Happy),
        Dominant::Emotion(Emotion::Sad),
        Dominant::Emotion(Emotion::Surprise),
        Dominant::Neutral,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Dominant::Emotion(e) => e.as_str(),
            Dominant::Neutral => "neutral",
        }
    }

    fn row(self) -> usize {
        match self {
            Dominant::Emotion(e) => e.index(),
            Dominant::Neutral => 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmotionScores {
    /// Indexed by [`Emotion`] order.
    pub scores: [f64; 5],
    pub dominant: Dominant,
}

impl EmotionScores {
    pub fn get(&self, e: Emotion) -> f64 {
        self.scores[e.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EmotionError {
    #[error("lexicon line {line}: expected `word<TAB>emotion`")]
    MalformedLine { line: usize },
    #[error("lexicon line {line}: unknown emotion {label:?}")]
    UnknownEmotion { line: usize, label: String },
    #[error("lexicon line {line}: word {word:?} must be lowercase alphanumeric")]
    BadWord { line: usize, word: String },
    #[error("lexicon line {line}: duplicate word {word:?}")]
    DuplicateWord { line: usize, word: String },
    #[error("nothing to tabulate")]
    EmptyInput,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmotionLexicon {
    words: BTreeMap<String, Emotion>,
    version: String,
}

impl EmotionLexicon {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_LEXICON).expect("builtin emotion lexicon is valid")
    }

    pub fn parse(src: &str) -> Result<Self, EmotionError> {
        let mut version = String::new();
        let mut entries = Vec::new();
        for (i, line) in src.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("version:") {
                    version = v.trim().to_string();
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let (word, label) = line.split_once('\t').ok_or(EmotionError::MalformedLine { line: i + 1 })?;
            let emotion = Emotion::parse(label)
                .ok_or_else(|| EmotionError::UnknownEmotion { line: i + 1, label: label.to_string() })?;
            entries.push((i + 1, word.to_string(), emotion));
        }
        Self::build(entries, version)
    }

    pub fn from_entries<S: Into<String>>(
        entries: impl IntoIterator<Item = (S, Emotion)>,
        version: impl Into<String>,
    ) -> Result<Self, EmotionError> {
        let numbered = entries.into_iter().enumerate().map(|(i, (w, e))| (i + 1, w.into(), e)).collect();
        Self::build(numbered, version.into())
    }

    fn build(entries: Vec<(usize, String, Emotion)>, version: String) -> Result<Self, EmotionError> {
        let mut words = BTreeMap::new();
        for (line, word, emotion) in entries {
            let ok = !word.is_empty() && word.chars().all(|c| c.is_alphanumeric() && !c.is_uppercase());
            if !ok {
                return Err(EmotionError::BadWord { line, word });
            }
            if words.contains_key(&word) {
                return Err(EmotionError::DuplicateWord { line, word });
            }
            words.insert(word, emotion);
        }
        Ok(EmotionLexicon { words, version })
    }

    pub fn get(&self, word: &str) -> Option<Emotion> {
        self.words.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn version(&self) -> &str {
        &self.version
    }
}

/// Scores `text` by the share of lexicon hits per emotion.
///
/// Tokens are maximal alphanumeric runs, lowercased. With no hits every
/// score is 0 and the result is neutral; otherwise the dominant emotion is
/// the highest score, ties going to the earlier of angry, fear, happy, sad,
/// surprise.
pub fn tag(text: &str, lex: &EmotionLexicon) -> EmotionScores {
    let mut counts = [0u64; 5];
    let mut word = String::new();
    for token in text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()) {
        word.clear();
        word.extend(token.chars().flat_map(char::to_lowercase));
        if let Some(e) = lex.get(&word) {
            counts[e.index()] += 1;
        }
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return EmotionScores { scores: [0.0; 5], dominant: Dominant::Neutral };
    }
    let scores = counts.map(|c| c as f64 / total as f64);
    let mut best = 0;
    for i in 1..5 {
        if counts[i] > counts[best] {
            best = i;
        }
    }
    EmotionScores { scores, dominant: Dominant::Emotion(Emotion::ALL[best]) }
}

/// Counts of dominant emotion (rows) by predicted gender (columns).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EmotionGenderReport {
    /// `[female, male]` per row of [`Dominant::ROWS`].
    pub counts: [[u64; 2]; 6],
}

impl EmotionGenderReport {
    pub fn count(&self, row: Dominant, gender: Gender) -> u64 {
        self.counts[row.row()][gender_col(gender)]
    }

    /// Row-normalized `(female, male)` fractions; `(0, 0)` for empty rows.
    pub fn fractions(&self, row: Dominant) -> (f64, f64) {
        let [f, m] = self.counts[row.row()];
        let n = f + m;
        if n == 0 {
            (0.0, 0.0)
        } else {
            (f as f64 / n as f64, m as f64 / n as f64)
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<9} {:>8} {:>8} {:>9} {:>9}", "emotion", "female", "male", "female_%", "male_%");
        for row in Dominant::ROWS {
            let (ff, fm) = self.fractions(row);
            let _ = writeln!(
                out,
                "{:<9} {:>8} {:>8} {:>9.4} {:>9.4}",
                row.as_str(),
                self.count(row, Gender::Female),
                self.count(row, Gender::Male),
                ff,
                fm
            );
        }
        out
    }

    /// `emotion,female,male,female_fraction,male_fraction` records.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("emotion,female,male,female_fraction,male_fraction\n");
        for row in Dominant::ROWS {
            let (ff, fm) = self.fractions(row);
            let _ = writeln!(
                out,
                "{},{},{},{:.4},{:.4}",
                row.as_str(),
                self.count(row, Gender::Female),
                self.count(row, Gender::Male),
                ff,
                fm
            );
        }
        out
    }
}

fn gender_col(g: Gender) -> usize {
    match g {
        Gender::Female => 0,
        Gender::Male => 1,
    }
}

pub fn emotion_gender_report(
    items: impl IntoIterator<Item = (EmotionScores, Gender)>,
) -> Result<EmotionGenderReport, EmotionError> {
    let mut report = EmotionGenderReport::default();
    for (scores, gender) in items {
        report.counts[scores.dominant.row()][gender_col(gender)] += 1;
    }
    if report.total() == 0 {
        return Err(EmotionError::EmptyInput);
    }
    Ok(report)
}
