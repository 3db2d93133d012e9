//! Confusion matrices and accuracy/precision/recall tables.
//!
//! The positive class is female (label 1). A prediction counts as positive
//! when `p >= threshold`, so the all-0.5 output of a zero model is positive.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("{preds} predictions but {labels} labels")]
    LengthMismatch { preds: usize, labels: usize },
    #[error("nothing to score")]
    EmptyInput,
    #[error("label {0} is not 0 or 1")]
    BadLabel(u8),
    #[error("config name {0:?} cannot contain commas or newlines")]
    BadName(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// The same matrix with male as the positive class.
    pub fn flipped(&self) -> Self {
        ConfusionMatrix { tp: self.tn, fp: self.fn_, fn_: self.fp, tn: self.tp }
    }

    /// Adds one scored example.
    pub fn record(&mut self, predicted_positive: bool, label: u8) {
        match (predicted_positive, label == 1) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    /// Figure-style 2×2 rendering, rows are the true class.
    pub fn render(&self, title: &str) -> String {
        let w = [self.tp, self.fp, self.fn_, self.tn]
            .iter()
            .map(|v| format!("{v}").len())
            .max()
            .unwrap_or(1)
            .max("pred male".len());
        let mut out = String::new();
        let _ = writeln!(out, "{title}");
        let _ = writeln!(out, "{:<12} {:>w$} {:>w$}", "", "pred female", "pred male", w = w.max(11));
        let _ = writeln!(out, "{:<12} {:>w$} {:>w$}", "true female", self.tp, self.fn_, w = w.max(11));
        let _ = writeln!(out, "{:<12} {:>w$} {:>w$}", "true male", self.fp, self.tn, w = w.max(11));
        out
    }

    /// Delimited form for external plotting: header plus one row per true class.
    pub fn to_csv(&self) -> String {
        format!("true,pred_female,pred_male\nfemale,{},{}\nmale,{},{}\n", self.tp, self.fn_, self.fp, self.tn)
    }
}

/// Tallies predictions against labels with `p >= threshold` as positive.
pub fn confusion(preds: &[f64], labels: &[u8], threshold: f64) -> Result<ConfusionMatrix, MetricsError> {
    if preds.len() != labels.len() {
        return Err(MetricsError::LengthMismatch { preds: preds.len(), labels: labels.len() });
    }
    if preds.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &y) in preds.iter().zip(labels) {
        if y > 1 {
            return Err(MetricsError::BadLabel(y));
        }
        cm.record(p >= threshold, y);
    }
    Ok(cm)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub config_name: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    /// Set when `tp + fp == 0` and precision was reported as 0.
    pub precision_undefined: bool,
    /// Set when `tp + fn == 0` and recall was reported as 0.
    pub recall_undefined: bool,
    pub counts: Option<ConfusionMatrix>,
}

impl MetricsRow {
    /// A row from already-computed values.
    pub fn from_values(config_name: impl Into<String>, accuracy: f64, precision: f64, recall: f64) -> Self {
        MetricsRow {
            config_name: config_name.into(),
            accuracy,
            precision,
            recall,
            precision_undefined: false,
            recall_undefined: false,
            counts: None,
        }
    }
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

/// Accuracy, precision and recall of `cm`; empty denominators give 0 and
/// set the matching flag.
pub fn scores(config_name: impl Into<String>, cm: &ConfusionMatrix) -> Result<MetricsRow, MetricsError> {
    if cm.total() == 0 {
        return Err(MetricsError::EmptyInput);
    }
    let (accuracy, _) = ratio(cm.tp + cm.tn, cm.total());
    let (precision, precision_undefined) = ratio(cm.tp, cm.tp + cm.fp);
    let (recall, recall_undefined) = ratio(cm.tp, cm.tp + cm.fn_);
    Ok(MetricsRow {
        config_name: config_name.into(),
        accuracy,
        precision,
        recall,
        precision_undefined,
        recall_undefined,
        counts: Some(*cm),
    })
}

/// Precision/recall under each reading of "positive class".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassBreakdown {
    pub female_precision: f64,
    pub female_recall: f64,
    pub male_precision: f64,
    pub male_recall: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
}

pub fn class_breakdown(cm: &ConfusionMatrix) -> Result<ClassBreakdown, MetricsError> {
    let female = scores("", cm)?;
    let male = scores("", &cm.flipped())?;
    Ok(ClassBreakdown {
        female_precision: female.precision,
        female_recall: female.recall,
        male_precision: male.precision,
        male_recall: male.recall,
        macro_precision: (female.precision + male.precision) / 2.0,
        macro_recall: (female.recall + male.recall) / 2.0,
    })
}

/// Aligned text table with four decimals, rows in the given order. A `*`
/// after a value marks an undefined metric reported as 0.
pub fn render_table(rows: &[MetricsRow]) -> Result<String, MetricsError> {
    if rows.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let name_w = rows.iter().map(|r| r.config_name.chars().count()).max().unwrap_or(0).max("config".len());
    let col = |v: f64, undefined: bool| format!("{v:.4}{}", if undefined { "*" } else { "" });
    let mut out = String::new();
    let _ = writeln!(out, "{:<name_w$}  {:>9}  {:>9}  {:>9}", "config", "Accuracy", "Precision", "Recall");
    let _ = writeln!(out, "{}", "-".repeat(name_w + 33));
    for r in rows {
        let _ = writeln!(
            out,
            "{:<name_w$}  {:>9}  {:>9}  {:>9}",
            r.config_name,
            col(r.accuracy, false),
            col(r.precision, r.precision_undefined),
            col(r.recall, r.recall_undefined),
        );
    }
    Ok(out)
}

/// `config_name,accuracy,precision,recall,tp,fp,fn,tn` records with a
/// header line. Counts are empty when the row carries none.
pub fn render_records(rows: &[MetricsRow]) -> Result<String, MetricsError> {
    if rows.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut out = String::from("config_name,accuracy,precision,recall,tp,fp,fn,tn\n");
    for r in rows {
        if r.config_name.contains([',', '\n', '\r']) {
            return Err(MetricsError::BadName(r.config_name.clone()));
        }
        let counts = match r.counts {
            Some(c) => format!("{},{},{},{}", c.tp, c.fp, c.fn_, c.tn),
            None => String::from(",,,"),
        };
        let _ = writeln!(out, "{},{:.4},{:.4},{:.4},{}", r.config_name, r.accuracy, r.precision, r.recall, counts);
    }
    Ok(out)
}

/// Parses what [`render_records`] writes.
pub fn parse_records(src: &str) -> Result<Vec<MetricsRow>, MetricsError> {
    let mut rows = Vec::new();
    for line in src.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(',').collect();
        let bad = || MetricsError::BadName(String::from(line));
        if f.len() != 8 {
            return Err(bad());
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
        let mut row = MetricsRow::from_values(f[0], num(f[1])?, num(f[2])?, num(f[3])?);
        if !f[4].is_empty() {
            let c = |s: &str| s.parse::<u64>().map_err(|_| bad());
            row.counts = Some(ConfusionMatrix { tp: c(f[4])?, fp: c(f[5])?, fn_: c(f[6])?, tn: c(f[7])? });
        }
        rows.push(row);
    }
    Ok(rows)
}
