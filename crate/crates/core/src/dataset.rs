//! Corpus records, seeded train/validation splits and distribution checks.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::cleaner::NormalizedTweet;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gender {
    Female,
    Male,
}

impl Gender {
    /// Positive class is female.
    pub fn label(self) -> u8 {
        match self {
            Gender::Female => 1,
            Gender::Male => 0,
        }
    }

    pub fn from_label(label: u8) -> Option<Self> {
        match label {
            1 => Some(Gender::Female),
            0 => Some(Gender::Male),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Female => "female",
            Gender::Male => "male",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "female" | "f" => Some(Gender::Female),
            "male" | "m" => Some(Gender::Male),
            _ => None,
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Career {
    Singer,
    ActorActress,
    MediaPersonality,
    AthleteSportAnalyst,
    Other,
}

impl Career {
    pub const ALL: [Career; 5] =
        [Career::Singer, Career::ActorActress, Career::MediaPersonality, Career::AthleteSportAnalyst, Career::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            Career::Singer => "singer",
            Career::ActorActress => "actor_actress",
            Career::MediaPersonality => "media_personality",
            Career::AthleteSportAnalyst => "athlete_sport_analyst",
            Career::Other => "other",
        }
    }

    /// Accepts the canonical names, case-insensitively, with `-`, `/` or
    /// spaces in place of `_`, plus `actor`, `actress`, `athlete` and
    /// `media`.
    pub fn parse(s: &str) -> Option<Self> {
        let key: String =
            s.trim().chars().map(|c| if matches!(c, '-' | '/' | ' ') { '_' } else { c.to_ascii_lowercase() }).collect();
        match key.as_str() {
            "actor" | "actress" => Some(Career::ActorActress),
            "athlete" | "sport_analyst" => Some(Career::AthleteSportAnalyst),
            "media" => Some(Career::MediaPersonality),
            k => Career::ALL.into_iter().find(|c| c.as_str() == k),
        }
    }
}

impl fmt::Display for Career {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Accounts per career in the celebrity corpus: `(career, female, male)`.
pub const CELEBRITY_CAREER_COUNTS: [(Career, usize, usize); 4] = [
    (Career::Singer, 13, 9),
    (Career::ActorActress, 5, 1),
    (Career::MediaPersonality, 3, 4),
    (Career::AthleteSportAnalyst, 0, 2),
];

/// `(female, male)` account totals of [`CELEBRITY_CAREER_COUNTS`].
pub fn celebrity_account_totals() -> (usize, usize) {
    CELEBRITY_CAREER_COUNTS.iter().fold((0, 0), |(f, m), &(_, cf, cm)| (f + cf, m + cm))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Account {
    pub handle: String,
    pub gender: Gender,
    pub career: Career,
}

/// Tweet text as stored: a bytes literal still to be decoded, or text
/// that is already Unicode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawText {
    Literal(String),
    Plain(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    pub id: u64,
    pub account: String,
    pub gender: Gender,
    pub text: RawText,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("validation fraction {0} must lie strictly between 0 and 1")]
    BadFraction(f64),
    #[error("duplicate account handle {0:?}")]
    DuplicateAccount(String),
    #[error("tweet {id} references unknown account {account:?}")]
    UnknownAccount { id: u64, account: String },
    #[error("tweet {id} is labelled {found} but account {account:?} is {expected}")]
    GenderMismatch { id: u64, account: String, expected: Gender, found: Gender },
    #[error("duplicate tweet id {0}")]
    DuplicateId(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub accounts: Vec<Account>,
    pub records: Vec<RawRecord>,
    /// Digest of the source file, when loaded from disk.
    pub provenance: Option<String>,
}

impl Corpus {
    /// Builds a corpus and checks account integrity.
    pub fn new(accounts: Vec<Account>, records: Vec<RawRecord>) -> Result<Self, DatasetError> {
        let corpus = Corpus { accounts, records, provenance: None };
        corpus.validate()?;
        Ok(corpus)
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        let mut by_handle = BTreeMap::new();
        for a in &self.accounts {
            if by_handle.insert(a.handle.as_str(), a.gender).is_some() {
                return Err(DatasetError::DuplicateAccount(a.handle.clone()));
            }
        }
        let mut ids = BTreeSet::new();
        for r in &self.records {
            if !ids.insert(r.id) {
                return Err(DatasetError::DuplicateId(r.id));
            }
            match by_handle.get(r.account.as_str()) {
                None => return Err(DatasetError::UnknownAccount { id: r.id, account: r.account.clone() }),
                Some(&g) if g != r.gender => {
                    return Err(DatasetError::GenderMismatch {
                        id: r.id,
                        account: r.account.clone(),
                        expected: g,
                        found: r.gender,
                    })
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    pub fn ids(&self) -> Vec<u64> {
        self.records.iter().map(|r| r.id).collect()
    }

    pub fn account(&self, handle: &str) -> Option<&Account> {
        self.accounts.iter().find(|a| a.handle == handle)
    }
}

/// Gender balance and length statistics over character counts.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DistributionSummary {
    pub n_tweets: usize,
    pub female_fraction: f64,
    pub mean_len: f64,
    pub max_len: usize,
}

/// Summarizes `(text, gender)` pairs. Lengths are summed in input order as
/// integers, so the mean does not depend on how the caller chunked work.
pub fn summarize<'a>(items: impl IntoIterator<Item = (&'a str, Gender)>) -> DistributionSummary {
    let mut n = 0usize;
    let mut female = 0usize;
    let mut total_len = 0u64;
    let mut max_len = 0usize;
    for (text, gender) in items {
        let len = text.chars().count();
        n += 1;
        female += usize::from(gender == Gender::Female);
        total_len += len as u64;
        max_len = max_len.max(len);
    }
    if n == 0 {
        return DistributionSummary::default();
    }
    DistributionSummary {
        n_tweets: n,
        female_fraction: female as f64 / n as f64,
        mean_len: total_len as f64 / n as f64,
        max_len,
    }
}

pub fn summarize_tweets(tweets: &[NormalizedTweet]) -> DistributionSummary {
    summarize(tweets.iter().map(|t| (t.text.as_str(), t.gender)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    FemaleFraction,
    MeanLength,
}

impl Statistic {
    pub fn as_str(self) -> &'static str {
        match self {
            Statistic::FemaleFraction => "female_fraction",
            Statistic::MeanLength => "mean_len",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub statistic: Statistic,
    pub train: f64,
    pub val: f64,
    /// Largest allowed absolute difference.
    pub limit: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: train {:.4} vs val {:.4} (allowed difference {:.4})",
            self.statistic.as_str(),
            self.train,
            self.val,
            self.limit
        )
    }
}

pub const DEFAULT_TOL_GENDER: f64 = 0.02;
pub const DEFAULT_TOL_LEN_REL: f64 = 0.05;

/// Compares gender fraction (absolute tolerance) and mean length (relative
/// to the training mean). Max length is reported elsewhere but not checked.
pub fn check_balance(
    train: &DistributionSummary,
    val: &DistributionSummary,
    tol_gender: f64,
    tol_len_rel: f64,
) -> Vec<Violation> {
    let mut out = Vec::new();
    if (train.female_fraction - val.female_fraction).abs() > tol_gender {
        out.push(Violation {
            statistic: Statistic::FemaleFraction,
            train: train.female_fraction,
            val: val.female_fraction,
            limit: tol_gender,
        });
    }
    let len_limit = tol_len_rel * train.mean_len;
    if (train.mean_len - val.mean_len).abs() > len_limit {
        out.push(Violation {
            statistic: Statistic::MeanLength,
            train: train.mean_len,
            val: val.mean_len,
            limit: len_limit,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Vec<u64>,
    pub val: Vec<u64>,
    pub seed: u64,
    pub val_fraction: f64,
}

impl Split {
    pub fn is_val(&self, id: u64) -> bool {
        self.val.contains(&id)
    }

    pub fn val_set(&self) -> BTreeSet<u64> {
        self.val.iter().copied().collect()
    }

    pub fn train_set(&self) -> BTreeSet<u64> {
        self.train.iter().copied().collect()
    }
}

/// Number of validation items for `n` items: `floor(n * val_fraction)`.
pub fn val_count(n: usize, val_fraction: f64) -> usize {
    libm::floor(n as f64 * val_fraction) as usize
}

fn check_fraction(val_fraction: f64) -> Result<(), DatasetError> {
    if val_fraction > 0.0 && val_fraction < 1.0 {
        Ok(())
    } else {
        Err(DatasetError::BadFraction(val_fraction))
    }
}

/// Tweet-level split: Fisher–Yates shuffle of `ids` with the generator of
/// [`rng::seeded`], then the first `floor(n * val_fraction)` ids form the
/// validation set. Both halves keep the shuffled order.
pub fn shuffle_split(ids: &[u64], seed: u64, val_fraction: f64) -> Result<Split, DatasetError> {
    check_fraction(val_fraction)?;
    if ids.is_empty() {
        return Err(DatasetError::EmptyCorpus);
    }
    let mut order = ids.to_vec();
    let mut gen = rng::seeded(seed);
    rng::fisher_yates(&mut order, &mut gen);
    let k = val_count(order.len(), val_fraction);
    let train = order.split_off(k);
    Ok(Split { train, val: order, seed, val_fraction })
}

/// Account-level split: accounts are shuffled and moved into validation
/// until it holds at least `floor(n * val_fraction)` tweets. No author
/// appears on both sides, so the validation size only approximates the
/// target.
pub fn account_split(items: &[(u64, &str)], seed: u64, val_fraction: f64) -> Result<Split, DatasetError> {
    check_fraction(val_fraction)?;
    if items.is_empty() {
        return Err(DatasetError::EmptyCorpus);
    }
    let mut by_account: BTreeMap<&str, Vec<u64>> = BTreeMap::new();
    for &(id, account) in items {
        by_account.entry(account).or_default().push(id);
    }
    let mut accounts: Vec<&str> = by_account.keys().copied().collect();
    let mut gen = rng::seeded(seed);
    rng::fisher_yates(&mut accounts, &mut gen);
    let target = val_count(items.len(), val_fraction);
    let mut val = Vec::new();
    let mut train = Vec::new();
    for account in accounts {
        let ids = &by_account[account];
        if val.len() < target && val.len() + ids.len() < items.len() {
            val.extend_from_slice(ids);
        } else {
            train.extend_from_slice(ids);
        }
    }
    Ok(Split { train, val, seed, val_fraction })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn quarter_split_sizes() {
        let ids: Vec<u64> = (0..100).collect();
        let s = shuffle_split(&ids, 7, 0.25).unwrap();
        assert_eq!((s.val.len(), s.train.len()), (25, 75));
        let s = shuffle_split(&[1, 2, 3, 4], 7, 0.25).unwrap();
        assert_eq!((s.val.len(), s.train.len()), (1, 3));
    }

    #[test]
    fn split_is_deterministic_partition() {
        let ids: Vec<u64> = (0..57).map(|i| i * 3).collect();
        let a = shuffle_split(&ids, 42, 0.25).unwrap();
        assert_eq!(a, shuffle_split(&ids, 42, 0.25).unwrap());
        assert_ne!(a.val, shuffle_split(&ids, 43, 0.25).unwrap().val);
        let mut all: Vec<u64> = a.train.iter().chain(&a.val).copied().collect();
        all.sort_unstable();
        assert_eq!(all, ids);
        assert!(a.val_set().is_disjoint(&a.train_set()));
    }

    #[test]
    fn split_errors() {
        assert_eq!(shuffle_split(&[], 1, 0.25), Err(DatasetError::EmptyCorpus));
        assert_eq!(shuffle_split(&[1], 1, 0.0), Err(DatasetError::BadFraction(0.0)));
        assert_eq!(shuffle_split(&[1], 1, 1.0), Err(DatasetError::BadFraction(1.0)));
    }

    #[test]
    fn account_split_keeps_authors_together() {
        let items: Vec<(u64, &str)> = (0..40).map(|i| (i, ["a", "b", "c", "d", "e"][(i % 5) as usize])).collect();
        let s = account_split(&items, 3, 0.25).unwrap();
        assert_eq!(s.val.len() + s.train.len(), 40);
        let val_accounts: BTreeSet<&str> = items.iter().filter(|(id, _)| s.is_val(*id)).map(|(_, a)| *a).collect();
        let train_accounts: BTreeSet<&str> = items.iter().filter(|(id, _)| !s.is_val(*id)).map(|(_, a)| *a).collect();
        assert!(val_accounts.is_disjoint(&train_accounts));
        assert!(s.val.len() >= 10);
    }

    #[test]
    fn summary_arithmetic() {
        let s = summarize(vec![("0123456789", Gender::Female), ("01234567890123456789", Gender::Male)]);
        assert_eq!(s.n_tweets, 2);
        assert_eq!(s.mean_len, 15.0);
        assert_eq!(s.max_len, 20);
        assert_eq!(s.female_fraction, 0.5);
        assert_eq!(summarize(Vec::new()), DistributionSummary::default());
    }

    #[test]
    fn summary_counts_characters() {
        let s = summarize(vec![("h\u{e9}\u{1F609}", Gender::Male)]);
        assert_eq!(s.max_len, 3);
    }

    #[test]
    fn career_table_totals() {
        assert_eq!(celebrity_account_totals(), (21, 16));
    }

    #[test]
    fn balance_examples() {
        let base = DistributionSummary { n_tweets: 10, female_fraction: 0.5, mean_len: 100.0, max_len: 140 };
        assert!(check_balance(&base, &base, 0.02, 0.05).is_empty());

        let skewed = DistributionSummary { female_fraction: 0.56, ..base };
        let v = check_balance(&base, &skewed, 0.02, 0.05);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].statistic, Statistic::FemaleFraction);
        assert_eq!((v[0].train, v[0].val), (0.5, 0.56));

        let longer = DistributionSummary { mean_len: 104.0, ..base };
        assert!(check_balance(&base, &longer, 0.02, 0.05).is_empty());
        let much_longer = DistributionSummary { mean_len: 106.0, ..base };
        assert_eq!(check_balance(&base, &much_longer, 0.02, 0.05)[0].statistic, Statistic::MeanLength);
    }

    #[test]
    fn corpus_integrity() {
        let acct = |h: &str, g| Account { handle: h.into(), gender: g, career: Career::Other };
        let rec = |id, a: &str, g| RawRecord { id, account: a.into(), gender: g, text: RawText::Plain("x".into()) };
        assert!(Corpus::new(vec![acct("a", Gender::Female)], vec![rec(0, "a", Gender::Female)]).is_ok());
        assert_eq!(
            Corpus::new(vec![acct("a", Gender::Female), acct("a", Gender::Male)], vec![]),
            Err(DatasetError::DuplicateAccount("a".into()))
        );
        assert!(matches!(
            Corpus::new(vec![acct("a", Gender::Female)], vec![rec(0, "b", Gender::Female)]),
            Err(DatasetError::UnknownAccount { .. })
        ));
        assert!(matches!(
            Corpus::new(vec![acct("a", Gender::Female)], vec![rec(0, "a", Gender::Male)]),
            Err(DatasetError::GenderMismatch { .. })
        ));
        assert_eq!(
            Corpus::new(
                vec![acct("a", Gender::Female)],
                vec![rec(0, "a", Gender::Female), rec(0, "a", Gender::Female)]
            ),
            Err(DatasetError::DuplicateId(0))
        );
    }
}
