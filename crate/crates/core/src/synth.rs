//! Seeded synthetic tweet corpora with a controllable gender signal.
//!
//! Every tweet draws its words from one shared vocabulary and gets the
//! same gender-neutral sprinkling of mentions, emoji, emoticons and
//! retweets. The [`SignalProfile`] then adds exactly one feature family
//! whose choice depends on the author's gender, so an experiment can check
//! that removing that family removes the signal.
//!
//! Per-account tweet volumes are log-uniform between 20 and 4000 before
//! being scaled to the requested total, which gives the heavy skew of a
//! real celebrity scrape. Texts are stored as bytes literals.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::dataset::{Account, Career, Corpus, Gender, RawRecord, RawText, CELEBRITY_CAREER_COUNTS};
use crate::literal::escape_bytes_literal;
use crate::rng::{self, ChaCha8Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignalProfile {
    None,
    Emoji,
    Mention,
    Token,
}

impl SignalProfile {
    pub fn as_str(self) -> &'static str {
        match self {
            SignalProfile::None => "none",
            SignalProfile::Emoji => "emoji",
            SignalProfile::Mention => "mention",
            SignalProfile::Token => "token",
        }
    }
}

impl fmt::Display for SignalProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SignalProfile {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(SignalProfile::None),
            "emoji" | "emoji-signal" => Ok(SignalProfile::Emoji),
            "mention" | "mention-signal" => Ok(SignalProfile::Mention),
            "token" | "token-signal" => Ok(SignalProfile::Token),
            other => Err(SynthError::UnknownProfile(other.into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("unknown signal profile {0:?} (expected none, emoji, mention or token)")]
    UnknownProfile(String),
    #[error("need at least 2 accounts, got {0}")]
    TooFewAccounts(usize),
    #[error("{tweets} tweets cannot cover {accounts} accounts of one gender")]
    TooFewTweets { tweets: usize, accounts: usize },
    #[error("{name} must lie strictly between 0 and 1, got {value}")]
    BadFraction { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub seed: u64,
    pub n_accounts: usize,
    pub n_tweets: usize,
    pub profile: SignalProfile,
    /// Share of tweets written by female accounts.
    pub female_tweet_fraction: f64,
    /// Share of accounts that are female; 21 of 37 in the celebrity corpus.
    pub female_account_fraction: f64,
    /// Probability that a tweet carries the planted signal.
    pub signal_rate: f64,
    pub retweet_rate: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            seed: 0,
            n_accounts: 37,
            n_tweets: 10_000,
            profile: SignalProfile::None,
            female_tweet_fraction: 0.5,
            female_account_fraction: 21.0 / 37.0,
            signal_rate: 0.6,
            retweet_rate: 0.1,
        }
    }
}

const WORDS: &[&str] = &[
    "the",
    "a",
    "to",
    "and",
    "of",
    "in",
    "is",
    "for",
    "on",
    "with",
    "my",
    "this",
    "you",
    "we",
    "our",
    "at",
    "all",
    "new",
    "tonight",
    "today",
    "tomorrow",
    "week",
    "show",
    "tour",
    "album",
    "song",
    "video",
    "live",
    "stage",
    "city",
    "thank",
    "everyone",
    "came",
    "out",
    "last",
    "night",
    "see",
    "soon",
    "watch",
    "listen",
    "ticket",
    "tickets",
    "link",
    "bio",
    "episode",
    "season",
    "premiere",
    "studio",
    "record",
    "single",
    "remix",
    "fans",
    "crowd",
    "team",
    "game",
    "match",
    "score",
    "play",
    "playing",
    "win",
    "coffee",
    "morning",
    "flight",
    "hotel",
    "travel",
    "interview",
    "radio",
    "magazine",
    "cover",
    "photo",
    "shoot",
    "backstage",
    "rehearsal",
    "festival",
    "arena",
    "london",
    "paris",
    "tokyo",
    "york",
    "la",
    "chicago",
    "vegas",
    "miami",
    "friday",
    "saturday",
    "sunday",
    "monday",
    "right",
    "now",
    "just",
    "so",
    "ready",
    "here",
    "there",
    "big",
    "little",
    "time",
    "day",
    "year",
    "back",
    "home",
    "going",
    "get",
    "make",
    "made",
    "know",
    "think",
    "really",
    "can't",
    "wait",
    "check",
    "it",
    "out",
    "vote",
    "stream",
    "merch",
    "book",
    "chapter",
    "launch",
    "dinner",
    "lunch",
    "gym",
    "run",
    "workout",
    "music",
    "movie",
    "film",
    "set",
    "scene",
    "director",
];

const SHARED_HANDLES: &[&str] = &["dailynews", "musicawards", "livenation", "spotify", "late_show", "espn", "vogue"];
const FEMALE_HANDLES: &[&str] = &["glam_squad", "beautyedit", "sisterhood", "girlsnight", "stylist_ana"];
const MALE_HANDLES: &[&str] = &["gymbros", "fantasy_ff", "grillmaster", "carshow", "boys_club"];

const SHARED_EMOJI: &[char] = &['\u{1F3B6}', '\u{1F4F8}', '\u{2708}', '\u{1F3A4}', '\u{1F4FA}'];
const FEMALE_EMOJI: &[char] = &['\u{1F609}', '\u{1F60D}', '\u{1F495}', '\u{1F338}', '\u{1F60A}'];
const MALE_EMOJI: &[char] = &['\u{1F620}', '\u{1F3C8}', '\u{1F4AA}', '\u{1F37A}', '\u{1F60E}'];

const SHARED_EMOTICONS: &[&str] = &[":)", ":D", ";)", ":P", "<3", ":("];

const FEMALE_TOKENS: &[&str] = &["gorgeous", "girls", "lipstick", "babes", "hubby"];
const MALE_TOKENS: &[&str] = &["bro", "dude", "beers", "wifey", "fellas"];

fn pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> &'a T {
    &items[rng.random_range(0..items.len())]
}

/// Splits `total` into shares proportional to `weights` (largest
/// remainder), with every share at least 1.
fn allocate(total: usize, weights: &[f64]) -> Vec<usize> {
    let n = weights.len();
    let spare = total - n;
    let sum: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * spare as f64).collect();
    let mut shares: Vec<usize> = exact.iter().map(|e| libm::floor(*e) as usize).collect();
    let mut left = spare - shares.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - libm::floor(exact[a]);
        let rb = exact[b] - libm::floor(exact[b]);
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        shares[i] += 1;
        left -= 1;
    }
    shares.iter().map(|s| s + 1).collect()
}

fn careers_for(gender: Gender, count: usize, rng: &mut ChaCha8Rng) -> Vec<Career> {
    let weights: Vec<(Career, usize)> = CELEBRITY_CAREER_COUNTS
        .iter()
        .map(|&(c, f, m)| (c, if gender == Gender::Female { f } else { m }))
        .filter(|&(_, w)| w > 0)
        .collect();
    let total: usize = weights.iter().map(|(_, w)| w).sum();
    (0..count)
        .map(|_| {
            let mut r = rng.random_range(0..total);
            for &(c, w) in &weights {
                if r < w {
                    return c;
                }
                r -= w;
            }
            Career::Other
        })
        .collect()
}

fn check_fraction(name: &'static str, value: f64) -> Result<(), SynthError> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(SynthError::BadFraction { name, value })
    }
}

pub fn generate_synthetic_corpus(spec: &SynthSpec) -> Result<Corpus, SynthError> {
    if spec.n_accounts < 2 {
        return Err(SynthError::TooFewAccounts(spec.n_accounts));
    }
    check_fraction("female_tweet_fraction", spec.female_tweet_fraction)?;
    check_fraction("female_account_fraction", spec.female_account_fraction)?;
    if !(0.0..=1.0).contains(&spec.signal_rate) || !(0.0..1.0).contains(&spec.retweet_rate) {
        return Err(SynthError::BadFraction { name: "signal_rate/retweet_rate", value: spec.signal_rate });
    }

    let mut rng = rng::seeded(spec.seed);
    let n_female_accounts =
        (libm::round(spec.n_accounts as f64 * spec.female_account_fraction) as usize).clamp(1, spec.n_accounts - 1);
    let n_male_accounts = spec.n_accounts - n_female_accounts;
    let n_female_tweets = libm::round(spec.n_tweets as f64 * spec.female_tweet_fraction) as usize;
    let n_male_tweets = spec.n_tweets - n_female_tweets;
    for (tweets, accounts) in [(n_female_tweets, n_female_accounts), (n_male_tweets, n_male_accounts)] {
        if tweets < accounts {
            return Err(SynthError::TooFewTweets { tweets, accounts });
        }
    }

    let mut accounts = Vec::with_capacity(spec.n_accounts);
    let mut authors: Vec<usize> = Vec::with_capacity(spec.n_tweets);
    for (gender, n_accounts, n_tweets, prefix) in
        [(Gender::Female, n_female_accounts, n_female_tweets, "f"), (Gender::Male, n_male_accounts, n_male_tweets, "m")]
    {
        let careers = careers_for(gender, n_accounts, &mut rng);
        let weights: Vec<f64> =
            (0..n_accounts).map(|_| libm::exp(rng.random_range(libm::log(20.0)..libm::log(4000.0)))).collect();
        for (k, (share, career)) in allocate(n_tweets, &weights).into_iter().zip(careers).enumerate() {
            let idx = accounts.len();
            accounts.push(Account { handle: format!("acct_{prefix}{k:02}"), gender, career });
            authors.extend(core::iter::repeat_n(idx, share));
        }
    }
    rng::fisher_yates(&mut authors, &mut rng);

    let records = authors
        .into_iter()
        .enumerate()
        .map(|(id, a)| {
            let account = &accounts[a];
            let text = tweet_text(account.gender, spec, &mut rng);
            RawRecord {
                id: id as u64,
                account: account.handle.clone(),
                gender: account.gender,
                text: RawText::Literal(escape_bytes_literal(text.as_bytes())),
            }
        })
        .collect();

    Ok(Corpus::new(accounts, records).expect("generated corpus is consistent"))
}

fn tweet_text(gender: Gender, spec: &SynthSpec, rng: &mut ChaCha8Rng) -> String {
    let n_words = rng.random_range(4..=14);
    let mut parts: Vec<String> = (0..n_words).map(|_| String::from(*pick(rng, WORDS))).collect();
    fn insert(parts: &mut Vec<String>, piece: String, rng: &mut ChaCha8Rng) {
        let at = rng.random_range(0..=parts.len());
        parts.insert(at, piece);
    }

    if rng.random::<f64>() < 0.25 {
        let piece = format!("@{}", pick(rng, SHARED_HANDLES));
        insert(&mut parts, piece, rng);
    }
    if rng.random::<f64>() < 0.2 {
        let piece = String::from(*pick(rng, SHARED_EMOJI));
        insert(&mut parts, piece, rng);
    }
    if rng.random::<f64>() < 0.15 {
        let piece = String::from(*pick(rng, SHARED_EMOTICONS));
        insert(&mut parts, piece, rng);
    }

    let female = gender == Gender::Female;
    if spec.profile != SignalProfile::None && rng.random::<f64>() < spec.signal_rate {
        let piece = match spec.profile {
            SignalProfile::Emoji => String::from(*pick(rng, if female { FEMALE_EMOJI } else { MALE_EMOJI })),
            SignalProfile::Mention => format!("@{}", pick(rng, if female { FEMALE_HANDLES } else { MALE_HANDLES })),
            SignalProfile::Token => String::from(*pick(rng, if female { FEMALE_TOKENS } else { MALE_TOKENS })),
            SignalProfile::None => unreachable!(),
        };
        insert(&mut parts, piece, rng);
    }

    let mut text = parts.join(" ");
    if rng.random::<f64>() < spec.retweet_rate {
        text = format!("RT @{}: {text}", pick(rng, SHARED_HANDLES));
    }
    text
}
