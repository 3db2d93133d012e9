//! Hashed n-gram features and a single sigmoid unit trained with SGD.
//!
//! Features are word n-grams over whitespace tokens and character n-grams
//! inside each token. Every gram is hashed with 64-bit FNV-1a over a tagged
//! byte string (`w\x1f<gram>` for word grams, `c\x1f<gram>` for character
//! grams). The bucket is `hash % dims` and the top hash bit picks the sign,
//! so the value stored in a bucket is a signed count.
//!
//! Training minimizes per-example binary cross-entropy plus `(l2/2)·‖w‖²`
//! with plain SGD. Weight decay is applied lazily through a running scale
//! factor so an update only touches the example's occupied buckets.
//! Inverted feature dropout (survivors scaled by `1/(1-p)`) is applied to
//! inputs during training only.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;
use core::hash::Hasher;
use core::ops::RangeInclusive;

use fnv::FnvHasher;
use rand::Rng;

use crate::rng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassifierError {
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(&'static str),
    #[error("training set needs both classes")]
    SingleClassCorpus,
    #[error("label {0} is not 0 or 1")]
    BadLabel(u8),
    #[error("batch is empty")]
    EmptyBatch,
    #[error("feature vector has {found} dims, model has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("training diverged to a non-finite weight")]
    Diverged,
    #[error("model file line {line}: {msg}")]
    ModelFormat { line: usize, msg: String },
}

/// Inclusive n-gram length range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NgramRange {
    pub min: usize,
    pub max: usize,
}

impl NgramRange {
    pub const fn new(min: usize, max: usize) -> Self {
        NgramRange { min, max }
    }

    pub fn lengths(self) -> RangeInclusive<usize> {
        self.min..=self.max
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    /// Number of hash buckets, a power of two.
    pub dims: usize,
    pub word_ngrams: Option<NgramRange>,
    pub char_ngrams: Option<NgramRange>,
    pub lr: f64,
    pub epochs: usize,
    pub l2: f64,
    pub dropout: f64,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            dims: 1 << 18,
            word_ngrams: Some(NgramRange::new(1, 2)),
            char_ngrams: Some(NgramRange::new(3, 5)),
            lr: 0.1,
            epochs: 10,
            l2: 1e-6,
            dropout: 0.1,
            seed: 0,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        use ClassifierError::InvalidHyperparams as Bad;
        if self.dims < 2 || !self.dims.is_power_of_two() || self.dims > u32::MAX as usize {
            return Err(Bad("dims must be a power of two >= 2"));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Bad("lr must be positive"));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) || self.lr * self.l2 >= 1.0 {
            return Err(Bad("l2 must be non-negative with lr * l2 < 1"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Bad("dropout must lie in [0, 1)"));
        }
        for r in [self.word_ngrams, self.char_ngrams].into_iter().flatten() {
            if r.min == 0 || r.min > r.max {
                return Err(Bad("n-gram ranges need 1 <= min <= max"));
            }
        }
        Ok(())
    }
}

/// Sparse feature vector with indices sorted ascending and no zero values.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    entries: Vec<(u32, f64)>,
    dims: usize,
}

impl SparseVector {
    pub fn zeros(dims: usize) -> Self {
        SparseVector { entries: Vec::new(), dims }
    }

    /// Builds from arbitrary `(index, value)` pairs, summing duplicates and
    /// dropping zeros. Panics if an index is out of range.
    pub fn from_pairs(dims: usize, pairs: impl IntoIterator<Item = (u32, f64)>) -> Self {
        let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
        for (i, v) in pairs {
            assert!((i as usize) < dims, "index {i} out of range for {dims} dims");
            *acc.entry(i).or_insert(0.0) += v;
        }
        SparseVector { entries: acc.into_iter().filter(|&(_, v)| v != 0.0).collect(), dims }
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: u32) -> f64 {
        self.entries.binary_search_by_key(&index, |&(i, _)| i).map(|pos| self.entries[pos].1).unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| dense[i as usize] * v).sum()
    }
}

fn gram_hash(tag: u8, gram: &str) -> u64 {
    let mut h = FnvHasher::default();
    h.write(&[tag, 0x1f]);
    h.write(gram.as_bytes());
    h.finish()
}

/// Bucket and sign for a hashed gram.
fn bucket(hash: u64, dims: usize) -> (u32, f64) {
    let index = (hash % dims as u64) as u32;
    let sign = if hash >> 63 == 1 { -1.0 } else { 1.0 };
    (index, sign)
}

/// Hashed word and character n-gram counts of `text`.
pub fn featurize(text: &str, hp: &Hyperparams) -> SparseVector {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let mut counts: BTreeMap<u32, f64> = BTreeMap::new();
    let mut add = |tag: u8, gram: &str| {
        let (i, s) = bucket(gram_hash(tag, gram), hp.dims);
        *counts.entry(i).or_insert(0.0) += s;
    };

    if let Some(range) = hp.word_ngrams {
        let mut gram = String::new();
        for n in range.lengths() {
            for window in tokens.windows(n) {
                gram.clear();
                for (k, t) in window.iter().enumerate() {
                    if k > 0 {
                        gram.push(' ');
                    }
                    gram.push_str(t);
                }
                add(b'w', &gram);
            }
        }
    }

    if let Some(range) = hp.char_ngrams {
        for token in &tokens {
            // byte offsets of every char boundary, including the end
            let bounds: Vec<usize> = token.char_indices().map(|(i, _)| i).chain([token.len()]).collect();
            let n_chars = bounds.len() - 1;
            for n in range.lengths() {
                for start in 0..n_chars.saturating_sub(n - 1) {
                    add(b'c', &token[bounds[start]..bounds[start + n]]);
                }
            }
        }
    }

    SparseVector { entries: counts.into_iter().filter(|&(_, v)| v != 0.0).collect(), dims: hp.dims }
}

/// `1 / (1 + e^-z)` evaluated without overflow.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` evaluated without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + libm::log1p(libm::exp(-z.abs()))
}

/// Cross-entropy of a sigmoid output at margin `z` against `label`.
fn bce(z: f64, label: f64) -> f64 {
    softplus(z) - label * z
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub hyperparams: Hyperparams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl Model {
    pub fn zeros(hp: Hyperparams) -> Self {
        Model { weights: vec![0.0; hp.dims], bias: 0.0, hyperparams: hp }
    }

    pub fn dims(&self) -> usize {
        self.weights.len()
    }

    pub fn margin(&self, x: &SparseVector) -> f64 {
        x.dot(&self.weights) + self.bias
    }

    /// Probability of the positive class (female), strictly inside (0, 1).
    pub fn predict(&self, text: &str) -> f64 {
        self.predict_vector(&featurize(text, &self.hyperparams))
    }

    pub fn predict_vector(&self, x: &SparseVector) -> f64 {
        sigmoid(self.margin(x)).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
    }

    fn l2_penalty(&self) -> f64 {
        0.5 * self.hyperparams.l2 * self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    /// Mean cross-entropy over `batch` plus the L2 penalty.
    pub fn loss(&self, batch: &[(SparseVector, u8)]) -> Result<f64, ClassifierError> {
        if batch.is_empty() {
            return Err(ClassifierError::EmptyBatch);
        }
        let mut total = 0.0;
        for (x, y) in batch {
            self.check(x, *y)?;
            total += bce(self.margin(x), f64::from(*y));
        }
        Ok(total / batch.len() as f64 + self.l2_penalty())
    }

    fn check(&self, x: &SparseVector, y: u8) -> Result<(), ClassifierError> {
        if x.dims() != self.dims() {
            return Err(ClassifierError::DimensionMismatch { expected: self.dims(), found: x.dims() });
        }
        if y > 1 {
            return Err(ClassifierError::BadLabel(y));
        }
        Ok(())
    }

    /// Writes the model as text: a header, hyperparameters, the bias and one
    /// `index value` line per nonzero weight. Floats use the shortest
    /// representation that parses back to the same bits.
    pub fn to_text(&self) -> String {
        let hp = &self.hyperparams;
        let range = |r: Option<NgramRange>| match r {
            Some(r) => format!("{} {}", r.min, r.max),
            None => String::from("off"),
        };
        let mut out = String::new();
        let _ = writeln!(out, "{MODEL_MAGIC}");
        let _ = writeln!(out, "dims {}", hp.dims);
        let _ = writeln!(out, "word_ngrams {}", range(hp.word_ngrams));
        let _ = writeln!(out, "char_ngrams {}", range(hp.char_ngrams));
        let _ = writeln!(out, "lr {:?}", hp.lr);
        let _ = writeln!(out, "epochs {}", hp.epochs);
        let _ = writeln!(out, "l2 {:?}", hp.l2);
        let _ = writeln!(out, "dropout {:?}", hp.dropout);
        let _ = writeln!(out, "seed {}", hp.seed);
        let _ = writeln!(out, "bias {:?}", self.bias);
        let nonzero = self.weights.iter().filter(|w| **w != 0.0).count();
        let _ = writeln!(out, "weights {nonzero}");
        for (i, w) in self.weights.iter().enumerate().filter(|(_, w)| **w != 0.0) {
            let _ = writeln!(out, "{i} {w:?}");
        }
        out
    }

    pub fn from_text(src: &str) -> Result<Self, ClassifierError> {
        let mut lines = src.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
        let err = |line: usize, msg: &str| ClassifierError::ModelFormat { line, msg: msg.into() };

        let (n, magic) = lines.next().ok_or_else(|| err(1, "empty model file"))?;
        if magic != MODEL_MAGIC {
            return Err(err(n, "unrecognized header"));
        }
        let mut field = |key: &str| -> Result<(usize, String), ClassifierError> {
            let (n, line) = lines.next().ok_or_else(|| err(0, "truncated model file"))?;
            let value = line
                .strip_prefix(key)
                .and_then(|v| v.strip_prefix(' '))
                .ok_or_else(|| err(n, &format!("expected `{key}`")))?;
            Ok((n, value.into()))
        };
        fn num<T: core::str::FromStr>(n: usize, s: &str) -> Result<T, ClassifierError> {
            s.trim().parse().map_err(|_| ClassifierError::ModelFormat { line: n, msg: format!("bad number {s:?}") })
        }
        fn range(n: usize, s: &str) -> Result<Option<NgramRange>, ClassifierError> {
            if s == "off" {
                return Ok(None);
            }
            let (a, b) = s
                .split_once(' ')
                .ok_or_else(|| ClassifierError::ModelFormat { line: n, msg: "expected `min max` or `off`".into() })?;
            Ok(Some(NgramRange::new(num(n, a)?, num(n, b)?)))
        }

        let (n, v) = field("dims")?;
        let dims = num(n, &v)?;
        let (n, v) = field("word_ngrams")?;
        let word_ngrams = range(n, &v)?;
        let (n, v) = field("char_ngrams")?;
        let char_ngrams = range(n, &v)?;
        let (n, v) = field("lr")?;
        let lr = num(n, &v)?;
        let (n, v) = field("epochs")?;
        let epochs = num(n, &v)?;
        let (n, v) = field("l2")?;
        let l2 = num(n, &v)?;
        let (n, v) = field("dropout")?;
        let dropout = num(n, &v)?;
        let (n, v) = field("seed")?;
        let seed = num(n, &v)?;
        let hp = Hyperparams { dims, word_ngrams, char_ngrams, lr, epochs, l2, dropout, seed };
        hp.validate()?;
        let (n, v) = field("bias")?;
        let bias: f64 = num(n, &v)?;
        let (n, v) = field("weights")?;
        let count: usize = num(n, &v)?;

        let mut model = Model::zeros(hp);
        model.bias = bias;
        for _ in 0..count {
            let (n, line) = lines.next().ok_or_else(|| err(0, "missing weight lines"))?;
            let (i, w) = line.split_once(' ').ok_or_else(|| err(n, "expected `index value`"))?;
            let i: usize = num(n, i)?;
            let w: f64 = num(n, w)?;
            if i >= dims || !w.is_finite() {
                return Err(err(n, "weight index out of range or non-finite value"));
            }
            model.weights[i] = w;
        }
        if let Some((n, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(err(n, "trailing data after weights"));
        }
        Ok(model)
    }
}

const MODEL_MAGIC: &str = "polarity-model v1";

/// Mean cross-entropy plus `(l2/2)·‖w‖²` and its exact gradient.
pub fn loss_and_gradient(model: &Model, batch: &[(SparseVector, u8)]) -> Result<(f64, Gradient), ClassifierError> {
    if batch.is_empty() {
        return Err(ClassifierError::EmptyBatch);
    }
    let n = batch.len() as f64;
    let l2 = model.hyperparams.l2;
    let mut grad = Gradient { weights: model.weights.iter().map(|w| l2 * w).collect(), bias: 0.0 };
    let mut total = 0.0;
    for (x, y) in batch {
        model.check(x, *y)?;
        let y = f64::from(*y);
        let z = model.margin(x);
        total += bce(z, y);
        let residual = (sigmoid(z) - y) / n;
        for (i, v) in x.iter() {
            grad.weights[i as usize] += residual * v;
        }
        grad.bias += residual;
    }
    Ok((total / n + model.l2_penalty(), grad))
}

/// Model plus the full-data objective after each epoch (dropout off).
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub model: Model,
    pub epoch_losses: Vec<f64>,
}

pub fn train<S: AsRef<str>>(examples: &[(S, u8)], hp: &Hyperparams) -> Result<Model, ClassifierError> {
    let data: Vec<(SparseVector, u8)> = examples.iter().map(|(t, y)| (featurize(t.as_ref(), hp), *y)).collect();
    train_vectors(&data, hp)
}

pub fn train_vectors(data: &[(SparseVector, u8)], hp: &Hyperparams) -> Result<Model, ClassifierError> {
    sgd(data, hp, false).map(|r| r.model)
}

/// Like [`train_vectors`] but records the objective after every epoch.
pub fn train_traced(data: &[(SparseVector, u8)], hp: &Hyperparams) -> Result<TrainReport, ClassifierError> {
    sgd(data, hp, true)
}

fn sgd(data: &[(SparseVector, u8)], hp: &Hyperparams, trace: bool) -> Result<TrainReport, ClassifierError> {
    hp.validate()?;
    let mut seen = [false; 2];
    for (x, y) in data {
        if *y > 1 {
            return Err(ClassifierError::BadLabel(*y));
        }
        if x.dims() != hp.dims {
            return Err(ClassifierError::DimensionMismatch { expected: hp.dims, found: x.dims() });
        }
        seen[usize::from(*y)] = true;
    }
    if !(seen[0] && seen[1]) {
        return Err(ClassifierError::SingleClassCorpus);
    }

    let mut gen = rng::seeded(hp.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    // true weights are `scale * v`
    let mut v = vec![0.0f64; hp.dims];
    let mut scale = 1.0f64;
    let mut bias = 0.0f64;
    let decay = 1.0 - hp.lr * hp.l2;
    let keep = 1.0 - hp.dropout;
    let mut dropped: Vec<(u32, f64)> = Vec::new();
    let mut epoch_losses = Vec::new();

    for _ in 0..hp.epochs {
        rng::fisher_yates(&mut order, &mut gen);
        for &k in &order {
            let (x, y) = &data[k];
            dropped.clear();
            if hp.dropout > 0.0 {
                for (i, val) in x.iter() {
                    if gen.random::<f64>() >= hp.dropout {
                        dropped.push((i, val / keep));
                    }
                }
            } else {
                dropped.extend(x.iter());
            }
            let z = scale * dropped.iter().map(|&(i, val)| v[i as usize] * val).sum::<f64>() + bias;
            let g = sigmoid(z) - f64::from(*y);
            scale *= decay;
            let step = hp.lr * g / scale;
            for &(i, val) in &dropped {
                v[i as usize] -= step * val;
            }
            bias -= hp.lr * g;
            if scale < 1e-9 {
                v.iter_mut().for_each(|w| *w *= scale);
                scale = 1.0;
            }
        }
        if trace {
            let model = Model { weights: v.iter().map(|w| w * scale).collect(), bias, hyperparams: *hp };
            epoch_losses.push(model.loss(data)?);
        }
    }

    let weights: Vec<f64> = v.iter().map(|w| w * scale).collect();
    if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
        return Err(ClassifierError::Diverged);
    }
    Ok(TrainReport { model: Model { weights, bias, hyperparams: *hp }, epoch_losses })
}
