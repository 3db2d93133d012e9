mod support;

use polarity_core::classifier::{featurize, loss_and_gradient, train, train_traced, Hyperparams, Model, SparseVector};
use polarity_core::dataset::{check_balance, shuffle_split, summarize, val_count, Gender};
use polarity_core::emotion::{emotion_gender_report, tag, EmotionLexicon};
use polarity_core::metrics::{confusion, scores};
use polarity_core::rng;
use proptest::prelude::*;
use rand::Rng;
use std::collections::BTreeSet;
use support::oracles::{brute_force_scores, central_differences};

const DIMS: usize = 16;

fn batch() -> impl Strategy<Value = Vec<(SparseVector, u8)>> {
    let row = (prop::collection::vec((0u32..DIMS as u32, -2.0f64..2.0), 1..6), 0u8..=1)
        .prop_map(|(pairs, y)| (SparseVector::from_pairs(DIMS, pairs), y));
    prop::collection::vec(row, 1..8)
}

fn model_with(params: &[f64], l2: f64) -> Model {
    let hp = Hyperparams { dims: DIMS, l2, ..Hyperparams::default() };
    Model { weights: params[..DIMS].to_vec(), bias: params[DIMS], hyperparams: hp }
}

/// ‖a − b‖ / (‖a‖ + ‖b‖), zero when both vanish.
fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &mut dyn Iterator<Item = f64>| v.map(|x| x * x).sum::<f64>().sqrt();
    let diff = norm(&mut a.iter().zip(b).map(|(x, y)| x - y));
    let scale = norm(&mut a.iter().copied()) + norm(&mut b.iter().copied());
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gradient_matches_central_differences(
        params in prop::collection::vec(-1.5f64..1.5, DIMS + 1),
        l2 in prop_oneof![Just(0.0), 1e-4f64..1e-1],
        data in batch(),
    ) {
        let (_, grad) = loss_and_gradient(&model_with(&params, l2), &data).unwrap();
        let analytic: Vec<f64> = grad.weights.iter().copied().chain([grad.bias]).collect();
        let numeric = central_differences(&params, 1e-5, |p| model_with(p, l2).loss(&data).unwrap());
        let err = relative_error(&analytic, &numeric);
        prop_assert!(err <= 1e-4, "relative error {err}");
    }

    #[test]
    fn split_is_a_partition(n in 1usize..400, seed in any::<u64>(), vf in 0.05f64..0.95) {
        let ids: Vec<u64> = (0..n as u64).map(|i| i * 7 + 3).collect();
        let split = shuffle_split(&ids, seed, vf).unwrap();
        prop_assert_eq!(split.val.len(), (n as f64 * vf).floor() as usize);
        let mut all: Vec<u64> = split.train.iter().chain(&split.val).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, ids);
        prop_assert!(split.train_set().is_disjoint(&split.val_set()));
    }

    #[test]
    fn summary_ignores_order(
        items in prop::collection::vec(("[a-z ]{0,30}", any::<bool>()), 1..50),
        seed in any::<u64>(),
    ) {
        let g = |f: bool| if f { Gender::Female } else { Gender::Male };
        let forward = summarize(items.iter().map(|(t, f)| (t.as_str(), g(*f))));
        let mut shuffled = items.clone();
        rng::fisher_yates(&mut shuffled, &mut rng::seeded(seed));
        let back = summarize(shuffled.iter().map(|(t, f)| (t.as_str(), g(*f))));
        prop_assert_eq!(forward, back);
    }

    #[test]
    fn metrics_match_brute_force(
        pairs in prop::collection::vec((0.0f64..=1.0, 0u8..=1), 1..200),
        threshold in 0.0f64..=1.0,
    ) {
        let (preds, labels): (Vec<f64>, Vec<u8>) = pairs.into_iter().unzip();
        let cm = confusion(&preds, &labels, threshold).unwrap();
        let row = scores("x", &cm).unwrap();
        prop_assert_eq!((row.accuracy, row.precision, row.recall), brute_force_scores(&preds, &labels, threshold));
    }

    #[test]
    fn raising_the_threshold_never_adds_positives(
        pairs in prop::collection::vec((0.0f64..=1.0, 0u8..=1), 1..200),
        a in 0.0f64..=1.0,
        b in 0.0f64..=1.0,
    ) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (preds, labels): (Vec<f64>, Vec<u8>) = pairs.into_iter().unzip();
        let low = confusion(&preds, &labels, lo).unwrap();
        let high = confusion(&preds, &labels, hi).unwrap();
        prop_assert!(high.tp + high.fp <= low.tp + low.fp);
        prop_assert!(scores("", &high).unwrap().recall <= scores("", &low).unwrap().recall);
    }

    #[test]
    fn swapping_labels_flips_the_matrix(pairs in prop::collection::vec((0.0f64..=1.0, 0u8..=1), 1..200)) {
        // strict inequality on the flipped side so no prediction sits on the boundary
        let pairs: Vec<_> = pairs.into_iter().filter(|(p, _)| *p != 0.5).collect();
        prop_assume!(!pairs.is_empty());
        let (preds, labels): (Vec<f64>, Vec<u8>) = pairs.into_iter().unzip();
        let cm = confusion(&preds, &labels, 0.5).unwrap();
        let swapped_preds: Vec<f64> = preds.iter().map(|p| 1.0 - p).collect();
        let swapped_labels: Vec<u8> = labels.iter().map(|y| 1 - y).collect();
        let sw = confusion(&swapped_preds, &swapped_labels, 0.5).unwrap();
        prop_assert_eq!(sw, cm.flipped());
        let male = scores("", &cm.flipped()).unwrap();
        let (acc, prec, rec) = brute_force_scores(&swapped_preds, &swapped_labels, 0.5);
        prop_assert_eq!((male.accuracy, male.precision, male.recall), (acc, prec, rec));
    }

    #[test]
    fn metrics_ignore_order(pairs in prop::collection::vec((0.0f64..=1.0, 0u8..=1), 1..200), seed in any::<u64>()) {
        let (preds, labels): (Vec<f64>, Vec<u8>) = pairs.iter().copied().unzip();
        let mut shuffled = pairs;
        rng::fisher_yates(&mut shuffled, &mut rng::seeded(seed));
        let (p2, l2): (Vec<f64>, Vec<u8>) = shuffled.into_iter().unzip();
        prop_assert_eq!(confusion(&preds, &labels, 0.5).unwrap(), confusion(&p2, &l2, 0.5).unwrap());
    }

    #[test]
    fn emotion_report_ignores_order_and_totals_input(
        texts in prop::collection::vec(("(happy|angry|afraid|sad|wow|surprised|the|cat| ){0,8}", any::<bool>()), 1..40),
        seed in any::<u64>(),
    ) {
        let lex = EmotionLexicon::builtin();
        let g = |f: bool| if f { Gender::Female } else { Gender::Male };
        let report = |items: &[(String, bool)]| {
            emotion_gender_report(items.iter().map(|(t, f)| (tag(t, &lex), g(*f)))).unwrap()
        };
        let base = report(&texts);
        prop_assert_eq!(base.total(), texts.len() as u64);
        let mut shuffled = texts.clone();
        rng::fisher_yates(&mut shuffled, &mut rng::seeded(seed));
        prop_assert_eq!(report(&shuffled), base);
    }

    #[test]
    fn zero_hit_suffix_keeps_the_tag(text in "(happy|angry|sad|fear|the|cat| ){0,10}") {
        let lex = EmotionLexicon::builtin();
        prop_assert_eq!(tag(&format!("{text} qzxv 123"), &lex), tag(&text, &lex));
    }
}

fn planted_corpus(seed: u64, n: usize) -> Vec<(String, u8)> {
    let filler = ["lunch", "today", "game", "road", "movie", "rain", "coffee", "later", "news", "friday"];
    let mut gen = rng::seeded(seed);
    (0..n)
        .map(|i| {
            let y = (i % 2) as u8;
            let mut words: Vec<&str> = (0..6).map(|_| filler[gen.random_range(0..filler.len())]).collect();
            if y == 1 {
                words.insert(gen.random_range(0..=words.len()), "WINKING FACE");
            }
            (words.join(" "), y)
        })
        .collect()
}

fn accuracy(model: &Model, data: &[(String, u8)]) -> f64 {
    let correct = data.iter().filter(|(t, y)| u8::from(model.predict(t) >= 0.5) == *y).count();
    correct as f64 / data.len() as f64
}

#[test]
fn planted_token_is_learned() {
    let hp = Hyperparams { dims: 1 << 14, epochs: 5, ..Hyperparams::default() };
    let train_set = planted_corpus(1, 1000);
    let held_out = planted_corpus(2, 500);
    let model = train(&train_set, &hp).unwrap();
    assert!(accuracy(&model, &held_out) >= 0.99);

    let mut permuted = train_set.clone();
    rng::fisher_yates(&mut permuted, &mut rng::seeded(9));
    assert!(accuracy(&train(&permuted, &hp).unwrap(), &held_out) >= 0.99);
}

#[test]
fn loss_does_not_rise_without_dropout() {
    let hp = Hyperparams { dims: 1 << 12, epochs: 8, dropout: 0.0, lr: 0.05, ..Hyperparams::default() };
    let data: Vec<(SparseVector, u8)> = planted_corpus(3, 400).iter().map(|(t, y)| (featurize(t, &hp), *y)).collect();
    let trace = train_traced(&data, &hp).unwrap().epoch_losses;
    for w in trace.windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "{trace:?}");
    }
}

#[test]
fn training_is_bitwise_deterministic() {
    let hp = Hyperparams { dims: 1 << 12, epochs: 3, ..Hyperparams::default() };
    let data = planted_corpus(4, 300);
    let a = train(&data, &hp).unwrap();
    let b = train(&data, &hp).unwrap();
    let bits = |m: &Model| m.weights.iter().map(|w| w.to_bits()).chain([m.bias.to_bits()]).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    assert_eq!(Model::from_text(&a.to_text()).unwrap(), a);
}

fn balance_pass_count(n: usize, seeds: u64) -> usize {
    let mut gen = rng::seeded(11);
    let items: Vec<(String, Gender)> = (0..n)
        .map(|i| {
            let len = gen.random_range(20..140);
            ("x".repeat(len), if i % 2 == 0 { Gender::Female } else { Gender::Male })
        })
        .collect();
    let ids: Vec<u64> = (0..n as u64).collect();
    (0..seeds)
        .filter(|&seed| {
            let split = shuffle_split(&ids, seed, 0.25).unwrap();
            let side = |set: &BTreeSet<u64>| {
                summarize(set.iter().map(|&i| (items[i as usize].0.as_str(), items[i as usize].1)))
            };
            check_balance(&side(&split.train_set()), &side(&split.val_set()), 0.02, 0.05).is_empty()
        })
        .count()
}

// The train/val gap in female fraction has sd 0.5 * sqrt(16 / (3n)), so
// 1.96 sd fits inside 0.02 only from n = 12800 up.
#[test]
fn balanced_splits_pass_the_check_at_scale() {
    let passes = balance_pass_count(16_000, 200);
    assert!(passes >= 190, "{passes}/200");
}

// At n = 2000 the same sd is 0.026: about 56% of gender checks pass, and
// the length check trims that slightly. Retries absorb the rest.
#[test]
fn small_balanced_splits_pass_about_half_the_time() {
    let passes = balance_pass_count(2000, 200);
    assert!((80..=130).contains(&passes), "{passes}/200");
    assert_eq!(val_count(2000, 0.25), 500);
}
