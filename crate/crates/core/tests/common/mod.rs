//! Independent recomputations used as test oracles.
//!
//! Nothing here calls the scoring or combining code under test. Token
//! membership is decided by a plain intersection test on every
//! (token, span) pair.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use nightjar::corpus::{Annotation, AnnotationSpan};
use nightjar::model::{AnnotatedTweet, Detection, EntityLabel, LabeledSpan, Span, Tweet};
use nightjar::tokenizer::{tokenize, Token};
use rand::seq::IndexedRandom;
use rand::Rng;

pub type TokenSets = BTreeMap<EntityLabel, BTreeSet<usize>>;

pub fn token_sets(tokens: &[Token], spans: impl IntoIterator<Item = LabeledSpan>) -> TokenSets {
    let mut sets = TokenSets::new();
    for s in spans {
        for (i, t) in tokens.iter().enumerate() {
            if t.span.start < s.span.end && s.span.start < t.span.end {
                sets.entry(s.label).or_default().insert(i);
            }
        }
    }
    sets
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prf {
    pub p: f64,
    pub r: f64,
    pub f1: f64,
    pub aon: f64,
}

fn prf(tp: usize, fp: usize, fn_: usize, with_gold: usize, all_found: usize) -> Prf {
    let p = match (tp + fp, fn_) {
        (0, 0) => 1.0,
        (0, _) => 0.0,
        (d, _) => tp as f64 / d as f64,
    };
    let r = if tp + fn_ == 0 { 1.0 } else { tp as f64 / (tp + fn_) as f64 };
    let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    let aon = if with_gold == 0 { 1.0 } else { all_found as f64 / with_gold as f64 };
    Prf { p, r, f1, aon }
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub rows: BTreeMap<EntityLabel, (usize, Prf)>,
    pub micro: Prf,
    pub macro_: Prf,
    pub fp_total: usize,
    pub fn_total: usize,
}

/// Brute-force scoring. `None` when no label has a gold token.
pub fn oracle_report(gold: &[AnnotatedTweet], preds: &[Annotation]) -> Option<OracleReport> {
    #[derive(Default)]
    struct Acc {
        instances: usize,
        tp: usize,
        fp: usize,
        fn_: usize,
        with_gold: usize,
        all_found: usize,
    }
    let mut acc: BTreeMap<EntityLabel, Acc> = BTreeMap::new();
    for g in gold {
        let tokens = tokenize(&g.tweet.text);
        let gs = token_sets(&tokens, g.gold.iter().copied());
        let ps = preds
            .iter()
            .find(|p| p.tweet_id == g.tweet.id)
            .map(|p| token_sets(&tokens, p.labeled_spans()))
            .unwrap_or_default();
        for s in &g.gold {
            acc.entry(s.label).or_default().instances += 1;
        }
        for label in EntityLabel::ALL {
            let empty = BTreeSet::new();
            let gset = gs.get(&label).unwrap_or(&empty);
            let pset = ps.get(&label).unwrap_or(&empty);
            if gset.is_empty() && pset.is_empty() {
                continue;
            }
            let a = acc.entry(label).or_default();
            a.tp += gset.intersection(pset).count();
            a.fp += pset.difference(gset).count();
            a.fn_ += gset.difference(pset).count();
            if !gset.is_empty() {
                a.with_gold += 1;
                if gset.is_subset(pset) {
                    a.all_found += 1;
                }
            }
        }
    }
    let fp_total = acc.values().map(|a| a.fp).sum();
    let fn_total = acc.values().map(|a| a.fn_).sum();
    let scored: BTreeMap<EntityLabel, &Acc> = acc.iter().filter(|(_, a)| a.tp + a.fn_ > 0).map(|(l, a)| (*l, a)).collect();
    if scored.is_empty() {
        return None;
    }
    let rows: BTreeMap<EntityLabel, (usize, Prf)> = scored
        .iter()
        .map(|(l, a)| (*l, (a.instances, prf(a.tp, a.fp, a.fn_, a.with_gold, a.all_found))))
        .collect();
    let sum = |f: fn(&Acc) -> usize| scored.values().map(|a| f(a)).sum::<usize>();
    let micro = prf(
        sum(|a| a.tp),
        sum(|a| a.fp),
        sum(|a| a.fn_),
        sum(|a| a.with_gold),
        sum(|a| a.all_found),
    );
    let n = rows.len() as f64;
    let mean = |f: fn(&Prf) -> f64| rows.values().map(|(_, s)| f(s)).sum::<f64>() / n;
    let macro_ = Prf {
        p: mean(|s| s.p),
        r: mean(|s| s.r),
        f1: mean(|s| s.f1),
        aon: mean(|s| s.aon),
    };
    Some(OracleReport {
        rows,
        micro,
        macro_,
        fp_total,
        fn_total,
    })
}

/// Compares a report against the oracle; returns the first difference.
pub fn compare(report: &nightjar::eval::MetricsReport, oracle: &OracleReport, tol: f64) -> Result<(), String> {
    let close = |what: &str, a: f64, b: f64| {
        if (a - b).abs() <= tol {
            Ok(())
        } else {
            Err(format!("{what}: got {a}, oracle {b}"))
        }
    };
    let check = |name: &str, s: &nightjar::eval::Scores, o: &Prf| -> Result<(), String> {
        close(&format!("{name} P"), s.precision, o.p)?;
        close(&format!("{name} R"), s.recall, o.r)?;
        close(&format!("{name} F1"), s.f1, o.f1)?;
        close(&format!("{name} AON"), s.aon_recall, o.aon)
    };
    if report.rows.len() != oracle.rows.len() {
        return Err(format!("{} rows, oracle has {}", report.rows.len(), oracle.rows.len()));
    }
    for row in &report.rows {
        let (instances, o) = oracle
            .rows
            .get(&row.counts.label)
            .ok_or_else(|| format!("unexpected row {}", row.counts.label))?;
        if row.counts.gold as usize != *instances {
            return Err(format!("{} instance count", row.counts.label));
        }
        check(row.counts.label.as_str(), &row.scores, o)?;
    }
    check("micro", &report.micro.scores, &oracle.micro)?;
    check("macro", &report.macro_.scores, &oracle.macro_)?;
    if report.total_false_positives as usize != oracle.fp_total || report.total_false_negatives as usize != oracle.fn_total {
        return Err("error totals".into());
    }
    Ok(())
}

const WORDS: &[&str] = &["ab", "Katie", "x", "hello", "42", "@joe", "#tag", ",", "naïve", "👋", "https://t.co/q"];

/// A random span covering tokens `[i, j]`, sometimes cut inside the end tokens.
fn random_span(rng: &mut impl Rng, tokens: &[Token]) -> Span {
    let i = rng.random_range(0..tokens.len());
    let j = rng.random_range(i..tokens.len().min(i + 3));
    let (mut s, mut e) = (tokens[i].span.start, tokens[j].span.end);
    if rng.random_bool(0.2) && tokens[i].span.len() > 1 {
        s += 1;
    }
    if rng.random_bool(0.2) && e - s > 1 {
        e -= 1;
    }
    Span::new(s, e)
}

/// Up to 20 tweets with random gold and predicted spans over a few labels.
pub fn random_micro_corpus(rng: &mut impl Rng) -> (Vec<AnnotatedTweet>, Vec<Annotation>) {
    let n = rng.random_range(1..=20);
    let labels: Vec<EntityLabel> = {
        let k = rng.random_range(1..=4);
        EntityLabel::ALL.choose_multiple(rng, k).copied().collect()
    };
    let mut gold = Vec::new();
    let mut preds = Vec::new();
    for t in 0..n {
        let len = rng.random_range(1..=12);
        let text = (0..len).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ");
        let tokens = tokenize(&text);
        let tweet = Tweet::new(format!("m{t:02}"), text);
        let mut g: Vec<LabeledSpan> = Vec::new();
        for _ in 0..rng.random_range(0..=3) {
            let span = random_span(rng, &tokens);
            let label = *labels.choose(rng).unwrap();
            if !g.iter().any(|x| x.label == label && x.span.overlaps(span)) {
                g.push(LabeledSpan { span, label });
            }
        }
        let p: Vec<AnnotationSpan> = (0..rng.random_range(0..=4))
            .map(|_| AnnotationSpan {
                span: random_span(rng, &tokens),
                label: *labels.choose(rng).unwrap(),
                source: None,
            })
            .collect();
        if rng.random_bool(0.9) {
            preds.push(Annotation {
                tweet_id: tweet.id.clone(),
                text: None,
                spans: p,
            });
        }
        gold.push(AnnotatedTweet::new(tweet, g).unwrap());
    }
    (gold, preds)
}

/// Per-label token sets marked by any recognizer: the union, by definition.
pub fn brute_union(tokens: &[Token], results: &[(String, Vec<Detection>)]) -> TokenSets {
    let mut sets = TokenSets::new();
    for (_, dets) in results {
        for (label, toks) in token_sets(tokens, dets.iter().map(Detection::labeled_span)) {
            sets.entry(label).or_default().extend(toks);
        }
    }
    sets
}

/// Token-level recall of `predicted` against gold, pooled over all labels.
pub fn pooled_recall(gold: &[AnnotatedTweet], predicted: &[Vec<Detection>]) -> f64 {
    let (mut tp, mut total) = (0usize, 0usize);
    for (g, p) in gold.iter().zip(predicted) {
        let tokens = tokenize(&g.tweet.text);
        let gs = token_sets(&tokens, g.gold.iter().copied());
        let ps = token_sets(&tokens, p.iter().map(Detection::labeled_span));
        for (label, set) in gs {
            total += set.len();
            if let Some(found) = ps.get(&label) {
                tp += set.intersection(found).count();
            }
        }
    }
    if total == 0 {
        1.0
    } else {
        tp as f64 / total as f64
    }
}

/// Token-level recall for one label.
pub fn label_recall(gold: &[AnnotatedTweet], predicted: &[Vec<Detection>], label: EntityLabel) -> f64 {
    let only = |g: &AnnotatedTweet| AnnotatedTweet {
        tweet: g.tweet.clone(),
        gold: g.gold.iter().copied().filter(|s| s.label == label).collect(),
    };
    let gold: Vec<AnnotatedTweet> = gold.iter().map(only).collect();
    pooled_recall(&gold, predicted)
}
