//! Token-level scoring against gold annotations.
//!
//! Character spans are projected onto tokens by intersection; a partially
//! covered token counts as labeled. All-or-nothing recall credits a
//! (tweet, label) pair only when every gold token of that label in the
//! tweet was found.
//!
//! Zero-denominator conventions: with no predictions, precision is 1 when
//! nothing was missed and 0 otherwise; with no gold tokens, recall is 1.
//! Labels without gold tokens are left out of the averaged rows.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::Annotation;
use crate::error::{Error, Result};
use crate::model::{AnnotatedTweet, EntityLabel, LabeledSpan};
use crate::text::char_len;
use crate::tokenizer::{overlapping_range, tokenize, Token};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub label: EntityLabel,
    /// Gold spans (instances), the "No" column.
    pub gold: u64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tweets_with_gold: u64,
    pub tweets_all_found: u64,
}

impl LabelCounts {
    pub fn new(label: EntityLabel) -> Self {
        LabelCounts {
            label,
            gold: 0,
            tp: 0,
            fp: 0,
            fn_: 0,
            tweets_with_gold: 0,
            tweets_all_found: 0,
        }
    }

    pub fn has_gold(&self) -> bool {
        self.tp + self.fn_ > 0
    }

    pub fn aon_recall(&self) -> f64 {
        if self.tweets_with_gold == 0 {
            1.0
        } else {
            self.tweets_all_found as f64 / self.tweets_with_gold as f64
        }
    }

    pub fn scores(&self) -> Scores {
        let (precision, recall, f1) = prf(self);
        Scores {
            precision,
            recall,
            f1,
            aon_recall: self.aon_recall(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub aon_recall: f64,
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

pub fn precision_recall(tp: u64, fp: u64, fn_: u64) -> (f64, f64) {
    let precision = if tp + fp == 0 {
        if fn_ == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fn_ == 0 {
        1.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    (precision, recall)
}

/// Precision, recall and F1 of one label's counts.
pub fn prf(counts: &LabelCounts) -> (f64, f64, f64) {
    let (p, r) = precision_recall(counts.tp, counts.fp, counts.fn_);
    (p, r, f1_score(p, r))
}

/// Unweighted mean of per-label scores.
pub fn macro_average(rows: &[Scores]) -> Result<Scores> {
    if rows.is_empty() {
        return Err(Error::EmptyAggregate);
    }
    let n = rows.len() as f64;
    let mean = |f: fn(&Scores) -> f64| rows.iter().map(f).sum::<f64>() / n;
    Ok(Scores {
        precision: mean(|s| s.precision),
        recall: mean(|s| s.recall),
        f1: mean(|s| s.f1),
        aon_recall: mean(|s| s.aon_recall),
    })
}

/// Micro and macro rows over labels that have gold instances.
pub fn aggregate(rows: &[LabelCounts]) -> Result<(Scores, Scores)> {
    let scored: Vec<&LabelCounts> = rows.iter().filter(|r| r.has_gold()).collect();
    if scored.is_empty() {
        return Err(Error::EmptyAggregate);
    }
    let mut pooled = LabelCounts::new(scored[0].label);
    for r in &scored {
        pooled.tp += r.tp;
        pooled.fp += r.fp;
        pooled.fn_ += r.fn_;
        pooled.tweets_with_gold += r.tweets_with_gold;
        pooled.tweets_all_found += r.tweets_all_found;
    }
    let micro = pooled.scores();
    let per_label: Vec<Scores> = scored.iter().map(|r| r.scores()).collect();
    Ok((micro, macro_average(&per_label)?))
}

fn token_sets(
    spans: impl Iterator<Item = LabeledSpan>,
    tokens: &[Token],
    len: usize,
) -> Result<BTreeMap<EntityLabel, BTreeSet<usize>>> {
    let mut sets: BTreeMap<EntityLabel, BTreeSet<usize>> = BTreeMap::new();
    for s in spans {
        let range = overlapping_range(tokens, s.span, len)?;
        sets.entry(s.label).or_default().extend(range);
    }
    Ok(sets)
}

/// Per-label token confusion for one tweet.
pub fn token_confusion(
    gold: &AnnotatedTweet,
    predicted: &Annotation,
    tokens: &[Token],
) -> Result<BTreeMap<EntityLabel, Confusion>> {
    if gold.tweet.id != predicted.tweet_id {
        return Err(Error::TweetMismatch {
            gold: gold.tweet.id.clone(),
            predicted: predicted.tweet_id.clone(),
        });
    }
    let len = char_len(&gold.tweet.text);
    let gold_sets = token_sets(gold.gold.iter().copied(), tokens, len)
        .map_err(|e| Error::tweet(&gold.tweet.id, e.to_string()))?;
    let pred_sets = token_sets(predicted.labeled_spans(), tokens, len)
        .map_err(|e| Error::tweet(&gold.tweet.id, e.to_string()))?;
    let empty = BTreeSet::new();
    let labels: BTreeSet<EntityLabel> = gold_sets.keys().chain(pred_sets.keys()).copied().collect();
    Ok(labels
        .into_iter()
        .map(|label| {
            let g = gold_sets.get(&label).unwrap_or(&empty);
            let p = pred_sets.get(&label).unwrap_or(&empty);
            let tp = g.intersection(p).count() as u64;
            let confusion = Confusion {
                tp,
                fp: p.len() as u64 - tp,
                fn_: g.len() as u64 - tp,
            };
            (label, confusion)
        })
        .collect())
}

/// Fraction of tweets with gold tokens of `label` in which none were missed.
pub fn aon_recall(per_tweet: &[BTreeMap<EntityLabel, Confusion>], label: EntityLabel) -> f64 {
    let mut with_gold = 0u64;
    let mut all_found = 0u64;
    for tweet in per_tweet {
        if let Some(c) = tweet.get(&label) {
            if c.tp + c.fn_ > 0 {
                with_gold += 1;
                all_found += u64::from(c.fn_ == 0);
            }
        }
    }
    if with_gold == 0 {
        1.0
    } else {
        all_found as f64 / with_gold as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    #[serde(flatten)]
    pub counts: LabelCounts,
    #[serde(flatten)]
    pub scores: Scores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub gold: u64,
    #[serde(flatten)]
    pub scores: Scores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub tweets: u64,
    /// Labels with at least one gold token, in table order.
    pub rows: Vec<ReportRow>,
    /// Labels that were predicted but never annotated; not averaged.
    pub unscored: Vec<LabelCounts>,
    pub micro: AggregateRow,
    #[serde(rename = "macro")]
    pub macro_: AggregateRow,
    pub total_false_positives: u64,
    pub total_false_negatives: u64,
}

impl MetricsReport {
    pub fn row(&self, label: EntityLabel) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.counts.label == label)
    }

    /// Fixed-width table in the layout of the published results table.
    pub fn to_table(&self) -> String {
        let rule = "-".repeat(58);
        let mut out = format!(
            "{:<12}|{:>7} |{:>7} |{:>7} |{:>7} |{:>7}\n{rule}\n",
            "Info Type", "No", "P", "R", "F1", "AON R"
        );
        for r in &self.rows {
            table_line(&mut out, display_name(r.counts.label), r.counts.gold, &r.scores);
        }
        let _ = writeln!(out, "{rule}");
        table_line(&mut out, "Micro Avg", self.micro.gold, &self.micro.scores);
        table_line(&mut out, "Macro Avg", self.macro_.gold, &self.macro_.scores);
        let _ = writeln!(
            out,
            "false positives: {}, false negatives: {}",
            self.total_false_positives, self.total_false_negatives
        );
        out
    }
}

fn table_line(out: &mut String, name: &str, gold: u64, s: &Scores) {
    let _ = writeln!(
        out,
        "{:<12}|{:>7} |{:>7.3} |{:>7.3} |{:>7.3} |{:>7.3}",
        name, gold, s.precision, s.recall, s.f1, s.aon_recall
    );
}

fn display_name(label: EntityLabel) -> &'static str {
    match label {
        EntityLabel::Url => "URL",
        EntityLabel::Username => "Username",
        EntityLabel::Person => "Person",
        EntityLabel::Org => "Org",
        EntityLabel::Group => "Group",
        EntityLabel::City => "City",
        EntityLabel::State => "State",
        EntityLabel::Country => "Country",
        EntityLabel::Location => "Location",
        EntityLabel::Phone => "Phone #",
        EntityLabel::Email => "Email",
        EntityLabel::IdNumber => "ID",
        EntityLabel::Zip => "Zip code",
    }
}

/// Scores predictions against gold. Gold tweets without a prediction record
/// count as predicting nothing.
pub fn evaluate_corpus(gold: &[AnnotatedTweet], predictions: &[Annotation]) -> Result<MetricsReport> {
    let mut by_id: BTreeMap<&str, &Annotation> = BTreeMap::new();
    for p in predictions {
        if by_id.insert(p.tweet_id.as_str(), p).is_some() {
            return Err(Error::tweet(&p.tweet_id, "duplicate prediction record"));
        }
    }
    let gold_ids: BTreeSet<&str> = gold.iter().map(|g| g.tweet.id.as_str()).collect();
    if let Some(id) = by_id.keys().find(|id| !gold_ids.contains(*id)) {
        return Err(Error::UnknownTweet(id.to_string()));
    }

    let mut counts: BTreeMap<EntityLabel, LabelCounts> = BTreeMap::new();
    for g in gold {
        let tokens = tokenize(&g.tweet.text);
        let empty = Annotation::empty(&g.tweet.id);
        let pred = by_id.get(g.tweet.id.as_str()).copied().unwrap_or(&empty);
        let confusion = token_confusion(g, pred, &tokens)?;
        for (label, c) in confusion {
            let row = counts.entry(label).or_insert_with(|| LabelCounts::new(label));
            row.tp += c.tp;
            row.fp += c.fp;
            row.fn_ += c.fn_;
            if c.tp + c.fn_ > 0 {
                row.tweets_with_gold += 1;
                row.tweets_all_found += u64::from(c.fn_ == 0);
            }
        }
        for s in &g.gold {
            counts
                .entry(s.label)
                .or_insert_with(|| LabelCounts::new(s.label))
                .gold += 1;
        }
    }

    let all: Vec<LabelCounts> = counts.into_values().collect();
    let (micro, macro_) = aggregate(&all)?;
    let total_fp = all.iter().map(|r| r.fp).sum();
    let total_fn = all.iter().map(|r| r.fn_).sum();
    let (scored, unscored): (Vec<_>, Vec<_>) = all.into_iter().partition(LabelCounts::has_gold);
    let gold_total = scored.iter().map(|r| r.gold).sum();
    Ok(MetricsReport {
        tweets: gold.len() as u64,
        rows: scored
            .into_iter()
            .map(|counts| ReportRow {
                scores: counts.scores(),
                counts,
            })
            .collect(),
        unscored,
        micro: AggregateRow {
            gold: gold_total,
            scores: micro,
        },
        macro_: AggregateRow {
            gold: gold_total,
            scores: macro_,
        },
        total_false_positives: total_fp,
        total_false_negatives: total_fn,
    })
}
