//! Newline-delimited JSON readers and writers.
//!
//! All offsets in files are Unicode scalar-value offsets. Readers fail on the
//! first malformed line and report its 1-based number; blank lines are
//! ignored. Writers emit records sorted by tweet id.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::{AnnotatedTweet, Detection, EntityLabel, LabeledSpan, MaskedTweet, Span, Tweet};
use crate::text::char_len;

/// One span of the shared standoff format used for gold and predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationSpan {
    #[serde(flatten)]
    pub span: Span,
    pub label: EntityLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

/// One line of `annotations.jsonl` or `detections.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub tweet_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    pub spans: Vec<AnnotationSpan>,
}

impl Annotation {
    pub fn empty(tweet_id: &str) -> Self {
        Annotation {
            tweet_id: tweet_id.to_string(),
            text: None,
            spans: Vec::new(),
        }
    }

    pub fn from_detections(tweet: &Tweet, detections: &[Detection]) -> Self {
        Annotation {
            tweet_id: tweet.id.clone(),
            text: Some(tweet.text.clone()),
            spans: detections
                .iter()
                .map(|d| AnnotationSpan {
                    span: d.span,
                    label: d.label,
                    source: Some(d.source.clone()),
                })
                .collect(),
        }
    }

    pub fn from_gold(gold: &AnnotatedTweet) -> Self {
        Annotation {
            tweet_id: gold.tweet.id.clone(),
            text: Some(gold.tweet.text.clone()),
            spans: gold
                .gold
                .iter()
                .map(|s| AnnotationSpan {
                    span: s.span,
                    label: s.label,
                    source: None,
                })
                .collect(),
        }
    }

    /// Detections for `tweet`, with spans checked against its text. Spans
    /// without a source are attributed to `default_source`.
    pub fn to_detections(&self, tweet: &Tweet, default_source: &str) -> Result<Vec<Detection>> {
        if tweet.id != self.tweet_id {
            return Err(Error::TweetMismatch {
                gold: tweet.id.clone(),
                predicted: self.tweet_id.clone(),
            });
        }
        let index = crate::text::CharIndex::new(&tweet.text);
        self.spans
            .iter()
            .map(|s| {
                let source = s.source.as_deref().unwrap_or(default_source);
                Detection::checked(&index, s.span, s.label, source)
                    .map_err(|e| Error::tweet(&tweet.id, e.to_string()))
            })
            .collect()
    }

    pub fn labeled_spans(&self) -> impl Iterator<Item = LabeledSpan> + '_ {
        self.spans.iter().map(|s| LabeledSpan {
            span: s.span,
            label: s.label,
        })
    }
}

fn lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .map(|(i, line)| {
            line.map(|l| (i + 1, l))
                .map_err(|e| Error::io(format!("line {}", i + 1), e))
        })
        .filter(|r| !matches!(r, Ok((_, l)) if l.trim().is_empty()))
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn string_field(obj: &Value, keys: &[&str]) -> Option<std::result::Result<String, String>> {
    keys.iter().find_map(|k| match obj.get(k)? {
        Value::Null => None,
        Value::String(s) => Some(Ok(s.clone())),
        Value::Number(n) if *k != "text" && *k != "full_text" => Some(Ok(n.to_string())),
        other => Some(Err(format!("field `{k}` has unexpected type: {other}"))),
    })
}

fn parse_tweet(line: usize, raw: &str) -> Result<Tweet> {
    let obj: Value = serde_json::from_str(raw).map_err(|e| parse_err(line, e.to_string()))?;
    if !obj.is_object() {
        return Err(parse_err(line, "expected a JSON object"));
    }
    let id = string_field(&obj, &["id_str", "id"])
        .ok_or_else(|| parse_err(line, "missing tweet id (`id` or `id_str`)"))?
        .map_err(|m| parse_err(line, m))?;
    let text = string_field(&obj, &["full_text", "text"])
        .ok_or_else(|| parse_err(line, "missing text (`text` or `full_text`)"))?
        .map_err(|m| parse_err(line, m))?;
    let flag = |v: Option<&Value>| -> Result<Option<bool>> {
        match v {
            None | Some(Value::Null) => Ok(None),
            Some(Value::Bool(b)) => Ok(Some(*b)),
            Some(other) => Err(parse_err(line, format!("verified flag is not a boolean: {other}"))),
        }
    };
    let verified = match flag(obj.get("user").and_then(|u| u.get("verified")))? {
        Some(b) => b,
        None => flag(obj.get("author_verified"))?.unwrap_or(false),
    };
    let lang = match obj.get("lang") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(other) => return Err(parse_err(line, format!("`lang` is not a string: {other}"))),
    };
    Ok(Tweet {
        id,
        text,
        author_verified: verified,
        lang,
    })
}

/// Reads tweets from raw platform JSON or from this crate's own output.
pub fn read_tweets<R: BufRead>(reader: R) -> Result<Vec<Tweet>> {
    let mut seen = HashSet::new();
    let mut tweets = Vec::new();
    for item in lines(reader) {
        let (n, line) = item?;
        let tweet = parse_tweet(n, &line)?;
        if !seen.insert(tweet.id.clone()) {
            return Err(parse_err(n, format!("duplicate tweet id `{}`", tweet.id)));
        }
        tweets.push(tweet);
    }
    Ok(tweets)
}

pub fn write_tweets<W: Write>(tweets: &[Tweet], writer: W) -> Result<()> {
    write_sorted(tweets, |t| &t.id, writer)
}

pub fn filter_language(tweets: Vec<Tweet>, code: &str) -> Vec<Tweet> {
    tweets
        .into_iter()
        .filter(|t| t.lang.as_deref() == Some(code))
        .collect()
}

pub fn read_annotations<R: BufRead>(reader: R) -> Result<Vec<Annotation>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for item in lines(reader) {
        let (n, line) = item?;
        let ann: Annotation = serde_json::from_str(&line).map_err(|e| parse_err(n, e.to_string()))?;
        for s in &ann.spans {
            if s.span.start >= s.span.end {
                return Err(Error::tweet(
                    &ann.tweet_id,
                    format!("line {n}: empty or reversed span [{}, {})", s.span.start, s.span.end),
                ));
            }
            if let Some(text) = &ann.text {
                s.span
                    .validate(char_len(text))
                    .map_err(|e| Error::tweet(&ann.tweet_id, format!("line {n}: {e}")))?;
            }
        }
        if !seen.insert(ann.tweet_id.clone()) {
            return Err(parse_err(n, format!("duplicate tweet id `{}`", ann.tweet_id)));
        }
        out.push(ann);
    }
    Ok(out)
}

/// Pairs annotations with tweets and validates spans against the tweet text.
///
/// Without `tweets`, each annotation must carry its own `text`. With
/// `tweets`, every annotation must name a known tweet, an embedded `text`
/// must agree, and tweets without an annotation record are left out.
pub fn join_annotations(tweets: Option<&[Tweet]>, annotations: &[Annotation]) -> Result<Vec<AnnotatedTweet>> {
    let by_id: Option<BTreeMap<&str, &Tweet>> =
        tweets.map(|ts| ts.iter().map(|t| (t.id.as_str(), t)).collect());
    annotations
        .iter()
        .map(|ann| {
            let tweet = match (&by_id, &ann.text) {
                (Some(map), text) => {
                    let t = *map
                        .get(ann.tweet_id.as_str())
                        .ok_or_else(|| Error::UnknownTweet(ann.tweet_id.clone()))?;
                    if text.as_ref().is_some_and(|x| x != &t.text) {
                        return Err(Error::tweet(&ann.tweet_id, "annotation text differs from tweet text"));
                    }
                    t.clone()
                }
                (None, Some(text)) => Tweet::new(ann.tweet_id.clone(), text.clone()),
                (None, None) => {
                    return Err(Error::tweet(
                        &ann.tweet_id,
                        "annotation has no `text`; supply the tweets file",
                    ))
                }
            };
            AnnotatedTweet::new(tweet, ann.labeled_spans().collect())
        })
        .collect()
}

pub fn write_annotations<W: Write>(annotations: &[Annotation], writer: W) -> Result<()> {
    write_sorted(annotations, |a| &a.tweet_id, writer)
}

/// Writes one detection record per tweet, including tweets with no detections.
pub fn write_detections<W: Write>(results: &[(Tweet, Vec<Detection>)], writer: W) -> Result<()> {
    let records: Vec<Annotation> = results
        .iter()
        .map(|(t, d)| Annotation::from_detections(t, d))
        .collect();
    write_annotations(&records, writer)
}

pub fn write_masked<W: Write>(masked: &[MaskedTweet], writer: W) -> Result<()> {
    write_sorted(masked, |m| &m.tweet_id, writer)
}

pub fn read_masked<R: BufRead>(reader: R) -> Result<Vec<MaskedTweet>> {
    lines(reader)
        .map(|item| {
            let (n, line) = item?;
            serde_json::from_str(&line).map_err(|e| parse_err(n, e.to_string()))
        })
        .collect()
}

fn write_sorted<T: Serialize, W: Write>(items: &[T], key: impl Fn(&T) -> &String, writer: W) -> Result<()> {
    let mut order: Vec<&T> = items.iter().collect();
    order.sort_by(|a, b| key(a).cmp(key(b)));
    let mut w = BufWriter::new(writer);
    for item in order {
        let line = serde_json::to_string(item).expect("records serialize");
        writeln!(w, "{line}").map_err(|e| Error::io("write", e))?;
    }
    w.flush().map_err(|e| Error::io("write", e))
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io_path(path, e))
}

pub fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io_path(path, e))
}

/// Prefixes line-numbered parse errors with the file they came from.
pub fn in_file<T>(path: &Path, result: Result<T>) -> Result<T> {
    result.map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

pub fn read_tweets_path(path: &Path) -> Result<Vec<Tweet>> {
    in_file(path, read_tweets(open(path)?))
}

pub fn read_annotations_path(path: &Path) -> Result<Vec<Annotation>> {
    in_file(path, read_annotations(open(path)?))
}
