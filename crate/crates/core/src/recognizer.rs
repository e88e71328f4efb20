//! Named-entity recognition: a gazetteer recognizer, an adapter for external
//! NER processes, and the union combiner.
//!
//! A token counts as marked with label `L` as soon as any recognizer marks
//! it with `L`, so the combined output never has lower recall than any
//! single recognizer.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Detection, EntityLabel, Span, Tweet};
use crate::text::CharIndex;
use crate::tokenizer::{overlapping_range, tokenize, Token, TokenKind};

const BUILTIN_GAZETTEER: &str = include_str!("../data/gazetteer.json");

pub trait Recognizer: Send + Sync {
    fn name(&self) -> &str;

    /// `tokens` must be `tokenize(&tweet.text)`.
    fn recognize(&self, tweet: &Tweet, tokens: &[Token]) -> Result<Vec<Detection>>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecognizerKind {
    Builtin,
    External,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecognizerHandle {
    pub name: String,
    pub kind: RecognizerKind,
    /// Source-scheme label → taxonomy label. Anything else is dropped.
    pub label_map: BTreeMap<String, EntityLabel>,
}

impl RecognizerHandle {
    pub fn external(name: impl Into<String>) -> Self {
        RecognizerHandle {
            name: name.into(),
            kind: RecognizerKind::External,
            label_map: default_label_map(),
        }
    }
}

/// Mapping from common statistical NER schemes (OntoNotes, CoNLL, CoreNLP).
pub fn default_label_map() -> BTreeMap<String, EntityLabel> {
    [
        ("PERSON", EntityLabel::Person),
        ("ORG", EntityLabel::Org),
        ("NORP", EntityLabel::Group),
        ("GPE", EntityLabel::Location),
        ("LOC", EntityLabel::Location),
        ("FAC", EntityLabel::Location),
        ("CITY", EntityLabel::City),
        ("STATE_OR_PROVINCE", EntityLabel::State),
        ("COUNTRY", EntityLabel::Country),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Surface forms per label, matched over token sequences.
#[derive(Debug, Clone)]
pub struct Gazetteer {
    entries: BTreeMap<EntityLabel, BTreeSet<String>>,
    case_insensitive: bool,
    index: HashMap<Vec<String>, EntityLabel>,
    max_tokens: usize,
}

impl Gazetteer {
    pub fn new(entries: BTreeMap<EntityLabel, BTreeSet<String>>, case_insensitive: bool) -> Result<Self> {
        if let Some((label, _)) = entries
            .iter()
            .find(|(_, set)| set.iter().any(|s| s.trim().is_empty()))
        {
            return Err(Error::Config(format!("empty gazetteer entry for {label}")));
        }
        let mut gaz = Gazetteer {
            entries,
            case_insensitive,
            index: HashMap::new(),
            max_tokens: 0,
        };
        gaz.rebuild_index();
        Ok(gaz)
    }

    pub fn empty() -> Self {
        Gazetteer::new(BTreeMap::new(), false).expect("empty gazetteer is valid")
    }

    /// The gazetteer shipped with the crate, matched case-sensitively.
    pub fn builtin() -> Self {
        Gazetteer::from_json(BUILTIN_GAZETTEER).expect("bundled gazetteer is valid")
    }

    /// Parses one or more JSON objects mapping label names to surface arrays.
    pub fn from_json(json: &str) -> Result<Self> {
        let mut entries: BTreeMap<EntityLabel, BTreeSet<String>> = BTreeMap::new();
        let stream = serde_json::Deserializer::from_str(json).into_iter::<BTreeMap<String, Vec<String>>>();
        for (i, object) in stream.enumerate() {
            let object = object.map_err(|e| Error::Config(format!("gazetteer object {}: {e}", i + 1)))?;
            for (label, surfaces) in object {
                let label: EntityLabel = label.parse()?;
                entries.entry(label).or_default().extend(surfaces);
            }
        }
        Gazetteer::new(entries, false)
    }

    pub fn with_case_insensitive(mut self, case_insensitive: bool) -> Self {
        self.case_insensitive = case_insensitive;
        self.rebuild_index();
        self
    }

    pub fn case_insensitive(&self) -> bool {
        self.case_insensitive
    }

    pub fn entries(&self) -> &BTreeMap<EntityLabel, BTreeSet<String>> {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.values().all(BTreeSet::is_empty)
    }

    /// A copy keeping only entries for which `keep(label, surface)` holds.
    pub fn filtered(&self, mut keep: impl FnMut(EntityLabel, &str) -> bool) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(&label, set)| {
                let kept = set.iter().filter(|s| keep(label, s)).cloned().collect();
                (label, kept)
            })
            .collect();
        Gazetteer::new(entries, self.case_insensitive).expect("subset of a valid gazetteer")
    }

    fn key_part(&self, token: &str) -> String {
        if self.case_insensitive {
            token.to_lowercase()
        } else {
            token.to_string()
        }
    }

    fn rebuild_index(&mut self) {
        let mut index: HashMap<Vec<String>, EntityLabel> = HashMap::new();
        let mut max_tokens = 0;
        for (&label, surfaces) in &self.entries {
            for surface in surfaces {
                let key: Vec<String> = tokenize(surface).iter().map(|t| self.key_part(&t.text)).collect();
                if key.is_empty() {
                    continue;
                }
                max_tokens = max_tokens.max(key.len());
                index
                    .entry(key)
                    .and_modify(|l| {
                        if label.priority() < l.priority() {
                            *l = label;
                        }
                    })
                    .or_insert(label);
            }
        }
        self.index = index;
        self.max_tokens = max_tokens;
    }
}

fn matchable(token: &Token) -> bool {
    !matches!(
        token.kind,
        TokenKind::Mention | TokenKind::Hashtag | TokenKind::UrlLike
    )
}

/// Longest-match-first lookup of token runs in the gazetteer.
pub fn recognize_builtin(tweet: &Tweet, tokens: &[Token], gaz: &Gazetteer, source: &str) -> Vec<Detection> {
    let index = CharIndex::new(&tweet.text);
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let longest = gaz.max_tokens.min(tokens.len() - i);
        let hit = (1..=longest).rev().find_map(|n| {
            let run = &tokens[i..i + n];
            if !run.iter().all(matchable) {
                return None;
            }
            let key: Vec<String> = run.iter().map(|t| gaz.key_part(&t.text)).collect();
            gaz.index.get(&key).map(|&label| (n, label))
        });
        match hit {
            Some((n, label)) => {
                let span = Span::new(tokens[i].span.start, tokens[i + n - 1].span.end);
                out.push(Detection::from_index(&index, span, label, source));
                i += n;
            }
            None => i += 1,
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct GazetteerRecognizer {
    name: String,
    gazetteer: Gazetteer,
}

impl GazetteerRecognizer {
    pub fn new(name: impl Into<String>, gazetteer: Gazetteer) -> Self {
        GazetteerRecognizer {
            name: name.into(),
            gazetteer,
        }
    }

    pub fn gazetteer(&self) -> &Gazetteer {
        &self.gazetteer
    }
}

impl Recognizer for GazetteerRecognizer {
    fn name(&self) -> &str {
        &self.name
    }

    fn recognize(&self, tweet: &Tweet, tokens: &[Token]) -> Result<Vec<Detection>> {
        Ok(recognize_builtin(tweet, tokens, &self.gazetteer, &self.name))
    }
}

// ---- adapter wire protocol ----

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdapterRequest<'a> {
    pub id: &'a str,
    pub text: &'a str,
}

#[derive(Debug, Clone, Deserialize)]
pub struct AdapterBanner {
    pub ready: bool,
    #[serde(default)]
    pub scheme: Option<String>,
    #[serde(default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdapterEntity {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct AdapterResponse {
    pub id: String,
    #[serde(default)]
    pub entities: Option<Vec<AdapterEntity>>,
    #[serde(default)]
    pub error: Option<String>,
}

/// Maps adapter entities into detections; returns them with the number of
/// entities dropped for having no mapping.
pub fn map_adapter_entities(
    tweet: &Tweet,
    handle: &RecognizerHandle,
    entities: &[AdapterEntity],
) -> Result<(Vec<Detection>, usize)> {
    let index = CharIndex::new(&tweet.text);
    let mut dropped = 0;
    let mut out = Vec::new();
    for e in entities {
        let span = Span::new(e.start, e.end);
        span.validate(index.char_len()).map_err(|err| {
            Error::adapter(&handle.name, format!("tweet {}: {err}", tweet.id))
        })?;
        match handle.label_map.get(&e.label) {
            Some(&label) => out.push(Detection::from_index(&index, span, label, &handle.name)),
            None => dropped += 1,
        }
    }
    if dropped > 0 {
        log::debug!("{}: dropped {dropped} unmapped entities in tweet {}", handle.name, tweet.id);
    }
    Ok((out, dropped))
}

/// A running adapter process speaking NDJSON over stdin/stdout.
#[derive(Debug)]
pub struct AdapterProcess {
    name: String,
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    timeout: Duration,
    scheme: Option<String>,
}

impl AdapterProcess {
    /// Starts `command` through `sh -c` and waits for the ready banner.
    pub fn spawn(name: &str, command: &str, timeout: Duration) -> Result<Self> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::adapter(name, format!("cannot start `{command}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut process = AdapterProcess {
            name: name.to_string(),
            child,
            stdin,
            lines: rx,
            timeout,
            scheme: None,
        };
        let banner = process.next_line()?;
        let banner: AdapterBanner = serde_json::from_str(&banner)
            .map_err(|e| Error::adapter(name, format!("malformed banner `{banner}`: {e}")))?;
        if !banner.ready {
            let reason = banner.error.unwrap_or_else(|| "not ready".into());
            return Err(Error::adapter(name, format!("startup failed: {reason}")));
        }
        process.scheme = banner.scheme;
        Ok(process)
    }

    /// Time allowed for each response from now on.
    pub fn set_timeout(&mut self, timeout: Duration) {
        self.timeout = timeout;
    }

    pub fn scheme(&self) -> Option<&str> {
        self.scheme.as_deref()
    }

    fn next_line(&mut self) -> Result<String> {
        match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(Error::adapter(&self.name, format!("read failed: {e}"))),
            Err(RecvTimeoutError::Timeout) => Err(Error::adapter(
                &self.name,
                format!("no response within {} ms", self.timeout.as_millis()),
            )),
            Err(RecvTimeoutError::Disconnected) => {
                Err(Error::adapter(&self.name, "adapter closed its output"))
            }
        }
    }

    pub fn request(&mut self, id: &str, text: &str) -> Result<Vec<AdapterEntity>> {
        let mut line = serde_json::to_string(&AdapterRequest { id, text }).expect("serializable");
        line.push('\n');
        self.stdin
            .write_all(line.as_bytes())
            .and_then(|_| self.stdin.flush())
            .map_err(|e| Error::adapter(&self.name, format!("write failed: {e}")))?;
        let reply = self.next_line()?;
        let response: AdapterResponse = serde_json::from_str(&reply)
            .map_err(|e| Error::adapter(&self.name, format!("malformed response `{reply}`: {e}")))?;
        if response.id != id {
            return Err(Error::adapter(
                &self.name,
                format!("response id `{}` does not echo request `{id}`", response.id),
            ));
        }
        if let Some(err) = response.error {
            return Err(Error::adapter(&self.name, format!("tweet {id}: {err}")));
        }
        response
            .entities
            .ok_or_else(|| Error::adapter(&self.name, format!("response without entities `{reply}`")))
    }
}

impl Drop for AdapterProcess {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// An external recognizer; requests to one process are serialized.
#[derive(Debug)]
pub struct ExternalRecognizer {
    handle: RecognizerHandle,
    process: Mutex<AdapterProcess>,
}

impl ExternalRecognizer {
    pub fn spawn(handle: RecognizerHandle, command: &str, timeout: Duration) -> Result<Self> {
        let process = AdapterProcess::spawn(&handle.name, command, timeout)?;
        Ok(ExternalRecognizer {
            handle,
            process: Mutex::new(process),
        })
    }

    pub fn handle(&self) -> &RecognizerHandle {
        &self.handle
    }
}

pub fn recognize_external(tweet: &Tweet, handle: &RecognizerHandle, process: &mut AdapterProcess) -> Result<Vec<Detection>> {
    let entities = process.request(&tweet.id, &tweet.text)?;
    map_adapter_entities(tweet, handle, &entities).map(|(d, _)| d)
}

impl Recognizer for ExternalRecognizer {
    fn name(&self) -> &str {
        &self.handle.name
    }

    fn recognize(&self, tweet: &Tweet, _tokens: &[Token]) -> Result<Vec<Detection>> {
        let mut process = self
            .process
            .lock()
            .map_err(|_| Error::adapter(&self.handle.name, "adapter lock poisoned"))?;
        recognize_external(tweet, &self.handle, &mut process)
    }
}

/// Token-level union of several recognizers' detections on one text.
///
/// Same-label marks on consecutive tokens merge into one detection whose
/// source lists every contributing recognizer, sorted and joined by `+`.
pub fn union_combine(text: &str, tokens: &[Token], results: &[(String, Vec<Detection>)]) -> Result<Vec<Detection>> {
    let index = CharIndex::new(text);
    let len = index.char_len();
    let mut marks: BTreeMap<EntityLabel, Vec<BTreeSet<&str>>> = BTreeMap::new();
    for (name, detections) in results {
        for d in detections {
            let range = overlapping_range(tokens, d.span, len)?;
            let per_token = marks
                .entry(d.label)
                .or_insert_with(|| vec![BTreeSet::new(); tokens.len()]);
            for slot in &mut per_token[range] {
                slot.insert(name.as_str());
            }
        }
    }
    let mut out = Vec::new();
    for (label, per_token) in marks {
        let mut i = 0;
        while i < per_token.len() {
            if per_token[i].is_empty() {
                i += 1;
                continue;
            }
            let start = i;
            let mut names: BTreeSet<&str> = BTreeSet::new();
            while i < per_token.len() && !per_token[i].is_empty() {
                names.extend(&per_token[i]);
                i += 1;
            }
            let span = Span::new(tokens[start].span.start, tokens[i - 1].span.end);
            let source = names.into_iter().collect::<Vec<_>>().join("+");
            out.push(Detection::from_index(&index, span, label, &source));
        }
    }
    out.sort_by_key(|d| (d.span, d.label));
    Ok(out)
}
