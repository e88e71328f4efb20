//! Shared domain types and the label taxonomy.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::CharIndex;

/// The kinds of identifiable information the toolkit detects.
///
/// Declaration order is the row order of the evaluation table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EntityLabel {
    Url,
    Username,
    Person,
    Org,
    Group,
    City,
    State,
    Country,
    Location,
    Phone,
    Email,
    IdNumber,
    Zip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelClass {
    /// Pattern-detectable; deleted or replaced by a placeholder.
    Removal,
    /// Recognizer-detectable; replaced by a synthetic value of the same type.
    Entity,
}

impl EntityLabel {
    pub const ALL: [EntityLabel; 13] = [
        EntityLabel::Url,
        EntityLabel::Username,
        EntityLabel::Person,
        EntityLabel::Org,
        EntityLabel::Group,
        EntityLabel::City,
        EntityLabel::State,
        EntityLabel::Country,
        EntityLabel::Location,
        EntityLabel::Phone,
        EntityLabel::Email,
        EntityLabel::IdNumber,
        EntityLabel::Zip,
    ];

    pub const REMOVAL: [EntityLabel; 6] = [
        EntityLabel::Url,
        EntityLabel::Username,
        EntityLabel::Phone,
        EntityLabel::Email,
        EntityLabel::IdNumber,
        EntityLabel::Zip,
    ];

    pub const ENTITY: [EntityLabel; 7] = [
        EntityLabel::Person,
        EntityLabel::Org,
        EntityLabel::Group,
        EntityLabel::City,
        EntityLabel::State,
        EntityLabel::Country,
        EntityLabel::Location,
    ];

    pub fn class(self) -> LabelClass {
        label_class(self)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EntityLabel::Url => "URL",
            EntityLabel::Username => "USERNAME",
            EntityLabel::Person => "PERSON",
            EntityLabel::Org => "ORG",
            EntityLabel::Group => "GROUP",
            EntityLabel::City => "CITY",
            EntityLabel::State => "STATE",
            EntityLabel::Country => "COUNTRY",
            EntityLabel::Location => "LOCATION",
            EntityLabel::Phone => "PHONE",
            EntityLabel::Email => "EMAIL",
            EntityLabel::IdNumber => "ID_NUMBER",
            EntityLabel::Zip => "ZIP",
        }
    }

    /// Tie-break rank when overlapping detections have equal length; lower wins.
    pub fn priority(self) -> u8 {
        match self {
            EntityLabel::Url => 0,
            EntityLabel::Email => 1,
            EntityLabel::Username => 2,
            EntityLabel::Phone => 3,
            EntityLabel::IdNumber => 4,
            EntityLabel::Zip => 5,
            EntityLabel::Person => 6,
            EntityLabel::Org => 7,
            EntityLabel::Group => 8,
            EntityLabel::City => 9,
            EntityLabel::State => 10,
            EntityLabel::Country => 11,
            EntityLabel::Location => 12,
        }
    }
}

pub fn label_class(label: EntityLabel) -> LabelClass {
    match label {
        EntityLabel::Url
        | EntityLabel::Username
        | EntityLabel::Phone
        | EntityLabel::Email
        | EntityLabel::IdNumber
        | EntityLabel::Zip => LabelClass::Removal,
        _ => LabelClass::Entity,
    }
}

impl fmt::Display for EntityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EntityLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::UnknownLabel(s.to_string()))
    }
}

/// A half-open range of Unicode scalar-value offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    /// Checks `0 <= start < end <= len`.
    pub fn validate(self, len: usize) -> Result<()> {
        if self.start < self.end && self.end <= len {
            Ok(())
        } else {
            Err(Error::InvalidSpan {
                start: self.start,
                end: self.end,
                len,
            })
        }
    }

    pub fn len(self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(self) -> bool {
        self.end <= self.start
    }

    pub fn overlaps(self, other: Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn contains(self, other: Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tweet {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub author_verified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lang: Option<String>,
}

impl Tweet {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Tweet {
            id: id.into(),
            text: text.into(),
            author_verified: false,
            lang: None,
        }
    }

    pub fn verified(mut self, verified: bool) -> Self {
        self.author_verified = verified;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Detection {
    pub span: Span,
    pub label: EntityLabel,
    pub source: String,
    pub surface: String,
}

impl Detection {
    /// Builds a detection whose surface is read from `index`.
    ///
    /// Panics if the span does not fit the text; detectors only produce
    /// spans from matches on the same text.
    pub fn from_index(index: &CharIndex<'_>, span: Span, label: EntityLabel, source: &str) -> Self {
        Detection {
            span,
            label,
            source: source.to_string(),
            surface: index.slice(span).to_string(),
        }
    }

    /// Fallible constructor for spans coming from outside the process.
    pub fn checked(
        index: &CharIndex<'_>,
        span: Span,
        label: EntityLabel,
        source: &str,
    ) -> Result<Self> {
        let surface = index.checked_slice(span)?.to_string();
        Ok(Detection {
            span,
            label,
            source: source.to_string(),
            surface,
        })
    }

    pub fn labeled_span(&self) -> LabeledSpan {
        LabeledSpan {
            span: self.span,
            label: self.label,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabeledSpan {
    pub span: Span,
    pub label: EntityLabel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedTweet {
    pub tweet: Tweet,
    pub gold: Vec<LabeledSpan>,
}

impl AnnotatedTweet {
    /// Validates every span against the text and rejects same-label overlaps.
    pub fn new(tweet: Tweet, mut gold: Vec<LabeledSpan>) -> Result<Self> {
        let len = crate::text::char_len(&tweet.text);
        for g in &gold {
            g.span
                .validate(len)
                .map_err(|e| Error::tweet(&tweet.id, e.to_string()))?;
        }
        gold.sort();
        for (i, a) in gold.iter().enumerate() {
            if let Some(b) = gold[i + 1..]
                .iter()
                .find(|b| b.label == a.label && b.span.overlaps(a.span))
            {
                return Err(Error::tweet(
                    &tweet.id,
                    format!(
                        "overlapping {} spans [{}, {}) and [{}, {})",
                        a.label, a.span.start, a.span.end, b.span.start, b.span.end
                    ),
                ));
            }
        }
        Ok(AnnotatedTweet { tweet, gold })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub start: usize,
    pub end: usize,
    pub label: EntityLabel,
    pub replacement: String,
    pub source: String,
}

impl Edit {
    pub fn span(&self) -> Span {
        Span::new(self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskedTweet {
    pub tweet_id: String,
    pub original_text: String,
    pub masked_text: String,
    pub edits: Vec<Edit>,
}

impl MaskedTweet {
    /// Re-applies the edits to the original text, right to left.
    pub fn replay(&self) -> String {
        let index = CharIndex::new(&self.original_text);
        let mut out = self.original_text.clone();
        for edit in self.edits.iter().rev() {
            out.replace_range(index.byte(edit.start)..index.byte(edit.end), &edit.replacement);
        }
        out
    }
}
