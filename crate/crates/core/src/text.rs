//! Conversion between byte offsets and Unicode scalar-value offsets.
//!
//! Every offset exposed by this crate counts `char`s, while `regex` and
//! string slicing work in bytes. [`CharIndex`] bridges the two for one text.

use crate::error::{Error, Result};
use crate::model::Span;

#[derive(Debug, Clone)]
pub struct CharIndex<'a> {
    text: &'a str,
    // byte offset of every char, plus a trailing entry for text.len()
    bytes: Vec<usize>,
}

impl<'a> CharIndex<'a> {
    pub fn new(text: &'a str) -> Self {
        let mut bytes: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        bytes.push(text.len());
        CharIndex { text, bytes }
    }

    pub fn text(&self) -> &'a str {
        self.text
    }

    pub fn char_len(&self) -> usize {
        self.bytes.len() - 1
    }

    /// Byte offset of the char at `char_idx` (or `text.len()` at the end).
    pub fn byte(&self, char_idx: usize) -> usize {
        self.bytes[char_idx]
    }

    /// Char offset of a byte offset that lies on a char boundary.
    pub fn char_at(&self, byte: usize) -> usize {
        self.bytes
            .binary_search(&byte)
            .expect("byte offset is not on a char boundary")
    }

    pub fn span_of_bytes(&self, start: usize, end: usize) -> Span {
        Span {
            start: self.char_at(start),
            end: self.char_at(end),
        }
    }

    pub fn slice(&self, span: Span) -> &'a str {
        &self.text[self.bytes[span.start]..self.bytes[span.end]]
    }

    pub fn checked_slice(&self, span: Span) -> Result<&'a str> {
        span.validate(self.char_len())?;
        Ok(self.slice(span))
    }

    pub fn char_before(&self, byte: usize) -> Option<char> {
        self.text[..byte].chars().next_back()
    }

    pub fn char_after(&self, byte: usize) -> Option<char> {
        self.text[byte..].chars().next()
    }
}

pub fn char_len(text: &str) -> usize {
    text.chars().count()
}

pub fn slice_chars(text: &str, span: Span) -> Result<&str> {
    span.validate(char_len(text))?;
    let mut bounds = text
        .char_indices()
        .map(|(b, _)| b)
        .chain(std::iter::once(text.len()));
    let start = bounds.nth(span.start).ok_or(Error::InvalidSpan {
        start: span.start,
        end: span.end,
        len: char_len(text),
    })?;
    let end = bounds.nth(span.end - span.start - 1).unwrap_or(text.len());
    Ok(&text[start..end])
}
