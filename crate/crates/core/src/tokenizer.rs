//! Tweet-aware tokenization with character-offset alignment.
//!
//! Boundary conventions:
//! - whitespace separates tokens and never belongs to one;
//! - URL-shaped runs and email addresses are single `UrlLike` tokens;
//! - `@handle` and `#tag` are single tokens when not preceded by a word char;
//! - words keep internal apostrophes (`don't`, `Katie's`), and digit runs
//!   keep internal `.`/`,` between digits (`3.14`, `1,000`);
//! - every other char is its own `Punct` or `Other` token.

use std::ops::Range;

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::Span;
use crate::patterns::{self, is_word_char};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TokenKind {
    Word,
    Mention,
    Hashtag,
    UrlLike,
    Number,
    Punct,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub span: Span,
    pub text: String,
    pub kind: TokenKind,
}

static URL_AT: Lazy<Regex> = Lazy::new(|| anchored(patterns::URL));
static EMAIL_AT: Lazy<Regex> = Lazy::new(|| anchored(patterns::EMAIL));

fn anchored(pattern: &str) -> Regex {
    Regex::new(&format!("^(?:{pattern})")).expect("static pattern")
}

const EXTRA_PUNCT: &str = "…“”‘’«»—–¡¿•·";

pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut byte = 0;
    let mut char_pos = 0;
    let mut prev: Option<char> = None;

    while let Some(c) = text[byte..].chars().next() {
        if c.is_whitespace() {
            byte += c.len_utf8();
            char_pos += 1;
            prev = Some(c);
            continue;
        }
        let rest = &text[byte..];
        let after_word = prev.is_some_and(is_word_char);
        let (len, kind) = scan_token(rest, c, after_word);
        let surface = &rest[..len];
        let n_chars = surface.chars().count();
        tokens.push(Token {
            span: Span::new(char_pos, char_pos + n_chars),
            text: surface.to_string(),
            kind,
        });
        prev = surface.chars().next_back();
        byte += len;
        char_pos += n_chars;
    }
    tokens
}

// Returns the byte length and kind of the token starting at `rest`.
fn scan_token(rest: &str, first: char, after_word: bool) -> (usize, TokenKind) {
    if !after_word {
        if let Some(m) = URL_AT.find(rest) {
            return (m.end(), TokenKind::UrlLike);
        }
        if let Some(m) = EMAIL_AT.find(rest) {
            return (m.end(), TokenKind::UrlLike);
        }
        if first == '@' {
            let n = prefixed_run(rest, patterns::is_handle_char);
            if n > 1 {
                return (n, TokenKind::Mention);
            }
        }
        if first == '#' {
            let n = prefixed_run(rest, is_word_char);
            if n > 1 {
                return (n, TokenKind::Hashtag);
            }
        }
    }
    if is_word_char(first) {
        return scan_word(rest);
    }
    let kind = if first.is_ascii_punctuation() || EXTRA_PUNCT.contains(first) {
        TokenKind::Punct
    } else {
        TokenKind::Other
    };
    (first.len_utf8(), kind)
}

fn prefixed_run(rest: &str, accept: impl Fn(char) -> bool) -> usize {
    let mut chars = rest.char_indices();
    chars.next();
    for (i, c) in chars {
        if !accept(c) {
            return i;
        }
    }
    rest.len()
}

fn scan_word(rest: &str) -> (usize, TokenKind) {
    let chars: Vec<(usize, char)> = rest.char_indices().collect();
    let mut all_digits = true;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i].1;
        if is_word_char(c) {
            all_digits &= c.is_ascii_digit();
            i += 1;
            continue;
        }
        let next = chars.get(i + 1).map(|&(_, n)| n);
        let joins = match c {
            '\'' | '’' => next.is_some_and(char::is_alphanumeric) && !all_digits,
            '.' | ',' => all_digits && next.is_some_and(|n| n.is_ascii_digit()),
            _ => false,
        };
        if !joins {
            break;
        }
        i += 1;
    }
    let len = chars.get(i).map_or(rest.len(), |&(b, _)| b);
    let kind = if all_digits {
        TokenKind::Number
    } else {
        TokenKind::Word
    };
    (len, kind)
}

/// Index range of the tokens whose spans intersect `span`.
///
/// Tokens must come from [`tokenize`] on a text of `text_len` chars.
pub fn overlapping_range(tokens: &[Token], span: Span, text_len: usize) -> Result<Range<usize>> {
    span.validate(text_len)?;
    let lo = tokens.partition_point(|t| t.span.end <= span.start);
    let hi = tokens.partition_point(|t| t.span.start < span.end);
    Ok(lo..hi.max(lo))
}

pub fn tokens_overlapping(tokens: &[Token], span: Span, text_len: usize) -> Result<&[Token]> {
    overlapping_range(tokens, span, text_len).map(|r| &tokens[r])
}
