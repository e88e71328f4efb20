//! Pattern-based detectors for the removal-class labels.
//!
//! Phone numbers and email addresses are only reported for authors whose
//! account is not verified. When patterns overlap, [`RegexDetectors::run`]
//! lets the earlier detector in `URL > EMAIL > USERNAME > PHONE > ID_NUMBER > ZIP`
//! claim the characters.

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Detection, EntityLabel, Span, Tweet};
use crate::patterns::{self, is_handle_char, is_word_char};
use crate::text::CharIndex;

type ByteRanges = Vec<(usize, usize)>;

pub const SOURCE_URL: &str = "regex:url";
pub const SOURCE_USERNAME: &str = "regex:username";
pub const SOURCE_PHONE: &str = "regex:phone";
pub const SOURCE_EMAIL: &str = "regex:email";
pub const SOURCE_ID: &str = "regex:id_number";
pub const SOURCE_ZIP: &str = "regex:zip";

pub fn is_regex_source(source: &str) -> bool {
    source.starts_with("regex:")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    /// Minimum length of an identification-number token, in chars.
    pub id_min_length: usize,
    pub id_min_letters: usize,
    pub id_min_digits: usize,
    /// Words that mark an adjacent 5-digit number as a ZIP code.
    pub zip_cue_words: Vec<String>,
    pub url_pattern: Option<String>,
    pub email_pattern: Option<String>,
    pub username_pattern: Option<String>,
    pub phone_pattern: Option<String>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            id_min_length: 9,
            id_min_letters: 2,
            id_min_digits: 2,
            zip_cue_words: patterns::ZIP_CUE_WORDS.iter().map(|s| s.to_string()).collect(),
            url_pattern: None,
            email_pattern: None,
            username_pattern: None,
            phone_pattern: None,
        }
    }
}

/// Compiled detectors; build once and share.
#[derive(Debug, Clone)]
pub struct RegexDetectors {
    url: Regex,
    email: Regex,
    username: Regex,
    phone: Regex,
    hashtag: Regex,
    alnum: Regex,
    zip: Regex,
    zip_plus_four: Regex,
    whole: [Regex; 5],
    config: DetectorConfig,
}

static DEFAULT: Lazy<RegexDetectors> =
    Lazy::new(|| RegexDetectors::new(DetectorConfig::default()).expect("default patterns compile"));

fn compile(name: &str, pattern: &str) -> Result<Regex> {
    Regex::new(pattern).map_err(|e| Error::Config(format!("{name} pattern: {e}")))
}

impl Default for RegexDetectors {
    fn default() -> Self {
        DEFAULT.clone()
    }
}

impl RegexDetectors {
    pub fn new(config: DetectorConfig) -> Result<Self> {
        if config.id_min_length == 0 {
            return Err(Error::Config("id_min_length must be positive".into()));
        }
        if config.zip_cue_words.iter().any(|w| w.trim().is_empty()) {
            return Err(Error::Config("zip_cue_words must be non-empty strings".into()));
        }
        let url = config.url_pattern.as_deref().unwrap_or(patterns::URL);
        let email = config.email_pattern.as_deref().unwrap_or(patterns::EMAIL);
        let username = config.username_pattern.as_deref().unwrap_or(patterns::USERNAME);
        let phone = config.phone_pattern.as_deref().unwrap_or(patterns::PHONE);
        let whole = |name: &str, p: &str| compile(name, &format!("^(?:{p})$"));
        Ok(RegexDetectors {
            url: compile("url", url)?,
            email: compile("email", email)?,
            username: compile("username", username)?,
            phone: compile("phone", phone)?,
            hashtag: compile("hashtag", patterns::HASHTAG)?,
            alnum: compile("alnum", patterns::ALNUM_RUN)?,
            zip: compile("zip", patterns::ZIP)?,
            zip_plus_four: compile("zip", patterns::ZIP_PLUS_FOUR)?,
            whole: [
                whole("url", url)?,
                whole("email", email)?,
                whole("username", username)?,
                whole("phone", phone)?,
                whole("zip", patterns::ZIP)?,
            ],
            config,
        })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn detect_urls(&self, text: &str) -> Vec<Detection> {
        let index = CharIndex::new(text);
        self.url_bytes(&index)
            .into_iter()
            .map(|(s, e)| detection(&index, s, e, EntityLabel::Url, SOURCE_URL))
            .collect()
    }

    pub fn detect_usernames(&self, text: &str) -> Vec<Detection> {
        let index = CharIndex::new(text);
        self.username_bytes(&index)
            .into_iter()
            .map(|(s, e)| detection(&index, s, e, EntityLabel::Username, SOURCE_USERNAME))
            .collect()
    }

    pub fn detect_phone_numbers(&self, text: &str, author_verified: bool) -> Vec<Detection> {
        if author_verified {
            return Vec::new();
        }
        let index = CharIndex::new(text);
        self.phone_bytes(&index)
            .into_iter()
            .map(|(s, e)| detection(&index, s, e, EntityLabel::Phone, SOURCE_PHONE))
            .collect()
    }

    pub fn detect_emails(&self, text: &str, author_verified: bool) -> Vec<Detection> {
        if author_verified {
            return Vec::new();
        }
        let index = CharIndex::new(text);
        self.email_bytes(&index)
            .into_iter()
            .map(|(s, e)| detection(&index, s, e, EntityLabel::Email, SOURCE_EMAIL))
            .collect()
    }

    pub fn detect_id_numbers(&self, text: &str) -> Vec<Detection> {
        let index = CharIndex::new(text);
        self.id_bytes(&index)
            .into_iter()
            .map(|(s, e)| detection(&index, s, e, EntityLabel::IdNumber, SOURCE_ID))
            .collect()
    }

    pub fn detect_zip_codes(&self, text: &str) -> Vec<Detection> {
        let index = CharIndex::new(text);
        self.zip_bytes(&index)
            .into_iter()
            .map(|(s, e)| detection(&index, s, e, EntityLabel::Zip, SOURCE_ZIP))
            .collect()
    }

    /// All detectors in precedence order; later detectors skip claimed chars.
    pub fn run(&self, tweet: &Tweet) -> Vec<Detection> {
        let index = CharIndex::new(&tweet.text);
        let mut groups: Vec<(ByteRanges, EntityLabel, &str)> = vec![
            (self.url_bytes(&index), EntityLabel::Url, SOURCE_URL),
        ];
        if !tweet.author_verified {
            groups.push((self.email_bytes(&index), EntityLabel::Email, SOURCE_EMAIL));
        }
        groups.push((self.username_bytes(&index), EntityLabel::Username, SOURCE_USERNAME));
        if !tweet.author_verified {
            groups.push((self.phone_bytes(&index), EntityLabel::Phone, SOURCE_PHONE));
        }
        groups.push((self.id_bytes(&index), EntityLabel::IdNumber, SOURCE_ID));
        groups.push((self.zip_bytes(&index), EntityLabel::Zip, SOURCE_ZIP));

        let mut claimed: Vec<(usize, usize)> = Vec::new();
        let mut out = Vec::new();
        for (matches, label, source) in groups {
            let fresh: Vec<_> = matches
                .into_iter()
                .filter(|&(s, e)| !claimed.iter().any(|&(cs, ce)| s < ce && cs < e))
                .collect();
            for &(s, e) in &fresh {
                out.push(detection(&index, s, e, label, source));
            }
            claimed.extend(fresh);
        }
        out.sort_by_key(|d| (d.span.start, d.span.end));
        out
    }

    /// Whether `surface`, taken on its own, is a match for the label's rule.
    pub fn rematches(&self, label: EntityLabel, surface: &str) -> bool {
        match label {
            EntityLabel::Url => self.whole[0].is_match(surface),
            EntityLabel::Email => self.whole[1].is_match(surface),
            EntityLabel::Username => self.whole[2].is_match(surface),
            EntityLabel::Phone => {
                self.whole[3].is_match(surface) && (7..=15).contains(&digit_count(surface))
            }
            EntityLabel::IdNumber => self.is_id_like(surface),
            EntityLabel::Zip => self.whole[4].is_match(surface),
            _ => false,
        }
    }

    fn url_bytes(&self, index: &CharIndex<'_>) -> Vec<(usize, usize)> {
        bounded_matches(&self.url, index, |s, _| {
            index
                .char_before(s)
                .is_none_or(|c| !is_word_char(c) && !matches!(c, '@' | '.' | '/'))
        })
    }

    fn email_bytes(&self, index: &CharIndex<'_>) -> Vec<(usize, usize)> {
        bounded_matches(&self.email, index, |s, e| {
            index.char_before(s).is_none_or(|c| !is_word_char(c) && c != '@')
                && index.char_after(e).is_none_or(|c| !is_word_char(c) && c != '@')
        })
    }

    fn username_bytes(&self, index: &CharIndex<'_>) -> Vec<(usize, usize)> {
        bounded_matches(&self.username, index, |s, e| {
            index.char_before(s).is_none_or(|c| !is_word_char(c) && c != '@')
                && index.char_after(e).is_none_or(|c| !is_handle_char(c) && c != '@')
        })
    }

    fn phone_bytes(&self, index: &CharIndex<'_>) -> Vec<(usize, usize)> {
        let text = index.text();
        bounded_matches(&self.phone, index, |s, e| {
            let before_ok = index
                .char_before(s)
                .is_none_or(|c| !is_word_char(c) && !"+-./$#@".contains(c));
            let mut after = text[e..].chars();
            let after_ok = match after.next() {
                None => true,
                Some(c) if is_word_char(c) => false,
                Some('-' | '.' | '/' | ',') => !after.next().is_some_and(|n| n.is_ascii_digit()),
                Some(_) => true,
            };
            before_ok && after_ok && (7..=15).contains(&digit_count(&text[s..e]))
        })
    }

    fn hashtag_bytes(&self, index: &CharIndex<'_>) -> Vec<(usize, usize)> {
        bounded_matches(&self.hashtag, index, |s, _| {
            index.char_before(s).is_none_or(|c| !is_word_char(c))
        })
    }

    fn id_bytes(&self, index: &CharIndex<'_>) -> Vec<(usize, usize)> {
        let mut excluded = self.url_bytes(index);
        excluded.extend(self.email_bytes(index));
        excluded.extend(self.username_bytes(index));
        excluded.extend(self.hashtag_bytes(index));
        let text = index.text();
        bounded_matches(&self.alnum, index, |s, e| {
            index.char_before(s).is_none_or(|c| !matches!(c, '#' | '@' | '$'))
                && !excluded.iter().any(|&(xs, xe)| s < xe && xs < e)
                && self.is_id_like(&text[s..e])
        })
    }

    fn is_id_like(&self, token: &str) -> bool {
        let cfg = &self.config;
        token.chars().count() >= cfg.id_min_length
            && token.chars().all(|c| c.is_ascii_alphanumeric())
            && token.chars().filter(char::is_ascii_alphabetic).count() >= cfg.id_min_letters
            && digit_count(token) >= cfg.id_min_digits
    }

    fn zip_bytes(&self, index: &CharIndex<'_>) -> Vec<(usize, usize)> {
        let text = index.text();
        bounded_matches(&self.zip, index, |s, e| {
            let before_ok = index
                .char_before(s)
                .is_none_or(|c| !is_word_char(c) && !"+-./$#@,".contains(c));
            let mut after = text[e..].chars();
            let after_ok = match after.next() {
                None => true,
                Some(c) if is_word_char(c) => false,
                Some('-' | '.' | '/' | ',') => !after.next().is_some_and(|n| n.is_ascii_digit()),
                Some(_) => true,
            };
            before_ok
                && after_ok
                && (self.zip_plus_four.is_match(&text[s..e])
                    || self.has_zip_cue(&text[..s], &text[e..]))
        })
    }

    fn has_zip_cue(&self, before: &str, after: &str) -> bool {
        let line_before = before.rsplit('\n').next().unwrap_or("");
        let line_after = after.split('\n').next().unwrap_or("");
        let prefix = line_before
            .trim_end()
            .trim_end_matches([':', '#'])
            .trim_end();
        let suffix = line_after.trim_start();
        let lower_prefix = prefix.to_lowercase();
        let lower_suffix = suffix.to_lowercase();
        for cue in &self.config.zip_cue_words {
            let cue = cue.to_lowercase();
            if ends_with_word(&lower_prefix, &cue) || starts_with_word(&lower_suffix, &cue) {
                return true;
            }
        }
        // a state abbreviation or name right before a ZIP at the end of a line
        let state_prefix = prefix.trim_end_matches(',').trim_end();
        let at_line_end = !line_after.chars().any(is_word_char);
        at_line_end
            && (patterns::STATE_CODES
                .iter()
                .any(|code| ends_with_word(state_prefix, code))
                || patterns::STATE_NAMES
                    .iter()
                    .any(|name| ends_with_word(state_prefix, name)))
    }
}

fn ends_with_word(haystack: &str, word: &str) -> bool {
    haystack.strip_suffix(word).is_some_and(|rest| {
        rest.chars().next_back().is_none_or(|c| !is_word_char(c))
    })
}

fn starts_with_word(haystack: &str, word: &str) -> bool {
    haystack.strip_prefix(word).is_some_and(|rest| {
        rest.chars().next().is_none_or(|c| !is_word_char(c))
    })
}

fn digit_count(s: &str) -> usize {
    s.chars().filter(char::is_ascii_digit).count()
}

// Non-overlapping matches, left to right, passing `accept(start, end)` on
// byte offsets. A rejected match resumes the search one char later.
fn bounded_matches(
    re: &Regex,
    index: &CharIndex<'_>,
    accept: impl Fn(usize, usize) -> bool,
) -> Vec<(usize, usize)> {
    let text = index.text();
    let mut out = Vec::new();
    let mut at = 0;
    while at <= text.len() {
        let Some(m) = re.find_at(text, at) else { break };
        if m.is_empty() {
            at = m.end() + index.char_after(m.end()).map_or(1, char::len_utf8);
            continue;
        }
        if accept(m.start(), m.end()) {
            out.push((m.start(), m.end()));
            at = m.end();
        } else {
            at = m.start() + index.char_after(m.start()).map_or(1, char::len_utf8);
        }
    }
    out
}

fn detection(index: &CharIndex<'_>, s: usize, e: usize, label: EntityLabel, source: &str) -> Detection {
    let span: Span = index.span_of_bytes(s, e);
    Detection::from_index(index, span, label, source)
}

pub fn detect_urls(text: &str) -> Vec<Detection> {
    DEFAULT.detect_urls(text)
}

pub fn detect_usernames(text: &str) -> Vec<Detection> {
    DEFAULT.detect_usernames(text)
}

pub fn detect_phone_numbers(text: &str, author_verified: bool) -> Vec<Detection> {
    DEFAULT.detect_phone_numbers(text, author_verified)
}

pub fn detect_emails(text: &str, author_verified: bool) -> Vec<Detection> {
    DEFAULT.detect_emails(text, author_verified)
}

pub fn detect_id_numbers(text: &str) -> Vec<Detection> {
    DEFAULT.detect_id_numbers(text)
}

pub fn detect_zip_codes(text: &str) -> Vec<Detection> {
    DEFAULT.detect_zip_codes(text)
}

pub fn run_regex_detectors(tweet: &Tweet) -> Vec<Detection> {
    DEFAULT.run(tweet)
}
