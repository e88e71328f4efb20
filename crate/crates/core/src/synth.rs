//! Seeded synthetic corpora with recorded injection spans.
//!
//! Tweets are benign filler words with identifiable surface forms inserted
//! between them. Every insertion is recorded as a gold span, so the corpus
//! doubles as an exact oracle for the detectors. Phone numbers and email
//! addresses are only injected into tweets whose author is not verified,
//! which keeps the gold consistent with the gating rule.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AnnotatedTweet, EntityLabel, LabeledSpan, Span, Tweet};
use crate::recognizer::Gazetteer;

/// Lowercase words with no identifiable meaning. None of them is a gazetteer
/// token, a ZIP cue, or a state code.
pub const FILLER: &[&str] = &[
    "the", "a", "so", "really", "just", "got", "back", "from", "and", "it", "was", "great", "today",
    "tonight", "love", "this", "that", "we", "you", "they", "are", "is", "going", "to", "out", "with",
    "for", "about", "more", "some", "thanks", "everyone", "who", "came", "check", "see", "fresh",
    "post", "video", "photo", "week", "weekend", "morning", "coffee", "lunch", "dinner", "game",
    "show", "music", "team", "friends", "family", "happy", "tired", "excited", "finally", "again",
    "cannot", "wait", "here", "there", "now", "later", "always", "never", "very", "best", "fun",
    "nice", "good", "bad", "long", "day", "night", "home", "work", "school", "call", "text", "mail",
    "me", "us", "at", "on", "in", "of", "by", "our", "my", "your",
];

const END_PUNCT: &[&str] = &["!", ".", "?", "!!"];

const DOMAINS: &[&str] = &["example.com", "example.org", "mysite.net", "news.example.io", "shop.example.co"];
const SHORTENERS: &[&str] = &["t.co", "bit.ly", "ow.ly"];
const MAIL_HOSTS: &[&str] = &["example.com", "mail.example.org", "inbox.example.net"];
const ZIP_CUES: &[&str] = &["zip", "zip code", "zip code:", "postal code", "zipcode"];

const ALNUM: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
const LOWER: &[u8] = b"abcdefghijklmnopqrstuvwxyz";
const DIGITS: &[u8] = b"0123456789";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectionRates {
    /// Probability that a tweet receives one instance of each label.
    pub labels: BTreeMap<EntityLabel, f64>,
    /// Probability that a tweet's author is verified.
    pub verified: f64,
}

impl Default for InjectionRates {
    fn default() -> Self {
        let mut labels = BTreeMap::new();
        for label in EntityLabel::REMOVAL {
            labels.insert(label, 0.3);
        }
        for label in EntityLabel::ENTITY {
            labels.insert(label, 0.15);
        }
        InjectionRates {
            labels,
            verified: 0.2,
        }
    }
}

impl InjectionRates {
    pub fn zero() -> Self {
        InjectionRates {
            labels: EntityLabel::ALL.iter().map(|&l| (l, 0.0)).collect(),
            verified: 0.0,
        }
    }

    pub fn rate(&self, label: EntityLabel) -> f64 {
        self.labels.get(&label).copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |p: f64| !(0.0..=1.0).contains(&p);
        if let Some((label, p)) = self.labels.iter().find(|(_, &p)| bad(p)) {
            return Err(Error::Config(format!("rate for {label} is {p}, expected a value in [0, 1]")));
        }
        if bad(self.verified) {
            return Err(Error::Config(format!(
                "verified rate is {}, expected a value in [0, 1]",
                self.verified
            )));
        }
        Ok(())
    }
}

/// Parses `LABEL=p,...` on top of the defaults. `VERIFIED=p` sets the
/// verified rate and `ALL=p` sets every label.
impl FromStr for InjectionRates {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let mut rates = InjectionRates::default();
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("rate `{part}` is not KEY=VALUE")))?;
            let p: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("rate `{part}` has a non-numeric value")))?;
            match key.trim().to_ascii_uppercase().as_str() {
                "VERIFIED" => rates.verified = p,
                "ALL" => rates.labels.values_mut().for_each(|r| *r = p),
                other => {
                    let label: EntityLabel = other.parse().map_err(|_| {
                        Error::Config(format!("unknown label `{}` in rates", key.trim()))
                    })?;
                    rates.labels.insert(label, p);
                }
            }
        }
        rates.validate()?;
        Ok(rates)
    }
}

impl fmt::Display for InjectionRates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (label, p) in &self.labels {
            write!(f, "{label}={p},")?;
        }
        write!(f, "VERIFIED={}", self.verified)
    }
}

/// Corpus built from the bundled gazetteer.
pub fn generate_synthetic_corpus(seed: u64, n: usize, rates: &InjectionRates) -> Result<Vec<AnnotatedTweet>> {
    generate_with_gazetteer(seed, n, rates, &Gazetteer::builtin())
}

/// Corpus whose entity injections are drawn from `gazetteer`. Entity labels
/// without entries are skipped.
pub fn generate_with_gazetteer(
    seed: u64,
    n: usize,
    rates: &InjectionRates,
    gazetteer: &Gazetteer,
) -> Result<Vec<AnnotatedTweet>> {
    if n == 0 {
        return Err(Error::Config("corpus size must be at least 1".into()));
    }
    rates.validate()?;
    let surfaces: BTreeMap<EntityLabel, Vec<&str>> = gazetteer
        .entries()
        .iter()
        .map(|(&l, set)| (l, set.iter().map(String::as_str).collect()))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = n.to_string().len().max(4);
    (0..n)
        .map(|i| {
            let id = format!("syn{i:0width$}");
            build_tweet(&mut rng, id, rates, &surfaces)
        })
        .collect()
}

struct Builder {
    text: String,
    chars: usize,
    gold: Vec<LabeledSpan>,
}

impl Builder {
    fn push(&mut self, s: &str) {
        if !self.text.is_empty() {
            self.text.push(' ');
            self.chars += 1;
        }
        self.text.push_str(s);
        self.chars += s.chars().count();
    }

    fn inject(&mut self, prefix: &str, surface: &str, label: EntityLabel) {
        if !prefix.is_empty() {
            self.push(prefix);
        }
        self.push(surface);
        let end = self.chars;
        self.gold.push(LabeledSpan {
            span: Span::new(end - surface.chars().count(), end),
            label,
        });
    }

    fn filler(&mut self, rng: &mut impl Rng, lo: usize, hi: usize) {
        for _ in 0..rng.random_range(lo..=hi) {
            self.push(FILLER.choose(rng).expect("filler is non-empty"));
        }
    }
}

fn build_tweet(
    rng: &mut ChaCha8Rng,
    id: String,
    rates: &InjectionRates,
    surfaces: &BTreeMap<EntityLabel, Vec<&str>>,
) -> Result<AnnotatedTweet> {
    let verified = rng.random_bool(rates.verified);
    let mut labels: Vec<EntityLabel> = EntityLabel::ALL
        .iter()
        .copied()
        .filter(|&l| rng.random_bool(rates.rate(l)))
        .filter(|l| !(verified && matches!(l, EntityLabel::Phone | EntityLabel::Email)))
        .collect();
    labels.shuffle(rng);

    let mut b = Builder {
        text: String::new(),
        chars: 0,
        gold: Vec::new(),
    };
    b.filler(rng, 1, 4);
    for label in labels {
        if let Some((prefix, surface)) = surface_for(rng, label, surfaces) {
            b.inject(&prefix, &surface, label);
            b.filler(rng, 1, 3);
        }
    }
    if rng.random_bool(0.5) {
        b.text.push_str(END_PUNCT.choose(rng).expect("non-empty"));
    }
    let tweet = Tweet {
        lang: Some("en".into()),
        ..Tweet::new(id, b.text).verified(verified)
    };
    AnnotatedTweet::new(tweet, b.gold)
}

fn random_string(rng: &mut impl Rng, alphabet: &[u8], len: usize) -> String {
    (0..len)
        .map(|_| *alphabet.choose(rng).expect("non-empty alphabet") as char)
        .collect()
}

fn digits(rng: &mut impl Rng, len: usize) -> String {
    random_string(rng, DIGITS, len)
}

// A surface for `label`, plus non-gold words that must precede it.
fn surface_for(
    rng: &mut impl Rng,
    label: EntityLabel,
    surfaces: &BTreeMap<EntityLabel, Vec<&str>>,
) -> Option<(String, String)> {
    let plain = |s: String| Some((String::new(), s));
    match label {
        EntityLabel::Url => {
            let len = rng.random_range(4..=10);
            let path = random_string(rng, ALNUM, len);
            let url = match rng.random_range(0..3) {
                0 => format!("https://{}/{path}", DOMAINS.choose(rng)?),
                1 => format!("http://www.{}/p/{path}", DOMAINS.choose(rng)?),
                _ => format!("https://{}/{path}", SHORTENERS.choose(rng)?),
            };
            plain(url)
        }
        EntityLabel::Username => {
            let first = random_string(rng, LOWER, 1);
            let len = rng.random_range(2..=12);
            let rest = random_string(rng, b"abcdefghijklmnopqrstuvwxyz0123456789_", len);
            plain(format!("@{first}{rest}"))
        }
        EntityLabel::Email => {
            let (ulen, tlen) = (rng.random_range(3..=8), rng.random_range(1..=5));
            let user = random_string(rng, LOWER, ulen);
            let sep = [".", "_", ""].choose(rng)?;
            let tail = random_string(rng, LOWER, tlen);
            plain(format!("{user}{sep}{tail}@{}", MAIL_HOSTS.choose(rng)?))
        }
        EntityLabel::Phone => {
            let area = format!("{}{}", rng.random_range(2..=9), digits(rng, 2));
            let (mid, last) = (digits(rng, 3), digits(rng, 4));
            let phone = match rng.random_range(0..5) {
                0 => format!("{area}-{mid}-{last}"),
                1 => format!("({area}) {mid}-{last}"),
                2 => format!("{area}.{mid}.{last}"),
                3 => format!("+1 {area} {mid} {last}"),
                _ => format!("+44 20 {} {}", digits(rng, 4), digits(rng, 4)),
            };
            plain(phone)
        }
        EntityLabel::IdNumber => {
            let len = rng.random_range(10..=14);
            let mut chars: Vec<u8> = (0..len).map(|_| *ALNUM.choose(rng).expect("non-empty")).collect();
            // guarantee at least two letters and two digits
            chars[0] = *b"ABCDEFGHJKLMNPQRSTUVWXYZ".choose(rng)?;
            chars[1] = *LOWER.choose(rng)?;
            chars[len - 2] = *DIGITS.choose(rng)?;
            chars[len - 1] = *DIGITS.choose(rng)?;
            let mut id: Vec<u8> = chars;
            id[..len - 2].shuffle(rng);
            plain(String::from_utf8(id).expect("ascii"))
        }
        EntityLabel::Zip => {
            let zip = format!("{}{}", rng.random_range(1..=9), digits(rng, 4));
            if rng.random_bool(0.25) {
                plain(format!("{zip}-{}", digits(rng, 4)))
            } else {
                Some((ZIP_CUES.choose(rng)?.to_string(), zip))
            }
        }
        _ => {
            let options = surfaces.get(&label)?;
            options.choose(rng).map(|s| (String::new(), s.to_string()))
        }
    }
}
