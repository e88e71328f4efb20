//! Edit planning and synthetic replacement.
//!
//! Each tweet gets its own RNG stream keyed on `(seed, tweet id)`, so a
//! tweet's masked output does not depend on which other tweets are in the
//! corpus or in what order they are processed.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::detect::{is_regex_source, run_regex_detectors};
use crate::error::{Error, Result};
use crate::model::{Detection, Edit, EntityLabel, LabelClass, MaskedTweet, Tweet};
use crate::text::CharIndex;

const BUILTIN_POOL: &str = include_str!("../data/pool.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Delete,
    Placeholder,
    Synthetic,
}

/// Named starting points for a [`ReplacementPolicy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyPreset {
    /// Placeholders for removal-class labels, synthetic values for entities.
    Default,
    Placeholder,
    Delete,
    /// Like `Default`, but usernames become synthetic handles.
    Synthetic,
}

impl std::str::FromStr for PolicyPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(PolicyPreset::Default),
            "placeholder" => Ok(PolicyPreset::Placeholder),
            "delete" => Ok(PolicyPreset::Delete),
            "synthetic" => Ok(PolicyPreset::Synthetic),
            other => Err(Error::Config(format!("unknown policy `{other}`"))),
        }
    }
}

pub fn default_placeholder(label: EntityLabel) -> &'static str {
    match label {
        EntityLabel::Url => "<URL>",
        EntityLabel::Username => "<USER>",
        EntityLabel::Phone => "<PHONE>",
        EntityLabel::Email => "<EMAIL>",
        EntityLabel::IdNumber => "<ID>",
        EntityLabel::Zip => "<ZIP>",
        EntityLabel::Person => "<PERSON>",
        EntityLabel::Org => "<ORG>",
        EntityLabel::Group => "<GROUP>",
        EntityLabel::City => "<CITY>",
        EntityLabel::State => "<STATE>",
        EntityLabel::Country => "<COUNTRY>",
        EntityLabel::Location => "<LOCATION>",
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplacementPolicy {
    pub actions: BTreeMap<EntityLabel, Action>,
    pub placeholders: BTreeMap<EntityLabel, String>,
    pub seed: u64,
    /// Key synthetic draws on the surface instead of the tweet, so the same
    /// name gets the same replacement across the corpus.
    pub cross_tweet_consistency: bool,
}

impl Default for ReplacementPolicy {
    fn default() -> Self {
        ReplacementPolicy::preset(PolicyPreset::Default, 0)
    }
}

impl ReplacementPolicy {
    pub fn preset(preset: PolicyPreset, seed: u64) -> Self {
        let actions = EntityLabel::ALL
            .into_iter()
            .map(|label| {
                let action = match (preset, label.class()) {
                    (PolicyPreset::Placeholder, _) => Action::Placeholder,
                    (PolicyPreset::Delete, _) => Action::Delete,
                    (PolicyPreset::Synthetic, _) if label == EntityLabel::Username => Action::Synthetic,
                    (_, LabelClass::Removal) => Action::Placeholder,
                    (_, LabelClass::Entity) => Action::Synthetic,
                };
                (label, action)
            })
            .collect();
        let placeholders = EntityLabel::ALL
            .into_iter()
            .map(|l| (l, default_placeholder(l).to_string()))
            .collect();
        ReplacementPolicy {
            actions,
            placeholders,
            seed,
            cross_tweet_consistency: false,
        }
    }

    pub fn action(&self, label: EntityLabel) -> Action {
        self.actions[&label]
    }

    /// Checks the policy against a pool before any tweet is processed.
    pub fn validate(&self, pool: &ValuePool) -> Result<()> {
        for label in EntityLabel::ALL {
            let action = self
                .actions
                .get(&label)
                .ok_or_else(|| Error::Config(format!("no action for {label}")))?;
            match action {
                Action::Synthetic if label.class() == LabelClass::Removal && label != EntityLabel::Username => {
                    return Err(Error::Config(format!("{label} cannot be replaced synthetically")));
                }
                Action::Synthetic if label.class() == LabelClass::Entity && pool.values(label).is_empty() => {
                    return Err(Error::Config(format!("value pool for {label} is empty")));
                }
                Action::Placeholder => {
                    let template = self
                        .placeholders
                        .get(&label)
                        .ok_or_else(|| Error::Config(format!("no placeholder for {label}")))?;
                    if !run_regex_detectors(&Tweet::new("placeholder", template.as_str())).is_empty() {
                        return Err(Error::Config(format!(
                            "placeholder `{template}` for {label} would be detected again"
                        )));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Synthetic surface values per entity label.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValuePool {
    values: BTreeMap<EntityLabel, Vec<String>>,
}

impl ValuePool {
    pub fn new(values: BTreeMap<EntityLabel, Vec<String>>) -> Result<Self> {
        for (label, list) in &values {
            for v in list {
                if v.trim().is_empty() {
                    return Err(Error::Config(format!("empty pool value for {label}")));
                }
                if !run_regex_detectors(&Tweet::new("pool", v.as_str())).is_empty() {
                    return Err(Error::Config(format!("pool value `{v}` for {label} would be detected again")));
                }
            }
        }
        Ok(ValuePool { values })
    }

    pub fn builtin() -> Self {
        ValuePool::from_json(BUILTIN_POOL).expect("bundled pool is valid")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let raw: BTreeMap<String, Vec<String>> =
            serde_json::from_str(json).map_err(|e| Error::Config(format!("value pool: {e}")))?;
        let values = raw
            .into_iter()
            .map(|(k, v)| Ok((k.parse::<EntityLabel>()?, v)))
            .collect::<Result<_>>()?;
        ValuePool::new(values)
    }

    pub fn values(&self, label: EntityLabel) -> &[String] {
        self.values.get(&label).map_or(&[], Vec::as_slice)
    }
}

/// A synthetic handle: `@` then 6 to 12 lowercase letters, digits or `_`.
fn synth_handle(rng: &mut impl Rng) -> String {
    const FIRST: &[u8] = b"abcdefghijklmnopqrstuvwxyz";
    const REST: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789_";
    let len = rng.random_range(6..=12);
    let mut handle = String::with_capacity(len + 1);
    handle.push('@');
    handle.push(FIRST[rng.random_range(0..FIRST.len())] as char);
    for _ in 1..len {
        handle.push(REST[rng.random_range(0..REST.len())] as char);
    }
    handle
}

/// Draws a replacement value uniformly from the label's pool.
pub fn synth_value(label: EntityLabel, pool: &ValuePool, rng: &mut impl Rng) -> Result<String> {
    if label == EntityLabel::Username {
        return Ok(synth_handle(rng));
    }
    let values = pool.values(label);
    if values.is_empty() {
        return Err(Error::Config(format!("value pool for {label} is empty")));
    }
    Ok(values[rng.random_range(0..values.len())].clone())
}

pub fn rng_for(seed: u64, key: &[&[u8]]) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    for part in key {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part);
    }
    ChaCha8Rng::from_seed(hasher.finalize().into())
}

/// Picks one of any set of overlapping detections.
///
/// Preference order: pattern detector over recognizer, longer span, label
/// priority, earlier start. Output is sorted and non-overlapping.
pub fn resolve_spans(detections: &[Detection]) -> Vec<Detection> {
    let mut ranked: Vec<&Detection> = detections.iter().collect();
    ranked.sort_by_key(|d| {
        (
            !is_regex_source(&d.source),
            std::cmp::Reverse(d.span.len()),
            d.label.priority(),
            d.span.start,
            d.source.clone(),
        )
    });
    let mut kept: Vec<Detection> = Vec::new();
    for d in ranked {
        if !kept.iter().any(|k| k.span.overlaps(d.span)) {
            kept.push(d.clone());
        }
    }
    kept.sort_by_key(|d| (d.span.start, d.span.end));
    kept
}

/// Applies a validated policy; construct once per run.
#[derive(Debug, Clone)]
pub struct Masker {
    policy: ReplacementPolicy,
    pool: ValuePool,
}

impl Masker {
    pub fn new(policy: ReplacementPolicy, pool: ValuePool) -> Result<Self> {
        policy.validate(&pool)?;
        Ok(Masker { policy, pool })
    }

    pub fn policy(&self) -> &ReplacementPolicy {
        &self.policy
    }

    fn draw(&self, tweet_rng: &mut ChaCha8Rng, label: EntityLabel, surface: &str) -> Result<String> {
        let mut local;
        let rng = if self.policy.cross_tweet_consistency {
            local = rng_for(self.policy.seed, &[label.as_str().as_bytes(), surface.as_bytes()]);
            &mut local
        } else {
            tweet_rng
        };
        let distinct = self.pool.values(label).iter().any(|v| v != surface);
        let mut value = synth_value(label, &self.pool, rng)?;
        // avoid echoing the original surface back when another value exists
        let mut tries = 0;
        while distinct && value == surface && tries < 32 {
            value = synth_value(label, &self.pool, rng)?;
            tries += 1;
        }
        Ok(value)
    }

    /// Detections must be resolved (sorted, non-overlapping) spans of
    /// `tweet.text`.
    pub fn mask_tweet(&self, tweet: &Tweet, detections: &[Detection]) -> Result<MaskedTweet> {
        let index = CharIndex::new(&tweet.text);
        let len = index.char_len();
        for pair in detections.windows(2) {
            if pair[1].span.start < pair[0].span.end {
                return Err(Error::tweet(&tweet.id, "detections overlap or are unsorted"));
            }
        }
        let mut rng = rng_for(self.policy.seed, &[tweet.id.as_bytes()]);
        let mut memo: HashMap<(EntityLabel, &str), String> = HashMap::new();
        let mut planned: Vec<(&Detection, Option<String>)> = Vec::with_capacity(detections.len());
        for d in detections {
            d.span
                .validate(len)
                .map_err(|e| Error::tweet(&tweet.id, e.to_string()))?;
            let replacement = match self.policy.action(d.label) {
                Action::Delete => None,
                Action::Placeholder => Some(self.policy.placeholders[&d.label].clone()),
                Action::Synthetic => {
                    let key = (d.label, index.slice(d.span));
                    if let Some(v) = memo.get(&key) {
                        Some(v.clone())
                    } else {
                        let v = self.draw(&mut rng, d.label, key.1)?;
                        memo.insert(key, v.clone());
                        Some(v)
                    }
                }
            };
            planned.push((d, replacement));
        }
        let edits = plan_edits(&index, &planned);
        let masked = MaskedTweet {
            tweet_id: tweet.id.clone(),
            original_text: tweet.text.clone(),
            masked_text: String::new(),
            edits,
        };
        let masked_text = masked.replay();
        Ok(MaskedTweet { masked_text, ..masked })
    }
}

// Deletions absorb surrounding whitespace so the result has single spaces
// and no leading or trailing whitespace at the deletion sites. Consecutive
// deletions separated only by whitespace are handled as one group.
fn plan_edits(index: &CharIndex<'_>, planned: &[(&Detection, Option<String>)]) -> Vec<Edit> {
    let chars: Vec<char> = index.text().chars().collect();
    let len = chars.len();
    let is_ws = |i: usize| chars[i].is_whitespace();
    let mut edits = Vec::with_capacity(planned.len());
    let mut prev_end = 0;
    let mut i = 0;
    while i < planned.len() {
        let (d, replacement) = &planned[i];
        if let Some(r) = replacement {
            edits.push(edit(d, d.span.start, d.span.end, r.clone()));
            prev_end = d.span.end;
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < planned.len()
            && planned[j + 1].1.is_none()
            && (planned[j].0.span.end..planned[j + 1].0.span.start).all(is_ws)
        {
            j += 1;
        }
        let next_start = planned.get(j + 1).map_or(len, |(n, _)| n.span.start);
        let mut left = planned[i].0.span.start;
        while left > prev_end && is_ws(left - 1) {
            left -= 1;
        }
        let mut right = planned[j].0.span.end;
        while right < next_start && is_ws(right) {
            right += 1;
        }
        let absorbed = left < planned[i].0.span.start || right > planned[j].0.span.end;
        let joiner = if left == 0 || right == len || !absorbed { "" } else { " " };
        for k in i..=j {
            let d = planned[k].0;
            let start = if k == i { left } else { d.span.start };
            let end = if k == j { right } else { planned[k + 1].0.span.start };
            let r = if k == j { joiner } else { "" };
            edits.push(edit(d, start, end, r.to_string()));
        }
        prev_end = right;
        i = j + 1;
    }
    edits
}

fn edit(d: &Detection, start: usize, end: usize, replacement: String) -> Edit {
    Edit {
        start,
        end,
        label: d.label,
        replacement,
        source: d.source.clone(),
    }
}

pub fn mask_tweet(tweet: &Tweet, detections: &[Detection], policy: &ReplacementPolicy, pool: &ValuePool) -> Result<MaskedTweet> {
    Masker::new(policy.clone(), pool.clone())?.mask_tweet(tweet, detections)
}
