//! Detection and masking over whole corpora.
//!
//! Per tweet: pattern detectors, then every recognizer, then the token-level
//! union of the recognizers, then overlap resolution. Corpus functions keep
//! input order regardless of the number of workers.

use crate::detect::RegexDetectors;
use crate::error::{Error, Result};
use crate::masking::{resolve_spans, Masker};
use crate::model::{Detection, MaskedTweet, Tweet};
use crate::recognizer::{union_combine, Recognizer};
use crate::tokenizer::tokenize;

pub struct Pipeline {
    detectors: RegexDetectors,
    recognizers: Vec<Box<dyn Recognizer>>,
}

impl Pipeline {
    pub fn new(detectors: RegexDetectors, recognizers: Vec<Box<dyn Recognizer>>) -> Result<Self> {
        let mut names: Vec<&str> = recognizers.iter().map(|r| r.name()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("recognizer name `{}` used twice", w[0])));
        }
        Ok(Pipeline {
            detectors,
            recognizers,
        })
    }

    /// Pattern detectors only.
    pub fn regex_only() -> Self {
        Pipeline {
            detectors: RegexDetectors::default(),
            recognizers: Vec::new(),
        }
    }

    pub fn recognizer_names(&self) -> Vec<&str> {
        self.recognizers.iter().map(|r| r.name()).collect()
    }

    /// Resolved, sorted, non-overlapping detections for one tweet.
    pub fn detect(&self, tweet: &Tweet) -> Result<Vec<Detection>> {
        let mut all = self.detectors.run(tweet);
        if !self.recognizers.is_empty() {
            let tokens = tokenize(&tweet.text);
            let results = self
                .recognizers
                .iter()
                .map(|r| Ok((r.name().to_string(), r.recognize(tweet, &tokens)?)))
                .collect::<Result<Vec<_>>>()?;
            all.extend(union_combine(&tweet.text, &tokens, &results)?);
        }
        Ok(resolve_spans(&all))
    }

    pub fn detect_corpus(&self, tweets: &[Tweet], jobs: usize) -> Result<Vec<Vec<Detection>>> {
        map_ordered(tweets, jobs, |t| self.detect(t))
    }

    pub fn mask_corpus(&self, masker: &Masker, tweets: &[Tweet], jobs: usize) -> Result<Vec<MaskedTweet>> {
        map_ordered(tweets, jobs, |t| masker.mask_tweet(t, &self.detect(t)?))
    }
}

/// Applies `f` to every item, with up to `jobs` workers, keeping order. The
/// first error in input order is returned.
pub fn map_ordered<T, U, F>(items: &[T], jobs: usize, f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if jobs > 1 && items.len() > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))?;
        return pool.install(|| items.par_iter().map(&f).collect());
    }
    let _ = jobs;
    items.iter().map(f).collect()
}
