//! wasm-bindgen exports for the static demo page.
//!
//! Every function takes plain strings and returns JSON, so the page needs no
//! generated type glue beyond `JSON.parse`.

use nightjar::detect::RegexDetectors;
use nightjar::masking::{Masker, PolicyPreset, ReplacementPolicy, ValuePool};
use nightjar::model::Tweet;
use nightjar::pipeline::Pipeline;
use nightjar::recognizer::{Gazetteer, GazetteerRecognizer};
use wasm_bindgen::prelude::*;

fn pipeline() -> Result<Pipeline, JsError> {
    let builtin = GazetteerRecognizer::new("builtin", Gazetteer::builtin());
    Ok(Pipeline::new(RegexDetectors::default(), vec![Box::new(builtin)])?)
}

fn tweet(text: &str, verified: bool) -> Tweet {
    Tweet::new("demo", text).verified(verified)
}

/// Tokens with char offsets, as a JSON array.
#[wasm_bindgen]
pub fn tokenize(text: &str) -> Result<String, JsError> {
    Ok(serde_json::to_string(&nightjar::tokenizer::tokenize(text))?)
}

/// Regex and gazetteer detections, as a JSON array.
#[wasm_bindgen]
pub fn detect(text: &str, verified: bool) -> Result<String, JsError> {
    let detections = pipeline()?.detect(&tweet(text, verified))?;
    Ok(serde_json::to_string(&detections)?)
}

/// Masked tweet record. `policy` is `default`, `placeholder` or `delete`.
#[wasm_bindgen]
pub fn mask(text: &str, verified: bool, policy: &str, seed: u64) -> Result<String, JsError> {
    let preset: PolicyPreset = policy.parse()?;
    let masker = Masker::new(ReplacementPolicy::preset(preset, seed), ValuePool::builtin())?;
    let t = tweet(text, verified);
    let detections = pipeline()?.detect(&t)?;
    Ok(serde_json::to_string(&masker.mask_tweet(&t, &detections)?)?)
}
