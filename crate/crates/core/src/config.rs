//! TOML run configuration.
//!
//! ```toml
//! [detectors]
//! id_min_length = 9
//! zip_cue_words = ["zip", "postal code"]
//!
//! [recognizers]
//! gazetteer = "names.json"      # relative to this file; bundled list if absent
//! case_insensitive = false
//! adapter_timeout_ms = 10000
//! label_map = { PER = "PERSON", GPE = "CITY" }
//!
//! [masking]
//! seed = 7
//! policy = "default"
//! pool = "pool.json"
//! cross_tweet_consistency = false
//! actions = { PERSON = "delete" }
//! placeholders = { URL = "[link]" }
//! ```
//!
//! Command-line flags override file values.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;

use crate::detect::{DetectorConfig, RegexDetectors};
use crate::error::{Error, Result};
use crate::masking::{Action, PolicyPreset, ReplacementPolicy, ValuePool};
use crate::model::EntityLabel;
use crate::recognizer::{default_label_map, Gazetteer};

pub const CONFIG_ENV: &str = "NIGHTJAR_CONFIG";

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecognizerConfig {
    pub gazetteer: Option<PathBuf>,
    pub case_insensitive: bool,
    pub adapter_timeout_ms: Option<u64>,
    /// Extra or overriding entries for the external label map.
    pub label_map: BTreeMap<String, EntityLabel>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskingConfig {
    pub seed: Option<u64>,
    pub policy: Option<PolicyPreset>,
    pub pool: Option<PathBuf>,
    pub cross_tweet_consistency: bool,
    pub actions: BTreeMap<EntityLabel, Action>,
    pub placeholders: BTreeMap<EntityLabel, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub detectors: DetectorConfig,
    pub recognizers: RecognizerConfig,
    pub masking: MaskingConfig,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl Config {
    pub fn from_toml(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut config: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.base_dir = base_dir.into();
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Config::from_toml(&text, base).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Loads `path`, else the file named by `NIGHTJAR_CONFIG`, else defaults.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Config::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Config::load(Path::new(&p)),
                _ => Ok(Config::default()),
            },
        }
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn read(&self, p: &Path, what: &str) -> Result<String> {
        let full = self.resolve(p);
        fs::read_to_string(&full).map_err(|e| Error::Config(format!("{what} {}: {e}", full.display())))
    }

    pub fn detectors(&self) -> Result<RegexDetectors> {
        RegexDetectors::new(self.detectors.clone())
    }

    pub fn gazetteer(&self) -> Result<Gazetteer> {
        let gaz = match &self.recognizers.gazetteer {
            Some(p) => Gazetteer::from_json(&self.read(p, "gazetteer")?)?,
            None => Gazetteer::builtin(),
        };
        Ok(gaz.with_case_insensitive(self.recognizers.case_insensitive))
    }

    pub fn label_map(&self) -> BTreeMap<String, EntityLabel> {
        let mut map = default_label_map();
        map.extend(self.recognizers.label_map.clone());
        map
    }

    pub fn adapter_timeout(&self) -> Duration {
        Duration::from_millis(self.recognizers.adapter_timeout_ms.unwrap_or(10_000))
    }

    pub fn pool(&self) -> Result<ValuePool> {
        match &self.masking.pool {
            Some(p) => ValuePool::from_json(&self.read(p, "value pool")?),
            None => Ok(ValuePool::builtin()),
        }
    }

    /// The masking policy with optional flag overrides. Per-label actions
    /// and placeholders from the file apply on top of the chosen preset.
    pub fn policy(&self, seed: Option<u64>, preset: Option<PolicyPreset>) -> ReplacementPolicy {
        let m = &self.masking;
        let preset = preset.or(m.policy).unwrap_or(PolicyPreset::Default);
        let mut policy = ReplacementPolicy::preset(preset, seed.or(m.seed).unwrap_or(0));
        policy.actions.extend(m.actions.clone());
        policy.placeholders.extend(m.placeholders.clone());
        policy.cross_tweet_consistency = m.cross_tweet_consistency;
        policy
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_defaults() {
        let c = Config::from_toml("", ".").unwrap();
        assert_eq!(c.detectors, DetectorConfig::default());
        assert_eq!(c.policy(None, None), ReplacementPolicy::default());
    }

    #[test]
    fn doc_example_parses() {
        let text = r#"
[detectors]
id_min_length = 10
zip_cue_words = ["zip"]

[recognizers]
case_insensitive = true
label_map = { PER = "PERSON" }

[masking]
seed = 7
policy = "placeholder"
actions = { PERSON = "delete" }
placeholders = { URL = "[link]" }
"#;
        let c = Config::from_toml(text, ".").unwrap();
        assert_eq!(c.detectors.id_min_length, 10);
        assert_eq!(c.label_map()["PER"], EntityLabel::Person);
        assert_eq!(c.label_map()["ORG"], EntityLabel::Org);
        assert!(c.gazetteer().unwrap().case_insensitive());
        let p = c.policy(None, None);
        assert_eq!(p.seed, 7);
        assert_eq!(p.action(EntityLabel::Person), Action::Delete);
        assert_eq!(p.action(EntityLabel::Org), Action::Placeholder);
        assert_eq!(p.placeholders[&EntityLabel::Url], "[link]");
        let p = c.policy(Some(3), Some(PolicyPreset::Delete));
        assert_eq!(p.seed, 3);
        assert_eq!(p.action(EntityLabel::Url), Action::Delete);
    }

    #[test]
    fn unknown_keys_and_labels_rejected() {
        assert!(Config::from_toml("[detectors]\nid_min_lenght = 3", ".").is_err());
        assert!(Config::from_toml("[masking]\nactions = { PERSN = \"delete\" }", ".").is_err());
        assert!(Config::from_toml("[masking]\npolicy = \"shred\"", ".").is_err());
    }

    #[test]
    fn paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("g.json"), r#"{"PERSON": ["Zed"]}"#).unwrap();
        fs::write(dir.path().join("p.json"), r#"{"PERSON": ["Quinn"]}"#).unwrap();
        let cfg = dir.path().join("run.toml");
        fs::write(&cfg, "[recognizers]\ngazetteer = \"g.json\"\n[masking]\npool = \"p.json\"\n").unwrap();
        let c = Config::load(&cfg).unwrap();
        assert_eq!(c.gazetteer().unwrap().entries()[&EntityLabel::Person].len(), 1);
        assert_eq!(c.pool().unwrap().values(EntityLabel::Person), ["Quinn".to_string()]);

        fs::write(&cfg, "[masking]\npool = \"missing.json\"\n").unwrap();
        let e = Config::load(&cfg).unwrap().pool().unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }
}
