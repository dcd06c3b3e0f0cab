use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::HarnessError;
use crate::belief::BeliefConfig;
use crate::planner::{ArmSpec, EpisodeConfig, MctsConfig, ProjectionKind};
use crate::provider::{ProviderConfig, ProviderKind};
use crate::worldgen::{Catalog, GenerationConfig};

/// Per-episode step budget: a constant, or relative to the number of
/// location symbols `L` of each world.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    Fixed(usize),
    /// `L + k`.
    PerSymbol(usize),
}

impl Budget {
    pub fn resolve(self, symbols: usize) -> usize {
        match self {
            Self::Fixed(n) => n,
            Self::PerSymbol(k) => symbols + k,
        }
    }

    fn parse(text: &str) -> Result<Self, String> {
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if t == "L" {
            return Ok(Self::PerSymbol(0));
        }
        if let Some(k) = t.strip_prefix("L+") {
            return k
                .parse()
                .map(Self::PerSymbol)
                .map_err(|_| format!("budget `{text}`: expected `L+k` with integer k"));
        }
        t.parse()
            .map(Self::Fixed)
            .map_err(|_| format!("budget `{text}`: expected an integer, `L` or `L+k`"))
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fixed(n) => write!(f, "{n}"),
            Self::PerSymbol(0) => f.write_str("L"),
            Self::PerSymbol(k) => write!(f, "L+{k}"),
        }
    }
}

impl Serialize for Budget {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Fixed(n) => s.serialize_u64(*n as u64),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Budget {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) if n >= 0 => Ok(Self::Fixed(n as usize)),
            Raw::Int(n) => Err(serde::de::Error::custom(format!("budget {n} is negative"))),
            Raw::Text(t) => Self::parse(&t).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedConfig {
    pub base: u64,
    /// Episodes per arm.
    pub count: u64,
}

impl Default for SeedConfig {
    fn default() -> Self {
        Self {
            base: 0,
            count: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub reward_weight: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub early_stop: Option<usize>,
    pub mcts: MctsConfig,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        let e = EpisodeConfig::default();
        Self {
            reward_weight: e.reward_weight,
            early_stop: e.early_stop,
            mcts: e.mcts,
        }
    }
}

/// A full experiment: one catalog, one world distribution, a seed range and
/// a list of arms that each run every seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `builtin:default` or a path to a catalog TOML file.
    #[serde(default = "default_catalog")]
    pub catalog: String,
    pub output_dir: PathBuf,
    pub budget: Budget,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub generation: GenerationConfig,
    #[serde(default)]
    pub seeds: SeedConfig,
    #[serde(default)]
    pub belief: BeliefConfig,
    #[serde(default)]
    pub policy: PolicyConfig,
    #[serde(default)]
    pub provider: ProviderConfig,
    pub arms: Vec<ArmSpec>,
}

fn default_catalog() -> String {
    "builtin:default".into()
}

/// Applies one `dotted.key=value` override to a parsed TOML document.
/// The value is read as a TOML value when it parses as one and as a bare
/// string otherwise. Numeric segments index into arrays (`arms.0.policy`).
pub fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<(), String> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| format!("override `{assignment}` is not `key=value`"))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(format!("override key `{key}` has an empty segment"));
    }
    let (last, path) = parts.split_last().expect("nonempty split");
    // edit a copy so a failed override leaves `doc` untouched
    let mut root = toml::Value::Table(doc.clone());
    let mut node = &mut root;
    for part in path {
        node = match node {
            toml::Value::Table(t) => t
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new())),
            toml::Value::Array(a) => {
                let i: usize = part
                    .parse()
                    .map_err(|_| format!("`{key}`: `{part}` is not an array index"))?;
                let len = a.len();
                a.get_mut(i)
                    .ok_or_else(|| format!("`{key}`: index {i} out of range ({len} entries)"))?
            }
            _ => return Err(format!("`{key}`: `{part}` is not a table")),
        };
    }
    match node {
        toml::Value::Table(t) => {
            t.insert(last.to_string(), value);
        }
        toml::Value::Array(a) => {
            let i: usize = last
                .parse()
                .map_err(|_| format!("`{key}`: `{last}` is not an array index"))?;
            let len = a.len();
            *a.get_mut(i)
                .ok_or_else(|| format!("`{key}`: index {i} out of range ({len} entries)"))? = value;
        }
        _ => return Err(format!("`{key}`: parent is not a table")),
    }
    match root {
        toml::Value::Table(t) => *doc = t,
        _ => unreachable!("root stays a table"),
    }
    Ok(())
}

impl ExperimentConfig {
    /// Parses TOML text, applies overrides, and validates.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self, HarnessError> {
        let mut doc: toml::Table =
            toml::from_str(text).map_err(|e| HarnessError::Config(vec![e.to_string()]))?;
        let mut errs = Vec::new();
        for o in overrides {
            if let Err(e) = apply_override(&mut doc, o) {
                errs.push(e);
            }
        }
        if !errs.is_empty() {
            return Err(HarnessError::Config(errs));
        }
        let cfg: Self = doc
            .try_into()
            .map_err(|e: toml::de::Error| HarnessError::Config(vec![e.to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_toml_str(&text, overrides)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load_catalog(&self) -> Result<Catalog, HarnessError> {
        Catalog::load(&self.catalog)
            .map_err(|e| HarnessError::Config(vec![format!("catalog `{}`: {e}", self.catalog)]))
    }

    pub fn episode_config(&self) -> EpisodeConfig {
        EpisodeConfig {
            belief: self.belief.clone(),
            mcts: self.policy.mcts.clone(),
            reward_weight: self.policy.reward_weight,
            early_stop: self.policy.early_stop,
        }
    }

    /// Every problem with the configuration, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        match self.load_catalog() {
            Ok(catalog) => errs.extend(self.generation.violations(&catalog)),
            Err(HarnessError::Config(e)) => errs.extend(e),
            Err(e) => errs.push(e.to_string()),
        }
        if self.seeds.count == 0 {
            errs.push("seeds.count must be at least 1".into());
        }
        if self.budget == Budget::Fixed(0) {
            errs.push("budget must be at least 1".into());
        }
        errs.extend(self.episode_config().violations());
        if self.arms.is_empty() {
            errs.push("at least one [[arms]] entry is required".into());
        }
        let mut names = BTreeSet::new();
        for arm in &self.arms {
            errs.extend(arm.violations());
            if !names.insert(&arm.name) {
                errs.push(format!("arm name `{}` is used twice", arm.name));
            }
        }
        let remote_used = self.provider.kind == ProviderKind::Remote
            && self
                .arms
                .iter()
                .any(|a| a.needs_provider() || a.projection == ProjectionKind::Provider);
        if remote_used {
            let r = &self.provider.remote;
            if !(r.url.starts_with("http://") || r.url.starts_with("https://")) {
                errs.push(format!(
                    "provider.remote.url `{}` must be an http(s) URL",
                    r.url
                ));
            }
            if r.timeout_ms == 0 {
                errs.push("provider.remote.timeout_ms must be positive".into());
            }
        }
        errs
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let errs = self.violations();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::Config(errs))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
output_dir = "out"
budget = "L+2"

[[arms]]
name = "greedy"
policy = "greedy"
updater = "exact"
"#;

    #[test]
    fn budgets_parse() {
        let cfg = ExperimentConfig::from_toml_str(MINIMAL, &[]).unwrap();
        assert_eq!(cfg.budget, Budget::PerSymbol(2));
        assert_eq!(cfg.budget.resolve(8), 10);
        let cfg = ExperimentConfig::from_toml_str(MINIMAL, &["budget=7".into()]).unwrap();
        assert_eq!(cfg.budget, Budget::Fixed(7));
        assert!(ExperimentConfig::from_toml_str(MINIMAL, &["budget=\"M+1\"".into()]).is_err());
    }

    #[test]
    fn overrides_reach_nested_keys_and_arrays() {
        let cfg = ExperimentConfig::from_toml_str(
            MINIMAL,
            &[
                "seeds.count=3".into(),
                "belief.epsilon=0.001".into(),
                "arms.0.policy=aws_ig".into(),
                "policy.mcts.rollouts=8".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.seeds.count, 3);
        assert_eq!(cfg.belief.epsilon, 0.001);
        assert_eq!(cfg.arms[0].policy, crate::planner::Policy::AwsIg);
        assert_eq!(cfg.policy.mcts.rollouts, 8);
    }

    #[test]
    fn validation_lists_every_violation() {
        let err = ExperimentConfig::from_toml_str(
            MINIMAL,
            &[
                "seeds.count=0".into(),
                "belief.epsilon=0.9".into(),
                "arms.0.name=\"bad name\"".into(),
            ],
        )
        .unwrap_err();
        let HarnessError::Config(errs) = err else {
            panic!("expected config error")
        };
        assert!(errs.len() >= 3, "{errs:?}");
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = ExperimentConfig::from_toml_str(MINIMAL, &[]).unwrap();
        let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string(), &[]).unwrap();
        assert_eq!(cfg, again);
    }
}
