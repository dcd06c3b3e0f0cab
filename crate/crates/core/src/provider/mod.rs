//! Hypothesis providers: the pluggable half of the amortized belief update.
//!
//! A provider answers three kinds of request. `revise` proposes edits to the
//! hypothesis set after an observation, `project` names symbols to boost or
//! suppress, and `init` proposes starting assertions. Every answer travels as
//! text in a small line grammar (see [`grammar`]), so the deterministic
//! [`RuleProvider`] and the HTTP-backed [`RemoteProvider`] are interchangeable.

pub mod grammar;
mod remote;
mod rule;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use remote::{RemoteConfig, RemoteProvider, Templates};
pub use rule::RuleProvider;

use crate::belief::{BeliefConfig, HypothesisEdit};
use crate::worldgen::Catalog;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestKind {
    Revise,
    Project,
    Init,
}

impl RequestKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Revise => "revise",
            Self::Project => "project",
            Self::Init => "init",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderRequest {
    pub kind: RequestKind,
    /// Current hypotheses as grammar lines.
    pub hypotheses: String,
    /// Observation text; revise requests only.
    pub observation: Option<String>,
    pub symbols: Vec<String>,
    pub classes: Vec<String>,
    pub target_class: String,
}

impl ProviderRequest {
    pub fn validate(&self) -> Result<(), ProviderError> {
        let mut missing = Vec::new();
        if self.kind == RequestKind::Revise && self.observation.is_none() {
            missing.push("observation");
        }
        if self.symbols.is_empty() {
            missing.push("symbols");
        }
        if self.target_class.is_empty() {
            missing.push("target_class");
        }
        if missing.is_empty() {
            Ok(())
        } else {
            Err(ProviderError::InvalidRequest(format!(
                "{} request without {}",
                self.kind.as_str(),
                missing.join(", ")
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DirectiveKind {
    Boost,
    Suppress,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Directive {
    pub symbol: String,
    pub kind: DirectiveKind,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ProviderResponse {
    pub edits: Vec<HypothesisEdit>,
    pub directives: Vec<Directive>,
    /// Verbatim completion text.
    pub raw_text: Option<String>,
    /// Lines that did not match the grammar.
    pub rejected: Vec<String>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProviderError {
    #[error("provider `{provider}` unavailable: {reason}")]
    Unavailable { provider: String, reason: String },

    #[error("invalid provider request: {0}")]
    InvalidRequest(String),

    #[error("provider configuration: {0}")]
    Config(String),
}

/// Answers provider requests. Implementations are shared across concurrently
/// running episodes.
pub trait HypothesisProvider: Send + Sync {
    fn name(&self) -> &str;

    fn respond(&self, req: &ProviderRequest) -> Result<ProviderResponse, ProviderError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    Rule,
    Remote,
}

/// Provider block of an experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub remote: RemoteConfig,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            kind: ProviderKind::Rule,
            remote: RemoteConfig::default(),
        }
    }
}

/// True when `NO_NETWORK=1` is set.
pub fn network_disabled() -> bool {
    std::env::var("NO_NETWORK").is_ok_and(|v| v == "1")
}

/// Builds the configured provider. `NO_NETWORK=1` always selects the rule
/// provider.
pub fn build_provider(
    cfg: &ProviderConfig,
    catalog: &Catalog,
    belief: &BeliefConfig,
) -> Result<Arc<dyn HypothesisProvider>, ProviderError> {
    match cfg.kind {
        ProviderKind::Remote if !network_disabled() => {
            Ok(Arc::new(RemoteProvider::new(cfg.remote.clone())?))
        }
        _ => Ok(Arc::new(RuleProvider::new(catalog.clone(), belief.clone()))),
    }
}
