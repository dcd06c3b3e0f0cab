//! Action selection and the episode loop.
//!
//! Each step selects a location symbol, grounds it to an unvisited instance,
//! checks it, and updates the belief with the real observation. Selection is
//! one of the ablation policies: uniform random, greedy on the current belief,
//! expected information gain (optionally forced to the 2nd-best or worst
//! action for diagnostics), or rollout search without an IG term.
//!
//! Information gain is computed by exact enumeration of the three-way
//! observation model: `IG(a) = H(b) - Σ_o p(o | a) H(b_o)` where `b_o` is the
//! belief the configured updater would produce after `o`.

mod episode;
mod ground;
mod ig;
mod mcts;
mod policy;
mod simulate;
mod state;
mod trace;

pub use episode::{alignment_reward, run_episode};
pub use ground::ground_instance;
pub use ig::{exact_ig, expected_ig, IgComponent, IgScore};
pub use mcts::{mcts_select, MctsConfig};
pub use policy::select_action;
pub use simulate::{simulate_observations, HintModel, SimOutcome};
pub use state::{BeliefState, EpisodeContext, UpdateInfo};
pub use trace::{EpisodeTrace, Outcome, ReplayHeader, StepRecord, Termination, TRACE_SCHEMA};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{BeliefConfig, BeliefError, PriorMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Random,
    Greedy,
    AwsIg,
    /// Second-highest IG; diagnostic only.
    IgSecond,
    /// Lowest IG; diagnostic only.
    IgWorst,
    MctsNoIg,
}

impl Policy {
    pub fn uses_ig(self) -> bool {
        matches!(self, Self::AwsIg | Self::IgSecond | Self::IgWorst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdaterKind {
    /// The belief never changes after initialization.
    None,
    /// Bayes rule on the joint (latent type, instance) posterior.
    Exact,
    /// Hypothesis revision followed by projection.
    Amortized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionKind {
    Similarity,
    Provider,
}

/// One arm of an ablation matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmSpec {
    pub name: String,
    pub policy: Policy,
    #[serde(default = "default_prior")]
    pub prior: PriorMode,
    pub updater: UpdaterKind,
    #[serde(default = "default_projection")]
    pub projection: ProjectionKind,
    /// Ask the provider for extra hypothesis edits after each observation.
    #[serde(default)]
    pub provider_revise: bool,
}

fn default_prior() -> PriorMode {
    PriorMode::Informed
}

fn default_projection() -> ProjectionKind {
    ProjectionKind::Similarity
}

impl ArmSpec {
    pub fn new(name: &str, policy: Policy, prior: PriorMode, updater: UpdaterKind) -> Self {
        Self {
            name: name.to_string(),
            policy,
            prior,
            updater,
            projection: ProjectionKind::Similarity,
            provider_revise: false,
        }
    }

    pub fn with_projection(mut self, projection: ProjectionKind) -> Self {
        self.projection = projection;
        self
    }

    pub fn needs_provider(&self) -> bool {
        self.updater == UpdaterKind::Amortized
            && (self.provider_revise || self.projection == ProjectionKind::Provider)
    }

    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            errs.push(format!(
                "arm name `{}` must be nonempty ASCII letters, digits, `_` or `-`",
                self.name
            ));
        }
        if self.policy.uses_ig() && self.updater == UpdaterKind::None {
            errs.push(format!(
                "arm `{}`: policy {:?} needs an updater to score information gain",
                self.name, self.policy
            ));
        }
        errs
    }
}

/// Per-episode knobs shared by all arms of a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeConfig {
    pub belief: BeliefConfig,
    pub mcts: MctsConfig,
    /// Weight of the immediate find probability added to IG. Zero gives
    /// pure information gain.
    pub reward_weight: f64,
    /// Stop after this many consecutive correctly predicted observation kinds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub early_stop: Option<usize>,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            belief: BeliefConfig::default(),
            mcts: MctsConfig::default(),
            reward_weight: 0.0,
            early_stop: None,
        }
    }
}

impl EpisodeConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut errs = self.belief.violations();
        errs.extend(self.mcts.violations());
        if !(self.reward_weight >= 0.0 && self.reward_weight.is_finite()) {
            errs.push(format!(
                "policy.reward_weight = {} must be finite and nonnegative",
                self.reward_weight
            ));
        }
        if self.early_stop == Some(0) {
            errs.push("policy.early_stop must be at least 1".into());
        }
        errs
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlannerError {
    /// Every instance of every symbol has been visited.
    #[error("all symbols are exhausted")]
    Exhausted,

    #[error("symbol `{0}` has no unvisited instance")]
    SymbolExhausted(String),

    #[error(transparent)]
    Belief(#[from] BeliefError),

    #[error("{0}")]
    Config(String),
}
