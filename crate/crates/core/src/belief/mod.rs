//! Hierarchical belief: textual-level hypotheses over habits and layout, and
//! the categorical belief over symbolic `Check` actions.
//!
//! Two updaters live here. [`ExactPosterior`] is the reference: a joint over
//! (latent type, instance) updated by Bayes rule with the simulator's own
//! observation likelihood. The amortized path first revises
//! [`GlobalHypotheses`] ([`revise_hypotheses`]) and then projects them onto an
//! [`ActionBelief`], either by lexical similarity ([`project_similarity`]) or
//! by provider directives ([`project_provider`]).
//!
//! Every [`ActionBelief`] produced here sums to one and keeps each entry at or
//! above its floor, so heuristic updates can always be revised later.

mod action;
mod exact;
mod hypotheses;
mod projection;
mod record;
mod revise;

pub use action::{argmax, entropy, floored, ActionBelief, DEFAULT_FLOOR, TIE_TOLERANCE};
pub use exact::{Branch, ExactPosterior, ObservationModel};
pub use hypotheses::{Assertion, GlobalHypotheses, HypothesisEdit, Polarity, Provenance};
pub use projection::{
    apply_directives, project_provider, project_similarity, similarity, ProjectionOutcome,
};
pub use record::BeliefSnapshot;
pub use revise::{init_belief, revise_hypotheses, rule_edits, PriorMode, Revision};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BeliefError {
    /// The observation has zero likelihood under every remaining hypothesis.
    #[error("observation `{observation}` is impossible under the current posterior")]
    Inconsistent { observation: String },

    #[error("degenerate belief: {0}")]
    Degenerate(String),

    #[error("{0}")]
    Domain(String),

    #[error("invalid belief configuration: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("malformed belief record: {0}")]
    Parse(String),
}

/// Update and projection hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeliefConfig {
    /// Probability floor of every [`ActionBelief`].
    pub epsilon: f64,
    /// Similarity-projection gain for `supports` assertions.
    pub beta_boost: f64,
    /// Similarity-projection gain for `refutes` assertions.
    pub beta_supp: f64,
    /// Provider-projection multiplier for `BOOST`.
    pub kappa_boost: f64,
    /// Provider-projection multiplier for `SUPPRESS`.
    pub kappa_supp: f64,
    /// Factor applied to `supports(target, s)` after an empty check at `s`.
    pub delta_down: f64,
    /// Assertions whose weight falls below this are dropped.
    pub remove_below: f64,
    /// Weight of the `refutes` assertion added after an empty check.
    pub refute_weight: f64,
    /// Weight of the `supports` assertion added for a hint.
    pub hint_confidence: f64,
    /// Informed initialization asserts `supports` for symbols whose mixture
    /// placement is at least this.
    pub init_threshold: f64,
}

impl Default for BeliefConfig {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_FLOOR,
            beta_boost: 1.0,
            beta_supp: 0.8,
            kappa_boost: 2.0,
            kappa_supp: 0.5,
            delta_down: 0.5,
            remove_below: 0.05,
            refute_weight: 0.9,
            hint_confidence: 0.6,
            init_threshold: 0.15,
        }
    }
}

impl BeliefConfig {
    /// Every out-of-range field, each as one message.
    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let mut need = |name: &str, v: f64, ok: bool, range: &str| {
            if !ok || !v.is_finite() {
                errs.push(format!("belief.{name} = {v} outside {range}"));
            }
        };
        need(
            "epsilon",
            self.epsilon,
            self.epsilon > 0.0 && self.epsilon <= 0.01,
            "(0, 0.01]",
        );
        need(
            "beta_boost",
            self.beta_boost,
            (0.0..=10.0).contains(&self.beta_boost),
            "[0, 10]",
        );
        need(
            "beta_supp",
            self.beta_supp,
            (0.0..=1.0).contains(&self.beta_supp),
            "[0, 1]",
        );
        need(
            "kappa_boost",
            self.kappa_boost,
            (1.0..=100.0).contains(&self.kappa_boost),
            "[1, 100]",
        );
        need(
            "kappa_supp",
            self.kappa_supp,
            self.kappa_supp > 0.0 && self.kappa_supp <= 1.0,
            "(0, 1]",
        );
        need(
            "delta_down",
            self.delta_down,
            self.delta_down > 0.0 && self.delta_down <= 1.0,
            "(0, 1]",
        );
        need(
            "remove_below",
            self.remove_below,
            (0.0..1.0).contains(&self.remove_below),
            "[0, 1)",
        );
        need(
            "refute_weight",
            self.refute_weight,
            self.refute_weight > 0.0 && self.refute_weight <= 1.0,
            "(0, 1]",
        );
        need(
            "hint_confidence",
            self.hint_confidence,
            self.hint_confidence > 0.0 && self.hint_confidence <= 1.0,
            "(0, 1]",
        );
        need(
            "init_threshold",
            self.init_threshold,
            (0.0..=1.0).contains(&self.init_threshold),
            "[0, 1]",
        );
        errs
    }

    pub fn validate(&self) -> Result<(), BeliefError> {
        let errs = self.violations();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(BeliefError::Config(errs))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        assert!(BeliefConfig::default().validate().is_ok());
    }

    #[test]
    fn violations_are_all_listed() {
        let cfg = BeliefConfig {
            epsilon: 0.0,
            kappa_boost: 0.5,
            beta_supp: f64::NAN,
            ..BeliefConfig::default()
        };
        assert_eq!(cfg.violations().len(), 3);
    }
}
