use serde::{Deserialize, Serialize};

use super::{ArmSpec, EpisodeConfig, IgScore};
use crate::belief::BeliefSnapshot;
use crate::provider::ProviderConfig;
use crate::worldgen::{GenerationConfig, Observation, ObservationKind};

/// Version tag of the trace document layout.
pub const TRACE_SCHEMA: &str = "aws-trace/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Found,
    Budget,
    /// Every instance was checked without finding the target.
    Exhausted,
    EarlyStop,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub success: bool,
    pub steps_used: usize,
    pub termination: Termination,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based step index.
    pub t: usize,
    pub symbol: String,
    pub instance: String,
    pub observation: Observation,
    pub reward: u8,
    pub belief_before: BeliefSnapshot,
    pub belief_after: BeliefSnapshot,
    /// Scores of every open symbol, in name order; empty for arms without an
    /// updater.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ig_scores: Vec<IgScore>,
    /// IG of the executed action, when scored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen_ig: Option<f64>,
    pub alignment_before: f64,
    pub alignment_after: f64,
    pub predicted_kind: ObservationKind,
    pub predicted_match: bool,
    pub provider_calls: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Everything needed to re-run one episode of a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayHeader {
    /// `builtin:default` or a catalog path.
    pub catalog: String,
    pub generation: GenerationConfig,
    pub base_seed: u64,
    pub arm_index: u64,
    pub episode_index: u64,
    pub world_seed: u64,
    pub arm: ArmSpec,
    pub config: EpisodeConfig,
    pub provider: ProviderConfig,
}

/// Full record of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub schema: String,
    pub arm: String,
    pub seed: u64,
    pub target_class: String,
    /// Ground truth, recorded for offline metrics.
    pub target_symbol: String,
    pub target_instance: String,
    pub budget: usize,
    pub initial: Option<BeliefSnapshot>,
    pub steps: Vec<StepRecord>,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replay: Option<ReplayHeader>,
}

impl EpisodeTrace {
    pub fn provider_calls(&self) -> usize {
        self.steps.iter().map(|s| s.provider_calls).sum()
    }

    /// Alignment after the last step (initial alignment if no step ran).
    pub fn final_alignment(&self) -> f64 {
        match self.steps.last() {
            Some(s) => s.alignment_after,
            None => self
                .initial
                .as_ref()
                .map_or(0.0, |b| b.prob(&self.target_symbol)),
        }
    }

    /// Sequence of checked symbols.
    pub fn actions(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.symbol.as_str()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Structural problems: bad schema, budget overrun, success flag out of
    /// sync with rewards, or any snapshot violating normalization or floor.
    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.schema != TRACE_SCHEMA {
            errs.push(format!("schema `{}`", self.schema));
        }
        if self.outcome.steps_used != self.steps.len() {
            errs.push("steps_used disagrees with the step list".into());
        }
        if self.steps.len() > self.budget {
            errs.push("more steps than budget".into());
        }
        let rewarded = self.steps.last().is_some_and(|s| s.reward == 1);
        if self.outcome.success != rewarded {
            errs.push("success flag disagrees with the final reward".into());
        }
        let mut snaps: Vec<&BeliefSnapshot> = self.initial.iter().collect();
        for s in &self.steps {
            snaps.push(&s.belief_before);
            snaps.push(&s.belief_after);
        }
        for snap in snaps {
            if let Err(e) = snap.belief() {
                errs.push(e.to_string());
            }
        }
        errs
    }
}
