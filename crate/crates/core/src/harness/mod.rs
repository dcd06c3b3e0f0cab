//! Experiment configuration, seeded batch execution and plot-ready outputs.
//!
//! A batch writes this tree under the configured output directory:
//!
//! ```text
//! config.toml               resolved configuration (overrides applied)
//! traces/<arm>/ep000000.json one trace document per episode
//! traces.jsonl              every trace, one per line, arms in config order
//! tables/*.csv              one table per analysis
//! summary.json              all analyses, consumed by `plot-data`
//! plot/*.csv                (x, y, series) files written by `plot-data`
//! ```
//!
//! Seeds: the world of episode `e` comes from `world_seed(base, e)` and is
//! shared by all arms; the episode itself runs on
//! `episode_seed(base, arm_index, e)`. Both are documented in [`crate::rng`].

mod batch;
mod config;
mod plot;

pub use batch::{
    compute_metrics, load_arm_traces, run_batch, run_one, trace_path, ArmRun, BatchReport,
};
pub use config::{apply_override, Budget, ExperimentConfig, PolicyConfig, SeedConfig};
pub use plot::{plot_data, PlotRow, PLOT_SCHEMA};

use std::path::Path;

use thiserror::Error;

use crate::metrics::MetricsError;
use crate::planner::{run_episode, EpisodeTrace};
use crate::provider::build_provider;
use crate::rng::episode_seed;
use crate::worldgen::{sample_world, Catalog, SearchTask};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),

    #[error("{path}: {reason}")]
    Io { path: String, reason: String },

    #[error("{0}")]
    Episode(String),

    #[error("missing {what}: {path}")]
    Missing { what: String, path: String },

    #[error("replay: {0}")]
    Replay(String),

    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Result of re-running a recorded episode.
#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    pub recorded: EpisodeTrace,
    pub rerun: EpisodeTrace,
}

impl ReplayOutcome {
    pub fn matches(&self) -> bool {
        self.recorded == self.rerun
    }

    /// First step index (1-based) where the two traces differ.
    pub fn first_difference(&self) -> Option<usize> {
        let (a, b) = (&self.recorded.steps, &self.rerun.steps);
        (0..a.len().max(b.len()))
            .find(|&i| a.get(i) != b.get(i))
            .map(|i| i + 1)
    }
}

/// Re-runs the episode recorded in `path` from its replay header.
pub fn replay(path: &Path) -> Result<ReplayOutcome, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let recorded = EpisodeTrace::from_json(&text).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let header = recorded
        .replay
        .clone()
        .ok_or_else(|| HarnessError::Replay("trace has no replay header".into()))?;
    let catalog = Catalog::load(&header.catalog)
        .map_err(|e| HarnessError::Replay(format!("catalog `{}`: {e}", header.catalog)))?;
    let world = sample_world(&catalog, &header.generation, header.world_seed)
        .map_err(|e| HarnessError::Replay(e.to_string()))?;
    let task =
        SearchTask::new(world, recorded.budget).map_err(|e| HarnessError::Replay(e.to_string()))?;
    let provider = build_provider(&header.provider, &catalog, &header.config.belief)
        .map_err(|e| HarnessError::Replay(e.to_string()))?;
    let prov = header.arm.needs_provider().then_some(provider.as_ref());
    let seed = episode_seed(header.base_seed, header.arm_index, header.episode_index);
    let mut rerun = run_episode(&task, &catalog, &header.arm, prov, &header.config, seed);
    rerun.replay = Some(header);
    Ok(ReplayOutcome { recorded, rerun })
}
