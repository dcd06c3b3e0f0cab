use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use super::{ExperimentConfig, HarnessError};
use crate::metrics::{write_report, ArmMetrics, MetricsReport};
use crate::planner::{run_episode, ArmSpec, EpisodeTrace, ReplayHeader, Termination};
use crate::provider::{build_provider, HypothesisProvider};
use crate::rng::{episode_seed, world_seed};
use crate::worldgen::{sample_world, Catalog, SearchTask};

/// Per-arm outcome of a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmRun {
    pub arm: String,
    pub episodes: usize,
    pub successes: usize,
    /// Episodes that ended with an error termination.
    pub errors: usize,
    /// Set when the arm produced no traces at all.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchReport {
    pub output_dir: PathBuf,
    pub arms: Vec<ArmRun>,
    pub metrics: MetricsReport,
}

impl BatchReport {
    pub fn failed(&self) -> bool {
        self.arms.iter().any(|a| a.failure.is_some())
    }
}

fn io_error(path: &Path, e: impl ToString) -> HarnessError {
    HarnessError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

pub fn trace_path(dir: &Path, arm: &str, episode: u64) -> PathBuf {
    dir.join("traces")
        .join(arm)
        .join(format!("ep{episode:06}.json"))
}

/// Samples the world of episode `episode` and runs one arm on it. All arms
/// see the same world for a given episode index.
#[allow(clippy::too_many_arguments)]
pub fn run_one(
    cfg: &ExperimentConfig,
    catalog: &Catalog,
    arm_index: usize,
    arm: &ArmSpec,
    provider: Option<&dyn HypothesisProvider>,
    episode: u64,
) -> Result<EpisodeTrace, HarnessError> {
    let wseed = world_seed(cfg.seeds.base, episode);
    let world = sample_world(catalog, &cfg.generation, wseed)
        .map_err(|e| HarnessError::Episode(format!("episode {episode}: {e}")))?;
    let budget = cfg.budget.resolve(world.symbols().len());
    let task = SearchTask::new(world, budget)
        .map_err(|e| HarnessError::Episode(format!("episode {episode}: {e}")))?;
    let seed = episode_seed(cfg.seeds.base, arm_index as u64, episode);
    let mut trace = run_episode(&task, catalog, arm, provider, &cfg.episode_config(), seed);
    trace.replay = Some(ReplayHeader {
        catalog: cfg.catalog.clone(),
        generation: cfg.generation.clone(),
        base_seed: cfg.seeds.base,
        arm_index: arm_index as u64,
        episode_index: episode,
        world_seed: wseed,
        arm: arm.clone(),
        config: cfg.episode_config(),
        provider: cfg.provider.clone(),
    });
    Ok(trace)
}

/// Runs every selected arm over every seed, writes one trace file per
/// episode, then recomputes metrics over all arms found on disk.
///
/// `only` restricts execution to the named arms; traces of the other arms
/// are left as they are.
pub fn run_batch(cfg: &ExperimentConfig, only: &[String]) -> Result<BatchReport, HarnessError> {
    cfg.validate()?;
    for name in only {
        if !cfg.arms.iter().any(|a| &a.name == name) {
            return Err(HarnessError::Config(vec![format!(
                "--only: unknown arm `{name}`"
            )]));
        }
    }
    let catalog = cfg.load_catalog()?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let cfg_path = dir.join("config.toml");
    fs::write(&cfg_path, cfg.to_toml_string()).map_err(|e| io_error(&cfg_path, e))?;

    let provider: Arc<dyn HypothesisProvider> =
        build_provider(&cfg.provider, &catalog, &cfg.belief)
            .map_err(|e| HarnessError::Config(vec![e.to_string()]))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| HarnessError::Config(vec![format!("workers: {e}")]))?;

    let mut runs = Vec::new();
    for (ai, arm) in cfg.arms.iter().enumerate() {
        if !only.is_empty() && !only.contains(&arm.name) {
            continue;
        }
        let arm_dir = dir.join("traces").join(&arm.name);
        if arm_dir.exists() {
            fs::remove_dir_all(&arm_dir).map_err(|e| io_error(&arm_dir, e))?;
        }
        fs::create_dir_all(&arm_dir).map_err(|e| io_error(&arm_dir, e))?;
        let prov = arm.needs_provider().then_some(provider.as_ref());
        let results: Vec<Result<(bool, bool), HarnessError>> = pool.install(|| {
            (0..cfg.seeds.count)
                .into_par_iter()
                .map(|ep| {
                    let trace = run_one(cfg, &catalog, ai, arm, prov, ep)?;
                    let path = trace_path(dir, &arm.name, ep);
                    fs::write(&path, trace.to_json() + "\n").map_err(|e| io_error(&path, e))?;
                    Ok((
                        trace.outcome.success,
                        trace.outcome.termination == Termination::Error,
                    ))
                })
                .collect()
        });
        let mut run = ArmRun {
            arm: arm.name.clone(),
            episodes: 0,
            successes: 0,
            errors: 0,
            failure: None,
        };
        for r in results {
            match r {
                Ok((success, error)) => {
                    run.episodes += 1;
                    run.successes += usize::from(success);
                    run.errors += usize::from(error);
                }
                Err(e) => {
                    run.failure.get_or_insert_with(|| e.to_string());
                }
            }
        }
        if run.episodes == 0 && run.failure.is_none() {
            run.failure = Some("no traces produced".into());
        }
        runs.push(run);
    }
    let metrics = compute_metrics(cfg)?;
    Ok(BatchReport {
        output_dir: dir.clone(),
        arms: runs,
        metrics,
    })
}

/// Loads the traces of one arm in episode order.
pub fn load_arm_traces(dir: &Path, arm: &str) -> Result<Vec<EpisodeTrace>, HarnessError> {
    let arm_dir = dir.join("traces").join(arm);
    let mut files: Vec<PathBuf> = fs::read_dir(&arm_dir)
        .map_err(|e| io_error(&arm_dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    files
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| io_error(p, e))?;
            EpisodeTrace::from_json(&text).map_err(|e| io_error(p, e))
        })
        .collect()
}

/// Recomputes every analysis from the trace files under the configured
/// output directory and writes `traces.jsonl`, `tables/` and `summary.json`.
/// Arms without a trace directory are left out.
pub fn compute_metrics(cfg: &ExperimentConfig) -> Result<MetricsReport, HarnessError> {
    let dir = &cfg.output_dir;
    let mut lines = String::new();
    let mut arms = Vec::new();
    for arm in &cfg.arms {
        // arms never run in this directory (e.g. after `--only`) are skipped
        if !dir.join("traces").join(&arm.name).is_dir() {
            continue;
        }
        let traces = load_arm_traces(dir, &arm.name)?;
        if traces.is_empty() {
            return Err(HarnessError::Episode(format!(
                "arm `{}` has no traces",
                arm.name
            )));
        }
        for t in &traces {
            lines.push_str(&t.to_line());
            lines.push('\n');
        }
        arms.push(ArmMetrics::compute(&arm.name, &traces)?);
    }
    if arms.is_empty() {
        return Err(HarnessError::Missing {
            what: "traces".into(),
            path: dir.join("traces").display().to_string(),
        });
    }
    let path = dir.join("traces.jsonl");
    fs::write(&path, lines).map_err(|e| io_error(&path, e))?;
    let report = MetricsReport::new(arms);
    write_report(dir, &report)?;
    Ok(report)
}
