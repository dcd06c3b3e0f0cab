//! Every policy crossed with every updater on the same worlds, in memory.
//!
//! cargo run --release --example ablation_matrix [episodes]

use align_search::belief::PriorMode;
use align_search::metrics::summary;
use align_search::planner::{run_episode, ArmSpec, EpisodeConfig, Policy, UpdaterKind};
use align_search::rng::{episode_seed, world_seed};
use align_search::worldgen::{sample_world, Catalog, GenerationConfig, SearchTask};
use rayon::prelude::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let episodes: u64 = std::env::args().nth(1).map_or(Ok(200), |s| s.parse())?;
    let catalog = Catalog::builtin();
    let gen = GenerationConfig::default();
    let cfg = EpisodeConfig::default();
    let policies = [
        Policy::Random,
        Policy::Greedy,
        Policy::MctsNoIg,
        Policy::AwsIg,
        Policy::IgSecond,
        Policy::IgWorst,
    ];
    let updaters = [
        UpdaterKind::None,
        UpdaterKind::Exact,
        UpdaterKind::Amortized,
    ];

    println!(
        "{:<12} {:<10} {:>6} {:>7}",
        "policy", "updater", "SR", "steps"
    );
    for (pi, policy) in policies.iter().enumerate() {
        for (ui, updater) in updaters.iter().enumerate() {
            let arm = ArmSpec::new("cell", *policy, PriorMode::Informed, *updater);
            if !arm.violations().is_empty() {
                continue; // IG policies need an updater
            }
            let arm_index = (pi * updaters.len() + ui) as u64;
            let traces: Vec<_> = (0..episodes)
                .into_par_iter()
                .map(|ep| {
                    let world = sample_world(&catalog, &gen, world_seed(1, ep)).expect("world");
                    let budget = world.symbols().len() + 2;
                    let task = SearchTask::new(world, budget).expect("task");
                    run_episode(
                        &task,
                        &catalog,
                        &arm,
                        None,
                        &cfg,
                        episode_seed(1, arm_index, ep),
                    )
                })
                .collect();
            let s = summary(&traces)?;
            println!(
                "{:<12} {:<10} {:>6.3} {:>7.2}",
                format!("{policy:?}"),
                format!("{updater:?}"),
                s.success_rate,
                s.mean_steps
            );
        }
    }
    Ok(())
}
