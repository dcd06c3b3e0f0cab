//! Entropy dynamics, IG-rank bins and action diversity for two arms.

use align_search::belief::PriorMode;
use align_search::metrics::{diversity_stats, entropy_curve, entropy_dynamics, ig_rank_analysis};
use align_search::planner::{
    run_episode, ArmSpec, EpisodeConfig, EpisodeTrace, Policy, UpdaterKind,
};
use align_search::rng::{episode_seed, world_seed};
use align_search::worldgen::{sample_world, Catalog, GenerationConfig, SearchTask};

fn run(arm: &ArmSpec, index: u64, catalog: &Catalog) -> Vec<EpisodeTrace> {
    (0..300)
        .map(|ep| {
            let world = sample_world(catalog, &GenerationConfig::default(), world_seed(4, ep))
                .expect("world");
            let budget = world.symbols().len() + 2;
            let task = SearchTask::new(world, budget).expect("task");
            run_episode(
                &task,
                catalog,
                arm,
                None,
                &EpisodeConfig::default(),
                episode_seed(4, index, ep),
            )
        })
        .collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog = Catalog::builtin();
    let arms = [
        ArmSpec::new(
            "flat_prior",
            Policy::Greedy,
            PriorMode::Informed,
            UpdaterKind::None,
        ),
        ArmSpec::new(
            "aws_ig",
            Policy::AwsIg,
            PriorMode::Informed,
            UpdaterKind::Exact,
        ),
    ];
    for (i, arm) in arms.iter().enumerate() {
        let traces = run(arm, i as u64, &catalog);
        let d = entropy_dynamics(&traces)?;
        let div = diversity_stats(&traces)?;
        println!(
            "{}: mean dH_t {:.3}, dH {:.3}, Pr[dH>0] {:.3} over {} episodes; action entropy {:.3}, unique ratio {:.3}",
            arm.name, d.mean_step_gain, d.net_drop, d.sharpen_rate, d.n_episodes, div.action_entropy, div.unique_ratio
        );
        let curve: Vec<String> = entropy_curve(&traces)
            .iter()
            .take(6)
            .map(|p| format!("{:.2}", p.mean))
            .collect();
        println!("  H(b_t), t = 0..5: {}", curve.join(" "));
        if arm.policy.uses_ig() {
            let table = ig_rank_analysis(&traces);
            for b in &table.bins {
                println!(
                    "  IG [{:.3}, {:.3}]  n={:<4} mean alignment gain {:+.4}",
                    b.ig_lo, b.ig_hi, b.n, b.mean_delta
                );
            }
            if let Some(t) = table.test {
                println!("  top vs bottom bin: t = {:.2}, p = {:.2e}", t.t, t.p);
            }
        }
    }
    Ok(())
}
