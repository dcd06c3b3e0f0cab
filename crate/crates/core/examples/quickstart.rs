//! One episode on the builtin catalog, printed step by step.
//!
//! cargo run --example quickstart [seed]

use align_search::belief::PriorMode;
use align_search::planner::{run_episode, ArmSpec, EpisodeConfig, Policy, UpdaterKind};
use align_search::worldgen::{sample_world, Catalog, GenerationConfig, SearchTask};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(7), |s| s.parse())?;
    let catalog = Catalog::builtin();
    let world = sample_world(&catalog, &GenerationConfig::default(), seed)?;
    println!(
        "looking for a {} in {} instances over {} locations (target at {})",
        world.target_class(),
        world.total_instances(),
        world.symbols().len(),
        world.target()
    );
    let budget = world.symbols().len() + 2;
    let task = SearchTask::new(world, budget)?;
    let arm = ArmSpec::new(
        "aws_ig",
        Policy::AwsIg,
        PriorMode::Informed,
        UpdaterKind::Exact,
    );
    let trace = run_episode(&task, &catalog, &arm, None, &EpisodeConfig::default(), seed);

    for s in &trace.steps {
        let hint = s
            .observation
            .hint
            .as_ref()
            .map(|h| format!(" hint {}@{}", h.class, h.symbol))
            .unwrap_or_default();
        println!(
            "t={} check {:<24} -> {:<16}{hint}  IG={:.3}  H {:.3} -> {:.3}",
            s.t,
            s.instance,
            s.observation.kind.as_str(),
            s.chosen_ig.unwrap_or(f64::NAN),
            s.belief_before.entropy(),
            s.belief_after.entropy()
        );
    }
    println!(
        "{:?} after {} steps",
        trace.outcome.termination, trace.outcome.steps_used
    );
    Ok(())
}
