//! The amortized update by hand: rule revision of the hypotheses, then both
//! projections back onto the location belief.

use align_search::belief::{
    apply_directives, init_belief, project_similarity, revise_hypotheses, BeliefConfig, PriorMode,
};
use align_search::provider::{Directive, DirectiveKind};
use align_search::worldgen::{sample_world, Catalog, GenerationConfig, SearchEnv, SearchTask};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog = Catalog::builtin();
    let cfg = BeliefConfig::default();
    let world = sample_world(&catalog, &GenerationConfig::default(), 21)?;
    let class = world.target_class().to_string();
    let budget = world.symbols().len();
    let task = SearchTask::new(world, budget)?;
    let (h0, b0) = init_belief(&task, &catalog, PriorMode::Informed, &cfg)?;
    println!("initial hypotheses:\n{}", h0.to_grammar());

    let symbols = task.candidate_symbols.clone();
    let first = task.world.structure().instances()[0].instance.clone();
    let mut env = SearchEnv::new(task, &catalog, 21)?;
    let obs = env.step(&first)?.observation;
    println!("observed {} at {first}", obs.kind.as_str());

    let rev = revise_hypotheses(&h0, &obs, 1, &class, &symbols, &catalog.classes, None, &cfg);
    println!("rule edits: {:?}", rev.rule_edits);
    println!("revised hypotheses:\n{}", rev.hypotheses.to_grammar());

    let sim = project_similarity(&rev.hypotheses, &b0, &cfg)?;
    let directives = [Directive {
        symbol: symbols[0].clone(),
        kind: DirectiveKind::Suppress,
    }];
    let (prov, _) = apply_directives(&b0, &directives, &cfg)?;
    println!(
        "{:<20} {:>8} {:>11} {:>13}",
        "location", "b0", "similarity", "SUPPRESS first"
    );
    for s in &symbols {
        println!(
            "{s:<20} {:>8.4} {:>11.4} {:>13.4}",
            b0.prob(s),
            sim.prob(s),
            prov.prob(s)
        );
    }
    Ok(())
}
