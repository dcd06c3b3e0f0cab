//! The exact Bayesian posterior over (household type, instance), updated by
//! hand with observations from a live environment.

use align_search::belief::{ExactPosterior, ObservationModel, PriorMode};
use align_search::worldgen::{sample_world, Catalog, GenerationConfig, SearchEnv, SearchTask};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog = Catalog::builtin();
    let world = sample_world(&catalog, &GenerationConfig::default(), 11)?;
    let st = world.structure();
    let class = world.target_class().to_string();
    let model = ObservationModel::from_catalog(&catalog, &st, &class);
    let mut post = ExactPosterior::new(model, st.clone(), PriorMode::Informed)?;

    let task = SearchTask::new(world, st.len_instances())?;
    let mut env = SearchEnv::new(task, &catalog, 11)?;
    let show = |p: &ExactPosterior| {
        let types: Vec<String> = p
            .type_marginal()
            .iter()
            .map(|x| format!("{x:.3}"))
            .collect();
        println!(
            "  type posterior [{}]  H(location) = {:.3}",
            types.join(", "),
            p.entropy_raw()
        );
    };
    show(&post);
    // check the first instance of every location in order until found
    for s in 0..st.len_symbols() {
        let i = st.range(s).start;
        let r = env.step(&st.instances()[i].instance)?;
        println!("{} -> {}", st.instances()[i], r.observation.kind.as_str());
        post = post.update(&r.observation)?;
        show(&post);
        if r.done {
            break;
        }
    }
    for (sym, p) in post.marginal_map() {
        println!("  {sym:<20} {p:.4}");
    }
    Ok(())
}
