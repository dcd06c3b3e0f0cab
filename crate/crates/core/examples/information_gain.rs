//! Expected information gain of every location, with the per-branch terms.

use std::collections::BTreeMap;

use align_search::belief::{ActionBelief, ExactPosterior, ObservationModel, PriorMode};
use align_search::planner::exact_ig;
use align_search::worldgen::{sample_world, Catalog, GenerationConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // uniform belief over four locations, no hints: IG = ln 4 - (3/4) ln 3
    let b = ActionBelief::uniform(&["a", "b", "c", "d"], 1e-4)?;
    let post = ExactPosterior::from_belief(&b, 0.0, &BTreeMap::new())?;
    println!("uniform over 4: IG = {:.6}", exact_ig(&post, 0)?.ig);

    let catalog = Catalog::builtin();
    let world = sample_world(&catalog, &GenerationConfig::default(), 3)?;
    let st = world.structure();
    let model = ObservationModel::from_catalog(&catalog, &st, world.target_class());
    let post = ExactPosterior::new(model, st.clone(), PriorMode::Informed)?;
    println!("\nbuiltin world, target `{}`:", world.target_class());
    for (s, sym) in st.symbols().iter().enumerate() {
        let score = exact_ig(&post, s)?;
        println!("{sym:<20} IG = {:.4}", score.ig);
        for c in &score.components {
            println!("    {c:?}");
        }
    }
    Ok(())
}
