//! Parsing provider completions: accepted edits, directives and rejected lines.

use align_search::belief::BeliefConfig;
use align_search::provider::{
    grammar, HypothesisProvider, ProviderRequest, RequestKind, RuleProvider,
};
use align_search::worldgen::Catalog;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog = Catalog::builtin();
    let text = "\
Here is my answer:
1. SUPPORT apple kitchen_counter 0.8
- refute apple bedroom_drawer 0.6
* BOOST kitchen_counter
SUPPRESS garage
SUPPORT apple kitchen_counter 1.7
REFUTE apple living_shelf 0";
    let parsed = grammar::parse(text, &catalog.symbols, &catalog.classes);
    println!("edits:");
    for e in &parsed.edits {
        println!("  {e:?}");
    }
    println!("directives: {:?}", parsed.directives);
    println!("rejected: {:?}", parsed.rejected);
    println!(
        "rendered back:\n{}",
        grammar::render(&parsed.edits, &parsed.directives)
    );

    // the rule provider answers the same requests deterministically
    let rule = RuleProvider::new(catalog.clone(), BeliefConfig::default());
    let resp = rule.respond(&ProviderRequest {
        kind: RequestKind::Project,
        hypotheses: "SUPPORT apple kitchen_counter 0.8\n".into(),
        observation: None,
        symbols: catalog.symbols.clone(),
        classes: catalog.classes.clone(),
        target_class: "apple".into(),
    })?;
    println!("rule provider directives: {:?}", resp.directives);
    Ok(())
}
