//! Property tests over randomly generated catalogs, worlds and beliefs.

use std::collections::BTreeMap;

use align_search::belief::{
    project_similarity, similarity, ActionBelief, BeliefConfig, ExactPosterior, GlobalHypotheses,
    HypothesisEdit, ObservationModel, Polarity, PriorMode, Provenance,
};
use align_search::planner::{exact_ig, run_episode, ArmSpec, EpisodeConfig, Policy, UpdaterKind};
use align_search::provider::grammar;
use align_search::worldgen::{
    generate_catalog, sample_world, CatalogSpec, GenerationConfig, SearchEnv, SearchTask,
};
use proptest::prelude::*;

fn weights() -> impl Strategy<Value = BTreeMap<String, f64>> {
    prop::collection::vec(0.0f64..10.0, 2..12).prop_map(|w| {
        w.into_iter()
            .enumerate()
            .map(|(i, x)| (format!("loc{i}"), x + 1e-9))
            .collect()
    })
}

fn spec() -> impl Strategy<Value = CatalogSpec> {
    (2usize..5, 2usize..7, 1usize..3, any::<bool>()).prop_map(|(t, s, c, random_prior)| {
        CatalogSpec {
            n_types: t,
            n_symbols: s,
            n_classes: c,
            hint_range: (0.0, 0.8),
            random_prior,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn floored_beliefs_are_normalized(w in weights(), floor in 0.0f64..0.05) {
        let n = w.len() as f64;
        prop_assume!(floor * n < 1.0);
        let b = ActionBelief::from_weights(w, floor).unwrap();
        let sum: f64 = b.probs().values().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(b.probs().values().all(|p| *p >= floor - 1e-15));
        prop_assert!(b.entropy() >= 0.0 && b.entropy() <= n.ln() + 1e-12);
    }

    #[test]
    fn similarity_is_a_symmetric_score(a in "[a-z_]{0,12}", b in "[a-z_]{0,12}") {
        let s = similarity(&a, &b);
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert_eq!(s, similarity(&b, &a));
    }

    #[test]
    fn similarity_projection_keeps_the_floor(w in weights(), ws in prop::collection::vec(0.05f64..1.0, 1..4)) {
        let b = ActionBelief::from_weights(w, 1e-3).unwrap();
        let symbols: Vec<String> = b.symbols().cloned().collect();
        let mut h = GlobalHypotheses::new();
        for (k, weight) in ws.iter().enumerate() {
            let edit = HypothesisEdit::Set {
                class: "mug".into(),
                symbol: symbols[k % symbols.len()].clone(),
                polarity: if k % 2 == 0 { Polarity::Supports } else { Polarity::Refutes },
                weight: *weight,
            };
            h.apply(&edit, Provenance::Prior);
        }
        let p = project_similarity(&h, &b, &BeliefConfig::default()).unwrap();
        let sum: f64 = p.probs().values().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(p.probs().values().all(|x| *x >= 1e-3 - 1e-15));
    }

    #[test]
    fn grammar_render_then_parse_is_identity(
        picks in prop::collection::vec((0usize..3, 0usize..2, any::<bool>(), 0u32..=100), 0..8)
    ) {
        let symbols = vec!["desk".to_string(), "sink_basin".to_string(), "sofa".to_string()];
        let classes = vec!["mug".to_string(), "keys".to_string()];
        let edits: Vec<HypothesisEdit> = picks
            .iter()
            .map(|&(s, c, sup, w)| {
                let polarity = if sup { Polarity::Supports } else { Polarity::Refutes };
                if w == 0 {
                    HypothesisEdit::Remove { class: classes[c].clone(), symbol: symbols[s].clone(), polarity }
                } else {
                    HypothesisEdit::Set { class: classes[c].clone(), symbol: symbols[s].clone(), polarity, weight: w as f64 / 100.0 }
                }
            })
            .collect();
        let parsed = grammar::parse(&grammar::render(&edits, &[]), &symbols, &classes);
        prop_assert_eq!(parsed.edits, edits);
        prop_assert!(parsed.rejected.is_empty());
    }

    #[test]
    fn exact_posterior_stays_normalized_and_ig_nonnegative(
        spec in spec(), seed in 0u64..1_000_000, picks in prop::collection::vec(any::<prop::sample::Index>(), 0..4)
    ) {
        let cat = generate_catalog(&spec, seed).unwrap();
        let gen = GenerationConfig { min_instances: 1, max_instances: 3, max_total: 16, target_class: None };
        let world = sample_world(&cat, &gen, seed ^ 0x5eed).unwrap();
        let st = world.structure();
        let class = world.target_class().to_string();
        let mut post = ExactPosterior::new(
            ObservationModel::from_catalog(&cat, &st, &class), st.clone(), PriorMode::Informed,
        ).unwrap();
        let task = SearchTask::new(world, st.len_instances()).unwrap();
        let mut env = SearchEnv::new(task, &cat, seed).unwrap();
        for pick in picks {
            let open: Vec<usize> = (0..st.len_instances()).filter(|i| !post.is_checked(*i)).collect();
            let i = open[pick.index(open.len())];
            let r = env.step(&st.instances()[i].instance).unwrap();
            post = post.update(&r.observation).unwrap();
            let sum: f64 = post.marginal_raw().iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
            if r.done {
                return Ok(());
            }
            for s in 0..st.len_symbols() {
                if st.range(s).any(|i| !post.is_checked(i)) {
                    prop_assert!(exact_ig(&post, s).unwrap().ig >= -1e-9);
                }
            }
        }
    }

    #[test]
    fn episodes_are_deterministic_and_well_formed(spec in spec(), seed in 0u64..1_000_000, arm_kind in 0usize..4) {
        let cat = generate_catalog(&spec, seed).unwrap();
        let world = sample_world(&cat, &GenerationConfig::default(), seed).unwrap();
        let budget = world.symbols().len() + 1;
        let task = SearchTask::new(world, budget).unwrap();
        let arm = match arm_kind {
            0 => ArmSpec::new("r", Policy::Random, PriorMode::Flat, UpdaterKind::None),
            1 => ArmSpec::new("g", Policy::Greedy, PriorMode::Informed, UpdaterKind::Exact),
            2 => ArmSpec::new("a", Policy::AwsIg, PriorMode::Informed, UpdaterKind::Amortized),
            _ => ArmSpec::new("m", Policy::MctsNoIg, PriorMode::Informed, UpdaterKind::Exact),
        };
        let cfg = EpisodeConfig::default();
        let a = run_episode(&task, &cat, &arm, None, &cfg, seed);
        let b = run_episode(&task, &cat, &arm, None, &cfg, seed);
        prop_assert_eq!(a.to_json(), b.to_json());
        prop_assert!(a.violations().is_empty(), "{:?}", a.violations());
        prop_assert!(a.outcome.steps_used <= budget);
    }
}
