use std::collections::BTreeMap;

use super::{
    expected_ig, ground_instance, select_action, simulate_observations, ArmSpec, BeliefState,
    EpisodeConfig, EpisodeContext, EpisodeTrace, Outcome, PlannerError, StepRecord, Termination,
    UpdaterKind, TRACE_SCHEMA,
};
use crate::belief::ActionBelief;
use crate::provider::HypothesisProvider;
use crate::rng::{stream_rng, Stream};
use crate::worldgen::{Catalog, ObservationKind, SearchEnv, SearchTask, World};

/// Mass the belief puts on the symbol that actually holds the target.
pub fn alignment_reward(b_after: &ActionBelief, world: &World) -> f64 {
    b_after.prob(&world.target().symbol)
}

/// Most likely observation kind for checking `symbol` next.
fn predicted_kind(
    state: &BeliefState,
    symbol: &str,
    visited: &[bool],
    ctx: &EpisodeContext<'_>,
) -> Result<ObservationKind, PlannerError> {
    let st = &ctx.structure;
    let s = st.symbol_index(symbol).expect("selected symbol exists");
    let open: Vec<usize> = st.range(s).filter(|i| !visited[*i]).collect();
    let mut by_kind: BTreeMap<ObservationKind, f64> = BTreeMap::new();
    match state {
        BeliefState::Exact { posterior } => {
            for &i in &open {
                for (branch, p) in posterior.branches(i) {
                    let kind = match branch {
                        crate::belief::Branch::Found => ObservationKind::Found,
                        crate::belief::Branch::Empty => ObservationKind::Empty,
                        crate::belief::Branch::Hint(_) => ObservationKind::EmptyWithHint,
                    };
                    *by_kind.entry(kind).or_default() += p / open.len() as f64;
                }
            }
        }
        _ => {
            let b = state.belief(ctx.floor())?;
            for (o, p) in simulate_observations(&b, symbol, open.len(), &ctx.hints) {
                *by_kind.entry(o.kind()).or_default() += p;
            }
        }
    }
    let mut best = (ObservationKind::Empty, f64::NEG_INFINITY);
    for (k, p) in by_kind {
        if p > best.1 + crate::belief::TIE_TOLERANCE {
            best = (k, p);
        }
    }
    Ok(best.0)
}

/// Runs one episode: select, ground, check, revise, project, until the target
/// is found, the budget runs out, every instance has been checked, or the
/// optional early stop fires. A pure function of its arguments when the
/// provider is deterministic.
pub fn run_episode(
    task: &SearchTask,
    catalog: &Catalog,
    arm: &ArmSpec,
    provider: Option<&dyn HypothesisProvider>,
    cfg: &EpisodeConfig,
    seed: u64,
) -> EpisodeTrace {
    let world = &task.world;
    let mut trace = EpisodeTrace {
        schema: TRACE_SCHEMA.to_string(),
        arm: arm.name.clone(),
        seed,
        target_class: world.target_class().to_string(),
        target_symbol: world.target().symbol.clone(),
        target_instance: world.target().instance.clone(),
        budget: task.budget,
        initial: None,
        steps: Vec::new(),
        outcome: Outcome {
            success: false,
            steps_used: 0,
            termination: Termination::Error,
            error: None,
        },
        replay: None,
    };
    let (termination, error) = match drive(task, catalog, arm, provider, cfg, seed, &mut trace) {
        Ok(t) => (t, None),
        Err(e) => (Termination::Error, Some(e.to_string())),
    };
    trace.outcome = Outcome {
        success: termination == Termination::Found,
        steps_used: trace.steps.len(),
        termination,
        error,
    };
    trace
}

fn drive(
    task: &SearchTask,
    catalog: &Catalog,
    arm: &ArmSpec,
    provider: Option<&dyn HypothesisProvider>,
    cfg: &EpisodeConfig,
    seed: u64,
    trace: &mut EpisodeTrace,
) -> Result<Termination, PlannerError> {
    let ctx = EpisodeContext::new(task, catalog, arm, cfg, provider);
    let mut env = SearchEnv::new(task.clone(), catalog, seed)
        .map_err(|e| PlannerError::Config(e.to_string()))?;
    let mut policy_rng = stream_rng(seed, Stream::Policy);
    let mut ground_rng = stream_rng(seed, Stream::Grounding);
    let st = &ctx.structure;
    let mut visited = vec![false; st.len_instances()];
    let mut state = BeliefState::init(task, catalog, arm, &ctx)?;
    let mut before = state.snapshot(&visited, &ctx)?;
    trace.initial = Some(before.clone());
    let target = task.world.target().symbol.as_str();
    let mut streak = 0;

    loop {
        let t = trace.steps.len() + 1;
        if t > task.budget {
            return Ok(Termination::Budget);
        }
        let remaining: BTreeMap<String, usize> = st
            .symbols()
            .iter()
            .cloned()
            .zip(ctx.unvisited(&visited))
            .collect();
        if remaining.values().all(|n| *n == 0) {
            return Ok(Termination::Exhausted);
        }
        let b = state.belief(ctx.floor())?;
        let mut notes = Vec::new();
        let mut calls = 0;
        let mut ig_scores = Vec::new();
        if arm.updater != UpdaterKind::None {
            for (s, n) in &remaining {
                if *n == 0 {
                    continue;
                }
                let (score, info) = expected_ig(&state, s, &visited, t, &ctx)?;
                calls += info.provider_calls;
                if score.failures > 0 {
                    notes.push(format!("{} IG branches of `{s}` failed", score.failures));
                }
                ig_scores.push(score);
            }
        }
        let symbol = select_action(arm.policy, &b, &ig_scores, &remaining, cfg, &mut policy_rng)?;
        let chosen_ig = ig_scores.iter().find(|x| x.symbol == symbol).map(|x| x.ig);
        let idx = ground_instance(&symbol, st, &visited, &mut ground_rng)?;
        let predicted = predicted_kind(&state, &symbol, &visited, &ctx)?;
        let instance = st.instances()[idx].instance.clone();
        let result = env
            .step(&instance)
            .map_err(|e| PlannerError::Config(e.to_string()))?;
        visited[idx] = true;

        let obs = result.observation;
        let (next, after, update_error) = match state.update(&obs, t, &ctx) {
            Ok((next, info)) => {
                calls += info.provider_calls;
                notes.extend(info.notes);
                let after = next.snapshot(&visited, &ctx)?;
                (next, after, None)
            }
            Err(e) => (state.clone(), before.clone(), Some(e)),
        };
        let matched = predicted == obs.kind;
        trace.steps.push(StepRecord {
            t,
            symbol,
            instance,
            reward: result.reward,
            belief_before: before.clone(),
            alignment_before: before.prob(target),
            alignment_after: after.prob(target),
            belief_after: after.clone(),
            ig_scores,
            chosen_ig,
            predicted_kind: predicted,
            predicted_match: matched,
            provider_calls: calls,
            notes,
            observation: obs,
        });
        if let Some(e) = update_error {
            return Err(e);
        }
        state = next;
        before = after;
        if result.reward == 1 {
            return Ok(Termination::Found);
        }
        streak = if matched { streak + 1 } else { 0 };
        if cfg.early_stop.is_some_and(|w| streak >= w) {
            return Ok(Termination::EarlyStop);
        }
    }
}
