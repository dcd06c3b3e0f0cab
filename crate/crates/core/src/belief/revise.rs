use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    ActionBelief, Assertion, BeliefConfig, BeliefError, GlobalHypotheses, HypothesisEdit, Polarity,
    Provenance,
};
use crate::provider::{HypothesisProvider, ProviderRequest, RequestKind};
use crate::worldgen::{Catalog, Observation, ObservationKind, SearchTask};

/// How the initial belief is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorMode {
    /// From the catalog's prior-mixture placement of the target class.
    Informed,
    /// Uniform over symbols, no assertions.
    Flat,
}

/// Initial hypotheses and action belief for a task.
pub fn init_belief(
    task: &SearchTask,
    catalog: &Catalog,
    mode: PriorMode,
    cfg: &BeliefConfig,
) -> Result<(GlobalHypotheses, ActionBelief), BeliefError> {
    let symbols = &task.candidate_symbols;
    match mode {
        PriorMode::Flat => Ok((
            GlobalHypotheses::new(),
            ActionBelief::uniform(symbols, cfg.epsilon)?,
        )),
        PriorMode::Informed => {
            let class = task.world.target_class();
            let mixture = catalog.mixture(class);
            let weights: BTreeMap<String, f64> = symbols
                .iter()
                .map(|s| (s.clone(), mixture.get(s).copied().unwrap_or(0.0)))
                .collect();
            let belief =
                ActionBelief::from_weights(weights.clone(), cfg.epsilon).map_err(|e| match e {
                    BeliefError::Degenerate(_) => BeliefError::Degenerate(format!(
                        "catalog mixture gives class `{class}` no mass on the candidates"
                    )),
                    other => other,
                })?;
            let assertions = weights
                .iter()
                .filter(|(_, w)| **w > 0.0 && **w >= cfg.init_threshold)
                .map(|(s, w)| Assertion::new(class, s, Polarity::Supports, *w, Provenance::Prior))
                .collect();
            Ok((GlobalHypotheses::from_assertions(assertions)?, belief))
        }
    }
}

/// The deterministic revision rules, expressed as edits to `h`:
///
/// * found at `s`: everything is replaced by `supports(target, s, 1)`;
/// * empty at `s`: `supports(target, s)` is scaled by `delta_down` (dropped
///   below `remove_below`) and `refutes(target, s, refute_weight)` is added;
/// * a hint `class@y` additionally adds `supports(class, y, hint_confidence)`.
///
/// Evidence for an assertion that already exists combines as a noisy-OR.
pub fn rule_edits(
    h: &GlobalHypotheses,
    obs: &Observation,
    target_class: &str,
    cfg: &BeliefConfig,
) -> Vec<HypothesisEdit> {
    let s = obs.checked.symbol.as_str();
    let mut edits = Vec::new();
    if obs.kind == ObservationKind::Found {
        for a in h.assertions() {
            if !(a.class == target_class && a.symbol == s && a.polarity == Polarity::Supports) {
                edits.push(HypothesisEdit::Remove {
                    class: a.class.clone(),
                    symbol: a.symbol.clone(),
                    polarity: a.polarity,
                });
            }
        }
        edits.push(set(target_class, s, Polarity::Supports, 1.0));
        return edits;
    }

    let mut work = h.clone();
    let mut push = |work: &mut GlobalHypotheses, e: HypothesisEdit| {
        work.apply(&e, Provenance::Prior);
        edits.push(e);
    };
    let w = work.weight(target_class, s, Polarity::Supports);
    if w > 0.0 {
        let scaled = w * cfg.delta_down;
        let e = if scaled < cfg.remove_below {
            HypothesisEdit::Remove {
                class: target_class.to_string(),
                symbol: s.to_string(),
                polarity: Polarity::Supports,
            }
        } else {
            set(target_class, s, Polarity::Supports, scaled)
        };
        push(&mut work, e);
    }
    let r = work.combined_weight(target_class, s, Polarity::Refutes, cfg.refute_weight);
    push(&mut work, set(target_class, s, Polarity::Refutes, r));
    if let Some(hint) = &obs.hint {
        let c = work.combined_weight(
            &hint.class,
            &hint.symbol,
            Polarity::Supports,
            cfg.hint_confidence,
        );
        push(
            &mut work,
            set(&hint.class, &hint.symbol, Polarity::Supports, c),
        );
    }
    edits
}

fn set(class: &str, symbol: &str, polarity: Polarity, weight: f64) -> HypothesisEdit {
    HypothesisEdit::Set {
        class: class.to_string(),
        symbol: symbol.to_string(),
        polarity,
        weight,
    }
}

/// Outcome of the first update stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Revision {
    pub hypotheses: GlobalHypotheses,
    pub rule_edits: Vec<HypothesisEdit>,
    pub provider_edits: Vec<HypothesisEdit>,
    pub provider_calls: usize,
    /// Provider error; the rule edits were still applied.
    pub failure: Option<String>,
    pub warnings: Vec<String>,
}

/// Revises `h` after observing `obs` at step `step`. Rule edits always apply;
/// edits returned by `provider` are applied on top of them.
#[allow(clippy::too_many_arguments)]
pub fn revise_hypotheses(
    h: &GlobalHypotheses,
    obs: &Observation,
    step: usize,
    target_class: &str,
    symbols: &[String],
    classes: &[String],
    provider: Option<&dyn HypothesisProvider>,
    cfg: &BeliefConfig,
) -> Revision {
    let rules = rule_edits(h, obs, target_class, cfg);
    let mut next = h.applied(&rules, Provenance::Step(step));
    let mut rev = Revision {
        hypotheses: GlobalHypotheses::new(),
        rule_edits: rules,
        provider_edits: Vec::new(),
        provider_calls: 0,
        failure: None,
        warnings: Vec::new(),
    };
    if let Some(p) = provider {
        let req = ProviderRequest {
            kind: RequestKind::Revise,
            hypotheses: h.to_grammar(),
            observation: Some(obs.to_string()),
            symbols: symbols.to_vec(),
            classes: classes.to_vec(),
            target_class: target_class.to_string(),
        };
        rev.provider_calls = 1;
        match p.respond(&req) {
            Ok(resp) => {
                for e in resp.edits {
                    if !symbols.iter().any(|s| s == e.symbol())
                        || !classes.iter().any(|c| c == e.class())
                    {
                        rev.warnings.push(format!(
                            "dropped provider edit on `{}`/`{}`",
                            e.class(),
                            e.symbol()
                        ));
                        continue;
                    }
                    // restating a rule edit keeps the rule's provenance
                    if !rev.rule_edits.contains(&e) {
                        next.apply(&e, Provenance::Provider);
                    }
                    rev.provider_edits.push(e);
                }
                rev.warnings.extend(
                    resp.rejected
                        .iter()
                        .map(|l| format!("ignored provider line `{l}`")),
                );
            }
            Err(e) => rev.failure = Some(e.to_string()),
        }
    }
    rev.hypotheses = next;
    rev
}
