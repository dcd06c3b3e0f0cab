use serde::{Deserialize, Serialize};

use super::{
    simulate_observations, BeliefState, EpisodeContext, PlannerError, SimOutcome, UpdateInfo,
};
use crate::belief::{Branch, ExactPosterior};
use crate::worldgen::{Hint, InstanceRef, Observation, ObservationKind};

/// One simulated observation branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IgComponent {
    pub kind: ObservationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hint: Option<String>,
    pub probability: f64,
    pub posterior_entropy: f64,
}

/// Expected information gain of checking `symbol`, with its branches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IgScore {
    pub symbol: String,
    pub ig: f64,
    pub prior_entropy: f64,
    pub components: Vec<IgComponent>,
    /// Branches whose update failed; they count as zero gain.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub failures: usize,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

impl IgScore {
    fn from_components(
        symbol: &str,
        prior_entropy: f64,
        components: Vec<IgComponent>,
        failures: usize,
    ) -> Self {
        let expected: f64 = components
            .iter()
            .map(|c| c.probability * c.posterior_entropy)
            .sum();
        Self {
            symbol: symbol.to_string(),
            ig: prior_entropy - expected,
            prior_entropy,
            components,
            failures,
        }
    }

    /// `H(b) - Σ p·H(b_o)` recomputed from the stored branches.
    pub fn recompute(&self) -> f64 {
        self.prior_entropy
            - self
                .components
                .iter()
                .map(|c| c.probability * c.posterior_entropy)
                .sum::<f64>()
    }

    pub fn probability_mass(&self) -> f64 {
        self.components.iter().map(|c| c.probability).sum()
    }
}

/// Exact IG on the joint posterior. Entropies are of the unfloored symbol
/// marginal; the checked instance is uniform over the symbol's unchecked
/// instances.
pub fn exact_ig(post: &ExactPosterior, symbol_idx: usize) -> Result<IgScore, PlannerError> {
    let st = post.structure();
    let symbol = st.symbols()[symbol_idx].clone();
    let open: Vec<usize> = st
        .range(symbol_idx)
        .filter(|i| !post.is_checked(*i))
        .collect();
    if open.is_empty() {
        return Err(PlannerError::SymbolExhausted(symbol));
    }
    let h0 = post.entropy_raw();
    let share = 1.0 / open.len() as f64;
    let mut components = Vec::new();
    let mut failures = 0;
    for &i in &open {
        for (branch, p) in post.branches(i) {
            let h = match post.update_branch(i, branch) {
                Some(next) => next.entropy_raw(),
                None => {
                    failures += 1;
                    h0
                }
            };
            let (kind, hint) = match branch {
                Branch::Found => (ObservationKind::Found, None),
                Branch::Empty => (ObservationKind::Empty, None),
                Branch::Hint(y) => (
                    ObservationKind::EmptyWithHint,
                    Some(st.symbols()[y].clone()),
                ),
            };
            components.push(IgComponent {
                kind,
                hint,
                probability: p * share,
                posterior_entropy: h,
            });
        }
    }
    Ok(IgScore::from_components(&symbol, h0, components, failures))
}

/// Expected IG of checking `symbol` under the state's own updater. A branch
/// whose update fails keeps the current entropy and is counted in
/// `failures`.
pub fn expected_ig(
    state: &BeliefState,
    symbol: &str,
    visited: &[bool],
    step: usize,
    ctx: &EpisodeContext<'_>,
) -> Result<(IgScore, UpdateInfo), PlannerError> {
    let st = &ctx.structure;
    let s = st
        .symbol_index(symbol)
        .ok_or_else(|| PlannerError::Config(format!("unknown symbol `{symbol}`")))?;
    if let BeliefState::Exact { posterior } = state {
        return Ok((exact_ig(posterior, s)?, UpdateInfo::default()));
    }
    let open: Vec<usize> = st.range(s).filter(|i| !visited[*i]).collect();
    let Some(&first) = open.first() else {
        return Err(PlannerError::SymbolExhausted(symbol.to_string()));
    };
    let b = state.belief(ctx.floor())?;
    let h0 = b.entropy();
    let checked = InstanceRef::new(symbol, &st.instances()[first].instance);
    let mut info = UpdateInfo::default();
    let mut components = Vec::new();
    let mut failures = 0;
    for (outcome, p) in simulate_observations(&b, symbol, open.len(), &ctx.hints) {
        let obs = match &outcome {
            SimOutcome::Found => Observation::found(checked.clone()),
            SimOutcome::Empty => Observation::empty(checked.clone()),
            SimOutcome::Hint(y) => Observation::with_hint(
                checked.clone(),
                Hint {
                    class: ctx.target_class.clone(),
                    symbol: y.clone(),
                },
            ),
        };
        let h = match state {
            BeliefState::Fixed { .. } => h0,
            _ => match state.simulate(&obs, step, ctx) {
                Ok((next, sub)) => {
                    info.provider_calls += sub.provider_calls;
                    next.belief(ctx.floor())?.entropy()
                }
                Err(_) => {
                    failures += 1;
                    h0
                }
            },
        };
        components.push(IgComponent {
            kind: outcome.kind(),
            hint: match outcome {
                SimOutcome::Hint(y) => Some(y),
                _ => None,
            },
            probability: p,
            posterior_entropy: h,
        });
    }
    Ok((
        IgScore::from_components(symbol, h0, components, failures),
        info,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::ActionBelief;
    use approx::assert_abs_diff_eq;
    use std::collections::BTreeMap;

    fn closed_form(b: &ActionBelief, s: &str) -> f64 {
        let p = b.prob(s);
        let rest: Vec<f64> = b
            .probs()
            .iter()
            .filter(|(k, _)| k.as_str() != s)
            .map(|(_, q)| q / (1.0 - p))
            .collect();
        b.entropy() - (1.0 - p) * crate::belief::entropy(rest)
    }

    #[test]
    fn uniform_over_four() {
        let b = ActionBelief::uniform(&["a", "b", "c", "d"], 1e-4).unwrap();
        let post = ExactPosterior::from_belief(&b, 0.0, &BTreeMap::new()).unwrap();
        let score = exact_ig(&post, 0).unwrap();
        let oracle = 4f64.ln() - 0.75 * 3f64.ln();
        assert_abs_diff_eq!(score.ig, oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(score.ig, 0.5623, epsilon = 1e-4);
        assert_abs_diff_eq!(score.probability_mass(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(score.ig, score.recompute(), epsilon = 1e-15);
    }

    #[test]
    fn near_point_mass() {
        let eps = 1e-4;
        let b = ActionBelief::point_mass(&["a", "b", "c", "d"], "a", eps).unwrap();
        let post = ExactPosterior::from_belief(&b, 0.0, &BTreeMap::new()).unwrap();
        let on = exact_ig(&post, 0).unwrap();
        assert_abs_diff_eq!(on.ig, closed_form(&b, "a"), epsilon = 1e-12);
        assert!(on.ig > 0.0 && on.ig <= b.entropy());
        let off = exact_ig(&post, 1).unwrap();
        assert_abs_diff_eq!(off.ig, closed_form(&b, "b"), epsilon = 1e-12);
        assert!(off.ig < 2e-3);
    }

    #[test]
    fn matches_closed_form_on_skewed_belief() {
        let b = ActionBelief::from_weights(
            [("a".into(), 0.5), ("b".into(), 0.3), ("c".into(), 0.2)].into(),
            1e-4,
        )
        .unwrap();
        let post = ExactPosterior::from_belief(&b, 0.0, &BTreeMap::new()).unwrap();
        for (i, s) in ["a", "b", "c"].iter().enumerate() {
            assert_abs_diff_eq!(
                exact_ig(&post, i).unwrap().ig,
                closed_form(&b, s),
                epsilon = 1e-12
            );
        }
    }
}
