use std::collections::BTreeSet;

use super::{ActionBelief, BeliefConfig, BeliefError, GlobalHypotheses, Polarity};
use crate::provider::{Directive, DirectiveKind, HypothesisProvider, ProviderRequest, RequestKind};

const MIN_MULTIPLIER: f64 = 0.05;
const MAX_MULTIPLIER: f64 = 20.0;

fn tokens(symbol: &str) -> BTreeSet<&str> {
    symbol.split(['_', '-']).filter(|t| !t.is_empty()).collect()
}

/// Jaccard similarity of the `_`/`-` separated tokens of two symbol names.
pub fn similarity(a: &str, b: &str) -> f64 {
    let (ta, tb) = (tokens(a), tokens(b));
    let union = ta.union(&tb).count();
    if union == 0 {
        return 0.0;
    }
    ta.intersection(&tb).count() as f64 / union as f64
}

/// Scales each symbol by `Π (1 ± β·w·sim(s, a.symbol))` over the assertions
/// (`+β_boost` for supports, `-β_supp` for refutes), clamped to [0.05, 20].
/// Empty hypotheses return `b` unchanged.
pub fn project_similarity(
    h: &GlobalHypotheses,
    b: &ActionBelief,
    cfg: &BeliefConfig,
) -> Result<ActionBelief, BeliefError> {
    if h.is_empty() {
        return Ok(b.clone());
    }
    b.reweight(|s| {
        let m: f64 = h
            .assertions()
            .iter()
            .map(|a| {
                let gain = match a.polarity {
                    Polarity::Supports => cfg.beta_boost,
                    Polarity::Refutes => -cfg.beta_supp,
                };
                1.0 + gain * a.weight * similarity(s, &a.symbol)
            })
            .product();
        m.clamp(MIN_MULTIPLIER, MAX_MULTIPLIER)
    })
}

/// Result of a provider projection.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionOutcome {
    pub belief: ActionBelief,
    pub directives: Vec<Directive>,
    pub warnings: Vec<String>,
    /// Set when the provider could not be reached; `belief` is then the input.
    pub failure: Option<String>,
    pub calls: usize,
}

/// Multiplies each directed symbol by `κ_boost` or `κ_supp` per directive.
/// Directives on symbols outside `b` are skipped with a warning.
pub fn apply_directives(
    b: &ActionBelief,
    directives: &[Directive],
    cfg: &BeliefConfig,
) -> Result<(ActionBelief, Vec<String>), BeliefError> {
    let mut warnings = Vec::new();
    let known: Vec<&Directive> = directives
        .iter()
        .filter(|d| {
            let ok = b.probs().contains_key(&d.symbol);
            if !ok {
                warnings.push(format!(
                    "dropped directive on unknown symbol `{}`",
                    d.symbol
                ));
            }
            ok
        })
        .collect();
    if known.is_empty() {
        return Ok((b.clone(), warnings));
    }
    let belief = b.reweight(|s| {
        known
            .iter()
            .filter(|d| d.symbol == s)
            .map(|d| match d.kind {
                DirectiveKind::Boost => cfg.kappa_boost,
                DirectiveKind::Suppress => cfg.kappa_supp,
            })
            .product()
    })?;
    Ok((belief, warnings))
}

/// Asks `provider` which symbols to boost or suppress given `h`, then applies
/// the directives to `b`.
pub fn project_provider(
    h: &GlobalHypotheses,
    b: &ActionBelief,
    provider: &dyn HypothesisProvider,
    classes: &[String],
    target_class: &str,
    cfg: &BeliefConfig,
) -> Result<ProjectionOutcome, BeliefError> {
    let req = ProviderRequest {
        kind: RequestKind::Project,
        hypotheses: h.to_grammar(),
        observation: None,
        symbols: b.symbols().cloned().collect(),
        classes: classes.to_vec(),
        target_class: target_class.to_string(),
    };
    match provider.respond(&req) {
        Ok(resp) => {
            let (belief, mut warnings) = apply_directives(b, &resp.directives, cfg)?;
            warnings.extend(
                resp.rejected
                    .iter()
                    .map(|l| format!("ignored provider line `{l}`")),
            );
            Ok(ProjectionOutcome {
                belief,
                directives: resp.directives,
                warnings,
                failure: None,
                calls: 1,
            })
        }
        Err(e) => Ok(ProjectionOutcome {
            belief: b.clone(),
            directives: Vec::new(),
            warnings: Vec::new(),
            failure: Some(e.to_string()),
            calls: 1,
        }),
    }
}
