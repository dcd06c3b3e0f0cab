use std::collections::BTreeMap;

use crate::belief::ActionBelief;
use crate::worldgen::ObservationKind;

/// Hint emission used when simulating observations from an action belief.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HintModel {
    pub strength: f64,
    /// Distribution of the hinted symbol.
    pub distribution: BTreeMap<String, f64>,
}

impl HintModel {
    pub fn none() -> Self {
        Self::default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum SimOutcome {
    Found,
    Empty,
    Hint(String),
}

impl SimOutcome {
    pub fn kind(&self) -> ObservationKind {
        match self {
            Self::Found => ObservationKind::Found,
            Self::Empty => ObservationKind::Empty,
            Self::Hint(_) => ObservationKind::EmptyWithHint,
        }
    }
}

/// Outcome distribution of checking one of `unvisited` remaining instances
/// of `symbol`: found with `b(symbol) / unvisited`, otherwise empty or a hint.
/// Zero-probability outcomes are omitted; the rest sum to one.
pub fn simulate_observations(
    b: &ActionBelief,
    symbol: &str,
    unvisited: usize,
    hints: &HintModel,
) -> Vec<(SimOutcome, f64)> {
    let found = b.prob(symbol) / unvisited.max(1) as f64;
    let miss = 1.0 - found;
    let mut out = Vec::new();
    if found > 0.0 {
        out.push((SimOutcome::Found, found));
    }
    let empty = miss * (1.0 - hints.strength);
    if empty > 0.0 {
        out.push((SimOutcome::Empty, empty));
    }
    let total: f64 = hints.distribution.values().sum();
    if hints.strength > 0.0 && total > 0.0 {
        for (y, w) in &hints.distribution {
            let p = miss * hints.strength * w / total;
            if p > 0.0 {
                out.push((SimOutcome::Hint(y.clone()), p));
            }
        }
    } else if hints.strength > 0.0 && miss > 0.0 {
        // no hint distribution: a hint carries nothing, fold it into empty
        match out.iter_mut().find(|(o, _)| *o == SimOutcome::Empty) {
            Some((_, p)) => *p += miss * hints.strength,
            None => out.push((SimOutcome::Empty, miss * hints.strength)),
        }
    }
    out
}
