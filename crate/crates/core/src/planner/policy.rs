use std::collections::BTreeMap;

use rand::Rng;

use super::{mcts_select, EpisodeConfig, IgScore, PlannerError, Policy};
use crate::belief::{argmax, ActionBelief, TIE_TOLERANCE};

/// Picks the next symbol among those with unvisited instances.
///
/// `remaining` maps every symbol to its count of unvisited instances; `ig`
/// must hold a score for each open symbol when the policy ranks by IG. All
/// argmax ties go to the lexicographically smallest symbol.
pub fn select_action<R: Rng>(
    policy: Policy,
    b: &ActionBelief,
    ig: &[IgScore],
    remaining: &BTreeMap<String, usize>,
    cfg: &EpisodeConfig,
    rng: &mut R,
) -> Result<String, PlannerError> {
    let open: Vec<&str> = remaining
        .iter()
        .filter(|(_, n)| **n > 0)
        .map(|(s, _)| s.as_str())
        .collect();
    if open.is_empty() {
        return Err(PlannerError::Exhausted);
    }
    let pick = match policy {
        Policy::Random => open[rng.random_range(0..open.len())],
        Policy::Greedy => argmax(open.iter().map(|s| (*s, b.prob(s)))).expect("nonempty"),
        Policy::MctsNoIg => {
            let symbols: Vec<&String> = remaining.keys().collect();
            let probs: Vec<f64> = symbols.iter().map(|s| b.prob(s)).collect();
            let left: Vec<usize> = remaining.values().copied().collect();
            let candidates: Vec<usize> = (0..symbols.len()).filter(|i| left[*i] > 0).collect();
            let i = mcts_select(&probs, &left, &candidates, &cfg.mcts, rng).expect("nonempty");
            symbols[i].as_str()
        }
        Policy::AwsIg | Policy::IgSecond | Policy::IgWorst => {
            let mut scored = Vec::with_capacity(open.len());
            for s in &open {
                let score = ig
                    .iter()
                    .find(|x| x.symbol == *s)
                    .ok_or_else(|| PlannerError::Config(format!("no IG score for `{s}`")))?;
                let bonus = cfg.reward_weight * b.prob(s) / remaining[*s] as f64;
                scored.push((*s, score.ig + bonus));
            }
            match policy {
                Policy::AwsIg => argmax(scored.iter().copied()).expect("nonempty"),
                Policy::IgSecond => {
                    let best = argmax(scored.iter().copied()).expect("nonempty");
                    argmax(scored.iter().copied().filter(|(s, _)| *s != best)).unwrap_or(best)
                }
                _ => {
                    let mut worst: Option<(&str, f64)> = None;
                    for (s, v) in scored {
                        match worst {
                            Some((_, w)) if v >= w - TIE_TOLERANCE => {}
                            _ => worst = Some((s, v)),
                        }
                    }
                    worst.expect("nonempty").0
                }
            }
        }
    };
    Ok(pick.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};

    fn belief() -> ActionBelief {
        ActionBelief::from_weights(
            [("a".into(), 0.5), ("b".into(), 0.3), ("c".into(), 0.2)].into(),
            1e-4,
        )
        .unwrap()
    }

    fn remaining(open: &[(&str, usize)]) -> BTreeMap<String, usize> {
        open.iter().map(|(s, n)| (s.to_string(), *n)).collect()
    }

    fn scores(vals: &[(&str, f64)]) -> Vec<IgScore> {
        vals.iter()
            .map(|(s, v)| IgScore {
                symbol: s.to_string(),
                ig: *v,
                prior_entropy: 0.0,
                components: Vec::new(),
                failures: 0,
            })
            .collect()
    }

    #[test]
    fn greedy_takes_argmax_of_open_symbols() {
        let cfg = EpisodeConfig::default();
        let mut rng = stream_rng(0, Stream::Policy);
        let rem = remaining(&[("a", 1), ("b", 1), ("c", 1)]);
        assert_eq!(
            select_action(Policy::Greedy, &belief(), &[], &rem, &cfg, &mut rng).unwrap(),
            "a"
        );
        let rem = remaining(&[("a", 0), ("b", 1), ("c", 1)]);
        assert_eq!(
            select_action(Policy::Greedy, &belief(), &[], &rem, &cfg, &mut rng).unwrap(),
            "b"
        );
    }

    #[test]
    fn ig_rankings() {
        let cfg = EpisodeConfig::default();
        let mut rng = stream_rng(0, Stream::Policy);
        let rem = remaining(&[("a", 1), ("b", 1), ("c", 1)]);
        let ig = scores(&[("a", 0.2), ("b", 0.6), ("c", 0.4)]);
        let pick = |p| {
            select_action(
                p,
                &belief(),
                &ig,
                &rem,
                &cfg,
                &mut stream_rng(0, Stream::Policy),
            )
            .unwrap()
        };
        assert_eq!(pick(Policy::AwsIg), "b");
        assert_eq!(pick(Policy::IgSecond), "c");
        assert_eq!(pick(Policy::IgWorst), "a");
        let tied = scores(&[("a", 0.3), ("b", 0.3), ("c", 0.3)]);
        assert_eq!(
            select_action(Policy::AwsIg, &belief(), &tied, &rem, &cfg, &mut rng).unwrap(),
            "a"
        );
    }

    #[test]
    fn exhaustion_is_signalled() {
        let cfg = EpisodeConfig::default();
        let mut rng = stream_rng(0, Stream::Policy);
        let rem = remaining(&[("a", 0), ("b", 0)]);
        assert_eq!(
            select_action(Policy::Random, &belief(), &[], &rem, &cfg, &mut rng),
            Err(PlannerError::Exhausted)
        );
    }
}
