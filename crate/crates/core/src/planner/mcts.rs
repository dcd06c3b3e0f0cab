use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::belief::TIE_TOLERANCE;

/// Rollout planner settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MctsConfig {
    pub rollouts: usize,
    pub depth: usize,
    /// UCB1 exploration constant at the root.
    pub exploration: f64,
    pub discount: f64,
}

impl Default for MctsConfig {
    fn default() -> Self {
        Self {
            rollouts: 64,
            depth: 3,
            exploration: std::f64::consts::SQRT_2,
            discount: 0.95,
        }
    }
}

impl MctsConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.rollouts == 0 {
            errs.push("mcts.rollouts must be at least 1".into());
        }
        if self.depth == 0 {
            errs.push("mcts.depth must be at least 1".into());
        }
        if !(self.exploration >= 0.0 && self.exploration.is_finite()) {
            errs.push(format!(
                "mcts.exploration = {} must be >= 0",
                self.exploration
            ));
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            errs.push(format!("mcts.discount = {} outside (0, 1]", self.discount));
        }
        errs
    }
}

fn sample<R: Rng>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, w) in weights.iter().enumerate() {
        if *w > 0.0 {
            last = i;
            if u < *w {
                return i;
            }
            u -= w;
        }
    }
    last
}

/// Rollout-based choice among `candidates` (indices into `probs` and
/// `remaining`, in name order). Each rollout draws a hidden target symbol
/// from `probs` restricted to symbols with instances left, picks a root
/// action by UCB1, and plays uniformly random checks for up to `depth` steps.
/// A check of the target symbol finds it with probability 1/remaining. The
/// value is `discount^(k-1)` if found at step `k`, else 0. Returns the
/// candidate with the highest mean value, ties to the first.
pub fn mcts_select<R: Rng>(
    probs: &[f64],
    remaining: &[usize],
    candidates: &[usize],
    cfg: &MctsConfig,
    rng: &mut R,
) -> Option<usize> {
    if candidates.is_empty() {
        return None;
    }
    let target_w: Vec<f64> = probs
        .iter()
        .zip(remaining)
        .map(|(p, r)| if *r > 0 { *p } else { 0.0 })
        .collect();
    let total: f64 = target_w.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return candidates.first().copied();
    }
    let n = candidates.len();
    let mut visits = vec![0usize; n];
    let mut value = vec![0.0f64; n];
    for k in 0..cfg.rollouts {
        let root = match visits.iter().position(|v| *v == 0) {
            Some(untried) => untried,
            None => {
                let ln_n = (k as f64).ln();
                let mut best = 0;
                let mut best_u = f64::NEG_INFINITY;
                for j in 0..n {
                    let u = value[j] / visits[j] as f64
                        + cfg.exploration * (ln_n / visits[j] as f64).sqrt();
                    if u > best_u + TIE_TOLERANCE {
                        best = j;
                        best_u = u;
                    }
                }
                best
            }
        };
        let target = sample(rng, &target_w);
        let mut left = remaining.to_vec();
        let mut action = candidates[root];
        let mut ret = 0.0;
        for step in 0..cfg.depth {
            if action == target && rng.random::<f64>() * (left[action] as f64) < 1.0 {
                ret = cfg.discount.powi(step as i32);
                break;
            }
            left[action] = left[action].saturating_sub(1);
            let open: Vec<usize> = (0..left.len()).filter(|i| left[*i] > 0).collect();
            if open.is_empty() {
                break;
            }
            action = open[rng.random_range(0..open.len())];
        }
        visits[root] += 1;
        value[root] += ret;
    }
    let mut best = None;
    let mut best_v = f64::NEG_INFINITY;
    for j in 0..n {
        let v = if visits[j] > 0 {
            value[j] / visits[j] as f64
        } else {
            0.0
        };
        if v > best_v + TIE_TOLERANCE {
            best = Some(candidates[j]);
            best_v = v;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};

    #[test]
    fn converges_to_the_likely_symbol() {
        let cfg = MctsConfig {
            rollouts: 4096,
            depth: 1,
            ..MctsConfig::default()
        };
        let mut wins = 0;
        for seed in 0..20 {
            let mut rng = stream_rng(seed, Stream::Policy);
            if mcts_select(&[0.9, 0.1], &[1, 1], &[0, 1], &cfg, &mut rng) == Some(0) {
                wins += 1;
            }
        }
        assert_eq!(wins, 20);
    }

    #[test]
    fn only_candidates_are_returned() {
        let mut rng = stream_rng(1, Stream::Policy);
        let cfg = MctsConfig::default();
        for _ in 0..50 {
            let pick = mcts_select(&[0.7, 0.2, 0.1], &[0, 1, 1], &[1, 2], &cfg, &mut rng).unwrap();
            assert!(pick == 1 || pick == 2);
        }
    }
}
