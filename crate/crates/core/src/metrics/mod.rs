//! Diagnostics computed from episode traces.
//!
//! Every function here is a pure function of the traces it receives and gives
//! the same result for any ordering of them. Entropies are in nats.

pub mod stats;
mod tables;

pub use tables::{
    read_table, write_csv, write_report, ArmMetrics, CurveRow, DiversityRow, DynamicsRow, IgBinRow,
    MetricsReport, SummaryRow, METRICS_SCHEMA,
};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{entropy, ActionBelief, BeliefError};
use crate::planner::EpisodeTrace;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("episode {episode}: {reason}")]
    Schema { episode: String, reason: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("{path}: {reason}")]
    Table { path: String, reason: String },

    #[error(transparent)]
    Belief(#[from] BeliefError),
}

fn episode_name(t: &EpisodeTrace) -> String {
    format!("{}/seed {}", t.arm, t.seed)
}

/// Aggregates per-action probabilities into a belief over symbols.
///
/// `scores` are nonnegative action weights (normalized here); `owner` maps an
/// action to the symbol it inspects. Symbols of `symbols` that no action maps
/// to get zero mass before flooring.
pub fn implicit_belief(
    scores: &BTreeMap<String, f64>,
    owner: impl Fn(&str) -> Option<String>,
    symbols: &[String],
    floor: f64,
) -> Result<ActionBelief, MetricsError> {
    let mut mass: BTreeMap<String, f64> = symbols.iter().map(|s| (s.clone(), 0.0)).collect();
    let mut total = 0.0;
    for (action, &w) in scores {
        if !(w >= 0.0 && w.is_finite()) {
            return Err(MetricsError::Degenerate(format!(
                "score {w} of action `{action}`"
            )));
        }
        let symbol = owner(action).ok_or_else(|| {
            MetricsError::Degenerate(format!("action `{action}` maps to no symbol"))
        })?;
        let slot = mass.get_mut(&symbol).ok_or_else(|| {
            MetricsError::Degenerate(format!("action `{action}` maps to unknown `{symbol}`"))
        })?;
        *slot += w;
        total += w;
    }
    if total <= 0.0 {
        return Err(MetricsError::Degenerate(
            "all action scores are zero".into(),
        ));
    }
    Ok(ActionBelief::from_weights(mass, floor)?)
}

/// Same as [`implicit_belief`] for log-scores, softmax-normalized first.
pub fn implicit_belief_from_logits(
    logits: &BTreeMap<String, f64>,
    owner: impl Fn(&str) -> Option<String>,
    symbols: &[String],
    floor: f64,
) -> Result<ActionBelief, MetricsError> {
    let max = logits.values().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(MetricsError::Degenerate("no finite logit".into()));
    }
    let scores = logits
        .iter()
        .map(|(a, l)| (a.clone(), (l - max).exp()))
        .collect();
    implicit_belief(&scores, owner, symbols, floor)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub episodes: usize,
    pub success_rate: f64,
    pub success_ci: (f64, f64),
    pub mean_steps: f64,
    pub steps_ci: (f64, f64),
    pub mean_provider_calls: f64,
    pub mean_final_alignment: f64,
    pub alignment_ci: (f64, f64),
    /// Fraction of steps whose observation kind matched the prediction.
    pub prediction_accuracy: f64,
}

pub fn summary(traces: &[EpisodeTrace]) -> Result<Summary, MetricsError> {
    if traces.is_empty() {
        return Err(MetricsError::Degenerate("no traces".into()));
    }
    let n = traces.len();
    let successes = traces.iter().filter(|t| t.outcome.success).count();
    let steps: Vec<f64> = traces.iter().map(|t| t.outcome.steps_used as f64).collect();
    let calls: Vec<f64> = traces.iter().map(|t| t.provider_calls() as f64).collect();
    let align: Vec<f64> = traces.iter().map(EpisodeTrace::final_alignment).collect();
    let total_steps: usize = traces.iter().map(|t| t.steps.len()).sum();
    let matched = traces
        .iter()
        .flat_map(|t| &t.steps)
        .filter(|s| s.predicted_match)
        .count();
    Ok(Summary {
        episodes: n,
        success_rate: successes as f64 / n as f64,
        success_ci: stats::proportion_ci(successes, n),
        mean_steps: stats::mean(&steps),
        steps_ci: stats::mean_ci(&steps),
        mean_provider_calls: stats::mean(&calls),
        mean_final_alignment: stats::mean(&align),
        alignment_ci: stats::mean_ci(&align),
        prediction_accuracy: if total_steps == 0 {
            0.0
        } else {
            matched as f64 / total_steps as f64
        },
    })
}

/// Entropy statistics of one successful episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeEntropy {
    /// Mean of `H(b_{t-1}) - H(b_t)` over the steps up to the find.
    pub mean_step_gain: f64,
    /// `H(b_0) - H(b_end)` where `b_end` follows the finding step.
    pub net_drop: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyDynamics {
    pub mean_step_gain: f64,
    pub net_drop: f64,
    /// Fraction of episodes with a positive net drop.
    pub sharpen_rate: f64,
    pub n_episodes: usize,
    /// Unsuccessful episodes left out.
    pub excluded: usize,
}

/// Per-episode entropy statistics of the successful episodes, plus the
/// number of excluded ones.
pub fn entropy_samples(
    traces: &[EpisodeTrace],
) -> Result<(Vec<EpisodeEntropy>, usize), MetricsError> {
    let mut out = Vec::new();
    let mut excluded = 0;
    for t in traces {
        if !t.outcome.success {
            excluded += 1;
            continue;
        }
        let schema = |reason: &str| MetricsError::Schema {
            episode: episode_name(t),
            reason: reason.into(),
        };
        let initial = t
            .initial
            .as_ref()
            .ok_or_else(|| schema("no initial belief"))?;
        let end = t
            .steps
            .iter()
            .position(|s| s.reward == 1)
            .ok_or_else(|| schema("marked successful but no step found the target"))?;
        let gains: Vec<f64> = t.steps[..=end]
            .iter()
            .map(|s| s.belief_before.entropy() - s.belief_after.entropy())
            .collect();
        out.push(EpisodeEntropy {
            mean_step_gain: stats::mean(&gains),
            net_drop: initial.entropy() - t.steps[end].belief_after.entropy(),
        });
    }
    Ok((out, excluded))
}

pub fn entropy_dynamics(traces: &[EpisodeTrace]) -> Result<EntropyDynamics, MetricsError> {
    let (samples, excluded) = entropy_samples(traces)?;
    let n = samples.len();
    if n == 0 {
        return Ok(EntropyDynamics {
            mean_step_gain: 0.0,
            net_drop: 0.0,
            sharpen_rate: 0.0,
            n_episodes: 0,
            excluded,
        });
    }
    let gains: Vec<f64> = samples.iter().map(|s| s.mean_step_gain).collect();
    let drops: Vec<f64> = samples.iter().map(|s| s.net_drop).collect();
    Ok(EntropyDynamics {
        mean_step_gain: stats::mean(&gains),
        net_drop: stats::mean(&drops),
        sharpen_rate: drops.iter().filter(|d| **d > 0.0).count() as f64 / n as f64,
        n_episodes: n,
        excluded,
    })
}

/// One IG bin of executed steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IgBin {
    pub bin: usize,
    pub ig_lo: f64,
    pub ig_hi: f64,
    pub n: usize,
    pub mean_delta: f64,
    pub sd_delta: f64,
    /// Fraction of the bin's steps whose observation kind was predicted.
    pub match_rate: f64,
    #[serde(skip)]
    pub deltas: Vec<f64>,
}

/// One-sided Welch comparison of the top bin against the bottom bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopBottomTest {
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IgRankTable {
    /// Number of rank bins requested (ten unless there were too few steps).
    pub bins_requested: usize,
    pub steps: usize,
    pub bins: Vec<IgBin>,
    pub test: Option<TopBottomTest>,
    pub warning: Option<String>,
}

/// Groups executed steps into rank bins of their predicted IG and reports the
/// mean alignment change per bin. Steps with equal IG share a bin.
pub fn ig_rank_analysis(traces: &[EpisodeTrace]) -> IgRankTable {
    let mut rows: Vec<(f64, f64, bool)> = traces
        .iter()
        .flat_map(|t| &t.steps)
        .filter_map(|s| {
            s.chosen_ig.map(|ig| {
                (
                    ig,
                    s.alignment_after - s.alignment_before,
                    s.predicted_match,
                )
            })
        })
        .collect();
    rows.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let n = rows.len();
    let (k, warning) = if n >= 10 {
        (10, None)
    } else {
        let k = (n / 2).max(1);
        (
            k,
            Some(format!(
                "only {n} scored steps; using {k} bin(s) instead of 10"
            )),
        )
    };
    let mut bins: Vec<IgBin> = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && rows[j].0 == rows[i].0 {
            j += 1;
        }
        let bin = i * k / n;
        if bins.last().is_none_or(|b| b.bin != bin) {
            bins.push(IgBin {
                bin,
                ig_lo: rows[i].0,
                ig_hi: rows[i].0,
                n: 0,
                mean_delta: 0.0,
                sd_delta: 0.0,
                match_rate: 0.0,
                deltas: Vec::new(),
            });
        }
        let b = bins.last_mut().expect("pushed");
        for r in &rows[i..j] {
            b.ig_hi = r.0;
            b.n += 1;
            b.deltas.push(r.1);
            b.match_rate += f64::from(u8::from(r.2));
        }
        i = j;
    }
    for b in &mut bins {
        b.mean_delta = stats::mean(&b.deltas);
        b.sd_delta = stats::variance(&b.deltas).sqrt();
        b.match_rate /= b.n as f64;
    }
    let test = match (bins.first(), bins.last()) {
        (Some(lo), Some(hi)) if bins.len() > 1 => stats::welch_greater(&hi.deltas, &lo.deltas)
            .map(|(t, df, p)| TopBottomTest { t, df, p }),
        _ => None,
    };
    IgRankTable {
        bins_requested: k,
        steps: n,
        bins,
        test,
        warning,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityStats {
    /// Entropy of the pooled empirical distribution of checked symbols.
    pub action_entropy: f64,
    /// Distinct action sequences over total sequences.
    pub unique_ratio: f64,
    pub runs: usize,
}

pub fn diversity_stats(traces: &[EpisodeTrace]) -> Result<DiversityStats, MetricsError> {
    if traces.is_empty() {
        return Err(MetricsError::Degenerate("no traces".into()));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut distinct: BTreeSet<Vec<&str>> = BTreeSet::new();
    for t in traces {
        let actions = t.actions();
        for a in &actions {
            *counts.entry(a).or_default() += 1;
        }
        distinct.insert(actions);
    }
    let total: usize = counts.values().sum();
    let mut c: Vec<usize> = counts.into_values().collect();
    c.sort_unstable();
    let action_entropy = if total == 0 {
        0.0
    } else {
        entropy(c.iter().map(|n| *n as f64 / total as f64))
    };
    Ok(DiversityStats {
        action_entropy,
        unique_ratio: distinct.len() as f64 / traces.len() as f64,
        runs: traces.len(),
    })
}

/// Mean belief entropy before step `t + 1` across the episodes that reached
/// it; `t = 0` is the initial belief.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: usize,
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n: usize,
}

/// One point per step index up to the longest episode.
pub fn entropy_curve(traces: &[EpisodeTrace]) -> Vec<CurvePoint> {
    let longest = traces.iter().map(|t| t.steps.len()).max().unwrap_or(0);
    (0..longest)
        .map(|t| {
            let hs: Vec<f64> = traces
                .iter()
                .filter_map(|tr| tr.steps.get(t))
                .map(|s| s.belief_before.entropy())
                .collect();
            let (ci_lo, ci_hi) = stats::mean_ci(&hs);
            CurvePoint {
                t,
                mean: stats::mean(&hs),
                ci_lo,
                ci_hi,
                n: hs.len(),
            }
        })
        .collect()
}


#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;
    use approx::assert_abs_diff_eq;

    fn owner_by_prefix(a: &str) -> Option<String> {
        a.split(':').next().map(str::to_string)
    }

    fn syms(s: &[&str]) -> Vec<String> {
        s.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn implicit_belief_aggregates_by_symbol() {
        let scores: BTreeMap<String, f64> = [
            ("s1:a1".into(), 0.4),
            ("s1:a2".into(), 0.4),
            ("s2:a3".into(), 0.2),
        ]
        .into();
        let b = implicit_belief(&scores, owner_by_prefix, &syms(&["s1", "s2"]), 1e-4).unwrap();
        assert_abs_diff_eq!(b.prob("s1"), 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(b.prob("s2"), 0.2, epsilon = 1e-12);

        let equal: BTreeMap<String, f64> = ["x:1", "x:2", "y:1", "y:2", "z:1", "z:2"]
            .iter()
            .map(|a| (a.to_string(), 3.0))
            .collect();
        let b = implicit_belief(&equal, owner_by_prefix, &syms(&["x", "y", "z"]), 1e-4).unwrap();
        for s in ["x", "y", "z"] {
            assert_abs_diff_eq!(b.prob(s), 1.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn implicit_belief_rejects_all_zero() {
        let scores: BTreeMap<String, f64> = [("s1:a".into(), 0.0)].into();
        assert!(matches!(
            implicit_belief(&scores, owner_by_prefix, &syms(&["s1"]), 1e-4),
            Err(MetricsError::Degenerate(_))
        ));
    }

    #[test]
    fn logits_are_shift_invariant() {
        let logits: BTreeMap<String, f64> = [
            ("s1:a".into(), 0.3),
            ("s2:b".into(), -1.2),
            ("s2:c".into(), 2.0),
        ]
        .into();
        let shifted: BTreeMap<String, f64> =
            logits.iter().map(|(a, l)| (a.clone(), l + 17.5)).collect();
        let s = syms(&["s1", "s2", "s3"]);
        let b1 = implicit_belief_from_logits(&logits, owner_by_prefix, &s, 1e-4).unwrap();
        let b2 = implicit_belief_from_logits(&shifted, owner_by_prefix, &s, 1e-4).unwrap();
        for sym in &s {
            assert_abs_diff_eq!(b1.prob(sym), b2.prob(sym), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(b1.prob("s3"), 1e-4, epsilon = 1e-15);
    }

    #[test]
    fn summary_arithmetic() {
        let traces = vec![
            flat_trace(1, &["b", "a"], true, 10),
            flat_trace(2, &["b", "b", "b", "a"], true, 10),
            flat_trace(3, &["b"; 10], false, 10),
        ];
        let s = summary(&traces).unwrap();
        assert_abs_diff_eq!(s.success_rate, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.mean_steps, 16.0 / 3.0, epsilon = 1e-12);

        let ones: Vec<_> = (0..5).map(|i| flat_trace(i, &["a"], true, 3)).collect();
        let s = summary(&ones).unwrap();
        assert_eq!((s.success_rate, s.mean_steps), (1.0, 1.0));
    }

    #[test]
    fn entropy_of_a_one_step_find() {
        let b0 = snap(&[("a", 1.0), ("b", 1.0), ("c", 1.0), ("d", 1.0)]);
        let b1 = snap(&[("a", 1.0), ("b", 0.0), ("c", 0.0), ("d", 0.0)]);
        let t = trace(0, b0.clone(), vec![step(1, "a", true, b0, b1.clone())], 4);
        let d = entropy_dynamics(&[t]).unwrap();
        let want = 4f64.ln() - b1.entropy();
        assert_abs_diff_eq!(d.net_drop, want, epsilon = 1e-12);
        assert_abs_diff_eq!(d.net_drop, 1.383, epsilon = 5e-4);
        assert_eq!(d.sharpen_rate, 1.0);
    }

    #[test]
    fn constant_beliefs_have_no_dynamics() {
        let traces = vec![
            flat_trace(0, &["b", "a"], true, 5),
            flat_trace(1, &["a"], true, 5),
            flat_trace(2, &["b", "b"], false, 2),
        ];
        let d = entropy_dynamics(&traces).unwrap();
        assert_eq!(
            (
                d.mean_step_gain,
                d.net_drop,
                d.sharpen_rate,
                d.n_episodes,
                d.excluded
            ),
            (0.0, 0.0, 0.0, 2, 1)
        );
    }

    #[test]
    fn missing_snapshot_names_the_episode() {
        let mut t = flat_trace(42, &["a"], true, 5);
        t.initial = None;
        let err = entropy_dynamics(&[t]).unwrap_err();
        assert!(err.to_string().contains("seed 42"), "{err}");
    }

    fn scored(ig_delta: &[(f64, f64)]) -> Vec<EpisodeTrace> {
        ig_delta
            .iter()
            .enumerate()
            .map(|(i, (ig, d))| {
                let mut t = flat_trace(i as u64, &["b"], false, 1);
                t.steps[0].chosen_ig = Some(*ig);
                t.steps[0].alignment_after = t.steps[0].alignment_before + d;
                t
            })
            .collect()
    }

    #[test]
    fn ig_equal_to_delta_gives_increasing_bins() {
        let rows: Vec<(f64, f64)> = (0..100)
            .map(|i| (i as f64 / 100.0, i as f64 / 100.0))
            .collect();
        let table = ig_rank_analysis(&scored(&rows));
        assert_eq!(table.bins.len(), 10);
        assert!(table.warning.is_none());
        for w in table.bins.windows(2) {
            assert!(w[1].mean_delta > w[0].mean_delta);
        }
        assert!(table.test.unwrap().p < 1e-6);
    }

    #[test]
    fn identical_ig_is_one_bin() {
        let rows: Vec<(f64, f64)> = (0..30).map(|i| (0.25, i as f64)).collect();
        let table = ig_rank_analysis(&scored(&rows));
        assert_eq!(table.bins.len(), 1);
        assert_eq!(table.bins[0].n, 30);
        assert!(table.test.is_none());
    }

    #[test]
    fn few_steps_use_coarser_bins() {
        let rows: Vec<(f64, f64)> = (0..6).map(|i| (i as f64, 0.0)).collect();
        let table = ig_rank_analysis(&scored(&rows));
        assert_eq!(table.bins_requested, 3);
        assert_eq!(table.bins.len(), 3);
        assert!(table.warning.is_some());
    }

    #[test]
    fn diversity_definitions() {
        let same: Vec<_> = (0..4)
            .map(|i| flat_trace(i, &["a", "b", "b"], false, 3))
            .collect();
        let d = diversity_stats(&same).unwrap();
        assert_abs_diff_eq!(d.unique_ratio, 0.25, epsilon = 1e-15);
        let h = -(1.0f64 / 3.0) * (1.0f64 / 3.0).ln() - (2.0 / 3.0) * (2.0f64 / 3.0).ln();
        assert_abs_diff_eq!(d.action_entropy, h, epsilon = 1e-12);

        let disjoint = vec![
            flat_trace(0, &["a"], true, 1),
            flat_trace(1, &["b"], false, 1),
        ];
        assert_eq!(diversity_stats(&disjoint).unwrap().unique_ratio, 1.0);
    }

    #[test]
    fn curve_length_is_longest_episode() {
        let traces = vec![
            flat_trace(0, &["b", "a"], true, 5),
            flat_trace(1, &["b", "b", "b", "b", "a"], true, 5),
        ];
        let curve = entropy_curve(&traces);
        assert_eq!(curve.len(), 5);
        assert_eq!(curve[0].n, 2);
        assert_eq!(curve[4].n, 1);
    }

    #[test]
    fn order_does_not_matter() {
        let mut traces = vec![
            flat_trace(0, &["b", "a"], true, 5),
            flat_trace(1, &["a"], true, 5),
            flat_trace(2, &["b", "b"], false, 2),
        ];
        let s1 = summary(&traces).unwrap();
        let d1 = diversity_stats(&traces).unwrap();
        traces.reverse();
        assert_eq!(s1, summary(&traces).unwrap());
        assert_eq!(d1, diversity_stats(&traces).unwrap());
    }
}
