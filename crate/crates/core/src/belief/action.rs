use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::BeliefError;

/// Default probability floor.
pub const DEFAULT_FLOOR: f64 = 1e-4;

/// Ties closer than this are broken by symbol name.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Categorical belief over symbolic `Check` actions. Entries sum to one and
/// none falls below the floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionBelief {
    probs: BTreeMap<String, f64>,
    floor: f64,
}

impl ActionBelief {
    /// Normalizes nonnegative `weights` and applies the floor.
    pub fn from_weights(weights: BTreeMap<String, f64>, floor: f64) -> Result<Self, BeliefError> {
        let (symbols, w): (Vec<String>, Vec<f64>) = weights.into_iter().unzip();
        let probs = floored(&w, floor)?;
        Ok(Self {
            probs: symbols.into_iter().zip(probs).collect(),
            floor,
        })
    }

    pub fn uniform<S: AsRef<str>>(symbols: &[S], floor: f64) -> Result<Self, BeliefError> {
        Self::from_weights(
            symbols
                .iter()
                .map(|s| (s.as_ref().to_string(), 1.0))
                .collect(),
            floor,
        )
    }

    /// Mass `1 - (L-1)·floor` on `symbol`, the floor elsewhere.
    pub fn point_mass<S: AsRef<str>>(
        symbols: &[S],
        symbol: &str,
        floor: f64,
    ) -> Result<Self, BeliefError> {
        let weights: BTreeMap<String, f64> = symbols
            .iter()
            .map(|s| {
                let s = s.as_ref();
                (s.to_string(), if s == symbol { 1.0 } else { 0.0 })
            })
            .collect();
        if !weights.contains_key(symbol) {
            return Err(BeliefError::Domain(format!("unknown symbol `{symbol}`")));
        }
        Self::from_weights(weights, floor)
    }

    /// Takes `probs` as given after checking the invariants.
    pub fn from_probs(probs: BTreeMap<String, f64>, floor: f64) -> Result<Self, BeliefError> {
        let b = Self { probs, floor };
        b.check()?;
        Ok(b)
    }

    pub fn check(&self) -> Result<(), BeliefError> {
        if self.probs.is_empty() {
            return Err(BeliefError::Domain("belief over no symbols".into()));
        }
        let sum: f64 = self.probs.values().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(BeliefError::Domain(format!("belief sums to {sum}")));
        }
        for (s, p) in &self.probs {
            if !(*p >= self.floor * (1.0 - 1e-9) && *p <= 1.0) {
                return Err(BeliefError::Domain(format!(
                    "b({s}) = {p} violates floor {}",
                    self.floor
                )));
            }
        }
        Ok(())
    }

    pub fn probs(&self) -> &BTreeMap<String, f64> {
        &self.probs
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn prob(&self, symbol: &str) -> f64 {
        self.probs.get(symbol).copied().unwrap_or(0.0)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &String> {
        self.probs.keys()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        entropy(self.probs.values().copied())
    }

    /// Highest-probability symbol among `allowed`; ties go to the smallest name.
    pub fn argmax_among(&self, allowed: impl Fn(&str) -> bool) -> Option<&str> {
        argmax(
            self.probs
                .iter()
                .filter(|(s, _)| allowed(s))
                .map(|(s, p)| (s.as_str(), *p)),
        )
    }

    /// Multiplies every entry by `m(symbol)` and re-floors.
    pub fn reweight(&self, m: impl Fn(&str) -> f64) -> Result<Self, BeliefError> {
        Self::from_weights(
            self.probs
                .iter()
                .map(|(s, p)| (s.clone(), p * m(s)))
                .collect(),
            self.floor,
        )
    }
}

/// Argmax with lexicographic tie-break. Input must be in ascending name order.
pub fn argmax<'a>(items: impl Iterator<Item = (&'a str, f64)>) -> Option<&'a str> {
    let mut best: Option<(&str, f64)> = None;
    for (s, v) in items {
        match best {
            Some((_, bv)) if v <= bv + TIE_TOLERANCE => {}
            _ => best = Some((s, v)),
        }
    }
    best.map(|(s, _)| s)
}

/// Shannon entropy in nats of a (sub)probability vector; zero entries add 0.
pub fn entropy(p: impl IntoIterator<Item = f64>) -> f64 {
    let h: f64 = p
        .into_iter()
        .filter(|x| *x > 0.0)
        .map(|x| -x * x.ln())
        .sum();
    h.max(0.0)
}

/// Normalizes `weights` and lifts every entry to at least `floor`, taking the
/// difference proportionally from the entries above it. Entries pinned to the
/// floor are exactly `floor`.
pub fn floored(weights: &[f64], floor: f64) -> Result<Vec<f64>, BeliefError> {
    let n = weights.len();
    if n == 0 {
        return Err(BeliefError::Domain("belief over no symbols".into()));
    }
    if floor.is_nan() || floor < 0.0 || floor * n as f64 >= 1.0 {
        return Err(BeliefError::Domain(format!(
            "floor {floor} is infeasible for {n} symbols"
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(BeliefError::Domain(
            "weights must be finite and nonnegative".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(BeliefError::Degenerate("all weights are zero".into()));
    }
    let mut pinned = vec![false; n];
    loop {
        let free_mass: f64 = weights
            .iter()
            .zip(&pinned)
            .filter(|(_, p)| !**p)
            .map(|(w, _)| w)
            .sum();
        let n_pinned = pinned.iter().filter(|p| **p).count();
        let budget = 1.0 - n_pinned as f64 * floor;
        let mut changed = false;
        if free_mass > 0.0 {
            for i in 0..n {
                if !pinned[i] && weights[i] / free_mass * budget < floor {
                    pinned[i] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok((0..n)
                .map(|i| {
                    if pinned[i] {
                        floor
                    } else {
                        weights[i] / free_mass * budget
                    }
                })
                .collect());
        }
    }
}
