use std::collections::BTreeMap;
use std::sync::Arc;

use super::{entropy, ActionBelief, BeliefError, PriorMode};
use crate::worldgen::{Catalog, Observation, ObservationKind, WorldStructure};

/// Likelihood ingredients for one target class: per latent type, its prior
/// weight, hint rate and placement row over the structure's symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationModel {
    pub type_ids: Vec<u32>,
    pub prior: Vec<f64>,
    pub hint_strength: Vec<f64>,
    pub target_class: String,
    /// `placement[k][s]`, indexed like `WorldStructure::symbols`.
    pub placement: Vec<Vec<f64>>,
}

impl ObservationModel {
    pub fn from_catalog(catalog: &Catalog, structure: &WorldStructure, target_class: &str) -> Self {
        Self {
            type_ids: catalog.types.iter().map(|t| t.id).collect(),
            prior: catalog.prior(),
            hint_strength: catalog.types.iter().map(|t| t.hint_strength).collect(),
            target_class: target_class.to_string(),
            placement: catalog
                .types
                .iter()
                .map(|t| {
                    structure
                        .symbols()
                        .iter()
                        .map(|s| t.placement_prob(target_class, s))
                        .collect()
                })
                .collect(),
        }
    }
}

/// One simulated outcome of checking an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Branch {
    Found,
    Empty,
    /// Hint pointing at the symbol with this index.
    Hint(usize),
}

/// Exact joint posterior over (latent type, target instance).
#[derive(Debug, Clone, PartialEq)]
pub struct ExactPosterior {
    model: Arc<ObservationModel>,
    structure: Arc<WorldStructure>,
    /// Row-major `[type][instance]`.
    joint: Vec<f64>,
    checked: Vec<bool>,
}

impl ExactPosterior {
    pub fn new(
        model: ObservationModel,
        structure: WorldStructure,
        mode: PriorMode,
    ) -> Result<Self, BeliefError> {
        let n = structure.len_instances();
        let n_sym = structure.len_symbols() as f64;
        let mut joint = Vec::with_capacity(model.type_ids.len() * n);
        for (k, w) in model.prior.iter().enumerate() {
            for i in 0..n {
                let s = structure.owner(i);
                let per_instance = 1.0 / structure.range(s).len() as f64;
                let loc = match mode {
                    PriorMode::Informed => model.placement[k][s],
                    PriorMode::Flat => 1.0 / n_sym,
                };
                joint.push(w * loc * per_instance);
            }
        }
        let mut post = Self {
            model: Arc::new(model),
            structure: Arc::new(structure),
            joint,
            checked: vec![false; n],
        };
        if !post.normalize() {
            return Err(BeliefError::Degenerate(format!(
                "prior places no mass on class `{}`",
                post.model.target_class
            )));
        }
        Ok(post)
    }

    /// A single pseudo-type posterior over one instance per symbol whose
    /// marginal is `b`, with a location-independent hint rate.
    pub fn from_belief(
        b: &ActionBelief,
        hint_strength: f64,
        hint_distribution: &BTreeMap<String, f64>,
    ) -> Result<Self, BeliefError> {
        let symbols: Vec<String> = b.symbols().cloned().collect();
        let structure = WorldStructure::single_instance(&symbols);
        let model = ObservationModel {
            type_ids: vec![0],
            prior: vec![1.0],
            hint_strength: vec![hint_strength],
            target_class: String::new(),
            placement: vec![symbols
                .iter()
                .map(|s| hint_distribution.get(s).copied().unwrap_or(0.0))
                .collect()],
        };
        let joint = symbols.iter().map(|s| b.prob(s)).collect();
        let mut post = Self {
            model: Arc::new(model),
            structure: Arc::new(structure),
            joint,
            checked: vec![false; symbols.len()],
        };
        post.normalize();
        Ok(post)
    }

    pub fn structure(&self) -> &WorldStructure {
        &self.structure
    }

    pub fn model(&self) -> &ObservationModel {
        &self.model
    }

    pub fn n_types(&self) -> usize {
        self.model.type_ids.len()
    }

    pub fn joint(&self, k: usize, i: usize) -> f64 {
        self.joint[k * self.structure.len_instances() + i]
    }

    /// `(type id, symbol, instance, probability)` for every cell.
    pub fn joint_entries(&self) -> Vec<(u32, &str, &str, f64)> {
        let n = self.structure.len_instances();
        let mut out = Vec::with_capacity(self.joint.len());
        for (k, id) in self.model.type_ids.iter().enumerate() {
            for (i, inst) in self.structure.instances().iter().enumerate() {
                out.push((
                    *id,
                    inst.symbol.as_str(),
                    inst.instance.as_str(),
                    self.joint[k * n + i],
                ));
            }
        }
        out
    }

    pub fn is_checked(&self, instance: usize) -> bool {
        self.checked[instance]
    }

    /// Posterior over latent types, in model order.
    pub fn type_marginal(&self) -> Vec<f64> {
        let n = self.structure.len_instances();
        self.joint.chunks(n).map(|row| row.iter().sum()).collect()
    }

    /// Posterior probability that the target is instance `i`.
    pub fn instance_marginal(&self, i: usize) -> f64 {
        let n = self.structure.len_instances();
        (0..self.n_types()).map(|k| self.joint[k * n + i]).sum()
    }

    /// Unfloored marginal over symbols, indexed like the structure.
    pub fn marginal_raw(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.structure.len_symbols()];
        let n = self.structure.len_instances();
        for (idx, p) in self.joint.iter().enumerate() {
            m[self.structure.owner(idx % n)] += p;
        }
        m
    }

    pub fn marginal_map(&self) -> BTreeMap<String, f64> {
        self.structure
            .symbols()
            .iter()
            .cloned()
            .zip(self.marginal_raw())
            .collect()
    }

    /// Entropy of the unfloored symbol marginal.
    pub fn entropy_raw(&self) -> f64 {
        entropy(self.marginal_raw())
    }

    /// Symbol marginal, floored and renormalized.
    pub fn marginal(&self, floor: f64) -> Result<ActionBelief, BeliefError> {
        ActionBelief::from_weights(self.marginal_map(), floor)
    }

    /// Bayes update on a real observation.
    pub fn update(&self, obs: &Observation) -> Result<Self, BeliefError> {
        let inconsistent = || BeliefError::Inconsistent {
            observation: obs.to_string(),
        };
        let i = self
            .structure
            .instance_index(&obs.checked.instance)
            .filter(|i| self.structure.instances()[*i].symbol == obs.checked.symbol)
            .ok_or_else(|| BeliefError::Domain(format!("unknown instance `{}`", obs.checked)))?;
        let branch = match (obs.kind, &obs.hint) {
            (ObservationKind::Found, _) => Branch::Found,
            (ObservationKind::Empty, _) => Branch::Empty,
            (ObservationKind::EmptyWithHint, Some(h)) => {
                if h.class != self.model.target_class {
                    return Err(inconsistent());
                }
                Branch::Hint(
                    self.structure
                        .symbol_index(&h.symbol)
                        .ok_or_else(inconsistent)?,
                )
            }
            (ObservationKind::EmptyWithHint, None) => {
                return Err(BeliefError::Domain(
                    "hint observation without a hint".into(),
                ))
            }
        };
        self.update_branch(i, branch).ok_or_else(inconsistent)
    }

    /// Bayes update on a simulated outcome at instance `i`; `None` when the
    /// outcome has zero likelihood.
    pub fn update_branch(&self, i: usize, branch: Branch) -> Option<Self> {
        let n = self.structure.len_instances();
        let mut next = self.clone();
        for k in 0..self.n_types() {
            let row = &mut next.joint[k * n..(k + 1) * n];
            match branch {
                Branch::Found => {
                    for (j, p) in row.iter_mut().enumerate() {
                        if j != i {
                            *p = 0.0;
                        }
                    }
                }
                Branch::Empty | Branch::Hint(_) => {
                    row[i] = 0.0;
                    let lik = match branch {
                        Branch::Empty => 1.0 - self.model.hint_strength[k],
                        Branch::Hint(y) => self.model.hint_strength[k] * self.model.placement[k][y],
                        Branch::Found => unreachable!(),
                    };
                    row.iter_mut().for_each(|p| *p *= lik);
                }
            }
        }
        next.checked[i] = true;
        next.normalize().then_some(next)
    }

    /// Predictive distribution of outcomes when checking instance `i`.
    /// Probabilities sum to one; zero-probability outcomes are omitted.
    pub fn branches(&self, i: usize) -> Vec<(Branch, f64)> {
        let n = self.structure.len_instances();
        let n_sym = self.structure.len_symbols();
        let mut found = 0.0;
        let mut empty = 0.0;
        let mut hint = vec![0.0; n_sym];
        for k in 0..self.n_types() {
            let row = &self.joint[k * n..(k + 1) * n];
            let here = row[i];
            let elsewhere: f64 = row.iter().sum::<f64>() - here;
            found += here;
            let h = self.model.hint_strength[k];
            empty += elsewhere * (1.0 - h);
            for (y, slot) in hint.iter_mut().enumerate() {
                *slot += elsewhere * h * self.model.placement[k][y];
            }
        }
        let mut out = Vec::new();
        if found > 0.0 {
            out.push((Branch::Found, found));
        }
        if empty > 0.0 {
            out.push((Branch::Empty, empty));
        }
        for (y, p) in hint.into_iter().enumerate() {
            if p > 0.0 {
                out.push((Branch::Hint(y), p));
            }
        }
        let total: f64 = out.iter().map(|(_, p)| p).sum();
        if total > 0.0 {
            out.iter_mut().for_each(|(_, p)| *p /= total);
        }
        out
    }

    fn normalize(&mut self) -> bool {
        let total: f64 = self.joint.iter().sum();
        if !total.is_finite() || total <= 0.0 {
            return false;
        }
        self.joint.iter_mut().for_each(|p| *p /= total);
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worldgen::{Hint, InstanceRef, Location};
    use approx::assert_abs_diff_eq;

    fn structure(counts: &[(&str, usize)]) -> WorldStructure {
        let locs: Vec<Location> = counts
            .iter()
            .map(|(s, n)| Location {
                symbol: s.to_string(),
                instances: (1..=*n).map(|k| format!("{s}{k}")).collect(),
            })
            .collect();
        WorldStructure::new(&locs)
    }

    fn model(hints: &[f64], rows: &[Vec<f64>]) -> ObservationModel {
        ObservationModel {
            type_ids: (0..hints.len() as u32).collect(),
            prior: vec![1.0 / hints.len() as f64; hints.len()],
            hint_strength: hints.to_vec(),
            target_class: "mug".into(),
            placement: rows.to_vec(),
        }
    }

    #[test]
    fn found_collapses_the_marginal() {
        let st = structure(&[("cabinet", 2), ("drawer", 1)]);
        let post =
            ExactPosterior::new(model(&[0.0], &[vec![0.5, 0.5]]), st, PriorMode::Informed).unwrap();
        let next = post
            .update(&Observation::found(InstanceRef::new("cabinet", "cabinet2")))
            .unwrap();
        assert_eq!(next.marginal_raw(), vec![1.0, 0.0]);
    }

    #[test]
    fn empty_eliminates_the_checked_symbol() {
        let st = structure(&[("a", 1), ("b", 1)]);
        let post = ExactPosterior::new(
            model(&[0.0, 0.0], &[vec![0.5, 0.5], vec![0.5, 0.5]]),
            st,
            PriorMode::Informed,
        )
        .unwrap();
        let next = post
            .update(&Observation::empty(InstanceRef::new("a", "a1")))
            .unwrap();
        assert_eq!(next.marginal_raw(), vec![0.0, 1.0]);
    }

    #[test]
    fn hint_reweights_types_by_hint_rate() {
        // identical placements, so only the hint rate separates the types
        let st = structure(&[("a", 1), ("b", 1), ("c", 1)]);
        let row = vec![0.25, 0.5, 0.25];
        let post = ExactPosterior::new(
            model(&[0.9, 0.1], &[row.clone(), row]),
            st,
            PriorMode::Informed,
        )
        .unwrap();
        let obs = Observation::with_hint(
            InstanceRef::new("a", "a1"),
            Hint {
                class: "mug".into(),
                symbol: "b".into(),
            },
        );
        let next = post.update(&obs).unwrap();
        let types = next.type_marginal();
        assert_abs_diff_eq!(types[0], 0.9, epsilon = 1e-12);
    }

    #[test]
    fn marginal_weights_by_instance_count() {
        let st = structure(&[("a", 2), ("b", 1)]);
        let post =
            ExactPosterior::new(model(&[0.0], &[vec![0.5, 0.5]]), st, PriorMode::Informed).unwrap();
        // flat over instances instead: rebuild the joint by hand
        let uniform = ExactPosterior {
            joint: vec![1.0 / 3.0; 3],
            ..post
        };
        let m = uniform.marginal_raw();
        assert_abs_diff_eq!(m[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[1], 1.0 / 3.0, epsilon = 1e-15);
        let b = uniform.marginal(1e-4).unwrap();
        assert_abs_diff_eq!(b.probs().values().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn impossible_observation_is_reported() {
        let st = structure(&[("a", 1), ("b", 1)]);
        let post =
            ExactPosterior::new(model(&[0.0], &[vec![1.0, 0.0]]), st, PriorMode::Informed).unwrap();
        let err = post
            .update(&Observation::empty(InstanceRef::new("a", "a1")))
            .unwrap_err();
        assert_eq!(
            err,
            BeliefError::Inconsistent {
                observation: "empty a/a1".into()
            }
        );
    }

    #[test]
    fn branches_sum_to_one() {
        let st = structure(&[("a", 2), ("b", 1), ("c", 1)]);
        let post = ExactPosterior::new(
            model(&[0.4, 0.2], &[vec![0.5, 0.3, 0.2], vec![0.1, 0.1, 0.8]]),
            st,
            PriorMode::Informed,
        )
        .unwrap();
        for i in 0..4 {
            let total: f64 = post.branches(i).iter().map(|(_, p)| p).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        }
    }
}
