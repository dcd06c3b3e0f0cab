use std::collections::BTreeMap;

use super::{ArmSpec, EpisodeConfig, HintModel, PlannerError, ProjectionKind, UpdaterKind};
use crate::belief::{
    init_belief, project_provider, project_similarity, revise_hypotheses, ActionBelief,
    BeliefSnapshot, ExactPosterior, GlobalHypotheses, ObservationModel,
};
use crate::metrics::implicit_belief;
use crate::provider::HypothesisProvider;
use crate::worldgen::{Catalog, Observation, ObservationKind, SearchTask, WorldStructure};

/// Everything an update needs besides the belief itself.
pub struct EpisodeContext<'a> {
    pub structure: WorldStructure,
    pub symbols: Vec<String>,
    pub classes: Vec<String>,
    pub target_class: String,
    pub cfg: &'a EpisodeConfig,
    pub projection: ProjectionKind,
    pub provider_revise: bool,
    pub provider: Option<&'a dyn HypothesisProvider>,
    /// Hint emission assumed when simulating from an action belief.
    pub hints: HintModel,
}

impl<'a> EpisodeContext<'a> {
    pub fn new(
        task: &SearchTask,
        catalog: &Catalog,
        arm: &ArmSpec,
        cfg: &'a EpisodeConfig,
        provider: Option<&'a dyn HypothesisProvider>,
    ) -> Self {
        let class = task.world.target_class();
        let mixture = catalog.mixture(class);
        Self {
            structure: task.world.structure(),
            symbols: task.candidate_symbols.clone(),
            classes: catalog.classes.clone(),
            target_class: class.to_string(),
            cfg,
            projection: arm.projection,
            provider_revise: arm.provider_revise,
            provider,
            hints: HintModel {
                strength: catalog.mean_hint_strength(),
                distribution: task
                    .candidate_symbols
                    .iter()
                    .map(|s| (s.clone(), mixture.get(s).copied().unwrap_or(0.0)))
                    .collect(),
            },
        }
    }

    pub fn floor(&self) -> f64 {
        self.cfg.belief.epsilon
    }

    /// Unvisited instance count per symbol index.
    pub fn unvisited(&self, visited: &[bool]) -> Vec<usize> {
        (0..self.structure.len_symbols())
            .map(|s| self.structure.range(s).filter(|i| !visited[*i]).count())
            .collect()
    }
}

/// Bookkeeping from one update.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UpdateInfo {
    pub provider_calls: usize,
    pub notes: Vec<String>,
}

/// The belief carried through an episode.
#[derive(Debug, Clone, PartialEq)]
pub enum BeliefState {
    /// Never updated. Snapshots report the implicit belief of the fixed
    /// scores over the instances still unvisited.
    Fixed {
        hypotheses: GlobalHypotheses,
        belief: ActionBelief,
    },
    Exact {
        posterior: ExactPosterior,
    },
    /// `base` is the initial belief every projection starts from.
    Amortized {
        hypotheses: GlobalHypotheses,
        belief: ActionBelief,
        base: ActionBelief,
    },
}

impl BeliefState {
    pub fn init(
        task: &SearchTask,
        catalog: &Catalog,
        arm: &ArmSpec,
        ctx: &EpisodeContext<'_>,
    ) -> Result<Self, PlannerError> {
        let (hypotheses, belief) = init_belief(task, catalog, arm.prior, &ctx.cfg.belief)?;
        Ok(match arm.updater {
            UpdaterKind::None => Self::Fixed { hypotheses, belief },
            UpdaterKind::Exact => Self::Exact {
                posterior: ExactPosterior::new(
                    ObservationModel::from_catalog(catalog, &ctx.structure, &ctx.target_class),
                    ctx.structure.clone(),
                    arm.prior,
                )?,
            },
            UpdaterKind::Amortized => Self::Amortized {
                hypotheses,
                base: belief.clone(),
                belief,
            },
        })
    }

    /// The belief the policy acts on.
    pub fn belief(&self, floor: f64) -> Result<ActionBelief, PlannerError> {
        Ok(match self {
            Self::Fixed { belief, .. } | Self::Amortized { belief, .. } => belief.clone(),
            Self::Exact { posterior } => posterior.marginal(floor)?,
        })
    }

    pub fn hypotheses(&self) -> Option<&GlobalHypotheses> {
        match self {
            Self::Fixed { hypotheses, .. } | Self::Amortized { hypotheses, .. } => Some(hypotheses),
            Self::Exact { .. } => None,
        }
    }

    /// The belief as recorded in traces.
    pub fn snapshot(
        &self,
        visited: &[bool],
        ctx: &EpisodeContext<'_>,
    ) -> Result<BeliefSnapshot, PlannerError> {
        let b = match self {
            Self::Fixed { belief, .. } => {
                let st = &ctx.structure;
                let scores: BTreeMap<String, f64> = st
                    .instances()
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !visited[*i])
                    .map(|(i, inst)| {
                        let n = st.range(st.owner(i)).len() as f64;
                        (inst.instance.clone(), belief.prob(&inst.symbol) / n)
                    })
                    .collect();
                let owner = |a: &str| {
                    st.instance_index(a)
                        .map(|i| st.instances()[i].symbol.clone())
                };
                match implicit_belief(&scores, owner, &ctx.symbols, ctx.floor()) {
                    Ok(b) => b,
                    // nothing left unvisited: report the fixed belief itself
                    Err(_) => belief.clone(),
                }
            }
            _ => self.belief(ctx.floor())?,
        };
        Ok(BeliefSnapshot::new(&b, self.hypotheses()))
    }

    /// Updates on a real observation at (1-based) step `step`.
    pub fn update(
        &self,
        obs: &Observation,
        step: usize,
        ctx: &EpisodeContext<'_>,
    ) -> Result<(Self, UpdateInfo), PlannerError> {
        self.update_inner(obs, step, ctx, false)
    }

    /// Update used inside information-gain simulation: the provider is not
    /// asked to revise, only (when configured) to project.
    pub fn simulate(
        &self,
        obs: &Observation,
        step: usize,
        ctx: &EpisodeContext<'_>,
    ) -> Result<(Self, UpdateInfo), PlannerError> {
        self.update_inner(obs, step, ctx, true)
    }

    fn update_inner(
        &self,
        obs: &Observation,
        step: usize,
        ctx: &EpisodeContext<'_>,
        simulated: bool,
    ) -> Result<(Self, UpdateInfo), PlannerError> {
        let mut info = UpdateInfo::default();
        let next = match self {
            Self::Fixed { .. } => self.clone(),
            Self::Exact { posterior } => Self::Exact {
                posterior: posterior.update(obs)?,
            },
            Self::Amortized {
                hypotheses, base, ..
            } => {
                let cfg = &ctx.cfg.belief;
                let reviser = if ctx.provider_revise && !simulated {
                    ctx.provider
                } else {
                    None
                };
                let rev = revise_hypotheses(
                    hypotheses,
                    obs,
                    step,
                    &ctx.target_class,
                    &ctx.symbols,
                    &ctx.classes,
                    reviser,
                    cfg,
                );
                info.provider_calls += rev.provider_calls;
                if let Some(f) = rev.failure {
                    info.notes.push(format!("revise fell back to rules: {f}"));
                }
                info.notes.extend(rev.warnings);
                let belief = if obs.kind == ObservationKind::Found {
                    ActionBelief::point_mass(&ctx.symbols, &obs.checked.symbol, cfg.epsilon)?
                } else {
                    match (ctx.projection, ctx.provider) {
                        (ProjectionKind::Provider, Some(p)) => {
                            let out = project_provider(
                                &rev.hypotheses,
                                base,
                                p,
                                &ctx.classes,
                                &ctx.target_class,
                                cfg,
                            )?;
                            info.provider_calls += out.calls;
                            if let Some(f) = out.failure {
                                info.notes
                                    .push(format!("projection kept the base belief: {f}"));
                            }
                            info.notes.extend(out.warnings);
                            out.belief
                        }
                        (ProjectionKind::Provider, None) => {
                            return Err(PlannerError::Config(
                                "provider projection without a provider".into(),
                            ))
                        }
                        (ProjectionKind::Similarity, _) => {
                            project_similarity(&rev.hypotheses.evidence(), base, cfg)?
                        }
                    }
                };
                Self::Amortized {
                    hypotheses: rev.hypotheses,
                    belief,
                    base: base.clone(),
                }
            }
        };
        Ok((next, info))
    }
}
