//! Belief-augmented object search driven by expected information gain.
//!
//! A search task hides one target object among the instances of a small set of
//! symbolic locations (`kitchen_cabinet`, `sink_basin`, ...). The placement of
//! the target depends on a hidden household type, so early observations carry
//! information about where to look next. The crate provides:
//!
//! * [`worldgen`]: latent-type catalogs, seeded world sampling and the search
//!   environment (observation model and sparse reward).
//! * [`belief`]: the hierarchical belief (structured hypotheses plus a
//!   categorical belief over locations), the exact Bayesian posterior, the
//!   two-stage amortized update and its two projections.
//! * [`planner`]: observation simulation, expected information gain, the
//!   search policies (IG, greedy, random, rollout-based), grounding and the
//!   episode loop that produces an [`planner::EpisodeTrace`].
//! * [`provider`]: the hypothesis-provider contract with a deterministic
//!   rule-based implementation and an HTTP text-completion client.
//! * [`metrics`]: success/steps summaries, entropy dynamics, IG-rank analysis,
//!   implicit beliefs and trajectory diversity.
//! * [`harness`]: experiment configuration, seeded batch execution and
//!   plot-ready outputs.
//!
//! The runnable programs under `examples/` walk through each of these.

pub mod belief;
pub mod harness;
pub mod metrics;
pub mod planner;
pub mod provider;
pub mod rng;
pub mod worldgen;

pub use belief::{ActionBelief, ExactPosterior, GlobalHypotheses};
pub use planner::{run_episode, ArmSpec, EpisodeConfig, EpisodeTrace, Policy};
pub use worldgen::{sample_world, Catalog, GenerationConfig, LatentType, SearchTask, World};
