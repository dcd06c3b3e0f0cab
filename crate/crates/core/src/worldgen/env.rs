use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Catalog, InstanceRef, LatentType, SearchTask, WorldError};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ObservationKind {
    Found,
    Empty,
    EmptyWithHint,
}

impl ObservationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Found => "found",
            Self::Empty => "empty",
            Self::EmptyWithHint => "empty_with_hint",
        }
    }
}

/// "Objects of `class` tend to be at `symbol`."
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Hint {
    pub class: String,
    pub symbol: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub kind: ObservationKind,
    pub checked: InstanceRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hint: Option<Hint>,
}

impl Observation {
    pub fn found(checked: InstanceRef) -> Self {
        Self {
            kind: ObservationKind::Found,
            checked,
            hint: None,
        }
    }

    pub fn empty(checked: InstanceRef) -> Self {
        Self {
            kind: ObservationKind::Empty,
            checked,
            hint: None,
        }
    }

    pub fn with_hint(checked: InstanceRef, hint: Hint) -> Self {
        Self {
            kind: ObservationKind::EmptyWithHint,
            checked,
            hint: Some(hint),
        }
    }
}

/// Text form used in prompts and logs:
/// `found <symbol>/<instance>`, `empty <symbol>/<instance>` or
/// `empty <symbol>/<instance> hint <class>@<symbol>`.
impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word = match self.kind {
            ObservationKind::Found => "found",
            _ => "empty",
        };
        write!(
            f,
            "{word} {}/{}",
            self.checked.symbol, self.checked.instance
        )?;
        if let Some(h) = &self.hint {
            write!(f, " hint {}@{}", h.class, h.symbol)?;
        }
        Ok(())
    }
}

impl FromStr for Observation {
    type Err = WorldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || WorldError::Parse(s.to_string());
        let parts: Vec<&str> = s.split_whitespace().collect();
        let (word, checked) = match parts.as_slice() {
            [w, c] | [w, c, "hint", _] => (*w, *c),
            _ => return Err(bad()),
        };
        let (symbol, instance) = checked.split_once('/').ok_or_else(bad)?;
        let checked = InstanceRef::new(symbol, instance);
        match (word, parts.get(3)) {
            ("found", None) => Ok(Self::found(checked)),
            ("empty", None) => Ok(Self::empty(checked)),
            ("empty", Some(h)) => {
                let (class, symbol) = h.split_once('@').ok_or_else(bad)?;
                Ok(Self::with_hint(
                    checked,
                    Hint {
                        class: class.into(),
                        symbol: symbol.into(),
                    },
                ))
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: u8,
    pub done: bool,
}

/// Ground-truth environment for one episode. Owns the step counter and the
/// hint stream; the world itself is never modified.
#[derive(Debug, Clone)]
pub struct SearchEnv {
    task: SearchTask,
    latent: LatentType,
    hints: ChaCha8Rng,
    steps: usize,
    done: bool,
}

impl SearchEnv {
    pub fn new(task: SearchTask, catalog: &Catalog, seed: u64) -> Result<Self, WorldError> {
        let latent = catalog
            .latent(task.world.latent())
            .cloned()
            .ok_or_else(|| {
                WorldError::Config(vec![format!(
                    "world latent type {} is not in the catalog",
                    task.world.latent()
                )])
            })?;
        Ok(Self {
            task,
            latent,
            hints: stream_rng(seed, Stream::Hint),
            steps: 0,
            done: false,
        })
    }

    pub fn task(&self) -> &SearchTask {
        &self.task
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Checks one instance.
    pub fn step(&mut self, instance: &str) -> Result<StepResult, WorldError> {
        if self.done {
            return Err(WorldError::Finished { steps: self.steps });
        }
        let world = &self.task.world;
        let symbol = world
            .symbol_of(instance)
            .ok_or_else(|| WorldError::Grounding(instance.to_string()))?;
        let checked = InstanceRef::new(symbol, instance);
        self.steps += 1;

        let observation = if checked == *world.target() {
            Observation::found(checked)
        } else if self.hints.random::<f64>() < self.latent.hint_strength {
            let class = world.target_class();
            let row: Vec<(&String, f64)> = self
                .latent
                .placement
                .get(class)
                .map(|r| r.iter().map(|(s, p)| (s, *p)).collect())
                .unwrap_or_default();
            let mut u = self.hints.random::<f64>();
            let mut pick = None;
            for (s, p) in &row {
                if *p > 0.0 {
                    pick = Some(*s);
                    if u < *p {
                        break;
                    }
                    u -= p;
                }
            }
            match pick {
                Some(s) => Observation::with_hint(
                    checked,
                    Hint {
                        class: class.to_string(),
                        symbol: s.clone(),
                    },
                ),
                None => Observation::empty(checked),
            }
        } else {
            Observation::empty(checked)
        };

        let reward = u8::from(observation.kind == ObservationKind::Found);
        self.done = reward == 1 || self.steps >= self.task.budget;
        Ok(StepResult {
            observation,
            reward,
            done: self.done,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worldgen::{sample_world, GenerationConfig, Location, World};
    use std::collections::BTreeMap;

    fn catalog(hint: f64) -> Catalog {
        let text = format!(
            r#"
symbols = ["cabinet", "drawer", "sink"]
classes = ["mug"]
[[types]]
id = 0
name = "a"
hint_strength = {hint}
[types.placement.mug]
cabinet = 0.5
drawer = 0.5
"#
        );
        Catalog::from_toml_str(&text).unwrap()
    }

    fn task(budget: usize) -> SearchTask {
        let locs = vec![
            Location {
                symbol: "cabinet".into(),
                instances: vec!["cabinet1".into(), "cabinet2".into()],
            },
            Location {
                symbol: "drawer".into(),
                instances: vec!["drawer1".into()],
            },
            Location {
                symbol: "sink".into(),
                instances: vec!["sink1".into()],
            },
        ];
        let world = World::from_parts(
            0,
            0,
            locs,
            "mug",
            InstanceRef::new("cabinet", "cabinet2"),
            BTreeMap::new(),
        )
        .unwrap();
        SearchTask::new(world, budget).unwrap()
    }

    #[test]
    fn finding_the_target_ends_the_episode() {
        let mut env = SearchEnv::new(task(5), &catalog(0.0), 1).unwrap();
        let r = env.step("cabinet2").unwrap();
        assert_eq!(r.observation.kind, ObservationKind::Found);
        assert_eq!((r.reward, r.done), (1, true));
        assert!(matches!(
            env.step("sink1"),
            Err(WorldError::Finished { steps: 1 })
        ));
    }

    #[test]
    fn hintless_miss_is_plain_empty() {
        let mut env = SearchEnv::new(task(5), &catalog(0.0), 1).unwrap();
        let r = env.step("sink1").unwrap();
        assert_eq!(
            r.observation,
            Observation::empty(InstanceRef::new("sink", "sink1"))
        );
        assert_eq!((r.reward, r.done), (0, false));
    }

    #[test]
    fn budget_exhaustion_sets_done() {
        let mut env = SearchEnv::new(task(1), &catalog(0.0), 1).unwrap();
        let r = env.step("drawer1").unwrap();
        assert_eq!((r.reward, r.done), (0, true));
    }

    #[test]
    fn unknown_instance_is_a_grounding_error() {
        let mut env = SearchEnv::new(task(5), &catalog(0.0), 1).unwrap();
        assert_eq!(
            env.step("cabinet9"),
            Err(WorldError::Grounding("cabinet9".into()))
        );
        assert_eq!(env.steps(), 0);
    }

    #[test]
    fn hint_frequency_matches_strength() {
        let cat = catalog(0.3);
        let mut env = SearchEnv::new(task(usize::MAX), &cat, 99).unwrap();
        let n = 10_000;
        let mut hints = 0;
        for _ in 0..n {
            let r = env.step("sink1").unwrap();
            if let Some(h) = &r.observation.hint {
                hints += 1;
                assert_ne!(h.symbol, "sink", "hint outside the true placement row");
            }
        }
        let freq = hints as f64 / n as f64;
        assert!((freq - 0.30).abs() < 0.02, "{freq}");
    }

    #[test]
    fn observation_text_round_trips() {
        for text in [
            "found cabinet/cabinet2",
            "empty sink/sink1",
            "empty sink/sink1 hint mug@drawer",
        ] {
            let obs: Observation = text.parse().unwrap();
            assert_eq!(obs.to_string(), text);
        }
        assert!("found cabinet".parse::<Observation>().is_err());
        assert!("lost sink/sink1".parse::<Observation>().is_err());
    }

    #[test]
    fn target_frequencies_match_prior_mixture() {
        let text = r#"
symbols = ["cabinet", "drawer", "shelf", "sink"]
classes = ["mug"]
prior = [0.3, 0.7]
[[types]]
id = 0
name = "a"
hint_strength = 0.0
[types.placement.mug]
cabinet = 0.6
drawer = 0.3
shelf = 0.1
[[types]]
id = 1
name = "b"
hint_strength = 0.0
[types.placement.mug]
drawer = 0.2
shelf = 0.3
sink = 0.5
"#;
        let cat = Catalog::from_toml_str(text).unwrap();
        let mix = cat.mixture("mug");
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        let n = 10_000;
        for seed in 0..n {
            let w = sample_world(&cat, &GenerationConfig::default(), seed).unwrap();
            *counts.entry(w.target().symbol.clone()).or_default() += 1;
        }
        for (s, p) in &mix {
            let freq = counts.get(s).copied().unwrap_or(0) as f64 / n as f64;
            assert!((freq - p).abs() < 0.02, "{s}: {freq} vs {p}");
        }
    }
}
