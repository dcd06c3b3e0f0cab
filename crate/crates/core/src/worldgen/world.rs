use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Catalog, WorldError};
use crate::rng::{stream_rng, Stream};

/// Bounds for world sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub min_instances: usize,
    pub max_instances: usize,
    pub max_total: usize,
    /// Fixes the target class instead of drawing it uniformly.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_class: Option<String>,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            min_instances: 1,
            max_instances: 4,
            max_total: 24,
            target_class: None,
        }
    }
}

impl GenerationConfig {
    pub fn violations(&self, catalog: &Catalog) -> Vec<String> {
        let mut errs = Vec::new();
        if self.min_instances == 0 {
            errs.push("generation.min_instances must be at least 1".to_string());
        }
        if self.min_instances > self.max_instances {
            errs.push(format!(
                "generation.min_instances ({}) exceeds max_instances ({})",
                self.min_instances, self.max_instances
            ));
        }
        let floor = self.min_instances * catalog.symbols.len();
        if self.max_total < floor {
            errs.push(format!(
                "generation.max_total ({}) is below min_instances x symbols ({floor})",
                self.max_total
            ));
        }
        if let Some(class) = &self.target_class {
            if !catalog.classes.contains(class) {
                errs.push(format!(
                    "generation.target_class `{class}` is not in the catalog"
                ));
            }
        }
        errs
    }
}

/// A concrete receptacle, e.g. `kitchen_cabinet2` under `kitchen_cabinet`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InstanceRef {
    pub symbol: String,
    pub instance: String,
}

impl InstanceRef {
    pub fn new(symbol: impl Into<String>, instance: impl Into<String>) -> Self {
        Self {
            symbol: symbol.into(),
            instance: instance.into(),
        }
    }
}

impl std::fmt::Display for InstanceRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.symbol, self.instance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub symbol: String,
    pub instances: Vec<String>,
}

/// A sampled static world. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    seed: u64,
    latent: u32,
    locations: Vec<Location>,
    target_class: String,
    target: InstanceRef,
    distractors: BTreeMap<String, Vec<String>>,
}

impl World {
    /// Assembles a world by hand. Locations are sorted by symbol.
    pub fn from_parts(
        seed: u64,
        latent: u32,
        mut locations: Vec<Location>,
        target_class: impl Into<String>,
        target: InstanceRef,
        distractors: BTreeMap<String, Vec<String>>,
    ) -> Result<Self, WorldError> {
        locations.sort_by(|a, b| a.symbol.cmp(&b.symbol));
        let mut errs = Vec::new();
        if locations.is_empty() {
            errs.push("world has no locations".to_string());
        }
        let mut seen = std::collections::BTreeSet::new();
        for loc in &locations {
            if loc.instances.is_empty() {
                errs.push(format!("symbol `{}` has no instances", loc.symbol));
            }
            if !seen.insert(loc.symbol.clone()) {
                errs.push(format!("duplicate symbol `{}`", loc.symbol));
            }
            for inst in &loc.instances {
                if !seen.insert(format!("#{inst}")) {
                    errs.push(format!("duplicate instance `{inst}`"));
                }
            }
        }
        let target_ok = locations
            .iter()
            .any(|l| l.symbol == target.symbol && l.instances.contains(&target.instance));
        if !target_ok {
            errs.push(format!(
                "target `{}` is not an instance of `{}`",
                target.instance, target.symbol
            ));
        }
        if !errs.is_empty() {
            return Err(WorldError::Config(errs));
        }
        Ok(Self {
            seed,
            latent,
            locations,
            target_class: target_class.into(),
            target,
            distractors,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn latent(&self) -> u32 {
        self.latent
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn target_class(&self) -> &str {
        &self.target_class
    }

    /// The hidden target. Agents must not read this.
    pub fn target(&self) -> &InstanceRef {
        &self.target
    }

    pub fn distractors(&self) -> &BTreeMap<String, Vec<String>> {
        &self.distractors
    }

    pub fn symbols(&self) -> Vec<String> {
        self.locations.iter().map(|l| l.symbol.clone()).collect()
    }

    pub fn total_instances(&self) -> usize {
        self.locations.iter().map(|l| l.instances.len()).sum()
    }

    /// Symbol owning `instance`, if any.
    pub fn symbol_of(&self, instance: &str) -> Option<&str> {
        self.locations
            .iter()
            .find(|l| l.instances.iter().any(|i| i == instance))
            .map(|l| l.symbol.as_str())
    }

    /// The agent-visible layout (symbols and instances, no target).
    pub fn structure(&self) -> WorldStructure {
        WorldStructure::new(&self.locations)
    }
}

/// Symbols and their instances, flattened in symbol order.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldStructure {
    symbols: Vec<String>,
    instances: Vec<InstanceRef>,
    /// `ranges[s]` is the slice of `instances` under `symbols[s]`.
    ranges: Vec<std::ops::Range<usize>>,
    owner: Vec<usize>,
}

impl WorldStructure {
    pub fn new(locations: &[Location]) -> Self {
        let mut locs: Vec<&Location> = locations.iter().collect();
        locs.sort_by(|a, b| a.symbol.cmp(&b.symbol));
        let mut symbols = Vec::new();
        let mut instances = Vec::new();
        let mut ranges = Vec::new();
        let mut owner = Vec::new();
        for (s, loc) in locs.into_iter().enumerate() {
            let start = instances.len();
            for inst in &loc.instances {
                instances.push(InstanceRef::new(&loc.symbol, inst));
                owner.push(s);
            }
            ranges.push(start..instances.len());
            symbols.push(loc.symbol.clone());
        }
        Self {
            symbols,
            instances,
            ranges,
            owner,
        }
    }

    /// One instance per symbol, named `<symbol>1`.
    pub fn single_instance(symbols: &[String]) -> Self {
        let locs: Vec<Location> = symbols
            .iter()
            .map(|s| Location {
                symbol: s.clone(),
                instances: vec![format!("{s}1")],
            })
            .collect();
        Self::new(&locs)
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn instances(&self) -> &[InstanceRef] {
        &self.instances
    }

    pub fn range(&self, symbol_idx: usize) -> std::ops::Range<usize> {
        self.ranges[symbol_idx].clone()
    }

    pub fn owner(&self, instance_idx: usize) -> usize {
        self.owner[instance_idx]
    }

    pub fn symbol_index(&self, symbol: &str) -> Option<usize> {
        self.symbols
            .binary_search_by(|s| s.as_str().cmp(symbol))
            .ok()
    }

    pub fn instance_index(&self, instance: &str) -> Option<usize> {
        self.instances.iter().position(|i| i.instance == instance)
    }

    pub fn len_symbols(&self) -> usize {
        self.symbols.len()
    }

    pub fn len_instances(&self) -> usize {
        self.instances.len()
    }
}

/// A world plus the search subgoal: candidate symbols and the step budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTask {
    pub world: World,
    pub candidate_symbols: Vec<String>,
    pub budget: usize,
    /// Stored for completeness; the sparse episodic objective does not use it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discount: Option<f64>,
}

impl SearchTask {
    pub fn new(world: World, budget: usize) -> Result<Self, WorldError> {
        if budget == 0 {
            return Err(WorldError::Config(vec!["budget must be at least 1".into()]));
        }
        let candidate_symbols = world.symbols();
        Ok(Self {
            world,
            candidate_symbols,
            budget,
            discount: None,
        })
    }

    pub fn with_discount(mut self, gamma: f64) -> Result<Self, WorldError> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(WorldError::Config(vec![format!(
                "discount {gamma} outside (0, 1]"
            )]));
        }
        self.discount = Some(gamma);
        Ok(self)
    }
}

fn sample_index<R: Rng>(rng: &mut R, weights: &[f64]) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return None;
    }
    let mut u = rng.random::<f64>() * total;
    let mut last = None;
    for (i, w) in weights.iter().enumerate() {
        if *w > 0.0 {
            last = Some(i);
            if u < *w {
                return Some(i);
            }
            u -= w;
        }
    }
    last
}

/// Draws a world: latent type from the catalog prior, per-symbol instance
/// counts, target class, target symbol from the type's placement row and the
/// instance uniformly within that symbol. Pure function of its arguments.
pub fn sample_world(
    catalog: &Catalog,
    config: &GenerationConfig,
    seed: u64,
) -> Result<World, WorldError> {
    catalog.validate()?;
    let errs = config.violations(catalog);
    if !errs.is_empty() {
        return Err(WorldError::Config(errs));
    }
    let mut rng = stream_rng(seed, Stream::World);

    let type_idx = sample_index(&mut rng, &catalog.prior())
        .ok_or_else(|| WorldError::Generation("catalog prior has no mass".into()))?;
    let latent = &catalog.types[type_idx];

    let mut counts: Vec<usize> = catalog
        .symbols
        .iter()
        .map(|_| rng.random_range(config.min_instances..=config.max_instances))
        .collect();
    while counts.iter().sum::<usize>() > config.max_total {
        // trim the largest count (first in symbol order on ties)
        let (i, _) = counts
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > config.min_instances)
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("max_total >= min_instances * symbols");
        counts[i] -= 1;
    }
    let locations: Vec<Location> = catalog
        .symbols
        .iter()
        .zip(&counts)
        .map(|(s, n)| Location {
            symbol: s.clone(),
            instances: (1..=*n).map(|k| format!("{s}{k}")).collect(),
        })
        .collect();

    let target_class = match &config.target_class {
        Some(c) => c.clone(),
        None => catalog.classes[rng.random_range(0..catalog.classes.len())].clone(),
    };
    let row: Vec<f64> = catalog
        .symbols
        .iter()
        .map(|s| latent.placement_prob(&target_class, s))
        .collect();
    let target_sym = sample_index(&mut rng, &row).ok_or_else(|| {
        WorldError::Generation(format!(
            "type `{}` has an all-zero placement row for class `{target_class}`",
            latent.name
        ))
    })?;
    let loc = &locations[target_sym];
    let target = InstanceRef::new(
        &loc.symbol,
        &loc.instances[rng.random_range(0..loc.instances.len())],
    );

    let mut distractors: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for class in catalog.classes.iter().filter(|c| **c != target_class) {
        let row: Vec<f64> = catalog
            .symbols
            .iter()
            .map(|s| latent.placement_prob(class, s))
            .collect();
        if let Some(si) = sample_index(&mut rng, &row) {
            let loc = &locations[si];
            let inst = &loc.instances[rng.random_range(0..loc.instances.len())];
            distractors
                .entry(inst.clone())
                .or_default()
                .push(class.clone());
        }
    }

    World::from_parts(
        seed,
        latent.id,
        locations,
        target_class,
        target,
        distractors,
    )
}
