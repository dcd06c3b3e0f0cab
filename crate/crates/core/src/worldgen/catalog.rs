use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{valid_name, WorldError};
use crate::rng::{stream_rng, Stream};

const SUM_TOLERANCE: f64 = 1e-9;

/// One household "style": where each object class tends to live and how often
/// a negative check comes with a co-occurrence hint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentType {
    pub id: u32,
    pub name: String,
    /// object class -> location symbol -> probability. Symbols missing from a
    /// row have probability zero.
    pub placement: BTreeMap<String, BTreeMap<String, f64>>,
    pub hint_strength: f64,
}

impl LatentType {
    pub fn placement_prob(&self, class: &str, symbol: &str) -> f64 {
        self.placement
            .get(class)
            .and_then(|row| row.get(symbol))
            .copied()
            .unwrap_or(0.0)
    }
}

/// A set of latent types over a shared vocabulary of symbols and classes,
/// plus the prior over types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    #[serde(default)]
    pub name: String,
    pub symbols: Vec<String>,
    pub classes: Vec<String>,
    /// Prior over `types` (same order). Uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Vec<f64>>,
    pub types: Vec<LatentType>,
}

const DEFAULT_CATALOG: &str = include_str!("../../data/default_catalog.toml");

impl Catalog {
    /// Validates and canonicalizes (symbols and classes sorted).
    pub fn new(mut self) -> Result<Self, WorldError> {
        self.symbols.sort();
        self.classes.sort();
        self.validate()?;
        Ok(self)
    }

    /// The shipped catalog: 4 household types over 8 symbols and 6 classes.
    pub fn builtin() -> Self {
        Self::from_toml_str(DEFAULT_CATALOG).expect("shipped catalog is valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self, WorldError> {
        let raw: Catalog =
            toml::from_str(text).map_err(|e| WorldError::Config(vec![e.to_string()]))?;
        raw.new()
    }

    /// Loads a catalog file, or the shipped catalog for `builtin:default`.
    pub fn load(source: &str) -> Result<Self, WorldError> {
        if source == "builtin:default" {
            return Ok(Self::builtin());
        }
        let text = std::fs::read_to_string(Path::new(source))
            .map_err(|e| WorldError::Config(vec![format!("reading catalog `{source}`: {e}")]))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("catalog serializes")
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        let mut errs = Vec::new();
        if self.types.is_empty() {
            errs.push("catalog has no latent types".to_string());
        }
        if self.symbols.is_empty() {
            errs.push("catalog has no symbols".to_string());
        }
        if self.classes.is_empty() {
            errs.push("catalog has no object classes".to_string());
        }
        check_names("symbol", &self.symbols, &mut errs);
        check_names("class", &self.classes, &mut errs);

        let symbols: BTreeSet<&str> = self.symbols.iter().map(String::as_str).collect();
        let classes: BTreeSet<&str> = self.classes.iter().map(String::as_str).collect();
        let mut ids = BTreeSet::new();
        for t in &self.types {
            if !ids.insert(t.id) {
                errs.push(format!("duplicate latent type id {}", t.id));
            }
            if !(0.0..=1.0).contains(&t.hint_strength) {
                errs.push(format!(
                    "type {}: hint_strength {} outside [0, 1]",
                    t.id, t.hint_strength
                ));
            }
            for (class, row) in &t.placement {
                if !classes.contains(class.as_str()) {
                    errs.push(format!("type {}: unknown class `{class}`", t.id));
                }
                let mut sum = 0.0;
                for (symbol, p) in row {
                    if !symbols.contains(symbol.as_str()) {
                        errs.push(format!("type {}: unknown symbol `{symbol}`", t.id));
                    }
                    if !(0.0..=1.0).contains(p) {
                        errs.push(format!(
                            "type {}: placement[{class}][{symbol}] = {p} outside [0, 1]",
                            t.id
                        ));
                    }
                    sum += p;
                }
                // all-zero rows are allowed; sampling that class as a target fails later
                if sum != 0.0 && (sum - 1.0).abs() > SUM_TOLERANCE {
                    errs.push(format!(
                        "type {}: placement row `{class}` sums to {sum}",
                        t.id
                    ));
                }
            }
        }
        if let Some(prior) = &self.prior {
            if prior.len() != self.types.len() {
                errs.push(format!(
                    "prior has {} entries for {} types",
                    prior.len(),
                    self.types.len()
                ));
            }
            if prior.iter().any(|p| !p.is_finite() || *p < 0.0) {
                errs.push("prior has negative or non-finite entries".to_string());
            }
            let sum: f64 = prior.iter().sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                errs.push(format!("prior sums to {sum}"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(WorldError::Config(errs))
        }
    }

    /// Prior b0 over types, in `types` order.
    pub fn prior(&self) -> Vec<f64> {
        match &self.prior {
            Some(p) => p.clone(),
            None => vec![1.0 / self.types.len() as f64; self.types.len()],
        }
    }

    pub fn type_index(&self, id: u32) -> Option<usize> {
        self.types.iter().position(|t| t.id == id)
    }

    pub fn latent(&self, id: u32) -> Option<&LatentType> {
        self.types.iter().find(|t| t.id == id)
    }

    /// Prior-mixture placement of `class`: sum over types of b0(type) times
    /// the type's placement row. Every catalog symbol is present.
    pub fn mixture(&self, class: &str) -> BTreeMap<String, f64> {
        let prior = self.prior();
        self.symbols
            .iter()
            .map(|s| {
                let p = self
                    .types
                    .iter()
                    .zip(&prior)
                    .map(|(t, w)| w * t.placement_prob(class, s))
                    .sum();
                (s.clone(), p)
            })
            .collect()
    }

    /// Hint rate averaged over the prior.
    pub fn mean_hint_strength(&self) -> f64 {
        self.types
            .iter()
            .zip(self.prior())
            .map(|(t, w)| w * t.hint_strength)
            .sum()
    }
}

fn check_names(kind: &str, names: &[String], errs: &mut Vec<String>) {
    let mut seen = BTreeSet::new();
    for n in names {
        if !valid_name(n) {
            errs.push(format!("invalid {kind} name `{n}`"));
        }
        if !seen.insert(n) {
            errs.push(format!("duplicate {kind} `{n}`"));
        }
    }
}

/// Shape of a randomly generated catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogSpec {
    pub n_types: usize,
    pub n_symbols: usize,
    pub n_classes: usize,
    pub hint_range: (f64, f64),
    /// Draw the type prior at random instead of uniform.
    pub random_prior: bool,
}

impl Default for CatalogSpec {
    fn default() -> Self {
        Self {
            n_types: 3,
            n_symbols: 6,
            n_classes: 2,
            hint_range: (0.0, 0.6),
            random_prior: false,
        }
    }
}

fn letters(mut i: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'a' + (i % 26) as u8);
        i /= 26;
        if i == 0 {
            break;
        }
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

/// Generates a random catalog with peaked placement rows. Requires at least
/// two types; the generated types never share a placement map.
pub fn generate_catalog(spec: &CatalogSpec, seed: u64) -> Result<Catalog, WorldError> {
    let mut errs = Vec::new();
    if spec.n_types < 2 {
        errs.push("a generated catalog needs at least 2 latent types".to_string());
    }
    if spec.n_symbols == 0 || spec.n_classes == 0 {
        errs.push("a generated catalog needs symbols and classes".to_string());
    }
    let (lo, hi) = spec.hint_range;
    if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
        errs.push(format!("hint range ({lo}, {hi}) is not within [0, 1]"));
    }
    if !errs.is_empty() {
        return Err(WorldError::Config(errs));
    }

    let mut rng = stream_rng(seed, Stream::World);
    let symbols: Vec<String> = (0..spec.n_symbols)
        .map(|i| format!("loc_{}", letters(i)))
        .collect();
    let classes: Vec<String> = (0..spec.n_classes)
        .map(|i| format!("obj_{}", letters(i)))
        .collect();

    let mut types = Vec::with_capacity(spec.n_types);
    for id in 0..spec.n_types {
        let mut placement = BTreeMap::new();
        for class in &classes {
            let raw: Vec<f64> = (0..spec.n_symbols)
                .map(|_| {
                    let u: f64 = rng.random_range(f64::EPSILON..1.0);
                    (-u.ln()).powi(3)
                })
                .collect();
            let total: f64 = raw.iter().sum();
            let row = symbols
                .iter()
                .zip(&raw)
                .map(|(s, w)| (s.clone(), w / total))
                .collect();
            placement.insert(class.clone(), row);
        }
        let hint_strength = if hi > lo {
            rng.random_range(lo..=hi)
        } else {
            lo
        };
        types.push(LatentType {
            id: id as u32,
            name: format!("type_{}", letters(id)),
            placement,
            hint_strength,
        });
    }
    for i in 0..types.len() {
        for j in 0..i {
            if types[i].placement == types[j].placement {
                return Err(WorldError::Generation(format!(
                    "types {j} and {i} drew identical placements"
                )));
            }
        }
    }
    let prior = if spec.random_prior {
        let raw: Vec<f64> = (0..spec.n_types)
            .map(|_| rng.random_range(0.1..1.0))
            .collect();
        let total: f64 = raw.iter().sum();
        Some(raw.iter().map(|w| w / total).collect())
    } else {
        None
    };
    Catalog {
        name: format!("generated-{seed}"),
        symbols,
        classes,
        prior,
        types,
    }
    .new()
}
