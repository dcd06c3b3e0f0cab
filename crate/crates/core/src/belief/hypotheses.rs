use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::BeliefError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Supports,
    Refutes,
}

impl Polarity {
    /// Grammar keyword.
    pub fn keyword(self) -> &'static str {
        match self {
            Self::Supports => "SUPPORT",
            Self::Refutes => "REFUTE",
        }
    }
}

/// Where an assertion came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Provenance {
    Prior,
    /// Added or last changed by the observation at this step (1-based).
    Step(usize),
    Provider,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Prior => f.write_str("prior"),
            Self::Step(t) => write!(f, "t{t}"),
            Self::Provider => f.write_str("provider"),
        }
    }
}

impl std::str::FromStr for Provenance {
    type Err = BeliefError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "prior" => Ok(Self::Prior),
            "provider" => Ok(Self::Provider),
            _ => s
                .strip_prefix('t')
                .and_then(|t| t.parse().ok())
                .map(Self::Step)
                .ok_or_else(|| BeliefError::Parse(format!("provenance `{s}`"))),
        }
    }
}

/// "Objects of `class` are (not) at `symbol`", held with confidence `weight`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub class: String,
    pub symbol: String,
    pub polarity: Polarity,
    pub weight: f64,
    pub provenance: Provenance,
}

impl Assertion {
    pub fn new(
        class: impl Into<String>,
        symbol: impl Into<String>,
        polarity: Polarity,
        weight: f64,
        provenance: Provenance,
    ) -> Self {
        Self {
            class: class.into(),
            symbol: symbol.into(),
            polarity,
            weight,
            provenance,
        }
    }

    fn key(&self) -> (&str, &str, Polarity) {
        (&self.class, &self.symbol, self.polarity)
    }
}

/// One change to a hypothesis set. `Set` adds or reweights; a weight of zero
/// in the wire grammar means `Remove`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum HypothesisEdit {
    Set {
        class: String,
        symbol: String,
        polarity: Polarity,
        weight: f64,
    },
    Remove {
        class: String,
        symbol: String,
        polarity: Polarity,
    },
}

impl HypothesisEdit {
    pub fn symbol(&self) -> &str {
        match self {
            Self::Set { symbol, .. } | Self::Remove { symbol, .. } => symbol,
        }
    }

    pub fn class(&self) -> &str {
        match self {
            Self::Set { class, .. } | Self::Remove { class, .. } => class,
        }
    }
}

/// Textual-level belief as a set of weighted assertions, kept sorted by
/// (class, symbol, polarity) with no duplicate keys.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GlobalHypotheses {
    assertions: Vec<Assertion>,
}

impl GlobalHypotheses {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a set, rejecting duplicate keys and weights outside (0, 1].
    pub fn from_assertions(assertions: Vec<Assertion>) -> Result<Self, BeliefError> {
        let mut h = Self::new();
        for a in assertions {
            if !(a.weight > 0.0 && a.weight <= 1.0) {
                return Err(BeliefError::Domain(format!(
                    "assertion weight {} outside (0, 1]",
                    a.weight
                )));
            }
            if h.get(&a.class, &a.symbol, a.polarity).is_some() {
                return Err(BeliefError::Domain(format!(
                    "duplicate assertion {} {} {}",
                    a.polarity.keyword(),
                    a.class,
                    a.symbol
                )));
            }
            h.put(a);
        }
        Ok(h)
    }

    pub fn assertions(&self) -> &[Assertion] {
        &self.assertions
    }

    pub fn len(&self) -> usize {
        self.assertions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assertions.is_empty()
    }

    fn position(&self, class: &str, symbol: &str, polarity: Polarity) -> Result<usize, usize> {
        self.assertions
            .binary_search_by(|a| a.key().cmp(&(class, symbol, polarity)))
    }

    pub fn get(&self, class: &str, symbol: &str, polarity: Polarity) -> Option<&Assertion> {
        self.position(class, symbol, polarity)
            .ok()
            .map(|i| &self.assertions[i])
    }

    pub fn weight(&self, class: &str, symbol: &str, polarity: Polarity) -> f64 {
        self.get(class, symbol, polarity).map_or(0.0, |a| a.weight)
    }

    /// Inserts or replaces.
    pub fn put(&mut self, a: Assertion) {
        match self.position(&a.class, &a.symbol, a.polarity) {
            Ok(i) => self.assertions[i] = a,
            Err(i) => self.assertions.insert(i, a),
        }
    }

    pub fn remove(&mut self, class: &str, symbol: &str, polarity: Polarity) -> Option<Assertion> {
        self.position(class, symbol, polarity)
            .ok()
            .map(|i| self.assertions.remove(i))
    }

    /// Weight that adding evidence `w` to an existing assertion would give:
    /// independent pieces of evidence combine as `1 - (1 - w_old)(1 - w)`.
    pub fn combined_weight(&self, class: &str, symbol: &str, polarity: Polarity, w: f64) -> f64 {
        let old = self.weight(class, symbol, polarity);
        1.0 - (1.0 - old) * (1.0 - w)
    }

    pub fn apply(&mut self, edit: &HypothesisEdit, provenance: Provenance) {
        match edit {
            HypothesisEdit::Set {
                class,
                symbol,
                polarity,
                weight,
            } => {
                if *weight > 0.0 {
                    self.put(Assertion::new(
                        class,
                        symbol,
                        *polarity,
                        weight.min(1.0),
                        provenance,
                    ));
                } else {
                    self.remove(class, symbol, *polarity);
                }
            }
            HypothesisEdit::Remove {
                class,
                symbol,
                polarity,
            } => {
                self.remove(class, symbol, *polarity);
            }
        }
    }

    pub fn applied(&self, edits: &[HypothesisEdit], provenance: Provenance) -> Self {
        let mut h = self.clone();
        for e in edits {
            h.apply(e, provenance);
        }
        h
    }

    /// Assertions that came from observations or the provider, not the prior.
    pub fn evidence(&self) -> Self {
        Self {
            assertions: self
                .assertions
                .iter()
                .filter(|a| a.provenance != Provenance::Prior)
                .cloned()
                .collect(),
        }
    }

    /// Messages for every assertion outside the given vocabulary.
    pub fn violations(&self, symbols: &[String], classes: &[String]) -> Vec<String> {
        let symbols: BTreeSet<&str> = symbols.iter().map(String::as_str).collect();
        let classes: BTreeSet<&str> = classes.iter().map(String::as_str).collect();
        let mut errs = Vec::new();
        for a in &self.assertions {
            if !symbols.contains(a.symbol.as_str()) {
                errs.push(format!("assertion on unknown symbol `{}`", a.symbol));
            }
            if !classes.contains(a.class.as_str()) {
                errs.push(format!("assertion on unknown class `{}`", a.class));
            }
        }
        errs
    }

    /// One grammar line per assertion: `SUPPORT <class> <symbol> <weight>`.
    pub fn to_grammar(&self) -> String {
        let mut out = String::new();
        for a in &self.assertions {
            out.push_str(&format!(
                "{} {} {} {}\n",
                a.polarity.keyword(),
                a.class,
                a.symbol,
                a.weight
            ));
        }
        out
    }
}
