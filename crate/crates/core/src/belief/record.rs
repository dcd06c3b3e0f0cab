use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{entropy, ActionBelief, Assertion, BeliefError, GlobalHypotheses, Polarity};

/// A belief as stored in traces: one line of text,
///
/// ```text
/// eps=0.0001 | kitchen_cabinet=0.6;sink_basin=0.4 | REFUTE mug sink_basin 0.9 t1;SUPPORT mug kitchen_cabinet 0.5 prior
/// ```
///
/// Floats use the shortest representation that parses back to the same bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct BeliefSnapshot {
    pub floor: f64,
    pub probs: BTreeMap<String, f64>,
    pub assertions: Vec<Assertion>,
}

impl BeliefSnapshot {
    pub fn new(b: &ActionBelief, h: Option<&GlobalHypotheses>) -> Self {
        Self {
            floor: b.floor(),
            probs: b.probs().clone(),
            assertions: h.map(|h| h.assertions().to_vec()).unwrap_or_default(),
        }
    }

    pub fn belief(&self) -> Result<ActionBelief, BeliefError> {
        ActionBelief::from_probs(self.probs.clone(), self.floor)
    }

    pub fn entropy(&self) -> f64 {
        entropy(self.probs.values().copied())
    }

    pub fn prob(&self, symbol: &str) -> f64 {
        self.probs.get(symbol).copied().unwrap_or(0.0)
    }
}

impl fmt::Display for BeliefSnapshot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "eps={} | ", self.floor)?;
        let probs: Vec<String> = self.probs.iter().map(|(s, p)| format!("{s}={p}")).collect();
        f.write_str(&probs.join(";"))?;
        f.write_str(" | ")?;
        let assertions: Vec<String> = self
            .assertions
            .iter()
            .map(|a| {
                format!(
                    "{} {} {} {} {}",
                    a.polarity.keyword(),
                    a.class,
                    a.symbol,
                    a.weight,
                    a.provenance
                )
            })
            .collect();
        f.write_str(&assertions.join(";"))
    }
}

impl FromStr for BeliefSnapshot {
    type Err = BeliefError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |what: &str| BeliefError::Parse(format!("{what} in `{s}`"));
        let mut parts = s.splitn(3, '|').map(str::trim);
        let floor = parts
            .next()
            .and_then(|p| p.strip_prefix("eps="))
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| bad("missing floor"))?;
        let mut probs = BTreeMap::new();
        for pair in parts
            .next()
            .ok_or_else(|| bad("missing probabilities"))?
            .split(';')
        {
            let (sym, p) = pair.split_once('=').ok_or_else(|| bad("bad probability"))?;
            let p: f64 = p.parse().map_err(|_| bad("bad probability"))?;
            probs.insert(sym.to_string(), p);
        }
        let mut assertions = Vec::new();
        for item in parts
            .next()
            .unwrap_or("")
            .split(';')
            .filter(|x| !x.trim().is_empty())
        {
            let f: Vec<&str> = item.split_whitespace().collect();
            let [kw, class, symbol, w, prov] = f.as_slice() else {
                return Err(bad("bad assertion"));
            };
            let polarity = match *kw {
                "SUPPORT" => Polarity::Supports,
                "REFUTE" => Polarity::Refutes,
                _ => return Err(bad("bad assertion keyword")),
            };
            assertions.push(Assertion::new(
                *class,
                *symbol,
                polarity,
                w.parse().map_err(|_| bad("bad weight"))?,
                prov.parse()?,
            ));
        }
        Ok(Self {
            floor,
            probs,
            assertions,
        })
    }
}

impl From<BeliefSnapshot> for String {
    fn from(s: BeliefSnapshot) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for BeliefSnapshot {
    type Error = BeliefError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::Provenance;

    #[test]
    fn text_round_trip_is_bit_exact() {
        let b = ActionBelief::from_weights(
            [("a".into(), 1.0), ("b".into(), 2.0), ("c".into(), 0.0)].into(),
            1e-4,
        )
        .unwrap();
        let h = GlobalHypotheses::from_assertions(vec![
            Assertion::new("mug", "a", Polarity::Refutes, 0.9, Provenance::Step(3)),
            Assertion::new("mug", "b", Polarity::Supports, 1.0 / 3.0, Provenance::Prior),
        ])
        .unwrap();
        let snap = BeliefSnapshot::new(&b, Some(&h));
        let text = snap.to_string();
        let back: BeliefSnapshot = text.parse().unwrap();
        assert_eq!(back, snap);
        assert_eq!(back.belief().unwrap(), b);
        let json = serde_json::to_string(&snap).unwrap();
        assert_eq!(serde_json::from_str::<BeliefSnapshot>(&json).unwrap(), snap);
    }

    #[test]
    fn empty_assertions_and_garbage() {
        let b = ActionBelief::uniform(&["a", "b"], 1e-4).unwrap();
        let snap = BeliefSnapshot::new(&b, None);
        assert_eq!(snap.to_string(), "eps=0.0001 | a=0.5;b=0.5 | ");
        assert_eq!(snap.to_string().parse::<BeliefSnapshot>().unwrap(), snap);
        assert!("a=1".parse::<BeliefSnapshot>().is_err());
    }
}
