use super::{
    grammar, Directive, DirectiveKind, HypothesisProvider, ProviderError, ProviderRequest,
    ProviderResponse, RequestKind,
};
use crate::belief::{
    rule_edits, BeliefConfig, GlobalHypotheses, HypothesisEdit, Polarity, Provenance,
};
use crate::worldgen::{Catalog, Observation};

/// Deterministic provider backed by the catalog and the revision rules. Its
/// answer is a pure function of the request.
#[derive(Debug, Clone)]
pub struct RuleProvider {
    catalog: Catalog,
    cfg: BeliefConfig,
}

impl RuleProvider {
    pub fn new(catalog: Catalog, cfg: BeliefConfig) -> Self {
        Self { catalog, cfg }
    }

    fn hypotheses(&self, req: &ProviderRequest) -> Result<GlobalHypotheses, ProviderError> {
        let parsed = grammar::parse(&req.hypotheses, &req.symbols, &req.classes);
        if !parsed.rejected.is_empty() {
            return Err(ProviderError::InvalidRequest(format!(
                "unreadable hypothesis line `{}`",
                parsed.rejected[0]
            )));
        }
        Ok(GlobalHypotheses::new().applied(&parsed.edits, Provenance::Prior))
    }

    fn project(&self, h: &GlobalHypotheses, req: &ProviderRequest) -> Vec<Directive> {
        if h.is_empty() {
            return Vec::new();
        }
        let target = req.target_class.as_str();
        let mixture = self.catalog.mixture(target);
        let refuted = |s: &str| h.weight(target, s, Polarity::Refutes) > 0.0;
        let mut scored: Vec<(&String, f64)> = req
            .symbols
            .iter()
            .filter(|s| !refuted(s))
            .map(|s| {
                let m = mixture.get(s).copied().unwrap_or(0.0);
                (s, m * (1.0 + h.weight(target, s, Polarity::Supports)))
            })
            .filter(|(_, v)| *v > 0.0)
            .collect();
        // stable sort keeps name order among equal scores
        scored.sort_by(|a, b| b.1.total_cmp(&a.1));
        let mut out: Vec<Directive> = scored
            .iter()
            .take(2)
            .map(|(s, _)| Directive {
                symbol: s.to_string(),
                kind: DirectiveKind::Boost,
            })
            .collect();
        out.extend(
            req.symbols
                .iter()
                .filter(|s| refuted(s))
                .map(|s| Directive {
                    symbol: s.clone(),
                    kind: DirectiveKind::Suppress,
                }),
        );
        out
    }

    fn init(&self, req: &ProviderRequest) -> Vec<HypothesisEdit> {
        let mixture = self.catalog.mixture(&req.target_class);
        req.symbols
            .iter()
            .filter_map(|s| {
                let w = mixture.get(s).copied().unwrap_or(0.0);
                (w > 0.0 && w >= self.cfg.init_threshold).then(|| HypothesisEdit::Set {
                    class: req.target_class.clone(),
                    symbol: s.clone(),
                    polarity: Polarity::Supports,
                    weight: w,
                })
            })
            .collect()
    }
}

impl HypothesisProvider for RuleProvider {
    fn name(&self) -> &str {
        "rule"
    }

    fn respond(&self, req: &ProviderRequest) -> Result<ProviderResponse, ProviderError> {
        req.validate()?;
        let h = self.hypotheses(req)?;
        let (edits, directives) = match req.kind {
            RequestKind::Revise => {
                let text = req.observation.as_deref().unwrap_or_default();
                let obs: Observation = text
                    .parse()
                    .map_err(|e| ProviderError::InvalidRequest(format!("{e}")))?;
                (
                    rule_edits(&h, &obs, &req.target_class, &self.cfg),
                    Vec::new(),
                )
            }
            RequestKind::Project => (Vec::new(), self.project(&h, req)),
            RequestKind::Init => (self.init(req), Vec::new()),
        };
        Ok(ProviderResponse {
            raw_text: Some(grammar::render(&edits, &directives)),
            edits,
            directives,
            rejected: Vec::new(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(kind: RequestKind, hypotheses: &str, observation: Option<&str>) -> ProviderRequest {
        let c = Catalog::builtin();
        ProviderRequest {
            kind,
            hypotheses: hypotheses.into(),
            observation: observation.map(String::from),
            symbols: c.symbols.clone(),
            classes: c.classes.clone(),
            target_class: "mug".into(),
        }
    }

    fn provider() -> RuleProvider {
        RuleProvider::new(Catalog::builtin(), BeliefConfig::default())
    }

    #[test]
    fn revise_on_empty_adds_refute() {
        let resp = provider()
            .respond(&request(
                RequestKind::Revise,
                "",
                Some("empty sink_basin/sink_basin1"),
            ))
            .unwrap();
        assert!(resp.edits.contains(&HypothesisEdit::Set {
            class: "mug".into(),
            symbol: "sink_basin".into(),
            polarity: Polarity::Refutes,
            weight: 0.9,
        }));
    }

    #[test]
    fn project_without_assertions_is_empty() {
        let resp = provider()
            .respond(&request(RequestKind::Project, "", None))
            .unwrap();
        assert!(resp.directives.is_empty());
    }

    #[test]
    fn project_boosts_two_and_suppresses_refuted() {
        let resp = provider()
            .respond(&request(
                RequestKind::Project,
                "REFUTE mug kitchen_cabinet 0.9\n",
                None,
            ))
            .unwrap();
        let boosts: Vec<&str> = resp
            .directives
            .iter()
            .filter(|d| d.kind == DirectiveKind::Boost)
            .map(|d| d.symbol.as_str())
            .collect();
        assert_eq!(boosts.len(), 2);
        assert!(!boosts.contains(&"kitchen_cabinet"));
        assert!(resp.directives.contains(&Directive {
            symbol: "kitchen_cabinet".into(),
            kind: DirectiveKind::Suppress
        }));
    }

    #[test]
    fn identical_requests_give_identical_bytes() {
        let req = request(RequestKind::Init, "", None);
        let a = serde_json::to_string(&provider().respond(&req).unwrap()).unwrap();
        let b = serde_json::to_string(&provider().respond(&req).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
