use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{
    grammar, HypothesisProvider, ProviderError, ProviderRequest, ProviderResponse, RequestKind,
};

/// Endpoint settings for [`RemoteProvider`]. The auth token is read from the
/// environment variable named by `token_env`, never from the config itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RemoteConfig {
    pub url: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub token_env: Option<String>,
    pub timeout_ms: u64,
    /// Extra attempts after a failed one.
    pub retries: u32,
    pub max_tokens: u32,
    pub temperature: f64,
    /// Directory holding `revise.txt`, `project.txt` and `init.txt`; the
    /// shipped templates are used when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub templates: Option<String>,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            url: String::new(),
            token_env: None,
            timeout_ms: 10_000,
            retries: 1,
            max_tokens: 256,
            temperature: 0.0,
            templates: None,
        }
    }
}

/// Prompt templates, one per request kind, with `{{hypotheses}}`,
/// `{{observation}}`, `{{symbols}}` and `{{target}}` placeholders.
#[derive(Debug, Clone, PartialEq)]
pub struct Templates {
    pub revise: String,
    pub project: String,
    pub init: String,
}

impl Templates {
    pub fn builtin() -> Self {
        Self {
            revise: include_str!("../../data/prompts/revise.txt").to_string(),
            project: include_str!("../../data/prompts/project.txt").to_string(),
            init: include_str!("../../data/prompts/init.txt").to_string(),
        }
    }

    pub fn load(dir: &Path) -> Result<Self, ProviderError> {
        let read = |name: &str| {
            std::fs::read_to_string(dir.join(name)).map_err(|e| {
                ProviderError::Config(format!("template {}: {e}", dir.join(name).display()))
            })
        };
        Ok(Self {
            revise: read("revise.txt")?,
            project: read("project.txt")?,
            init: read("init.txt")?,
        })
    }

    pub fn render(&self, req: &ProviderRequest) -> String {
        let template = match req.kind {
            RequestKind::Revise => &self.revise,
            RequestKind::Project => &self.project,
            RequestKind::Init => &self.init,
        };
        let hypotheses = if req.hypotheses.trim().is_empty() {
            "(none)"
        } else {
            req.hypotheses.trim_end()
        };
        template
            .replace("{{hypotheses}}", hypotheses)
            .replace(
                "{{observation}}",
                req.observation.as_deref().unwrap_or("(none)"),
            )
            .replace("{{symbols}}", &req.symbols.join(", "))
            .replace("{{target}}", &req.target_class)
    }
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    prompt: &'a str,
    max_tokens: u32,
    temperature: f64,
}

#[derive(Deserialize)]
struct CompletionResponse {
    text: String,
}

/// Text-completion client speaking `{prompt, max_tokens, temperature}` ->
/// `{text}` over HTTP. Each call is independent, so one client can serve many
/// episodes at once.
#[derive(Debug)]
pub struct RemoteProvider {
    cfg: RemoteConfig,
    token: Option<String>,
    templates: Templates,
    agent: ureq::Agent,
}

impl RemoteProvider {
    pub fn new(cfg: RemoteConfig) -> Result<Self, ProviderError> {
        if cfg.url.is_empty() {
            return Err(ProviderError::Config("remote provider needs a url".into()));
        }
        let token = match &cfg.token_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                ProviderError::Config(format!("environment variable `{var}` is not set"))
            })?),
            None => None,
        };
        let templates = match &cfg.templates {
            Some(dir) => Templates::load(Path::new(dir))?,
            None => Templates::builtin(),
        };
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(cfg.timeout_ms)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self {
            cfg,
            token,
            templates,
            agent,
        })
    }

    fn unavailable(&self, reason: String) -> ProviderError {
        ProviderError::Unavailable {
            provider: self.cfg.url.clone(),
            reason,
        }
    }

    fn complete(&self, prompt: &str) -> Result<String, ProviderError> {
        let body = CompletionRequest {
            prompt,
            max_tokens: self.cfg.max_tokens,
            temperature: self.cfg.temperature,
        };
        let mut req = self.agent.post(&self.cfg.url);
        if let Some(t) = &self.token {
            req = req.header("Authorization", &format!("Bearer {t}"));
        }
        let mut resp = req
            .send_json(&body)
            .map_err(|e| self.unavailable(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(self.unavailable(format!("HTTP {}", status.as_u16())));
        }
        let parsed: CompletionResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| self.unavailable(format!("malformed response: {e}")))?;
        Ok(parsed.text)
    }
}

impl HypothesisProvider for RemoteProvider {
    fn name(&self) -> &str {
        "remote"
    }

    fn respond(&self, req: &ProviderRequest) -> Result<ProviderResponse, ProviderError> {
        req.validate()?;
        let prompt = self.templates.render(req);
        let mut last = None;
        for _ in 0..=self.cfg.retries {
            match self.complete(&prompt) {
                Ok(text) => {
                    let parsed = grammar::parse(&text, &req.symbols, &req.classes);
                    return Ok(ProviderResponse {
                        edits: parsed.edits,
                        directives: parsed.directives,
                        raw_text: Some(text),
                        rejected: parsed.rejected,
                    });
                }
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn templates_fill_every_placeholder() {
        let t = Templates::builtin();
        for kind in [RequestKind::Revise, RequestKind::Project, RequestKind::Init] {
            let req = ProviderRequest {
                kind,
                hypotheses: "SUPPORT mug sink 0.5\n".into(),
                observation: Some("empty sink/sink1".into()),
                symbols: vec!["sink".into(), "drawer".into()],
                classes: vec!["mug".into()],
                target_class: "mug".into(),
            };
            let prompt = t.render(&req);
            assert!(!prompt.contains("{{"), "{prompt}");
            assert!(prompt.contains("sink, drawer"));
        }
    }

    #[test]
    fn missing_url_or_token_is_a_config_error() {
        assert!(matches!(
            RemoteProvider::new(RemoteConfig::default()),
            Err(ProviderError::Config(_))
        ));
        let cfg = RemoteConfig {
            url: "http://127.0.0.1:9".into(),
            token_env: Some("ALIGN_SEARCH_TEST_UNSET_TOKEN".into()),
            ..RemoteConfig::default()
        };
        assert!(matches!(
            RemoteProvider::new(cfg),
            Err(ProviderError::Config(_))
        ));
    }
}
