mod common;

use align_search::belief::{HypothesisEdit, Polarity};
use align_search::provider::{
    DirectiveKind, HypothesisProvider, ProviderConfig, ProviderError, ProviderRequest,
    RemoteConfig, RemoteProvider, RequestKind,
};
use common::{spawn_recording_mock, MockReply};

fn request(kind: RequestKind) -> ProviderRequest {
    ProviderRequest {
        kind,
        hypotheses: "SUPPORT mug sink_basin 0.7\n".into(),
        observation: Some("checked desk_1: empty".into()),
        symbols: vec!["sink_basin".into(), "desk".into()],
        classes: vec!["mug".into()],
        target_class: "mug".into(),
    }
}

fn provider(url: String, retries: u32) -> RemoteProvider {
    RemoteProvider::new(RemoteConfig {
        url,
        timeout_ms: 2_000,
        retries,
        ..RemoteConfig::default()
    })
    .unwrap()
}

#[test]
fn completion_is_parsed_with_the_shared_grammar() {
    let text = r#"{"text": "BOOST desk\n- REFUTE mug sink_basin 0.4\nBOOST attic\nhello"}"#;
    let (url, seen) = spawn_recording_mock(MockReply::Body(text.into()));
    let resp = provider(url, 0)
        .respond(&request(RequestKind::Revise))
        .unwrap();
    assert_eq!(resp.directives.len(), 1);
    assert_eq!(resp.directives[0].kind, DirectiveKind::Boost);
    assert_eq!(
        resp.edits,
        vec![HypothesisEdit::Set {
            class: "mug".into(),
            symbol: "sink_basin".into(),
            polarity: Polarity::Refutes,
            weight: 0.4
        }]
    );
    assert_eq!(
        resp.rejected,
        vec!["BOOST attic".to_string(), "hello".to_string()]
    );

    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), 1);
    let body: serde_json::Value = serde_json::from_str(&seen[0].1).unwrap();
    let prompt = body["prompt"].as_str().unwrap();
    assert!(prompt.contains("checked desk_1: empty"));
    assert!(prompt.contains("sink_basin, desk"));
    assert!(!prompt.contains("{{"));
    assert_eq!(body["max_tokens"], 256);
    assert!(!seen[0].0.to_ascii_lowercase().contains("authorization"));
}

#[test]
fn token_comes_from_the_named_environment_variable() {
    let var = "ALIGN_SEARCH_TEST_TOKEN_7f3a";
    std::env::set_var(var, "s3cret");
    let (url, seen) = spawn_recording_mock(MockReply::Body(r#"{"text": ""}"#.into()));
    let p = RemoteProvider::new(RemoteConfig {
        url,
        token_env: Some(var.into()),
        ..RemoteConfig::default()
    })
    .unwrap();
    p.respond(&request(RequestKind::Project)).unwrap();
    assert!(seen.lock().unwrap()[0].0.contains("Bearer s3cret"));
}

#[test]
fn missing_token_variable_is_a_config_error() {
    let err = RemoteProvider::new(RemoteConfig {
        url: "http://127.0.0.1:9/".into(),
        token_env: Some("ALIGN_SEARCH_TEST_UNSET_VARIABLE".into()),
        ..RemoteConfig::default()
    })
    .unwrap_err();
    assert!(matches!(err, ProviderError::Config(_)), "{err}");
}

#[test]
fn tokens_cannot_be_written_into_a_config() {
    let text = "kind = \"remote\"\n[remote]\nurl = \"http://x\"\ntoken = \"abc\"\n";
    let err = toml::from_str::<ProviderConfig>(text).unwrap_err();
    assert!(err.to_string().contains("token"), "{err}");
}

#[test]
fn failed_requests_are_retried_then_reported() {
    let (url, seen) = spawn_recording_mock(MockReply::Status(503));
    let err = provider(url, 2)
        .respond(&request(RequestKind::Init))
        .unwrap_err();
    assert!(
        matches!(&err, ProviderError::Unavailable { reason, .. } if reason.contains("503")),
        "{err}"
    );
    assert_eq!(seen.lock().unwrap().len(), 3);
}

#[test]
fn body_without_text_is_unavailable() {
    let (url, _) = spawn_recording_mock(MockReply::Body(r#"{"output": "BOOST desk"}"#.into()));
    let err = provider(url, 0)
        .respond(&request(RequestKind::Init))
        .unwrap_err();
    assert!(matches!(err, ProviderError::Unavailable { .. }), "{err}");
}

#[test]
fn slow_server_times_out() {
    let (url, _) = spawn_recording_mock(MockReply::Hang(1_500));
    let p = RemoteProvider::new(RemoteConfig {
        url,
        timeout_ms: 100,
        retries: 0,
        ..RemoteConfig::default()
    })
    .unwrap();
    let start = std::time::Instant::now();
    assert!(p.respond(&request(RequestKind::Init)).is_err());
    assert!(start.elapsed().as_millis() < 1_000);
}

#[test]
fn incomplete_requests_never_reach_the_network() {
    let (url, seen) = spawn_recording_mock(MockReply::Body(r#"{"text": ""}"#.into()));
    let mut req = request(RequestKind::Revise);
    req.observation = None;
    let err = provider(url, 0).respond(&req).unwrap_err();
    assert!(matches!(err, ProviderError::InvalidRequest(_)));
    assert!(seen.lock().unwrap().is_empty());
}
