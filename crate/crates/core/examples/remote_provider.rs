//! An episode driven by the HTTP provider against a throwaway local server
//! that always answers with the same completion.
//!
//! A real endpoint takes its bearer token from the environment variable
//! named by `token_env`.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;

use align_search::belief::PriorMode;
use align_search::planner::{
    run_episode, ArmSpec, EpisodeConfig, Policy, ProjectionKind, UpdaterKind,
};
use align_search::provider::{RemoteConfig, RemoteProvider};
use align_search::worldgen::{sample_world, Catalog, GenerationConfig, SearchTask};

fn serve(listener: TcpListener, reply: &'static str) {
    for stream in listener.incoming().flatten() {
        let mut reader = BufReader::new(&stream);
        let mut length = 0;
        let mut line = String::new();
        while reader.read_line(&mut line).unwrap_or(0) > 0 && line != "\r\n" {
            if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                length = v.trim().parse().unwrap_or(0);
            }
            line.clear();
        }
        let mut body = vec![0; length];
        let _ = reader.read_exact(&mut body);
        let _ = write!(
            &stream,
            "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
            reply.len()
        );
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let url = format!("http://{}/v1/complete", listener.local_addr()?);
    std::thread::spawn(move || {
        serve(
            listener,
            r#"{"text": "BOOST kitchen_counter\nSUPPRESS bedroom_drawer\nSUPPORT apple kitchen_counter 0.7"}"#,
        )
    });

    let provider = RemoteProvider::new(RemoteConfig {
        url,
        timeout_ms: 2_000,
        ..RemoteConfig::default()
    })?;
    let catalog = Catalog::builtin();
    let world = sample_world(&catalog, &GenerationConfig::default(), 9)?;
    let budget = world.symbols().len() + 2;
    let task = SearchTask::new(world, budget)?;
    let mut arm = ArmSpec::new(
        "remote",
        Policy::AwsIg,
        PriorMode::Informed,
        UpdaterKind::Amortized,
    )
    .with_projection(ProjectionKind::Provider);
    arm.provider_revise = true;
    let trace = run_episode(
        &task,
        &catalog,
        &arm,
        Some(&provider),
        &EpisodeConfig::default(),
        9,
    );
    for s in &trace.steps {
        println!(
            "t={} {} -> {}",
            s.t,
            s.instance,
            s.observation.kind.as_str()
        );
    }
    println!(
        "{:?} in {} steps with {} provider calls",
        trace.outcome.termination,
        trace.outcome.steps_used,
        trace.provider_calls()
    );
    Ok(())
}
