//! Helpers shared by the integration tests.
#![allow(dead_code)]

use align_search::harness::Budget;
use align_search::planner::{run_episode, ArmSpec, EpisodeConfig, EpisodeTrace};
use align_search::provider::HypothesisProvider;
use align_search::rng::{episode_seed, world_seed};
use align_search::worldgen::{sample_world, Catalog, GenerationConfig, SearchTask};
use rayon::prelude::*;

/// Runs `count` episodes of one arm with the same seed scheme as the batch
/// harness, so every arm sees the same worlds for a given `base`.
#[allow(clippy::too_many_arguments)]
pub fn run_arm(
    catalog: &Catalog,
    generation: &GenerationConfig,
    arm: &ArmSpec,
    arm_index: u64,
    base: u64,
    count: u64,
    budget: Budget,
    cfg: &EpisodeConfig,
    provider: Option<&dyn HypothesisProvider>,
) -> Vec<EpisodeTrace> {
    (0..count)
        .into_par_iter()
        .map(|ep| {
            let world = sample_world(catalog, generation, world_seed(base, ep)).expect("world");
            let budget = budget.resolve(world.symbols().len());
            let task = SearchTask::new(world, budget).expect("task");
            let seed = episode_seed(base, arm_index, ep);
            run_episode(&task, catalog, arm, provider, cfg, seed)
        })
        .collect()
}

/// The catalog with every hint rate set to zero.
pub fn hintless(catalog: &Catalog) -> Catalog {
    let mut c = catalog.clone();
    for t in &mut c.types {
        t.hint_strength = 0.0;
    }
    c
}

/// What the mock completion server does with each request.
#[derive(Debug, Clone)]
pub enum MockReply {
    /// 200 with this body.
    Body(String),
    /// This status with an empty JSON body.
    Status(u16),
    /// Drop the connection without answering.
    Close,
    /// Wait this long before answering 200 with a valid body.
    Hang(u64),
}

/// Serves `reply` on a local port forever; returns the endpoint URL.
pub fn spawn_mock(reply: MockReply) -> String {
    spawn_recording_mock(reply).0
}

/// Requests seen by a mock server: header block and body, one per request.
pub type Recorded = std::sync::Arc<std::sync::Mutex<Vec<(String, String)>>>;

/// Like [`spawn_mock`], also recording every request it receives.
pub fn spawn_recording_mock(reply: MockReply) -> (String, Recorded) {
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;

    let seen = Recorded::default();
    let log = seen.clone();
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind");
    let addr = listener.local_addr().expect("addr");
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let reply = reply.clone();
            let log = log.clone();
            std::thread::spawn(move || {
                let mut reader = BufReader::new(stream.try_clone().expect("clone"));
                let mut length = 0usize;
                let mut headers = String::new();
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).unwrap_or(0) == 0 {
                        return;
                    }
                    headers.push_str(&line);
                    let lower = line.to_ascii_lowercase();
                    if let Some(v) = lower.strip_prefix("content-length:") {
                        length = v.trim().parse().unwrap_or(0);
                    }
                    if line == "\r\n" {
                        break;
                    }
                }
                let mut body = vec![0u8; length];
                let _ = reader.read_exact(&mut body);
                log.lock()
                    .expect("log")
                    .push((headers, String::from_utf8_lossy(&body).into_owned()));
                let (status, text) = match reply {
                    MockReply::Body(b) => (200, b),
                    MockReply::Status(s) => (s, "{}".to_string()),
                    MockReply::Close => return,
                    MockReply::Hang(ms) => {
                        std::thread::sleep(std::time::Duration::from_millis(ms));
                        (200, r#"{"text": "BOOST a"}"#.to_string())
                    }
                };
                let _ = write!(
                    stream,
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{text}",
                    text.len()
                );
            });
        }
    });
    (format!("http://{addr}/v1/complete"), seen)
}
