//! The shipped experiment config, shrunk and run into a temporary directory,
//! followed by plot-ready output and a replay of one trace.

use std::path::Path;

use align_search::harness::{plot_data, replay, run_batch, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::temp_dir().join("align-search-batch-example");
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/experiment.toml");
    let cfg = ExperimentConfig::load(
        &path,
        &[
            "seeds.count=60".to_string(),
            format!("output_dir={:?}", out.display().to_string()),
        ],
    )?;
    let report = run_batch(&cfg, &[])?;
    for a in &report.metrics.arms {
        println!(
            "{:<12} SR {:.3} [{:.3}, {:.3}]  steps {:.2}",
            a.arm,
            a.summary.success_rate,
            a.summary.success_ci.0,
            a.summary.success_ci.1,
            a.summary.mean_steps
        );
    }
    for p in plot_data(&out)? {
        println!("wrote {}", p.display());
    }
    let trace = out.join("traces/aws_ig/ep000000.json");
    println!(
        "replay of {} matches: {}",
        trace.display(),
        replay(&trace)?.matches()
    );
    Ok(())
}
