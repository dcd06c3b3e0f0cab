//! CSV tables and the JSON summary document. Each CSV starts with a
//! `# schema=...` comment line followed by a header row.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{
    diversity_stats, entropy_curve, entropy_dynamics, ig_rank_analysis, summary, CurvePoint,
    DiversityStats, EntropyDynamics, IgRankTable, MetricsError, Summary,
};
use crate::planner::EpisodeTrace;

/// Version tag shared by the summary document and all tables.
pub const METRICS_SCHEMA: &str = "aws-metrics/1";

/// Every analysis of one arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmMetrics {
    pub arm: String,
    pub summary: Summary,
    pub dynamics: EntropyDynamics,
    pub diversity: DiversityStats,
    pub ig_rank: IgRankTable,
    pub entropy_curve: Vec<CurvePoint>,
}

impl ArmMetrics {
    pub fn compute(arm: &str, traces: &[EpisodeTrace]) -> Result<Self, MetricsError> {
        Ok(Self {
            arm: arm.to_string(),
            summary: summary(traces)?,
            dynamics: entropy_dynamics(traces)?,
            diversity: diversity_stats(traces)?,
            ig_rank: ig_rank_analysis(traces),
            entropy_curve: entropy_curve(traces),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema: String,
    /// Arms in configuration order.
    pub arms: Vec<ArmMetrics>,
}

impl MetricsReport {
    pub fn new(arms: Vec<ArmMetrics>) -> Self {
        Self {
            schema: METRICS_SCHEMA.to_string(),
            arms,
        }
    }

    pub fn arm(&self, name: &str) -> Option<&ArmMetrics> {
        self.arms.iter().find(|a| a.arm == name)
    }

    pub fn load(path: &Path) -> Result<Self, MetricsError> {
        let text = fs::read_to_string(path).map_err(|source| MetricsError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let report: Self = serde_json::from_str(&text).map_err(|e| MetricsError::Table {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        if report.schema != METRICS_SCHEMA {
            return Err(MetricsError::Table {
                path: path.display().to_string(),
                reason: format!("schema `{}`, expected `{METRICS_SCHEMA}`", report.schema),
            });
        }
        Ok(report)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub arm: String,
    pub episodes: usize,
    pub success_rate: f64,
    pub success_lo: f64,
    pub success_hi: f64,
    pub mean_steps: f64,
    pub steps_lo: f64,
    pub steps_hi: f64,
    pub mean_provider_calls: f64,
    pub mean_final_alignment: f64,
    pub prediction_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsRow {
    pub arm: String,
    pub mean_step_gain: f64,
    pub net_drop: f64,
    pub sharpen_rate: f64,
    pub n_episodes: usize,
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IgBinRow {
    pub arm: String,
    pub bin: usize,
    pub bins_requested: usize,
    pub ig_lo: f64,
    pub ig_hi: f64,
    pub n: usize,
    pub mean_delta_alignment: f64,
    pub sd_delta_alignment: f64,
    pub match_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityRow {
    pub arm: String,
    pub action_entropy: f64,
    pub unique_ratio: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub arm: String,
    pub t: usize,
    pub mean_entropy: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n: usize,
}

fn table_error(path: &Path, e: impl ToString) -> MetricsError {
    MetricsError::Table {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

fn write_table<T: Serialize>(path: &Path, name: &str, rows: &[T]) -> Result<(), MetricsError> {
    write_csv(path, &format!("{METRICS_SCHEMA}/{name}"), rows)
}

/// Writes `rows` as CSV under a `# schema=<schema>` line.
pub fn write_csv<T: Serialize>(path: &Path, schema: &str, rows: &[T]) -> Result<(), MetricsError> {
    let mut buf = format!("# schema={schema}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for r in rows {
            w.serialize(r).map_err(|e| table_error(path, e))?;
        }
        w.flush().map_err(|e| table_error(path, e))?;
    }
    fs::write(path, buf).map_err(|source| MetricsError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads a table written by [`write_report`], checking its schema line.
pub fn read_table<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, MetricsError> {
    let text = fs::read_to_string(path).map_err(|source| MetricsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let first = text.lines().next().unwrap_or_default();
    if !first.starts_with(&format!("# schema={METRICS_SCHEMA}/")) {
        return Err(table_error(path, format!("bad schema line `{first}`")));
    }
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    r.deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| table_error(path, e))
}

/// Writes `summary.json` into `dir` and one CSV per analysis into
/// `dir/tables`. Returns the written paths.
pub fn write_report(dir: &Path, report: &MetricsReport) -> Result<Vec<PathBuf>, MetricsError> {
    let tables = dir.join("tables");
    fs::create_dir_all(&tables).map_err(|source| MetricsError::Io {
        path: tables.display().to_string(),
        source,
    })?;
    let mut written = Vec::new();

    let summary: Vec<SummaryRow> = report
        .arms
        .iter()
        .map(|a| SummaryRow {
            arm: a.arm.clone(),
            episodes: a.summary.episodes,
            success_rate: a.summary.success_rate,
            success_lo: a.summary.success_ci.0,
            success_hi: a.summary.success_ci.1,
            mean_steps: a.summary.mean_steps,
            steps_lo: a.summary.steps_ci.0,
            steps_hi: a.summary.steps_ci.1,
            mean_provider_calls: a.summary.mean_provider_calls,
            mean_final_alignment: a.summary.mean_final_alignment,
            prediction_accuracy: a.summary.prediction_accuracy,
        })
        .collect();
    let path = tables.join("summary.csv");
    write_table(&path, "summary", &summary)?;
    written.push(path);

    let dynamics: Vec<DynamicsRow> = report
        .arms
        .iter()
        .map(|a| DynamicsRow {
            arm: a.arm.clone(),
            mean_step_gain: a.dynamics.mean_step_gain,
            net_drop: a.dynamics.net_drop,
            sharpen_rate: a.dynamics.sharpen_rate,
            n_episodes: a.dynamics.n_episodes,
            excluded: a.dynamics.excluded,
        })
        .collect();
    let path = tables.join("entropy_dynamics.csv");
    write_table(&path, "entropy_dynamics", &dynamics)?;
    written.push(path);

    let bins: Vec<IgBinRow> = report
        .arms
        .iter()
        .flat_map(|a| {
            a.ig_rank.bins.iter().map(|b| IgBinRow {
                arm: a.arm.clone(),
                bin: b.bin,
                bins_requested: a.ig_rank.bins_requested,
                ig_lo: b.ig_lo,
                ig_hi: b.ig_hi,
                n: b.n,
                mean_delta_alignment: b.mean_delta,
                sd_delta_alignment: b.sd_delta,
                match_rate: b.match_rate,
            })
        })
        .collect();
    let path = tables.join("ig_rank.csv");
    write_table(&path, "ig_rank", &bins)?;
    written.push(path);

    let diversity: Vec<DiversityRow> = report
        .arms
        .iter()
        .map(|a| DiversityRow {
            arm: a.arm.clone(),
            action_entropy: a.diversity.action_entropy,
            unique_ratio: a.diversity.unique_ratio,
            runs: a.diversity.runs,
        })
        .collect();
    let path = tables.join("diversity.csv");
    write_table(&path, "diversity", &diversity)?;
    written.push(path);

    let curve: Vec<CurveRow> = report
        .arms
        .iter()
        .flat_map(|a| {
            a.entropy_curve.iter().map(|p| CurveRow {
                arm: a.arm.clone(),
                t: p.t,
                mean_entropy: p.mean,
                ci_lo: p.ci_lo,
                ci_hi: p.ci_hi,
                n: p.n,
            })
        })
        .collect();
    let path = tables.join("entropy_curve.csv");
    write_table(&path, "entropy_curve", &curve)?;
    written.push(path);

    let path = dir.join("summary.json");
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    fs::write(&path, json + "\n").map_err(|source| MetricsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::super::testing::flat_trace;
    use super::*;

    #[test]
    fn tables_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let traces = vec![
            flat_trace(0, &["b", "a"], true, 4),
            flat_trace(1, &["b"], false, 1),
        ];
        let report = MetricsReport::new(vec![ArmMetrics::compute("x", &traces).unwrap()]);
        write_report(dir.path(), &report).unwrap();
        let rows: Vec<SummaryRow> = read_table(&dir.path().join("tables/summary.csv")).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].success_rate, 0.5);
        let text = fs::read_to_string(dir.path().join("tables/summary.csv")).unwrap();
        assert!(text.starts_with("# schema=aws-metrics/1/summary\narm,episodes,"));
        assert_eq!(
            MetricsReport::load(&dir.path().join("summary.json")).unwrap(),
            report
        );
    }
}
