use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::metrics::{
    read_table, write_csv, CurveRow, DiversityRow, IgBinRow, MetricsReport, SummaryRow,
};

/// Version tag of the plot-data files.
pub const PLOT_SCHEMA: &str = "aws-plot/1";

/// One point of a plot series. `x` is numeric for curves and bars over bins
/// and a metric name for the diversity bars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub series: String,
    pub x: String,
    pub y: f64,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub n: Option<usize>,
}

fn require(dir: &Path, rel: &str, what: &str) -> Result<PathBuf, HarnessError> {
    let path = dir.join(rel);
    if path.is_file() {
        Ok(path)
    } else {
        Err(HarnessError::Missing {
            what: what.into(),
            path: path.display().to_string(),
        })
    }
}

/// Turns the analysis tables of a finished batch into `plot/*.csv` series:
/// success rate against mean steps, entropy over steps, Δalignment per IG
/// bin, and the diversity statistics.
pub fn plot_data(dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    // validates the summary document even though the series come from the tables
    MetricsReport::load(&require(dir, "summary.json", "summary")?)?;
    let summary: Vec<SummaryRow> =
        read_table(&require(dir, "tables/summary.csv", "summary table")?)?;
    let curve: Vec<CurveRow> = read_table(&require(
        dir,
        "tables/entropy_curve.csv",
        "entropy curve table",
    )?)?;
    let bins: Vec<IgBinRow> = read_table(&require(dir, "tables/ig_rank.csv", "IG rank table")?)?;
    let diversity: Vec<DiversityRow> =
        read_table(&require(dir, "tables/diversity.csv", "diversity table")?)?;
    let out = dir.join("plot");
    std::fs::create_dir_all(&out).map_err(|e| HarnessError::Io {
        path: out.display().to_string(),
        reason: e.to_string(),
    })?;
    let mut written = Vec::new();
    let mut emit = |name: &str, rows: Vec<PlotRow>| -> Result<(), HarnessError> {
        let path = out.join(format!("{name}.csv"));
        write_csv(&path, &format!("{PLOT_SCHEMA}/{name}"), &rows)?;
        written.push(path);
        Ok(())
    };

    emit(
        "sr_vs_steps",
        summary
            .iter()
            .map(|r| PlotRow {
                series: r.arm.clone(),
                x: r.mean_steps.to_string(),
                y: r.success_rate,
                lo: Some(r.success_lo),
                hi: Some(r.success_hi),
                n: Some(r.episodes),
            })
            .collect(),
    )?;
    emit(
        "entropy_curve",
        curve
            .iter()
            .map(|r| PlotRow {
                series: r.arm.clone(),
                x: r.t.to_string(),
                y: r.mean_entropy,
                lo: Some(r.ci_lo),
                hi: Some(r.ci_hi),
                n: Some(r.n),
            })
            .collect(),
    )?;
    emit(
        "ig_bins",
        bins.iter()
            .map(|r| PlotRow {
                series: r.arm.clone(),
                x: r.bin.to_string(),
                y: r.mean_delta_alignment,
                lo: None,
                hi: None,
                n: Some(r.n),
            })
            .collect(),
    )?;
    emit(
        "diversity",
        diversity
            .iter()
            .flat_map(|r| {
                [
                    ("action_entropy", r.action_entropy),
                    ("unique_ratio", r.unique_ratio),
                ]
                .map(|(x, y)| PlotRow {
                    series: r.arm.clone(),
                    x: x.into(),
                    y,
                    lo: None,
                    hi: None,
                    n: Some(r.runs),
                })
            })
            .collect(),
    )?;
    Ok(written)
}
