//! Result rows, per-cell aggregates, and (de)serialization. One row per
//! (algorithm, seed, phase, index); costs are reported both absolute and
//! relative to the mean seeding cost across seeds.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bench::spec::ExperimentSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub algorithm: String,
    pub p: Option<usize>,
    pub seed: u64,
    pub k: usize,
    /// seeding | step | lloyd | deadline
    pub phase: String,
    /// Step number, Lloyd iteration, or deadline multiplier λ.
    pub index: u64,
    pub cost: f64,
    pub relative_cost: f64,
    pub seconds: f64,
}

/// Mean/stddev of one table cell across seeds. Stddev is the sample kind
/// (n−1), zero for a single seed; seconds get a median, which shrugs off
/// scheduler jitter better than a mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub dataset: String,
    pub algorithm: String,
    pub p: Option<usize>,
    pub phase: String,
    pub index: u64,
    pub seeds: usize,
    pub mean_cost: f64,
    pub std_cost: f64,
    pub mean_relative_cost: f64,
    pub std_relative_cost: f64,
    pub median_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    pub spec: ExperimentSpec,
    pub mode: String,
    pub version: String,
    /// Mean Lloyd iteration time, measured only in deadline mode.
    pub tau_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub meta: TableMeta,
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn new(spec: &ExperimentSpec, mode: &str) -> ResultTable {
        ResultTable {
            meta: TableMeta {
                spec: spec.clone(),
                mode: mode.to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                tau_seconds: None,
            },
            rows: Vec::new(),
        }
    }

    /// Per-(algorithm, p, phase, index) aggregates across seeds, in table
    /// order.
    pub fn summarize(&self) -> Vec<SummaryRow> {
        type Key = (String, String, Option<usize>, String, u64);
        let mut cells: BTreeMap<Key, Vec<&ResultRow>> = BTreeMap::new();
        for row in &self.rows {
            cells
                .entry((
                    row.dataset.clone(),
                    row.algorithm.clone(),
                    row.p,
                    row.phase.clone(),
                    row.index,
                ))
                .or_default()
                .push(row);
        }
        cells
            .into_iter()
            .map(|((dataset, algorithm, p, phase, index), rows)| {
                let costs: Vec<f64> = rows.iter().map(|r| r.cost).collect();
                let rels: Vec<f64> = rows.iter().map(|r| r.relative_cost).collect();
                let mut secs: Vec<f64> = rows.iter().map(|r| r.seconds).collect();
                secs.sort_by(f64::total_cmp);
                let median = if secs.is_empty() {
                    0.0
                } else if secs.len() % 2 == 1 {
                    secs[secs.len() / 2]
                } else {
                    0.5 * (secs[secs.len() / 2 - 1] + secs[secs.len() / 2])
                };
                SummaryRow {
                    dataset,
                    algorithm,
                    p,
                    phase,
                    index,
                    seeds: rows.len(),
                    mean_cost: mean(&costs),
                    std_cost: sample_std(&costs),
                    mean_relative_cost: mean(&rels),
                    std_relative_cost: sample_std(&rels),
                    median_seconds: median,
                }
            })
            .collect()
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    var.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl FromStr for ExportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<ExportFormat> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(Error::InvalidConfig(format!("unknown export format '{other}'"))),
        }
    }
}

/// Writes the table. JSON is a single self-contained document (meta, raw
/// rows, summary). CSV writes the raw rows at `path` and drops the summary
/// and meta next to it as `<stem>.summary.csv` / `<stem>.meta.json`.
pub fn export_results(table: &ResultTable, path: &Path, format: ExportFormat) -> Result<()> {
    match format {
        ExportFormat::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                meta: &'a TableMeta,
                rows: &'a [ResultRow],
                summary: Vec<SummaryRow>,
            }
            let doc = Doc { meta: &table.meta, rows: &table.rows, summary: table.summarize() };
            std::fs::write(path, serde_json::to_string_pretty(&doc)?)?;
        }
        ExportFormat::Csv => {
            let mut writer = csv::Writer::from_path(path)?;
            if table.rows.is_empty() {
                // serde-driven headers only appear with the first row; keep
                // the header-only contract for empty tables.
                writer.write_record([
                    "dataset",
                    "algorithm",
                    "p",
                    "seed",
                    "k",
                    "phase",
                    "index",
                    "cost",
                    "relative_cost",
                    "seconds",
                ])?;
            }
            for row in &table.rows {
                writer.serialize(row)?;
            }
            writer.flush()?;
            let mut sw = csv::Writer::from_path(sibling(path, ".summary.csv"))?;
            for row in table.summarize() {
                sw.serialize(&row)?;
            }
            sw.flush()?;
            std::fs::write(
                sibling(path, ".meta.json"),
                serde_json::to_string_pretty(&table.meta)?,
            )?;
        }
    }
    Ok(())
}

/// Reads back what `export_results` wrote; the CSV flavor recovers meta from
/// the sibling file.
pub fn import_results(path: &Path, format: ExportFormat) -> Result<ResultTable> {
    match format {
        ExportFormat::Json => {
            #[derive(Deserialize)]
            struct Doc {
                meta: TableMeta,
                rows: Vec<ResultRow>,
            }
            let doc: Doc = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            Ok(ResultTable { meta: doc.meta, rows: doc.rows })
        }
        ExportFormat::Csv => {
            let mut rows = Vec::new();
            let mut reader = csv::Reader::from_path(path)?;
            for record in reader.deserialize() {
                rows.push(record?);
            }
            let meta: TableMeta =
                serde_json::from_str(&std::fs::read_to_string(sibling(path, ".meta.json"))?)?;
            Ok(ResultTable { meta, rows })
        }
    }
}

fn sibling(path: &Path, suffix: &str) -> std::path::PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}
