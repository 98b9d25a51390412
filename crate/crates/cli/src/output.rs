//! Result CSV and run manifest.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use clustersim_core::montecarlo::{ExperimentConfig, MetricEstimate};
use clustersim_core::transmission::Scheme;

use crate::config::RunConfig;

pub const CSV_HEADER: [&str; 10] = [
    "metric",
    "scheme",
    "formation",
    "n_satellites",
    "threshold_dB",
    "value",
    "ci95",
    "n_drops",
    "seed",
    "config_hash",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub metric: String,
    pub scheme: String,
    pub formation: String,
    pub n_satellites: usize,
    pub threshold_db: Option<f64>,
    pub value: f64,
    pub ci95: f64,
    pub n_drops: usize,
    pub seed: u64,
    pub config_hash: String,
}

impl CsvRow {
    pub fn new(est: &MetricEstimate, cell: &ExperimentConfig, config_hash: &str) -> Self {
        let formation = if cell.scheme.scheme == Scheme::Unclustered { "none" } else { cell.formation.as_str() };
        Self {
            metric: est.metric.as_str().to_string(),
            scheme: cell.scheme.scheme.as_str().to_string(),
            formation: formation.to_string(),
            n_satellites: cell.n_satellites,
            threshold_db: est.threshold_db,
            value: est.value,
            ci95: est.ci95_halfwidth,
            n_drops: est.n_drops,
            seed: est.seed,
            config_hash: config_hash.to_string(),
        }
    }

    fn record(&self) -> [String; 10] {
        [
            self.metric.clone(),
            self.scheme.clone(),
            self.formation.clone(),
            self.n_satellites.to_string(),
            self.threshold_db.map(|t| t.to_string()).unwrap_or_default(),
            self.value.to_string(),
            self.ci95.to_string(),
            self.n_drops.to_string(),
            self.seed.to_string(),
            self.config_hash.clone(),
        ]
    }
}

pub fn write_csv(path: &Path, rows: &[CsvRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub label: String,
    pub seed: u64,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<String>>,
    pub cells: Vec<CellRecord>,
    pub outputs: Vec<String>,
    pub started_at: String,
    pub finished_at: String,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("{} is not a run manifest", path.display()))
    }
}
