//! Subcommand bodies, callable without going through argument parsing.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::{SecondsFormat, Utc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use clustersim_core::formation::build_cluster;
use clustersim_core::fronthaul::{advise as advise_cluster, AdviceReport};
use clustersim_core::geometry::UnitDirection;
use clustersim_core::montecarlo::{self, run_experiment, Execution, SweepAxis, SweepValue};
use clustersim_core::selftest::{self, CheckOutcome};

use crate::config::RunConfig;
use crate::output::{write_csv, CellRecord, CsvRow, RunManifest};

pub const RESULTS_CSV: &str = "results.csv";
pub const MANIFEST_JSON: &str = "manifest.json";
const TOOL: &str = "clustersim";

/// A config file, plus the sweep it describes when it is a manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub config: RunConfig,
    pub sweep: Option<(String, Vec<String>)>,
}

pub fn load(path: Option<&Path>) -> Result<Loaded> {
    let Some(path) = path else {
        return Ok(Loaded { config: RunConfig::default(), sweep: None });
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let config = RunConfig::from_json_str(&text).with_context(|| format!("in {}", path.display()))?;
    let value: Value = serde_json::from_str(&text)?;
    let sweep = match (value.get("axis"), value.get("values")) {
        (Some(Value::String(a)), Some(Value::Array(v))) if value.get("tool_version").is_some() => {
            Some((a.clone(), v.iter().filter_map(|x| x.as_str().map(str::to_string)).collect()))
        }
        _ => None,
    };
    Ok(Loaded { config, sweep })
}

/// Comma list (`100,1000,1e4`) or inclusive numeric range (`-10:30:5`).
pub fn parse_values(axis: SweepAxis, text: &str) -> Result<Vec<SweepValue>> {
    let text = text.trim();
    let parts: Vec<&str> = text.split(':').collect();
    let labels: Vec<String> = if parts.len() == 3 {
        let nums = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().with_context(|| format!("`{p}` in range `{text}` is not a number")))
            .collect::<Result<Vec<_>>>()?;
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        if !(step.is_finite() && step != 0.0) || (stop - start) / step < 0.0 {
            bail!("range `{text}` has a step that never reaches the stop value");
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| (start + step * i as f64).to_string()).collect()
    } else {
        text.split(',').filter(|s| !s.trim().is_empty()).map(|s| s.trim().to_string()).collect()
    };
    if labels.is_empty() {
        bail!("no sweep values given");
    }
    labels.iter().map(|l| axis.parse_value(l).map_err(Into::into)).collect()
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn prepare(out: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(out).with_context(|| format!("cannot create output directory {}", out.display()))?;
    Ok((out.join(RESULTS_CSV), out.join(MANIFEST_JSON)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Written {
    pub rows: Vec<CsvRow>,
    pub csv: PathBuf,
    pub manifest: PathBuf,
}

pub fn run(cfg: &RunConfig, out: &Path, exec: Execution) -> Result<Written> {
    let started_at = now();
    let exp = cfg.to_experiment()?;
    let result = run_experiment(&exp, exec)?;
    let hash = cfg.hash();
    let mut rows = vec![CsvRow::new(&result.capacity, &exp, &hash), CsvRow::new(&result.outage, &exp, &hash)];
    rows.extend(result.coverage.iter().map(|e| CsvRow::new(e, &exp, &hash)));
    let (csv, manifest) = prepare(out)?;
    write_csv(&csv, &rows)?;
    RunManifest {
        tool: TOOL.into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        command: "run".into(),
        seed: cfg.seed,
        config_hash: hash.clone(),
        config: cfg.clone(),
        axis: None,
        values: None,
        cells: vec![CellRecord { label: "run".into(), seed: cfg.seed, config_hash: hash }],
        outputs: vec![RESULTS_CSV.into()],
        started_at,
        finished_at: now(),
    }
    .write(&manifest)?;
    Ok(Written { rows, csv, manifest })
}

pub fn sweep(cfg: &RunConfig, axis: SweepAxis, values: &[SweepValue], out: &Path, exec: Execution) -> Result<Written> {
    let started_at = now();
    let exp = cfg.to_experiment()?;
    let cells = montecarlo::sweep(&exp, values, exec)?;
    let mut rows = Vec::new();
    let mut records: Vec<CellRecord> = Vec::new();
    for cell in &cells {
        let cell_cfg = cfg.with_cell(&cell.config);
        let hash = cell_cfg.hash();
        rows.extend(cell.estimates.iter().map(|e| CsvRow::new(e, &cell.config, &hash)));
        let label = if axis == SweepAxis::Beta { "shared".to_string() } else { cell.value.label() };
        if !records.iter().any(|r| r.label == label) {
            records.push(CellRecord { label, seed: cell.config.seed, config_hash: hash });
        }
    }
    let (csv, manifest) = prepare(out)?;
    write_csv(&csv, &rows)?;
    RunManifest {
        tool: TOOL.into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        command: "sweep".into(),
        seed: cfg.seed,
        config_hash: cfg.hash(),
        config: cfg.clone(),
        axis: Some(axis.as_str().into()),
        values: Some(values.iter().map(SweepValue::label).collect()),
        cells: records,
        outputs: vec![RESULTS_CSV.into()],
        started_at,
        finished_at: now(),
    }
    .write(&manifest)?;
    Ok(Written { rows, csv, manifest })
}

/// Fronthaul advice for one cluster of the configured formation. The cluster
/// size is the largest one the configuration produces.
pub fn advise(cfg: &RunConfig) -> Result<AdviceReport> {
    let exp = cfg.to_experiment()?;
    let n_slaves = exp.slave_allocation().first().copied().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cluster =
        build_cluster(UnitDirection::north_pole(), n_slaves, cfg.formation, exp.cap_polar_angle_rad, 0.0, &mut rng)?;
    Ok(advise_cluster(
        &cluster,
        &exp.body,
        cfg.isl_capacity_ul_gbps,
        cfg.isl_capacity_dl_gbps,
        cfg.isl_processing_ms,
        cfg.fronthaul_rate_margin,
    )?)
}

pub fn selftest() -> Vec<CheckOutcome> {
    selftest::run_all()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_lists() {
        let v = parse_values(SweepAxis::Beta, "-10:30:5").unwrap();
        assert_eq!(v.len(), 9);
        assert_eq!(v[0], SweepValue::BetaDb(-10.0));
        assert_eq!(v[8], SweepValue::BetaDb(30.0));
        let v = parse_values(SweepAxis::NSatellites, "100, 1000,1e4").unwrap();
        assert_eq!(v, [SweepValue::NSatellites(100), SweepValue::NSatellites(1000), SweepValue::NSatellites(10_000)]);
        assert!(parse_values(SweepAxis::Beta, "0:10:-1").is_err());
        assert!(parse_values(SweepAxis::NSatellites, "ten").is_err());
        assert!(parse_values(SweepAxis::Scheme, "dps,jt_mrt").is_ok());
        assert!(parse_values(SweepAxis::Beta, "").is_err());
    }

    #[test]
    fn default_advice_rejects_intra_phy() {
        let r = advise(&RunConfig::default()).unwrap();
        assert_eq!(r.feasible().len(), 2);
    }
}
