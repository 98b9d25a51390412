//! JSON configuration file: flat keys, degrees and dB at the boundary.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use clustersim_core::channel::{FadingModel, LinkBudget, ShadowedRicianParams};
use clustersim_core::formation::FormationKind;
use clustersim_core::geometry::BodyConstants;
use clustersim_core::montecarlo::{ExperimentConfig, MasterSampling};
use clustersim_core::transmission::{InterfererPolicy, MrtPowerBudget, Scheme, SchemeConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub n_drops: usize,
    pub n_satellites: usize,
    pub master_fraction: f64,
    pub formation: FormationKind,
    pub cap_polar_angle_deg: f64,
    pub scheme: Scheme,
    /// `None` picks the scheme's own policy.
    pub interferer_policy: Option<InterfererPolicy>,
    pub mrt_power_budget: MrtPowerBudget,
    pub master_sampling: MasterSampling,
    pub earth_radius_km: f64,
    pub altitude_km: f64,
    pub min_elevation_deg: f64,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    #[serde(rename = "eirp_density_dBW_per_Hz")]
    pub eirp_density_dbw_per_hz: f64,
    #[serde(rename = "noise_density_dBm_per_Hz")]
    pub noise_density_dbm_per_hz: f64,
    pub pathloss_exponent: f64,
    #[serde(rename = "tx_max_gain_dBi")]
    pub tx_max_gain_dbi: f64,
    #[serde(rename = "beamwidth_3dB_deg")]
    pub beamwidth_3db_deg: f64,
    #[serde(rename = "rx_gain_dB")]
    pub rx_gain_db: f64,
    pub fading_b: f64,
    pub fading_m: f64,
    pub fading_omega: f64,
    #[serde(rename = "thresholds_dB")]
    pub thresholds_db: Vec<f64>,
    #[serde(rename = "isl_capacity_ul_Gbps")]
    pub isl_capacity_ul_gbps: f64,
    #[serde(rename = "isl_capacity_dl_Gbps")]
    pub isl_capacity_dl_gbps: f64,
    pub isl_processing_ms: f64,
    pub fronthaul_rate_margin: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let e = ExperimentConfig::default();
        let b = LinkBudget::default();
        let f = ShadowedRicianParams::default();
        Self {
            seed: e.seed,
            n_drops: e.n_drops,
            n_satellites: e.n_satellites,
            master_fraction: e.master_fraction,
            formation: e.formation,
            cap_polar_angle_deg: e.cap_polar_angle_rad.to_degrees(),
            scheme: e.scheme.scheme,
            interferer_policy: None,
            mrt_power_budget: e.scheme.mrt_power_budget,
            master_sampling: e.master_sampling,
            earth_radius_km: e.body.earth_radius_km,
            altitude_km: e.body.altitude_km,
            min_elevation_deg: e.min_elevation_rad.to_degrees(),
            carrier_hz: b.carrier_hz,
            bandwidth_hz: b.bandwidth_hz,
            eirp_density_dbw_per_hz: b.eirp_density_dbw_per_hz,
            noise_density_dbm_per_hz: b.noise_density_dbm_per_hz,
            pathloss_exponent: b.pathloss_exponent,
            tx_max_gain_dbi: b.tx_max_gain_dbi,
            beamwidth_3db_deg: b.beamwidth_3db_deg,
            rx_gain_db: b.rx_gain_db,
            fading_b: f.b,
            fading_m: f.m,
            fading_omega: f.omega,
            thresholds_db: e.thresholds_db,
            isl_capacity_ul_gbps: 100.0,
            isl_capacity_dl_gbps: 100.0,
            isl_processing_ms: 0.0,
            fronthaul_rate_margin: 1.0,
        }
    }
}

impl RunConfig {
    pub fn keys() -> Vec<String> {
        match serde_json::to_value(RunConfig::default()) {
            Ok(Value::Object(m)) => m.keys().cloned().collect(),
            _ => Vec::new(),
        }
    }

    /// Parses a config object, or a run manifest carrying one under `config`.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).context("config is not valid JSON")?;
        let Value::Object(mut map) = value else { bail!("config must be a JSON object") };
        if let Some(Value::Object(inner)) = map.get("config") {
            if map.contains_key("tool_version") {
                map = inner.clone();
            }
        }
        check_keys(&map)?;
        let cfg: RunConfig = match serde_json::from_value(Value::Object(map.clone())) {
            Ok(c) => c,
            Err(e) => bail!("{}", field_error(&map).unwrap_or_else(|| format!("config: {e}"))),
        };
        cfg.to_experiment()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_json_str(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Validated simulator configuration.
    pub fn to_experiment(&self) -> Result<ExperimentConfig> {
        let body = BodyConstants { earth_radius_km: self.earth_radius_km, altitude_km: self.altitude_km };
        let budget = LinkBudget {
            carrier_hz: self.carrier_hz,
            bandwidth_hz: self.bandwidth_hz,
            eirp_density_dbw_per_hz: self.eirp_density_dbw_per_hz,
            noise_density_dbm_per_hz: self.noise_density_dbm_per_hz,
            pathloss_exponent: self.pathloss_exponent,
            tx_max_gain_dbi: self.tx_max_gain_dbi,
            beamwidth_3db_deg: self.beamwidth_3db_deg,
            rx_gain_db: self.rx_gain_db,
        };
        let mut scheme = SchemeConfig::new(self.scheme);
        scheme.mrt_power_budget = self.mrt_power_budget;
        if let Some(p) = self.interferer_policy {
            scheme.interferer_policy = p;
        }
        let cfg = ExperimentConfig {
            body,
            n_satellites: self.n_satellites,
            master_fraction: self.master_fraction,
            formation: self.formation,
            cap_polar_angle_rad: self.cap_polar_angle_deg.to_radians(),
            scheme,
            budget,
            fading: FadingModel::ShadowedRician(ShadowedRicianParams {
                b: self.fading_b,
                m: self.fading_m,
                omega: self.fading_omega,
            }),
            n_drops: self.n_drops,
            seed: self.seed,
            thresholds_db: self.thresholds_db.clone(),
            min_elevation_rad: self.min_elevation_deg.to_radians(),
            master_sampling: self.master_sampling,
            pin_first_at_zenith: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The same file-level config with the fields a sweep cell changes.
    pub fn with_cell(&self, cell: &ExperimentConfig) -> Self {
        Self {
            seed: cell.seed,
            n_satellites: cell.n_satellites,
            formation: cell.formation,
            scheme: cell.scheme.scheme,
            interferer_policy: self.interferer_policy.filter(|_| cell.scheme.scheme == self.scheme),
            thresholds_db: cell.thresholds_db.clone(),
            ..self.clone()
        }
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        hex::encode(&digest[..8])
    }
}

/// Names the first field whose value alone fails to deserialize.
fn field_error(map: &Map<String, Value>) -> Option<String> {
    map.iter().find_map(|(k, v)| {
        let single = Map::from_iter([(k.clone(), v.clone())]);
        serde_json::from_value::<RunConfig>(Value::Object(single)).err().map(|e| format!("field `{k}`: {e}"))
    })
}

fn check_keys(map: &Map<String, Value>) -> Result<()> {
    let known = RunConfig::keys();
    for key in map.keys() {
        if known.iter().any(|k| k == key) {
            continue;
        }
        let nearest = known
            .iter()
            .map(|k| (strsim::jaro_winkler(&key.to_lowercase(), &k.to_lowercase()), k))
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, k)| k.as_str())
            .unwrap_or("");
        bail!("unknown config key `{key}`; did you mean `{nearest}`?");
    }
    Ok(())
}
