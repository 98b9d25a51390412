//! Master-slave functional split requirements and an ISL feasibility
//! advisor.

use std::fmt;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::formation::{max_isl_distance_km, ClusterLayout};
use crate::geometry::BodyConstants;

/// Speed of light in km per millisecond.
pub const LIGHT_KM_PER_MS: f64 = 299.792_458;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitName {
    IntraPhy,
    IntraMac,
    PdcpRlc,
}

impl SplitName {
    pub fn as_str(&self) -> &'static str {
        match self {
            SplitName::IntraPhy => "intra_phy",
            SplitName::IntraMac => "intra_mac",
            SplitName::PdcpRlc => "pdcp_rlc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitOption {
    pub name: SplitName,
    pub ul_rate_gbps: f64,
    pub dl_rate_gbps: f64,
    pub latency_low_ms: f64,
    /// Hard upper bound used by the advisor.
    pub latency_high_ms: f64,
    /// Requirement as originally quoted.
    pub latency_text: &'static str,
    pub notes: &'static str,
}

/// Radio configuration the rate requirements were sized for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateBasis {
    pub bandwidth_mhz: f64,
    pub modulation: &'static str,
    pub antenna_ports: u32,
    pub mimo_layers: u32,
}

pub const RATE_BASIS: RateBasis =
    RateBasis { bandwidth_mhz: 100.0, modulation: "256-QAM", antenna_ports: 32, mimo_layers: 8 };

const CATALOG: [SplitOption; 3] = [
    SplitOption {
        name: SplitName::IntraPhy,
        ul_rate_gbps: 86.1,
        dl_rate_gbps: 86.1,
        latency_low_ms: 0.1,
        latency_high_ms: 0.1,
        latency_text: "~100 us",
        notes: "low-PHY and RF on the slave; ideal for CoMP, needs a near-perfect short ISL",
    },
    SplitOption {
        name: SplitName::IntraMac,
        ul_rate_gbps: 3.0,
        dl_rate_gbps: 4.0,
        latency_low_ms: 1.0,
        latency_high_ms: 1.0,
        latency_text: "~1 ms",
        notes: "HARQ handled on each slave; some CoMP schemes limited",
    },
    SplitOption {
        name: SplitName::PdcpRlc,
        ul_rate_gbps: 3.0,
        dl_rate_gbps: 4.0,
        latency_low_ms: 1.0,
        latency_high_ms: 10.0,
        latency_text: "1~10 ms",
        notes: "latency tolerant, DC-like; cooperative transmission hard without a central MAC",
    },
];

pub fn split_catalog() -> &'static [SplitOption] {
    &CATALOG
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IslProfile {
    pub capacity_ul_gbps: f64,
    pub capacity_dl_gbps: f64,
    pub one_way_latency_ms: f64,
}

impl IslProfile {
    /// Latency may be zero (co-located master with no processing delay).
    pub fn new(capacity_ul_gbps: f64, capacity_dl_gbps: f64, one_way_latency_ms: f64) -> Result<Self> {
        if !(capacity_ul_gbps > 0.0 && capacity_ul_gbps.is_finite()) {
            return Err(invalid("capacity_ul_gbps", "must be positive"));
        }
        if !(capacity_dl_gbps > 0.0 && capacity_dl_gbps.is_finite()) {
            return Err(invalid("capacity_dl_gbps", "must be positive"));
        }
        if !(one_way_latency_ms >= 0.0 && one_way_latency_ms.is_finite()) {
            return Err(invalid("one_way_latency_ms", "must be non-negative"));
        }
        Ok(Self { capacity_ul_gbps, capacity_dl_gbps, one_way_latency_ms })
    }
}

/// Propagation plus processing delay over one ISL hop.
pub fn isl_latency_ms(distance_km: f64, processing_ms: f64) -> Result<f64> {
    if distance_km.is_nan() || distance_km < 0.0 {
        return Err(invalid("distance_km", format!("must be non-negative, got {distance_km}")));
    }
    Ok(distance_km / LIGHT_KM_PER_MS + processing_ms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    UlRate,
    DlRate,
    Latency,
}

impl Criterion {
    pub fn as_str(&self) -> &'static str {
        match self {
            Criterion::UlRate => "ul_rate",
            Criterion::DlRate => "dl_rate",
            Criterion::Latency => "latency",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitVerdict {
    pub option: SplitOption,
    pub ul_rate_ok: bool,
    pub dl_rate_ok: bool,
    pub latency_ok: bool,
    /// Capacity minus (margin-scaled) requirement; negative is a shortfall.
    pub ul_headroom_gbps: f64,
    pub dl_headroom_gbps: f64,
    pub latency_headroom_ms: f64,
    pub limiting: Option<Criterion>,
}

impl SplitVerdict {
    pub fn feasible(&self) -> bool {
        self.ul_rate_ok && self.dl_rate_ok && self.latency_ok
    }
}

/// Checks one option. Rates must not exceed capacity after scaling by
/// `rate_margin`; the ISL latency must not exceed the option's upper bound.
pub fn judge(option: &SplitOption, isl: &IslProfile, rate_margin: f64) -> SplitVerdict {
    let ul_need = option.ul_rate_gbps * rate_margin;
    let dl_need = option.dl_rate_gbps * rate_margin;
    let ul_rate_ok = ul_need <= isl.capacity_ul_gbps;
    let dl_rate_ok = dl_need <= isl.capacity_dl_gbps;
    let latency_ok = isl.one_way_latency_ms <= option.latency_high_ms;
    let limiting = [(ul_rate_ok, Criterion::UlRate), (dl_rate_ok, Criterion::DlRate), (latency_ok, Criterion::Latency)]
        .into_iter()
        .find(|(ok, _)| !ok)
        .map(|(_, c)| c);
    SplitVerdict {
        option: *option,
        ul_rate_ok,
        dl_rate_ok,
        latency_ok,
        ul_headroom_gbps: isl.capacity_ul_gbps - ul_need,
        dl_headroom_gbps: isl.capacity_dl_gbps - dl_need,
        latency_headroom_ms: option.latency_high_ms - isl.one_way_latency_ms,
        limiting,
    }
}

pub fn feasible_splits(isl: &IslProfile) -> Vec<SplitOption> {
    feasible_splits_with_margin(isl, 1.0)
}

pub fn feasible_splits_with_margin(isl: &IslProfile, rate_margin: f64) -> Vec<SplitOption> {
    split_catalog().iter().filter(|o| judge(o, isl, rate_margin).feasible()).copied().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdviceReport {
    pub max_isl_distance_km: f64,
    pub processing_ms: f64,
    pub isl: IslProfile,
    pub rate_margin: f64,
    pub verdicts: Vec<SplitVerdict>,
}

impl AdviceReport {
    pub fn feasible(&self) -> Vec<SplitName> {
        self.verdicts.iter().filter(|v| v.feasible()).map(|v| v.option.name).collect()
    }
}

/// Sizes the worst master-slave link of `cluster` and checks every split
/// against it.
pub fn advise(
    cluster: &ClusterLayout,
    body: &BodyConstants,
    capacity_ul_gbps: f64,
    capacity_dl_gbps: f64,
    processing_ms: f64,
    rate_margin: f64,
) -> Result<AdviceReport> {
    if !(rate_margin > 0.0 && rate_margin.is_finite()) {
        return Err(invalid("rate_margin", "must be positive"));
    }
    if !(processing_ms >= 0.0 && processing_ms.is_finite()) {
        return Err(invalid("processing_ms", "must be non-negative"));
    }
    let distance = max_isl_distance_km(cluster, body);
    let latency = isl_latency_ms(distance, processing_ms)?;
    let isl = IslProfile::new(capacity_ul_gbps, capacity_dl_gbps, latency)?;
    let verdicts = split_catalog().iter().map(|o| judge(o, &isl, rate_margin)).collect();
    Ok(AdviceReport { max_isl_distance_km: distance, processing_ms, isl, rate_margin, verdicts })
}

impl fmt::Display for AdviceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "max master-slave ISL distance: {:.3} km", self.max_isl_distance_km)?;
        writeln!(
            f,
            "one-way ISL latency: {:.4} ms (processing {:.4} ms)",
            self.isl.one_way_latency_ms, self.processing_ms
        )?;
        writeln!(
            f,
            "ISL capacity: UL {} Gbps, DL {} Gbps, rate margin x{}",
            self.isl.capacity_ul_gbps, self.isl.capacity_dl_gbps, self.rate_margin
        )?;
        writeln!(f, "latency bounds are hard upper limits: ~100 us -> 0.1 ms, ~1 ms -> 1 ms, 1~10 ms -> 10 ms")?;
        for v in &self.verdicts {
            let o = &v.option;
            let mark = |ok: bool| if ok { "pass" } else { "FAIL" };
            write!(
                f,
                "{:<10} UL {:>5} Gbps {}  DL {:>5} Gbps {}  latency <= {} ms ({}) {}",
                o.name.as_str(),
                o.ul_rate_gbps,
                mark(v.ul_rate_ok),
                o.dl_rate_gbps,
                mark(v.dl_rate_ok),
                o.latency_high_ms,
                o.latency_text,
                mark(v.latency_ok),
            )?;
            match v.limiting {
                None => writeln!(f, "  => feasible")?,
                Some(c) => writeln!(f, "  => infeasible, limited by {}", c.as_str())?,
            }
        }
        Ok(())
    }
}
