//! Drop orchestration and estimation.
//!
//! Every drop owns a set of counter-based random streams keyed by
//! `(seed, purpose)` and indexed by the drop number, so a drop's outcome does
//! not depend on which worker evaluates it or in which order. Per-drop
//! records are collected in drop order before any reduction.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelModel, FadingModel, FadingSampler, LinkBudget};
use crate::error::{invalid, Result};
use crate::formation::{build_cluster, FormationKind};
use crate::geometry::{sample_cap_uniform, sample_sphere_bpp, BodyConstants, CapSpec, GroundTerminal, UnitDirection};
use crate::transmission::{evaluate, Constellation, NetworkRealization, Scheme, SchemeConfig, SinrSample};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// How master positions are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MasterSampling {
    /// Only masters that can influence the terminal are generated: the count
    /// inside the relevant cap is binomial and positions are uniform on it.
    /// Same distribution as `FullSphere` for everything the terminal sees.
    #[default]
    RelevantCap,
    /// Every master is drawn on the whole sphere.
    FullSphere,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub body: BodyConstants,
    pub n_satellites: usize,
    pub master_fraction: f64,
    pub formation: FormationKind,
    pub cap_polar_angle_rad: f64,
    pub scheme: SchemeConfig,
    pub budget: LinkBudget,
    pub fading: FadingModel,
    pub n_drops: usize,
    pub seed: u64,
    pub thresholds_db: Vec<f64>,
    pub min_elevation_rad: f64,
    pub master_sampling: MasterSampling,
    /// Places the first master (or satellite) at the terminal's zenith.
    pub pin_first_at_zenith: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            body: BodyConstants::default(),
            n_satellites: 1000,
            master_fraction: 0.1,
            formation: FormationKind::Circular,
            cap_polar_angle_rad: 1f64.to_radians(),
            scheme: SchemeConfig::new(Scheme::JtMrt),
            budget: LinkBudget::default(),
            fading: FadingModel::default(),
            n_drops: 20_000,
            seed: 1,
            thresholds_db: (0..9).map(|i| -10.0 + 5.0 * i as f64).collect(),
            min_elevation_rad: 0.0,
            master_sampling: MasterSampling::default(),
            pin_first_at_zenith: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.body.validate()?;
        self.budget.validate()?;
        self.scheme.validate()?;
        FadingSampler::new(&self.fading)?;
        if self.n_drops == 0 {
            return Err(invalid("n_drops", "must be at least 1"));
        }
        if !(self.master_fraction > 0.0 && self.master_fraction <= 1.0) {
            return Err(invalid("master_fraction", format!("must lie in (0, 1], got {}", self.master_fraction)));
        }
        if !(self.cap_polar_angle_rad > 0.0 && self.cap_polar_angle_rad < PI / 2.0) {
            return Err(invalid("cap_polar_angle_deg", "must lie in (0, 90) degrees"));
        }
        if !(self.min_elevation_rad > -PI / 2.0 && self.min_elevation_rad < PI / 2.0) {
            return Err(invalid("min_elevation_deg", "must lie in (-90, 90) degrees"));
        }
        if self.thresholds_db.iter().any(|b| b.is_nan()) {
            return Err(invalid("thresholds_db", "thresholds must not be NaN"));
        }
        if self.scheme.scheme.is_clustered() && self.n_masters() == 0 {
            return Err(invalid(
                "master_fraction",
                format!("{} satellites at fraction {} leave no master", self.n_satellites, self.master_fraction),
            ));
        }
        Ok(())
    }

    /// Clusters, or satellites when unclustered.
    pub fn n_masters(&self) -> usize {
        if self.scheme.scheme.is_clustered() {
            (self.n_satellites as f64 * self.master_fraction).round() as usize
        } else {
            self.n_satellites
        }
    }

    /// Slave count of each cluster: the remainder after the masters, dealt
    /// round-robin.
    pub fn slave_allocation(&self) -> Vec<usize> {
        let m = self.n_masters();
        if m == 0 {
            return Vec::new();
        }
        let slaves = self.n_satellites.saturating_sub(m);
        let (base, extra) = (slaves / m, slaves % m);
        (0..m).map(|i| base + usize::from(i < extra)).collect()
    }

    pub fn terminal(&self) -> GroundTerminal {
        GroundTerminal { direction: UnitDirection::north_pole(), rx_gain_db: self.budget.rx_gain_db }
    }

    /// Largest master-terminal central angle that can still matter.
    fn relevant_angle(&self, any_slaves: bool) -> f64 {
        let reach = self.body.max_central_angle(self.min_elevation_rad);
        let spread = if any_slaves { self.cap_polar_angle_rad } else { 0.0 };
        (reach + spread).min(PI)
    }
}

#[derive(Debug, Clone, Copy)]
#[repr(u64)]
enum Stream {
    Masters = 0x6d61_7374_6572_7331,
    Slaves = 0x736c_6176_6573_3031,
    Phases = 0x7068_6173_6573_3031,
    Fading = 0x6661_6469_6e67_3031,
    Selection = 0x7365_6c65_6374_3031,
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn substream(seed: u64, drop_index: u64, purpose: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ purpose as u64));
    rng.set_stream(drop_index);
    rng
}

/// Seed for one sweep cell, derived from the base seed and the cell's
/// axis and value labels.
pub fn derive_cell_seed(seed: u64, axis: &str, value: &str) -> u64 {
    // FNV-1a over "axis=value", then mixed with the base seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in axis.bytes().chain(std::iter::once(b'=')).chain(value.bytes()) {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    splitmix64(seed ^ splitmix64(h))
}

/// Satellite positions for one drop.
pub fn realize_network(cfg: &ExperimentConfig, drop_index: u64) -> Result<NetworkRealization> {
    let mut master_rng = substream(cfg.seed, drop_index, Stream::Masters);
    let mut slave_rng = substream(cfg.seed, drop_index, Stream::Slaves);
    let mut phase_rng = substream(cfg.seed, drop_index, Stream::Phases);
    let terminal = cfg.terminal();

    let allocation = cfg.slave_allocation();
    let heads = sample_heads(cfg, &allocation, &terminal, &mut master_rng)?;

    let constellation = if cfg.scheme.scheme.is_clustered() {
        let clusters = heads
            .into_iter()
            .map(|(master, n_slaves)| {
                let phase = match cfg.formation {
                    FormationKind::Circular => std::f64::consts::TAU * phase_rng.random::<f64>(),
                    FormationKind::Uniform => 0.0,
                };
                build_cluster(master, n_slaves, cfg.formation, cfg.cap_polar_angle_rad, phase, &mut slave_rng)
            })
            .collect::<Result<Vec<_>>>()?;
        Constellation::Clustered(clusters)
    } else {
        Constellation::Unclustered(heads.into_iter().map(|(d, _)| d).collect())
    };
    Ok(NetworkRealization { constellation, terminal, body: cfg.body, min_elevation_rad: cfg.min_elevation_rad })
}

/// Master positions paired with their slave counts.
fn sample_heads<R: Rng + ?Sized>(
    cfg: &ExperimentConfig,
    allocation: &[usize],
    terminal: &GroundTerminal,
    rng: &mut R,
) -> Result<Vec<(UnitDirection, usize)>> {
    let mut heads = Vec::new();
    let mut rest = allocation;
    if cfg.pin_first_at_zenith {
        if let Some((&first, tail)) = allocation.split_first() {
            heads.push((terminal.direction, first));
            rest = tail;
        }
    }
    match cfg.master_sampling {
        MasterSampling::FullSphere => {
            let pts = sample_sphere_bpp(rest.len(), rng);
            heads.extend(pts.into_iter().zip(rest.iter().copied()));
        }
        MasterSampling::RelevantCap => {
            let any_slaves = allocation.iter().any(|&s| s > 0);
            let cap = CapSpec::new(terminal.direction, cfg.relevant_angle(any_slaves))?;
            let p = cap.area_fraction().min(1.0);
            // Cluster sizes differ by at most one; thin each size class.
            for (n_slaves, count) in size_classes(rest) {
                let kept = if p >= 1.0 {
                    count
                } else {
                    Binomial::new(count as u64, p).map_err(|e| invalid("n_satellites", e.to_string()))?.sample(rng)
                        as usize
                };
                let pts = sample_cap_uniform(&cap, kept, rng);
                heads.extend(pts.into_iter().map(|d| (d, n_slaves)));
            }
        }
    }
    Ok(heads)
}

/// Runs of equal slave counts, in order of first appearance.
fn size_classes(allocation: &[usize]) -> Vec<(usize, usize)> {
    let mut classes: Vec<(usize, usize)> = Vec::new();
    for &s in allocation {
        match classes.iter_mut().find(|(k, _)| *k == s) {
            Some((_, n)) => *n += 1,
            None => classes.push((s, 1)),
        }
    }
    classes
}

/// Simulator state derived once per experiment.
#[derive(Debug, Clone)]
pub struct DropRunner {
    cfg: ExperimentConfig,
    channel: ChannelModel,
    fading: FadingSampler,
}

impl DropRunner {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg: cfg.clone(),
            channel: ChannelModel::new(&cfg.budget)?,
            fading: FadingSampler::new(&cfg.fading)?,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn run(&self, drop_index: u64) -> Result<SinrSample> {
        let net = realize_network(&self.cfg, drop_index)?;
        let mut fading_rng = substream(self.cfg.seed, drop_index, Stream::Fading);
        let mut selection_rng = substream(self.cfg.seed, drop_index, Stream::Selection);
        evaluate(&net, &self.cfg.scheme, &self.channel, &self.fading, &mut fading_rng, &mut selection_rng)
    }
}

/// SINR of one drop; a pure function of `(cfg, drop_index)`.
pub fn run_drop(cfg: &ExperimentConfig, drop_index: u64) -> Result<SinrSample> {
    DropRunner::new(cfg)?.run(drop_index)
}

/// How drops are scheduled. Results are identical for every choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon work-stealing over drops; `workers = None` uses the global pool.
    /// Without the `parallel` feature this runs sequentially.
    Parallel {
        workers: Option<usize>,
    },
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel { workers: None }
        } else {
            Execution::Sequential
        }
    }
}

/// Every drop of the experiment, in drop order.
pub fn simulate(cfg: &ExperimentConfig, exec: Execution) -> Result<Vec<SinrSample>> {
    let runner = DropRunner::new(cfg)?;
    let n = cfg.n_drops as u64;
    match exec {
        Execution::Sequential => (0..n).map(|i| runner.run(i)).collect(),
        Execution::Parallel { workers } => parallel_drops(&runner, n, workers),
    }
}

#[cfg(feature = "parallel")]
fn parallel_drops(runner: &DropRunner, n: u64, workers: Option<usize>) -> Result<Vec<SinrSample>> {
    use rayon::prelude::*;
    let job = || (0..n).into_par_iter().map(|i| runner.run(i)).collect::<Result<Vec<_>>>();
    match workers {
        None => job(),
        Some(0) => Err(invalid("workers", "must be at least 1")),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| invalid("workers", e.to_string()))?
            .install(job),
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_drops(runner: &DropRunner, n: u64, workers: Option<usize>) -> Result<Vec<SinrSample>> {
    if workers == Some(0) {
        return Err(invalid("workers", "must be at least 1"));
    }
    (0..n).map(|i| runner.run(i)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Coverage,
    ErgodicCapacity,
    Outage,
}

impl Metric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Coverage => "coverage",
            Metric::ErgodicCapacity => "ergodic_capacity",
            Metric::Outage => "outage",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricEstimate {
    pub metric: Metric,
    pub value: f64,
    pub ci95_halfwidth: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub n_drops: usize,
    pub seed: u64,
    pub threshold_db: Option<f64>,
}

impl MetricEstimate {
    /// True when the two 95% intervals share no point and `self` is above.
    pub fn separated_above(&self, other: &MetricEstimate) -> bool {
        self.ci95_low > other.ci95_high
    }
}

/// Wilson score interval for `successes` out of `n`.
pub fn wilson_interval(successes: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = Z95 * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

fn proportion(metric: Metric, successes: usize, n: usize, seed: u64, threshold_db: Option<f64>) -> MetricEstimate {
    let (lo, hi) = wilson_interval(successes, n);
    MetricEstimate {
        metric,
        value: successes as f64 / n as f64,
        ci95_halfwidth: 0.5 * (hi - lo),
        ci95_low: lo,
        ci95_high: hi,
        n_drops: n,
        seed,
        threshold_db,
    }
}

/// `P(SINR > beta)` for each threshold, from shared samples.
pub fn coverage_from_sinr(sinr: &[f64], thresholds_db: &[f64], seed: u64) -> Vec<MetricEstimate> {
    thresholds_db
        .iter()
        .map(|&beta| {
            let t = 10f64.powf(beta / 10.0);
            let hits = sinr.iter().filter(|&&s| s > t).count();
            proportion(Metric::Coverage, hits, sinr.len(), seed, Some(beta))
        })
        .collect()
}

/// Mean of `log2(1 + SINR)` with a normal-approximation interval.
pub fn capacity_from_sinr(sinr: &[f64], seed: u64) -> MetricEstimate {
    let n = sinr.len();
    let rates: Vec<f64> = sinr.iter().map(|s| s.ln_1p() / std::f64::consts::LN_2).collect();
    let mean = rates.iter().sum::<f64>() / n as f64;
    let constant = rates.windows(2).all(|w| w[0] == w[1]);
    let half = if n > 1 && !constant {
        let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Z95 * (var / n as f64).sqrt()
    } else {
        0.0
    };
    MetricEstimate {
        metric: Metric::ErgodicCapacity,
        value: mean,
        ci95_halfwidth: half,
        ci95_low: mean - half,
        ci95_high: mean + half,
        n_drops: n,
        seed,
        threshold_db: None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub coverage: Vec<MetricEstimate>,
    pub capacity: MetricEstimate,
    pub outage: MetricEstimate,
}

impl ExperimentResult {
    pub fn from_samples(samples: &[SinrSample], thresholds_db: &[f64], seed: u64) -> Self {
        let sinr: Vec<f64> = samples.iter().map(|s| s.sinr).collect();
        let outages = samples.iter().filter(|s| s.outage).count();
        Self {
            coverage: coverage_from_sinr(&sinr, thresholds_db, seed),
            capacity: capacity_from_sinr(&sinr, seed),
            outage: proportion(Metric::Outage, outages, samples.len(), seed, None),
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig, exec: Execution) -> Result<ExperimentResult> {
    let samples = simulate(cfg, exec)?;
    Ok(ExperimentResult::from_samples(&samples, &cfg.thresholds_db, cfg.seed))
}

pub fn estimate_coverage(cfg: &ExperimentConfig, exec: Execution) -> Result<Vec<MetricEstimate>> {
    Ok(run_experiment(cfg, exec)?.coverage)
}

pub fn estimate_ergodic_capacity(cfg: &ExperimentConfig, exec: Execution) -> Result<MetricEstimate> {
    Ok(run_experiment(cfg, exec)?.capacity)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    NSatellites,
    Beta,
    Scheme,
    Formation,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::NSatellites => "n_satellites",
            SweepAxis::Beta => "beta",
            SweepAxis::Scheme => "scheme",
            SweepAxis::Formation => "formation",
        }
    }

    pub fn parse_value(&self, s: &str) -> Result<SweepValue> {
        let s = s.trim();
        match self {
            SweepAxis::NSatellites => s
                .parse::<f64>()
                .ok()
                .filter(|v| *v >= 1.0 && v.fract() == 0.0)
                .map(|v| SweepValue::NSatellites(v as usize))
                .ok_or_else(|| invalid("values", format!("`{s}` is not a positive satellite count"))),
            SweepAxis::Beta => s
                .parse::<f64>()
                .ok()
                .filter(|v| !v.is_nan())
                .map(SweepValue::BetaDb)
                .ok_or_else(|| invalid("values", format!("`{s}` is not a threshold in dB"))),
            SweepAxis::Scheme => s.parse().map(SweepValue::Scheme),
            SweepAxis::Formation => s.parse().map(SweepValue::Formation),
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n_satellites" => Ok(SweepAxis::NSatellites),
            "beta" => Ok(SweepAxis::Beta),
            "scheme" => Ok(SweepAxis::Scheme),
            "formation" => Ok(SweepAxis::Formation),
            other => Err(invalid("axis", format!("expected n_satellites, beta, scheme or formation; got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepValue {
    NSatellites(usize),
    BetaDb(f64),
    Scheme(Scheme),
    Formation(FormationKind),
}

impl SweepValue {
    pub fn axis(&self) -> SweepAxis {
        match self {
            SweepValue::NSatellites(_) => SweepAxis::NSatellites,
            SweepValue::BetaDb(_) => SweepAxis::Beta,
            SweepValue::Scheme(_) => SweepAxis::Scheme,
            SweepValue::Formation(_) => SweepAxis::Formation,
        }
    }

    pub fn label(&self) -> String {
        match self {
            SweepValue::NSatellites(n) => n.to_string(),
            SweepValue::BetaDb(b) => b.to_string(),
            SweepValue::Scheme(s) => s.as_str().to_string(),
            SweepValue::Formation(f) => f.as_str().to_string(),
        }
    }

    fn apply(&self, cfg: &mut ExperimentConfig) {
        match *self {
            SweepValue::NSatellites(n) => cfg.n_satellites = n,
            SweepValue::BetaDb(_) => {}
            SweepValue::Scheme(s) => {
                cfg.scheme = SchemeConfig { mrt_power_budget: cfg.scheme.mrt_power_budget, ..SchemeConfig::new(s) }
            }
            SweepValue::Formation(f) => cfg.formation = f,
        }
    }
}

/// One sweep cell: the configuration that produced it and its estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: SweepValue,
    pub config: ExperimentConfig,
    pub estimates: Vec<MetricEstimate>,
}

/// Evaluates the base configuration at each axis value.
///
/// Cells get independent seeds derived from `(seed, axis, value)`. A
/// threshold sweep is a single simulation whose drops are shared by every
/// threshold.
pub fn sweep(cfg: &ExperimentConfig, values: &[SweepValue], exec: Execution) -> Result<Vec<SweepRow>> {
    let Some(first) = values.first() else {
        return Err(invalid("values", "sweep needs at least one value"));
    };
    let axis = first.axis();
    if values.iter().any(|v| v.axis() != axis) {
        return Err(invalid("values", "all sweep values must belong to one axis"));
    }
    if axis == SweepAxis::Beta {
        let mut cell = cfg.clone();
        cell.seed = derive_cell_seed(cfg.seed, axis.as_str(), "shared");
        cell.thresholds_db = values
            .iter()
            .map(|v| match v {
                SweepValue::BetaDb(b) => *b,
                _ => unreachable!(),
            })
            .collect();
        let result = run_experiment(&cell, exec)?;
        return Ok(values
            .iter()
            .zip(result.coverage)
            .map(|(v, est)| SweepRow { value: *v, config: cell.clone(), estimates: vec![est] })
            .collect());
    }
    values
        .iter()
        .map(|v| {
            let mut cell = cfg.clone();
            v.apply(&mut cell);
            cell.seed = derive_cell_seed(cfg.seed, axis.as_str(), &v.label());
            let r = run_experiment(&cell, exec)?;
            let mut estimates = vec![r.capacity, r.outage];
            estimates.extend(r.coverage);
            Ok(SweepRow { value: *v, config: cell, estimates })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small(scheme: Scheme) -> ExperimentConfig {
        ExperimentConfig { scheme: SchemeConfig::new(scheme), n_drops: 200, n_satellites: 500, ..Default::default() }
    }

    #[test]
    fn allocation_matches_worked_example() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.n_masters(), 100);
        let alloc = cfg.slave_allocation();
        assert_eq!(alloc.len(), 100);
        assert!(alloc.iter().all(|&s| s == 9));

        let odd = ExperimentConfig { n_satellites: 1004, ..Default::default() };
        let alloc = odd.slave_allocation();
        assert_eq!(alloc.len(), 100);
        assert_eq!(alloc.iter().sum::<usize>() + 100, 1004);
        assert_eq!(&alloc[..5], &[10, 10, 10, 10, 9]);
        assert_eq!(size_classes(&alloc), vec![(10, 4), (9, 96)]);
    }

    #[test]
    fn full_sphere_realization_has_every_cluster() {
        let cfg = ExperimentConfig { master_sampling: MasterSampling::FullSphere, ..Default::default() };
        let net = realize_network(&cfg, 0).unwrap();
        match &net.constellation {
            Constellation::Clustered(c) => {
                assert_eq!(c.len(), 100);
                assert!(c.iter().all(|k| k.size() == 10));
            }
            _ => panic!("expected clusters"),
        }
        assert_eq!(net.n_satellites(), 1000);
    }

    #[test]
    fn drops_are_deterministic() {
        let cfg = small(Scheme::Dps);
        let a = run_drop(&cfg, 17).unwrap();
        let b = run_drop(&cfg, 17).unwrap();
        assert_eq!(a.sinr.to_bits(), b.sinr.to_bits());
        assert_eq!(a, b);
        assert_ne!(run_drop(&cfg, 18).unwrap(), a);
    }

    #[test]
    fn sequential_matches_parallel() {
        let cfg = small(Scheme::JtMrt);
        let seq = simulate(&cfg, Execution::Sequential).unwrap();
        let par = simulate(&cfg, Execution::Parallel { workers: Some(3) }).unwrap();
        assert_eq!(seq, par);
        assert!(simulate(&cfg, Execution::Parallel { workers: Some(0) }).is_err());
    }

    #[test]
    fn threshold_edge_cases() {
        let cfg =
            ExperimentConfig { thresholds_db: vec![f64::NEG_INFINITY, 0.0, 10.0, 200.0], ..small(Scheme::Unclustered) };
        let r = run_experiment(&cfg, Execution::Sequential).unwrap();
        assert_abs_diff_eq!(r.coverage[0].value, 1.0 - r.outage.value, epsilon = 1e-15);
        assert_eq!(r.coverage[3].value, 0.0);
        for w in r.coverage.windows(2) {
            assert!(w[1].value <= w[0].value);
        }
    }

    #[test]
    fn capacity_of_constant_sinr() {
        let c = capacity_from_sinr(&[1.0; 500], 0);
        assert_eq!(c.value, 1.0);
        assert_eq!(c.ci95_halfwidth, 0.0);
        assert_eq!(capacity_from_sinr(&[0.0; 500], 0).value, 0.0);
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson_interval(50, 100);
        assert_abs_diff_eq!(0.5 * (lo + hi), 0.5, epsilon = 1e-12);
        // Textbook value for 50/100.
        assert_abs_diff_eq!(lo, 0.4038, epsilon = 1e-4);
    }

    #[test]
    fn invalid_configs() {
        let bad = ExperimentConfig { master_fraction: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ExperimentConfig { n_drops: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ExperimentConfig { n_satellites: 4, master_fraction: 0.1, ..Default::default() };
        assert!(bad.validate().is_err());
        let ok = ExperimentConfig {
            n_satellites: 4,
            master_fraction: 0.1,
            scheme: SchemeConfig::new(Scheme::Unclustered),
            ..Default::default()
        };
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn cell_seeds_are_distinct_and_stable() {
        let a = derive_cell_seed(1, "n_satellites", "100");
        assert_eq!(a, derive_cell_seed(1, "n_satellites", "100"));
        assert_ne!(a, derive_cell_seed(1, "n_satellites", "1000"));
        assert_ne!(a, derive_cell_seed(2, "n_satellites", "100"));
        assert_ne!(a, derive_cell_seed(1, "scheme", "100"));
    }

    #[test]
    fn sweep_shapes() {
        let cfg = ExperimentConfig { n_drops: 100, ..small(Scheme::Dps) };
        let vals: Vec<SweepValue> = [100, 1000].iter().map(|&n| SweepValue::NSatellites(n)).collect();
        let rows = sweep(&cfg, &vals, Execution::Sequential).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].config.n_satellites, 1000);
        assert_ne!(rows[0].config.seed, rows[1].config.seed);
        assert_eq!(rows, sweep(&cfg, &vals, Execution::Sequential).unwrap());

        let betas: Vec<SweepValue> = (0..9).map(|i| SweepValue::BetaDb(-10.0 + 5.0 * i as f64)).collect();
        let rows = sweep(&cfg, &betas, Execution::Sequential).unwrap();
        assert_eq!(rows.len(), 9);
        assert!(rows.iter().all(|r| r.config.seed == rows[0].config.seed));
        for w in rows.windows(2) {
            assert!(w[1].estimates[0].value <= w[0].estimates[0].value);
        }
        assert!(sweep(&cfg, &[], Execution::Sequential).is_err());
        assert!(sweep(&cfg, &[SweepValue::BetaDb(0.0), SweepValue::NSatellites(3)], Execution::Sequential).is_err());
    }

    #[test]
    fn axis_value_parsing() {
        assert_eq!(SweepAxis::NSatellites.parse_value("1e4").unwrap(), SweepValue::NSatellites(10_000));
        assert!(SweepAxis::NSatellites.parse_value("0").is_err());
        assert_eq!(SweepAxis::Beta.parse_value("-7.5").unwrap(), SweepValue::BetaDb(-7.5));
        assert_eq!(SweepAxis::Scheme.parse_value("dps").unwrap(), SweepValue::Scheme(Scheme::Dps));
        assert_eq!(SweepAxis::Formation.parse_value("uniform").unwrap(), SweepValue::Formation(FormationKind::Uniform));
        assert!("sats".parse::<SweepAxis>().is_err());
    }
}
