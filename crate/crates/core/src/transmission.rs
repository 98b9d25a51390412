//! Serving association, cooperative combining and SINR for one network drop.

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelModel, FadingSampler};
use crate::error::{invalid, Error, Result};
use crate::formation::ClusterLayout;
use crate::geometry::{BodyConstants, GroundTerminal, LinkGeometry, UnitDirection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Unclustered,
    JtMrt,
    JtEgt,
    Dps,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Unclustered, Scheme::JtMrt, Scheme::JtEgt, Scheme::Dps];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Unclustered => "unclustered",
            Scheme::JtMrt => "jt_mrt",
            Scheme::JtEgt => "jt_egt",
            Scheme::Dps => "dps",
        }
    }

    pub fn is_clustered(&self) -> bool {
        *self != Scheme::Unclustered
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| invalid("scheme", format!("expected one of unclustered, jt_mrt, jt_egt, dps; got `{s}`")))
    }
}

/// Which satellites outside the serving unit radiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterfererPolicy {
    AllActive,
    /// Each other cluster serves its own user from one member picked
    /// uniformly at random.
    OnePerCluster,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MrtPowerBudget {
    PerSatellite,
    /// The cluster shares one satellite's EIRP.
    #[default]
    ClusterTotal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub interferer_policy: InterfererPolicy,
    pub mrt_power_budget: MrtPowerBudget,
}

impl SchemeConfig {
    /// DPS mutes unselected members everywhere; every other scheme keeps all
    /// satellites on air.
    pub fn new(scheme: Scheme) -> Self {
        let interferer_policy = match scheme {
            Scheme::Dps => InterfererPolicy::OnePerCluster,
            _ => InterfererPolicy::AllActive,
        };
        Self { scheme, interferer_policy, mrt_power_budget: MrtPowerBudget::default() }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.scheme, self.interferer_policy) {
            (Scheme::Dps, InterfererPolicy::AllActive) => {
                Err(invalid("interferer_policy", "dps requires one_per_cluster"))
            }
            (Scheme::Unclustered, InterfererPolicy::OnePerCluster) => {
                Err(invalid("interferer_policy", "unclustered requires all_active"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Constellation {
    Clustered(Vec<ClusterLayout>),
    Unclustered(Vec<UnitDirection>),
}

/// One snapshot of satellite positions around a single terminal.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    pub constellation: Constellation,
    pub terminal: GroundTerminal,
    pub body: BodyConstants,
    pub min_elevation_rad: f64,
}

impl NetworkRealization {
    /// Clusters, or single satellites in the unclustered case.
    pub fn unit_count(&self) -> usize {
        match &self.constellation {
            Constellation::Clustered(c) => c.len(),
            Constellation::Unclustered(s) => s.len(),
        }
    }

    /// Head (master or lone satellite) and the remaining members of a unit.
    pub fn unit(&self, i: usize) -> (&UnitDirection, &[UnitDirection]) {
        match &self.constellation {
            Constellation::Clustered(c) => (&c[i].master, &c[i].slaves),
            Constellation::Unclustered(s) => (&s[i], &[]),
        }
    }

    pub fn n_satellites(&self) -> usize {
        match &self.constellation {
            Constellation::Clustered(c) => c.iter().map(ClusterLayout::size).sum(),
            Constellation::Unclustered(s) => s.len(),
        }
    }
}

/// Index of the serving unit: the visible head closest to the terminal.
/// Ties go to the lowest index. `None` means outage.
pub fn associate(net: &NetworkRealization) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for i in 0..net.unit_count() {
        let (head, _) = net.unit(i);
        let g = LinkGeometry::compute(head, &net.terminal, &net.body);
        if g.elevation_rad < net.min_elevation_rad {
            continue;
        }
        if best.is_none_or(|(_, r)| g.slant_range_km < r) {
            best = Some((i, g.slant_range_km));
        }
    }
    best.map(|(i, _)| i)
}

fn check_powers(gamma: &[f64]) -> Result<()> {
    if gamma.is_empty() {
        return Err(Error::EmptyCombination);
    }
    Ok(())
}

/// Single best transmission point.
pub fn desired_power_dps(gamma: &[f64]) -> Result<f64> {
    check_powers(gamma)?;
    Ok(gamma.iter().copied().fold(0.0, f64::max))
}

/// Coherent equal-gain combining with full power at every satellite.
pub fn desired_power_jt_egt(gamma: &[f64]) -> Result<f64> {
    check_powers(gamma)?;
    Ok(gamma.iter().map(|g| g.sqrt()).sum::<f64>().powi(2))
}

/// Maximum ratio transmission. Under a shared cluster budget the beamforming
/// gain is the sum of channel powers; with a per-satellite cap every member
/// transmits at full power with aligned phases, which is equal-gain combining.
pub fn desired_power_jt_mrt(gamma: &[f64], budget: MrtPowerBudget) -> Result<f64> {
    check_powers(gamma)?;
    match budget {
        MrtPowerBudget::ClusterTotal => Ok(gamma.iter().sum()),
        MrtPowerBudget::PerSatellite => desired_power_jt_egt(gamma),
    }
}

pub fn desired_power(gamma: &[f64], scheme: &SchemeConfig) -> Result<f64> {
    match scheme.scheme {
        Scheme::Unclustered | Scheme::Dps => desired_power_dps(gamma),
        Scheme::JtEgt => desired_power_jt_egt(gamma),
        Scheme::JtMrt => desired_power_jt_mrt(gamma, scheme.mrt_power_budget),
    }
}

/// Received power (fading included) of every satellite in a realization,
/// laid out unit by unit with the head first. `None` marks satellites below
/// the elevation mask.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkPowers {
    powers: Vec<Option<f64>>,
    offsets: Vec<usize>,
}

impl LinkPowers {
    /// Draws one fading value per visible satellite, in layout order.
    pub fn draw<R: Rng + ?Sized>(
        net: &NetworkRealization,
        channel: &ChannelModel,
        fading: &FadingSampler,
        rng: &mut R,
    ) -> Self {
        let mut powers = Vec::with_capacity(net.n_satellites());
        let mut offsets = Vec::with_capacity(net.unit_count() + 1);
        for i in 0..net.unit_count() {
            offsets.push(powers.len());
            let (head, rest) = net.unit(i);
            for sat in std::iter::once(head).chain(rest) {
                let g = LinkGeometry::compute(sat, &net.terminal, &net.body);
                if g.elevation_rad < net.min_elevation_rad {
                    powers.push(None);
                    continue;
                }
                let h = fading.sample(rng);
                powers.push(Some(channel.mean_power_w(&g, net.terminal.rx_gain_db) * h));
            }
        }
        offsets.push(powers.len());
        Self { powers, offsets }
    }

    /// Builds directly from per-unit powers; mostly for tests.
    pub fn from_units(units: Vec<Vec<Option<f64>>>) -> Self {
        let mut powers = Vec::new();
        let mut offsets = Vec::with_capacity(units.len() + 1);
        for u in units {
            offsets.push(powers.len());
            powers.extend(u);
        }
        offsets.push(powers.len());
        Self { powers, offsets }
    }

    pub fn unit_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn unit(&self, i: usize) -> &[Option<f64>] {
        &self.powers[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Powers of the visible members of a unit.
    pub fn visible(&self, i: usize) -> Vec<f64> {
        self.unit(i).iter().flatten().copied().collect()
    }
}

/// Incoherent sum of power from every radiating satellite outside the
/// serving unit. `rng` drives the per-cluster member choice and is consumed
/// once per non-serving unit regardless of visibility.
pub fn interference_power<R: Rng + ?Sized>(
    powers: &LinkPowers,
    serving: Option<usize>,
    policy: InterfererPolicy,
    rng: &mut R,
) -> f64 {
    let mut total = 0.0;
    for i in 0..powers.unit_count() {
        if Some(i) == serving {
            continue;
        }
        let unit = powers.unit(i);
        match policy {
            InterfererPolicy::AllActive => {
                total += unit.iter().flatten().sum::<f64>();
            }
            InterfererPolicy::OnePerCluster => {
                let k = rng.random_range(0..unit.len());
                total += unit[k].unwrap_or(0.0);
            }
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrSample {
    pub desired_w: f64,
    pub interference_w: f64,
    pub noise_w: f64,
    pub sinr: f64,
    /// No visible serving candidate; `sinr` is zero.
    pub outage: bool,
}

pub fn sinr(desired_w: f64, interference_w: f64, noise_w: f64) -> SinrSample {
    SinrSample { desired_w, interference_w, noise_w, sinr: desired_w / (interference_w + noise_w), outage: false }
}

impl SinrSample {
    pub fn outage(noise_w: f64) -> Self {
        Self { desired_w: 0.0, interference_w: 0.0, noise_w, sinr: 0.0, outage: true }
    }
}

/// Full SINR evaluation of one realization. `fading_rng` and
/// `selection_rng` are separate streams so that the interferer policy never
/// changes the fading realization.
pub fn evaluate<R1: Rng + ?Sized, R2: Rng + ?Sized>(
    net: &NetworkRealization,
    scheme: &SchemeConfig,
    channel: &ChannelModel,
    fading: &FadingSampler,
    fading_rng: &mut R1,
    selection_rng: &mut R2,
) -> Result<SinrSample> {
    scheme.validate()?;
    let noise = channel.noise_w();
    let powers = LinkPowers::draw(net, channel, fading, fading_rng);
    let Some(serving) = associate(net) else {
        return Ok(SinrSample::outage(noise));
    };
    let desired = desired_power(&powers.visible(serving), scheme)?;
    let interference = interference_power(&powers, Some(serving), scheme.interferer_policy, selection_rng);
    Ok(sinr(desired, interference, noise))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, TAU};

    fn unclustered(sats: Vec<UnitDirection>) -> NetworkRealization {
        NetworkRealization {
            constellation: Constellation::Unclustered(sats),
            terminal: GroundTerminal::default(),
            body: BodyConstants::default(),
            min_elevation_rad: 0.0,
        }
    }

    fn polar(psi: f64, lon: f64) -> UnitDirection {
        UnitDirection::from_lat_lon(FRAC_PI_2 - psi, lon)
    }

    #[test]
    fn association_by_range() {
        let net = unclustered(vec![polar(0.38, 0.0), polar(0.0, 0.0)]);
        assert_eq!(associate(&net), Some(1));
        let hidden = unclustered(vec![polar(2.0, 0.0), polar(3.0, 1.0)]);
        assert_eq!(associate(&hidden), None);
        let tie = unclustered(vec![polar(0.1, 0.0), polar(0.1, 1.0), polar(0.1, 2.0)]);
        assert_eq!(associate(&tie), Some(0));
    }

    #[test]
    fn combiner_examples() {
        let g = [1.0, 3.0, 2.0];
        assert_eq!(desired_power_dps(&g).unwrap(), 3.0);
        assert_eq!(desired_power_dps(&[0.7]).unwrap(), 0.7);
        assert_abs_diff_eq!(desired_power_jt_egt(&g).unwrap(), 17.19, epsilon = 0.01);
        assert_abs_diff_eq!(desired_power_jt_egt(&[0.7]).unwrap(), 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(desired_power_jt_egt(&[0.5; 6]).unwrap(), 36.0 * 0.5, epsilon = 1e-12);
        assert_eq!(desired_power_jt_mrt(&g, MrtPowerBudget::ClusterTotal).unwrap(), 6.0);
        assert_abs_diff_eq!(desired_power_jt_mrt(&g, MrtPowerBudget::PerSatellite).unwrap(), 17.19, epsilon = 0.01);
        for mode in [MrtPowerBudget::ClusterTotal, MrtPowerBudget::PerSatellite] {
            assert_abs_diff_eq!(desired_power_jt_mrt(&[0.7], mode).unwrap(), 0.7, epsilon = 1e-15);
            assert_eq!(desired_power_jt_mrt(&[], mode), Err(Error::EmptyCombination));
        }
        assert_eq!(desired_power_dps(&[]), Err(Error::EmptyCombination));
        assert_eq!(desired_power_jt_egt(&[]), Err(Error::EmptyCombination));
    }

    /// Brute-force search over per-satellite-bounded complex weights never
    /// beats phase-aligned full power, and gets close to it.
    #[test]
    fn per_satellite_mrt_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let h: Vec<(f64, f64)> = (0..3).map(|_| (rng.random::<f64>() * 2.0, TAU * rng.random::<f64>())).collect();
            let gamma: Vec<f64> = h.iter().map(|(a, _)| a * a).collect();
            let target = desired_power_jt_mrt(&gamma, MrtPowerBudget::PerSatellite).unwrap();
            let mut best = 0.0f64;
            for _ in 0..20_000 {
                let (mut re, mut im) = (0.0, 0.0);
                for (a, phase) in &h {
                    let amp = rng.random::<f64>().sqrt().max(0.98);
                    let w = TAU * rng.random::<f64>();
                    re += amp * a * (phase + w).cos();
                    im += amp * a * (phase + w).sin();
                }
                best = best.max(re * re + im * im);
            }
            assert!(best <= target * (1.0 + 1e-12));
            assert!(best >= 0.9 * target, "best {best} target {target}");
        }
    }

    #[test]
    fn interference_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let only_serving = LinkPowers::from_units(vec![vec![Some(1.0)], vec![None]]);
        assert_eq!(interference_power(&only_serving, Some(0), InterfererPolicy::AllActive, &mut rng), 0.0);
        let two = LinkPowers::from_units(vec![vec![Some(1.0)], vec![Some(0.25)]]);
        assert_eq!(interference_power(&two, Some(0), InterfererPolicy::AllActive, &mut rng), 0.25);
    }

    #[test]
    fn single_interferer_equals_its_link() {
        let b = crate::channel::LinkBudget::default();
        let channel = ChannelModel::new(&b).unwrap();
        let fixed = FadingSampler::new(&crate::channel::FadingModel::Fixed(1.0)).unwrap();
        let net = unclustered(vec![polar(0.0, 0.0), polar(0.02, 0.5)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let powers = LinkPowers::draw(&net, &channel, &fixed, &mut rng);
        let i = interference_power(&powers, Some(0), InterfererPolicy::AllActive, &mut rng);
        let direct = crate::channel::received_power_W(&polar(0.02, 0.5), &net.terminal, &net.body, &b, 1.0).unwrap();
        assert_eq!(i, direct.received_power_w);
    }

    /// Symmetric instance: every interfering cluster has K members of equal
    /// power, so choosing one uniformly gives exactly 1/K of all-active.
    #[test]
    fn one_per_cluster_is_all_active_over_k() {
        let k = 4;
        let units: Vec<Vec<Option<f64>>> =
            std::iter::once(vec![Some(5.0); k]).chain((0..10).map(|c| vec![Some(0.1 * (c + 1) as f64); k])).collect();
        let p = LinkPowers::from_units(units);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let all = interference_power(&p, Some(0), InterfererPolicy::AllActive, &mut rng);
        let one = interference_power(&p, Some(0), InterfererPolicy::OnePerCluster, &mut rng);
        assert_abs_diff_eq!(one, all / k as f64, epsilon = 1e-12);

        // Unequal members: the mean over many selections converges to all/K.
        let units: Vec<Vec<Option<f64>>> = std::iter::once(vec![Some(5.0); k])
            .chain((0..10).map(|_| vec![Some(1.0), Some(2.0), Some(3.0), None]))
            .collect();
        let p = LinkPowers::from_units(units);
        let all = interference_power(&p, Some(0), InterfererPolicy::AllActive, &mut rng);
        let n = 200_000;
        let mean =
            (0..n).map(|_| interference_power(&p, Some(0), InterfererPolicy::OnePerCluster, &mut rng)).sum::<f64>()
                / n as f64;
        assert_abs_diff_eq!(mean, all / k as f64, epsilon = 0.02);
    }

    #[test]
    fn sinr_cases() {
        assert_eq!(sinr(0.0, 1.0, 1.0).sinr, 0.0);
        assert_eq!(sinr(4.0, 0.0, 2.0).sinr, 2.0);
        assert_eq!(sinr(2.0, 0.0, 2.0).sinr, 1.0);
        let s = sinr(3.0, 1.5, 0.5);
        assert_eq!((s.desired_w, s.interference_w, s.noise_w), (3.0, 1.5, 0.5));
    }

    #[test]
    fn scheme_policy_invariants() {
        assert!(SchemeConfig::new(Scheme::Dps).validate().is_ok());
        let bad = SchemeConfig { interferer_policy: InterfererPolicy::AllActive, ..SchemeConfig::new(Scheme::Dps) };
        assert!(bad.validate().is_err());
        let bad = SchemeConfig {
            interferer_policy: InterfererPolicy::OnePerCluster,
            ..SchemeConfig::new(Scheme::Unclustered)
        };
        assert!(bad.validate().is_err());
        let jt =
            SchemeConfig { interferer_policy: InterfererPolicy::OnePerCluster, ..SchemeConfig::new(Scheme::JtEgt) };
        assert!(jt.validate().is_ok());
        assert_eq!("jt_mrt".parse::<Scheme>().unwrap(), Scheme::JtMrt);
        assert!("mrt".parse::<Scheme>().is_err());
    }
}
