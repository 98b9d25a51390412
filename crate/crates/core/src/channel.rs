//! Per-link radio model: power-law path gain, tapered-aperture beam pattern,
//! shadowed-Rician fading and thermal noise.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::geometry::{BodyConstants, GroundTerminal, LinkGeometry, UnitDirection};

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// Radio constants shared by every satellite in the constellation.
///
/// The EIRP density already contains the boresight antenna gain, so the beam
/// pattern enters received power only as a relative gain `g(theta) <= 1`.
/// `tx_max_gain_dbi` is kept for reporting and for [`beam_gain_linear`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub eirp_density_dbw_per_hz: f64,
    pub noise_density_dbm_per_hz: f64,
    pub pathloss_exponent: f64,
    pub tx_max_gain_dbi: f64,
    pub beamwidth_3db_deg: f64,
    pub rx_gain_db: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            carrier_hz: 2.0e9,
            bandwidth_hz: 30.0e6,
            eirp_density_dbw_per_hz: 34.0,
            noise_density_dbm_per_hz: -174.0,
            pathloss_exponent: 3.0,
            tx_max_gain_dbi: 30.0,
            beamwidth_3db_deg: 20.0,
            rx_gain_db: 0.0,
        }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_hz > 0.0 && self.carrier_hz.is_finite()) {
            return Err(invalid("carrier_hz", format!("must be positive, got {}", self.carrier_hz)));
        }
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return Err(invalid("bandwidth_hz", format!("must be positive, got {}", self.bandwidth_hz)));
        }
        if !(self.pathloss_exponent >= 2.0 && self.pathloss_exponent.is_finite()) {
            return Err(invalid("pathloss_exponent", format!("must be at least 2, got {}", self.pathloss_exponent)));
        }
        if !(self.beamwidth_3db_deg > 0.0 && self.beamwidth_3db_deg < 180.0) {
            return Err(invalid("beamwidth_3dB_deg", format!("must lie in (0, 180), got {}", self.beamwidth_3db_deg)));
        }
        for (field, v) in [
            ("eirp_density_dBW_per_Hz", self.eirp_density_dbw_per_hz),
            ("noise_density_dBm_per_Hz", self.noise_density_dbm_per_hz),
            ("tx_max_gain_dBi", self.tx_max_gain_dbi),
            ("rx_gain_dB", self.rx_gain_db),
        ] {
            if !v.is_finite() {
                return Err(invalid(field, "must be finite"));
            }
        }
        Ok(())
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT_M_S / self.carrier_hz
    }

    /// Total radiated power over the occupied bandwidth, in watts.
    pub fn eirp_total_w(&self) -> f64 {
        db_to_linear(self.eirp_density_dbw_per_hz) * self.bandwidth_hz
    }
}

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `(lambda / (4 pi d0))^2 (d / d0)^-alpha` with `d0 = 1 m`.
pub fn path_gain_linear(d_km: f64, budget: &LinkBudget) -> Result<f64> {
    if d_km.is_nan() || d_km <= 0.0 {
        return Err(Error::NonPositiveDistance(d_km));
    }
    let reference = (budget.wavelength_m() / (4.0 * PI)).powi(2);
    Ok(reference * (d_km * 1e3).powf(-budget.pathloss_exponent))
}

/// Bessel function of the first kind, order one.
///
/// Power series up to `|x| = 8`, Miller backward recurrence up to 25, Hankel
/// asymptotic expansion beyond.
pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= 8.0 {
        j1_series(ax)
    } else if ax <= 25.0 {
        j1_miller(ax)
    } else {
        j1_hankel(ax)
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

fn j1_series(x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = half;
    let mut sum = term;
    for k in 1..60 {
        term *= q / (k as f64 * (k + 1) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Normalized with `J0 + 2 (J2 + J4 + ...) = 1`.
fn j1_miller(x: f64) -> f64 {
    let start = 2 * ((x as usize + 20 + (40.0 * x).sqrt() as usize) / 2);
    let (mut above, mut cur) = (0.0f64, 1e-30f64);
    let (mut norm, mut j1) = (0.0, 0.0);
    for k in (1..=start).rev() {
        let below = 2.0 * k as f64 / x * cur - above;
        above = cur;
        cur = below;
        // `cur` now holds the unnormalized J_{k-1}.
        if k - 1 == 1 {
            j1 = cur;
        }
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            above *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    j1 / (norm + cur)
}

fn j1_hankel(x: f64) -> f64 {
    // mu = 4 n^2 = 4 for order one.
    let mu = 4.0;
    let z8 = 8.0 * x;
    let (mut p, mut q) = (1.0, 0.0);
    let mut term = 1.0;
    for k in 1..30 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * z8);
        if k % 2 == 1 {
            q += if (k / 2) % 2 == 0 { term } else { -term };
        } else {
            p += if (k / 2) % 2 == 1 { -term } else { term };
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - 0.75 * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// First positive zero of J1.
const J1_FIRST_ZERO: f64 = 3.831_705_970_207_512;

/// Normalized aperture pattern `g(theta) = |2 J1(u) / u|^2`, `u = k0 sin(theta)`,
/// with `k0` chosen so that the pattern is exactly half power at half the
/// 3-dB beamwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamPattern {
    k0: f64,
}

fn aperture_response(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        return 1.0;
    }
    let a = 2.0 * bessel_j1(u) / u;
    a * a
}

impl BeamPattern {
    pub fn new(beamwidth_3db_rad: f64) -> Self {
        // The response falls monotonically on (0, first zero): bisect.
        let (mut lo, mut hi) = (1e-6, J1_FIRST_ZERO);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if aperture_response(mid) > 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        let u_half = 0.5 * (lo + hi);
        Self { k0: u_half / (0.5 * beamwidth_3db_rad).sin() }
    }

    pub fn from_budget(budget: &LinkBudget) -> Self {
        Self::new(budget.beamwidth_3db_deg.to_radians())
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    /// Relative gain in `[0, 1]`. Sidelobes are not floored.
    #[inline]
    pub fn relative_gain(&self, off_boresight_rad: f64) -> f64 {
        aperture_response(self.k0 * off_boresight_rad.sin())
    }

    /// Off-boresight angle of the first pattern null.
    pub fn first_null_rad(&self) -> f64 {
        (J1_FIRST_ZERO / self.k0).min(1.0).asin()
    }
}

/// Absolute transmit gain `G_max g(theta)`.
pub fn beam_gain_linear(off_boresight_rad: f64, budget: &LinkBudget) -> f64 {
    db_to_linear(budget.tx_max_gain_dbi) * BeamPattern::from_budget(budget).relative_gain(off_boresight_rad)
}

/// Land-mobile-satellite fading: scatter half-power `b`, Nakagami shape `m`
/// and mean line-of-sight power `omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowedRicianParams {
    pub b: f64,
    pub m: f64,
    pub omega: f64,
}

impl ShadowedRicianParams {
    /// Average shadowing.
    pub const AVERAGE_SHADOWING: Self = Self { b: 0.126, m: 10.1, omega: 0.835 };

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(invalid("fading_b", format!("must be positive, got {}", self.b)));
        }
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(invalid("fading_m", format!("must be positive, got {}", self.m)));
        }
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return Err(invalid("fading_omega", format!("must be non-negative, got {}", self.omega)));
        }
        Ok(())
    }

    pub fn mean_power(&self) -> f64 {
        2.0 * self.b + self.omega
    }

    /// `E|A|^4 = E[Z^4] + 4 E[Z^2] E|X|^2 + E|X|^4` for circular `X`.
    pub fn second_moment(&self) -> f64 {
        let (b, m, o) = (self.b, self.m, self.omega);
        8.0 * b * b + 8.0 * b * o + o * o * (1.0 + 1.0 / m)
    }
}

impl Default for ShadowedRicianParams {
    fn default() -> Self {
        Self::AVERAGE_SHADOWING
    }
}

/// Reusable sampler for `|X + Z e^{j phi}|^2`.
#[derive(Debug, Clone, Copy)]
pub struct ShadowedRician {
    scatter_std: f64,
    los_power: Option<Gamma<f64>>,
}

impl ShadowedRician {
    pub fn new(p: &ShadowedRicianParams) -> Result<Self> {
        p.validate()?;
        let los_power = if p.omega > 0.0 {
            Some(Gamma::new(p.m, p.omega / p.m).map_err(|e| invalid("fading_m", e.to_string()))?)
        } else {
            None
        };
        Ok(Self { scatter_std: p.b.sqrt(), los_power })
    }
}

impl Distribution<f64> for ShadowedRician {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let xi: f64 = rng.sample(StandardNormal);
        let xq: f64 = rng.sample(StandardNormal);
        let (mut re, mut im) = (self.scatter_std * xi, self.scatter_std * xq);
        if let Some(gamma) = &self.los_power {
            let z = gamma.sample(rng).sqrt();
            let (s, c) = (TAU * rng.random::<f64>()).sin_cos();
            re += z * c;
            im += z * s;
        }
        re * re + im * im
    }
}

pub fn sample_shadowed_rician_power<R: Rng + ?Sized>(p: &ShadowedRicianParams, rng: &mut R) -> Result<f64> {
    Ok(ShadowedRician::new(p)?.sample(rng))
}

/// Small-scale fading applied to every link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FadingModel {
    ShadowedRician(ShadowedRicianParams),
    /// Deterministic power gain, for closed-form checks.
    Fixed(f64),
}

impl Default for FadingModel {
    fn default() -> Self {
        FadingModel::ShadowedRician(ShadowedRicianParams::default())
    }
}

#[derive(Debug, Clone, Copy)]
pub enum FadingSampler {
    ShadowedRician(ShadowedRician),
    Fixed(f64),
}

impl FadingSampler {
    pub fn new(model: &FadingModel) -> Result<Self> {
        match model {
            FadingModel::ShadowedRician(p) => Ok(FadingSampler::ShadowedRician(ShadowedRician::new(p)?)),
            FadingModel::Fixed(g) if *g >= 0.0 && g.is_finite() => Ok(FadingSampler::Fixed(*g)),
            FadingModel::Fixed(g) => {
                Err(invalid("fading", format!("fixed fading power must be non-negative, got {g}")))
            }
        }
    }
}

impl Distribution<f64> for FadingSampler {
    #[inline]
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            FadingSampler::ShadowedRician(s) => s.sample(rng),
            FadingSampler::Fixed(g) => *g,
        }
    }
}

/// Thermal noise power over the signal bandwidth, watts.
#[allow(non_snake_case)]
pub fn noise_power_W(budget: &LinkBudget) -> f64 {
    db_to_linear(budget.noise_density_dbm_per_hz - 30.0) * budget.bandwidth_hz
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSample {
    pub slant_range_km: f64,
    pub off_boresight_rad: f64,
    pub fading_power: f64,
    pub received_power_w: f64,
}

/// Link budget with its derived constants evaluated once.
#[derive(Debug, Clone, Copy)]
pub struct ChannelModel {
    budget: LinkBudget,
    eirp_total_w: f64,
    path_reference: f64,
    pattern: BeamPattern,
    noise_w: f64,
}

impl ChannelModel {
    pub fn new(budget: &LinkBudget) -> Result<Self> {
        budget.validate()?;
        Ok(Self {
            budget: *budget,
            eirp_total_w: budget.eirp_total_w(),
            path_reference: (budget.wavelength_m() / (4.0 * PI)).powi(2),
            pattern: BeamPattern::from_budget(budget),
            noise_w: noise_power_W(budget),
        })
    }

    pub fn budget(&self) -> &LinkBudget {
        &self.budget
    }

    pub fn pattern(&self) -> &BeamPattern {
        &self.pattern
    }

    pub fn noise_w(&self) -> f64 {
        self.noise_w
    }

    pub fn eirp_total_w(&self) -> f64 {
        self.eirp_total_w
    }

    /// Mean received power (unit fading) for a known geometry.
    #[inline]
    pub fn mean_power_w(&self, geom: &LinkGeometry, rx_gain_db: f64) -> f64 {
        let path = self.path_reference * (geom.slant_range_km * 1e3).powf(-self.budget.pathloss_exponent);
        self.eirp_total_w * self.pattern.relative_gain(geom.off_boresight_rad) * path * db_to_linear(rx_gain_db)
    }

    /// Received power over one link, or `NotVisible` below the mask.
    pub fn link(
        &self,
        sat: &UnitDirection,
        terminal: &GroundTerminal,
        body: &BodyConstants,
        min_elevation_rad: f64,
        fading_power: f64,
    ) -> Result<LinkSample> {
        let geom = LinkGeometry::compute(sat, terminal, body);
        if geom.elevation_rad < min_elevation_rad {
            return Err(Error::NotVisible);
        }
        Ok(LinkSample {
            slant_range_km: geom.slant_range_km,
            off_boresight_rad: geom.off_boresight_rad,
            fading_power,
            received_power_w: self.mean_power_w(&geom, terminal.rx_gain_db) * fading_power,
        })
    }
}

/// Received power from one satellite with a horizon (0 degree) mask.
#[allow(non_snake_case)]
pub fn received_power_W(
    sat: &UnitDirection,
    terminal: &GroundTerminal,
    body: &BodyConstants,
    budget: &LinkBudget,
    fading_power: f64,
) -> Result<LinkSample> {
    ChannelModel::new(budget)?.link(sat, terminal, body, 0.0, fading_power)
}
