//! Cluster formations: a master at the centre of a spherical cap with slaves
//! either on the cap boundary (circular) or spread over it (uniform).
//!
//! Projected-circular-orbit motion is modelled kinematically: the slave ring
//! rotates rigidly about the master at one revolution per formation period.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{place_circular, sample_cap_uniform, BodyConstants, CapSpec, UnitDirection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormationKind {
    Circular,
    Uniform,
}

impl FormationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FormationKind::Circular => "circular",
            FormationKind::Uniform => "uniform",
        }
    }
}

impl std::str::FromStr for FormationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circular" => Ok(FormationKind::Circular),
            "uniform" => Ok(FormationKind::Uniform),
            other => Err(invalid("formation", format!("expected `circular` or `uniform`, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterLayout {
    pub master: UnitDirection,
    pub slaves: Vec<UnitDirection>,
    pub kind: FormationKind,
    /// Centred on the master.
    pub cap: CapSpec,
    /// Azimuth of the first slave; meaningful for circular clusters only.
    pub phase_rad: f64,
}

/// Addresses one satellite of a cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Member {
    Master,
    Slave(usize),
}

impl ClusterLayout {
    pub fn size(&self) -> usize {
        1 + self.slaves.len()
    }

    /// Master first, then slaves in order.
    pub fn members(&self) -> impl Iterator<Item = &UnitDirection> {
        std::iter::once(&self.master).chain(self.slaves.iter())
    }
}

pub fn build_cluster<R: Rng + ?Sized>(
    master: UnitDirection,
    n_slaves: usize,
    kind: FormationKind,
    polar_angle_rad: f64,
    phase_rad: f64,
    rng: &mut R,
) -> Result<ClusterLayout> {
    let cap = CapSpec::new(master, polar_angle_rad)?;
    let slaves = match kind {
        FormationKind::Circular => place_circular(&cap, n_slaves, phase_rad),
        FormationKind::Uniform => sample_cap_uniform(&cap, n_slaves, rng),
    };
    let phase_rad = if kind == FormationKind::Circular { phase_rad } else { 0.0 };
    Ok(ClusterLayout { master, slaves, kind, cap, phase_rad })
}

/// Projected rotation sense of the slave ring as seen from the ground.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationSense {
    #[default]
    Prograde,
    Retrograde,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormationClock {
    pub period_s: f64,
    pub t_s: f64,
    pub sense: RotationSense,
}

impl FormationClock {
    pub fn new(period_s: f64) -> Result<Self> {
        if !(period_s > 0.0 && period_s.is_finite()) {
            return Err(invalid("period_s", format!("must be positive, got {period_s}")));
        }
        Ok(Self { period_s, t_s: 0.0, sense: RotationSense::Prograde })
    }

    /// One relative revolution per orbit of the reference satellite.
    pub fn orbital(body: &BodyConstants) -> Self {
        Self { period_s: body.orbital_period_s(), t_s: 0.0, sense: RotationSense::Prograde }
    }

    pub fn with_sense(mut self, sense: RotationSense) -> Self {
        self.sense = sense;
        self
    }

    pub fn phase_increment(&self, dt_s: f64) -> f64 {
        let sign = match self.sense {
            RotationSense::Prograde => 1.0,
            RotationSense::Retrograde => -1.0,
        };
        sign * TAU * dt_s / self.period_s
    }

    pub fn tick(&self, dt_s: f64) -> Self {
        Self { t_s: self.t_s + dt_s, ..*self }
    }
}

/// Rigidly rotates the slave ring about the master by the phase accumulated
/// over `dt_s`.
pub fn advance_phase(cluster: &ClusterLayout, clock: &FormationClock, dt_s: f64) -> Result<ClusterLayout> {
    if cluster.kind != FormationKind::Circular {
        return Err(Error::PhaseUndefined);
    }
    let delta = clock.phase_increment(dt_s);
    let slaves = cluster.slaves.iter().map(|s| s.rotated_about(&cluster.master, delta)).collect();
    Ok(ClusterLayout { slaves, phase_rad: cluster.phase_rad + delta, ..cluster.clone() })
}

/// Removes one failed slave. Master failure is not representable here.
pub fn drop_satellite(cluster: &ClusterLayout, member: Member) -> Result<ClusterLayout> {
    let index = match member {
        Member::Master => return Err(Error::MasterRemoval),
        Member::Slave(i) => i,
    };
    if index >= cluster.slaves.len() {
        return Err(Error::NoSuchSlave { index, len: cluster.slaves.len() });
    }
    let mut out = cluster.clone();
    out.slaves.remove(index);
    Ok(out)
}

/// Longest master-slave inter-satellite link; zero for a lone master.
pub fn max_isl_distance_km(cluster: &ClusterLayout, body: &BodyConstants) -> f64 {
    cluster.slaves.iter().map(|s| body.shell_chord_km(&cluster.master, s)).fold(0.0, f64::max)
}
