//! Spherical geometry for satellites on a shell of radius `r_e + a` and
//! terminals on the Earth's surface.
//!
//! Angles are radians throughout; degrees only appear at the configuration
//! boundary.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{Rotation3, Unit, Vector3};
use rand::Rng;
use rand_distr::{Distribution, UnitSphere};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Standard gravitational parameter of the Earth, km^3/s^2.
pub const EARTH_MU_KM3_S2: f64 = 398_600.441_8;

/// Radii of the Earth and of the orbital shell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyConstants {
    pub earth_radius_km: f64,
    pub altitude_km: f64,
}

impl Default for BodyConstants {
    fn default() -> Self {
        Self { earth_radius_km: 6371.0, altitude_km: 600.0 }
    }
}

impl BodyConstants {
    pub fn new(earth_radius_km: f64, altitude_km: f64) -> Result<Self> {
        let body = Self { earth_radius_km, altitude_km };
        body.validate()?;
        Ok(body)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.earth_radius_km > 0.0 && self.earth_radius_km.is_finite()) {
            return Err(invalid("earth_radius_km", format!("must be positive, got {}", self.earth_radius_km)));
        }
        if !(self.altitude_km > 0.0 && self.altitude_km.is_finite()) {
            return Err(invalid("altitude_km", format!("must be positive, got {}", self.altitude_km)));
        }
        Ok(())
    }

    #[inline]
    pub fn orbital_radius_km(&self) -> f64 {
        self.earth_radius_km + self.altitude_km
    }

    /// Largest Earth-central angle between terminal and satellite at which the
    /// satellite still clears `min_elevation_rad`.
    pub fn max_central_angle(&self, min_elevation_rad: f64) -> f64 {
        let ratio = self.earth_radius_km / self.orbital_radius_km();
        // Triangle earth-centre / terminal / satellite: the angle at the
        // satellite is asin(ratio * cos(el)); the central angle completes it.
        let nadir = (ratio * min_elevation_rad.cos()).asin();
        (FRAC_PI_2 - min_elevation_rad - nadir).max(0.0)
    }

    /// Two-body circular orbital period at this altitude.
    pub fn orbital_period_s(&self) -> f64 {
        TAU * (self.orbital_radius_km().powi(3) / EARTH_MU_KM3_S2).sqrt()
    }

    /// Straight-line distance between two points on the orbital shell.
    pub fn shell_chord_km(&self, a: &UnitDirection, b: &UnitDirection) -> f64 {
        2.0 * self.orbital_radius_km() * (0.5 * a.angle_to(b)).sin()
    }
}

/// A point on a sphere, stored as a unit vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitDirection(Vector3<f64>);

impl UnitDirection {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::from_vector(Vector3::new(x, y, z))
    }

    pub fn from_vector(v: Vector3<f64>) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::ZeroDirection);
        }
        Ok(Self(v / norm))
    }

    pub fn north_pole() -> Self {
        Self(Vector3::z())
    }

    /// Direction at the given latitude and longitude (radians).
    pub fn from_lat_lon(lat_rad: f64, lon_rad: f64) -> Self {
        let (sl, cl) = lat_rad.sin_cos();
        let (so, co) = lon_rad.sin_cos();
        Self(Vector3::new(cl * co, cl * so, sl))
    }

    #[inline]
    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.0.x
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.0.y
    }

    #[inline]
    pub fn z(&self) -> f64 {
        self.0.z
    }

    /// Great-circle angle to `other`, accurate for tiny and near-antipodal
    /// separations.
    #[inline]
    pub fn angle_to(&self, other: &UnitDirection) -> f64 {
        self.0.cross(&other.0).norm().atan2(self.0.dot(&other.0))
    }

    /// Right-handed rotation about `axis` by `angle_rad`.
    pub fn rotated_about(&self, axis: &UnitDirection, angle_rad: f64) -> Self {
        let rot = Rotation3::from_axis_angle(&Unit::new_unchecked(axis.0), angle_rad);
        Self::renormalized(rot * self.0)
    }

    pub fn rotated(&self, rot: &Rotation3<f64>) -> Self {
        Self::renormalized(rot * self.0)
    }

    fn renormalized(v: Vector3<f64>) -> Self {
        Self(v / v.norm())
    }
}

/// Region of the sphere within `polar_angle_rad` of `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapSpec {
    pub center: UnitDirection,
    pub polar_angle_rad: f64,
}

impl CapSpec {
    /// Cluster caps are much smaller than a hemisphere; anything in `(0, π]`
    /// is accepted so the same sampler covers hemispheres and whole spheres.
    pub fn new(center: UnitDirection, polar_angle_rad: f64) -> Result<Self> {
        if !(polar_angle_rad > 0.0 && polar_angle_rad <= PI) {
            return Err(invalid("polar_angle_rad", format!("must lie in (0, pi], got {polar_angle_rad}")));
        }
        Ok(Self { center, polar_angle_rad })
    }

    pub fn contains(&self, d: &UnitDirection) -> bool {
        self.center.angle_to(d) <= self.polar_angle_rad + 1e-12
    }

    /// Fraction of the full sphere covered by the cap.
    pub fn area_fraction(&self) -> f64 {
        (0.5 * self.polar_angle_rad).sin().powi(2)
    }

    /// Direction at polar angle `theta` and azimuth `phi` about the centre.
    /// Azimuth is measured from `tangent_basis(center).0` towards `.1`.
    pub fn point_at(&self, theta: f64, phi: f64) -> UnitDirection {
        let (e1, e2) = tangent_basis(&self.center);
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let v = self.center.0 * ct + (e1 * cp + e2 * sp) * st;
        UnitDirection::renormalized(v)
    }
}

/// Orthonormal pair spanning the tangent plane at `c`, oriented so that
/// `(e1, e2, c)` is right-handed.
pub fn tangent_basis(c: &UnitDirection) -> (Vector3<f64>, Vector3<f64>) {
    let reference = if c.0.z.abs() < 0.9 { Vector3::z() } else { Vector3::x() };
    let e1 = reference.cross(&c.0).normalize();
    let e2 = c.0.cross(&e1);
    (e1, e2)
}

/// Ground user, sitting on the Earth's surface along `direction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTerminal {
    pub direction: UnitDirection,
    pub rx_gain_db: f64,
}

impl GroundTerminal {
    pub fn at(direction: UnitDirection) -> Self {
        Self { direction, rx_gain_db: 0.0 }
    }
}

impl Default for GroundTerminal {
    fn default() -> Self {
        Self::at(UnitDirection::north_pole())
    }
}

/// `n` independent area-uniform points on the unit sphere.
pub fn sample_sphere_bpp<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<UnitDirection> {
    (0..n)
        .map(|_| {
            let [x, y, z]: [f64; 3] = UnitSphere.sample(rng);
            UnitDirection::renormalized(Vector3::new(x, y, z))
        })
        .collect()
}

/// `n` independent area-uniform points on a spherical cap.
///
/// Inverse CDF on `1 - cos(theta)`, which is uniform on `[0, 1 - cos(theta_c)]`,
/// plus a uniform azimuth.
pub fn sample_cap_uniform<R: Rng + ?Sized>(cap: &CapSpec, n: usize, rng: &mut R) -> Vec<UnitDirection> {
    let (e1, e2) = tangent_basis(&cap.center);
    let c = cap.center.0;
    let one_minus_cos_max = 2.0 * (0.5 * cap.polar_angle_rad).sin().powi(2);
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let phi = TAU * rng.random::<f64>();
            let one_minus_cos = u * one_minus_cos_max;
            let ct = 1.0 - one_minus_cos;
            let st = (one_minus_cos * (2.0 - one_minus_cos)).max(0.0).sqrt();
            let (sp, cp) = phi.sin_cos();
            UnitDirection::renormalized(c * ct + (e1 * cp + e2 * sp) * st)
        })
        .collect()
}

/// `n` points on the cap boundary, equally spaced in azimuth starting at
/// `phase_rad`.
pub fn place_circular(cap: &CapSpec, n: usize, phase_rad: f64) -> Vec<UnitDirection> {
    let step = if n == 0 { 0.0 } else { TAU / n as f64 };
    (0..n).map(|k| cap.point_at(cap.polar_angle_rad, phase_rad + step * k as f64)).collect()
}

/// Slant range, elevation and off-boresight angle of one satellite as seen
/// from one terminal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub slant_range_km: f64,
    pub elevation_rad: f64,
    pub off_boresight_rad: f64,
}

impl LinkGeometry {
    pub fn compute(sat: &UnitDirection, terminal: &GroundTerminal, body: &BodyConstants) -> Self {
        let t = terminal.direction.0;
        let s = sat.0;
        // terminal -> satellite
        let v = s * body.orbital_radius_km() - t * body.earth_radius_km;
        let range = v.norm();
        let up = v.dot(&t);
        let horizontal = (v - t * up).norm();
        let elevation_rad = up.atan2(horizontal);
        // Beam axis points along -s; the terminal lies along -v from the
        // satellite, so the angle between them equals angle(s, v).
        let off_boresight_rad = s.cross(&v).norm().atan2(s.dot(&v));
        Self { slant_range_km: range, elevation_rad, off_boresight_rad }
    }
}

/// Distance from the terminal to a satellite on the orbital shell.
pub fn slant_range_km(sat: &UnitDirection, terminal: &GroundTerminal, body: &BodyConstants) -> f64 {
    let r = body.earth_radius_km;
    let big_r = body.orbital_radius_km();
    let psi = sat.angle_to(&terminal.direction);
    // Law of cosines rewritten to avoid cancellation near the nadir.
    ((big_r - r).powi(2) + 4.0 * r * big_r * (0.5 * psi).sin().powi(2)).sqrt()
}

pub fn elevation_angle_rad(sat: &UnitDirection, terminal: &GroundTerminal, body: &BodyConstants) -> f64 {
    LinkGeometry::compute(sat, terminal, body).elevation_rad
}

/// Closed threshold: a satellite exactly on the mask is visible.
pub fn is_visible(
    sat: &UnitDirection,
    terminal: &GroundTerminal,
    body: &BodyConstants,
    min_elevation_rad: f64,
) -> bool {
    elevation_angle_rad(sat, terminal, body) >= min_elevation_rad
}

pub fn off_boresight_angle_rad(sat: &UnitDirection, terminal: &GroundTerminal, body: &BodyConstants) -> f64 {
    LinkGeometry::compute(sat, terminal, body).off_boresight_rad
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn body() -> BodyConstants {
        BodyConstants::default()
    }

    fn at_central_angle(psi: f64) -> UnitDirection {
        UnitDirection::from_lat_lon(FRAC_PI_2 - psi, 0.3)
    }

    #[test]
    fn empty_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_sphere_bpp(0, &mut rng).is_empty());
        let cap = CapSpec::new(UnitDirection::north_pole(), 1f64.to_radians()).unwrap();
        assert!(sample_cap_uniform(&cap, 0, &mut rng).is_empty());
        assert!(place_circular(&cap, 0, 0.0).is_empty());
    }

    #[test]
    fn zero_vector_rejected() {
        assert_eq!(UnitDirection::new(0.0, 0.0, 0.0), Err(Error::ZeroDirection));
        let d = UnitDirection::new(3.0, 4.0, 0.0).unwrap();
        assert_abs_diff_eq!(d.as_vector().norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn cap_sample_containment() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let theta_c = 1f64.to_radians();
        let center = UnitDirection::new(0.3, -0.2, 0.9).unwrap();
        let cap = CapSpec::new(center, theta_c).unwrap();
        for d in sample_cap_uniform(&cap, 1000, &mut rng) {
            assert!(center.angle_to(&d) <= theta_c + 1e-12);
        }
        let north = CapSpec::new(UnitDirection::north_pole(), theta_c).unwrap();
        let p = sample_cap_uniform(&north, 1, &mut rng)[0];
        assert!(p.z() >= theta_c.cos() - 1e-15);
    }

    #[test]
    fn circular_placement() {
        let theta_c = 1f64.to_radians();
        let cap = CapSpec::new(UnitDirection::new(1.0, 2.0, -0.5).unwrap(), theta_c).unwrap();
        for p in place_circular(&cap, 9, 0.0) {
            assert_abs_diff_eq!(cap.center.angle_to(&p), theta_c, epsilon = 1e-12);
        }
        let four = place_circular(&cap, 4, 0.4);
        let seps: Vec<f64> = (0..4).map(|k| four[k].angle_to(&four[(k + 1) % 4])).collect();
        for s in &seps {
            assert_abs_diff_eq!(*s, seps[0], epsilon = 1e-12);
        }
        let a = place_circular(&cap, 2, 0.0);
        let b = place_circular(&cap, 2, PI);
        assert!(a[0].angle_to(&b[1]) < 1e-12 && a[1].angle_to(&b[0]) < 1e-12);
    }

    #[test]
    fn slant_range_cases() {
        let t = GroundTerminal::default();
        let b = body();
        assert_abs_diff_eq!(slant_range_km(&UnitDirection::north_pole(), &t, &b), 600.0, epsilon = 1e-9);
        let horizon = at_central_angle((6371.0f64 / 6971.0).acos());
        assert_abs_diff_eq!(slant_range_km(&horizon, &t, &b), 2829.3, epsilon = 0.1);
        let south = UnitDirection::new(0.0, 0.0, -1.0).unwrap();
        assert_abs_diff_eq!(slant_range_km(&south, &t, &b), 13342.0, epsilon = 1e-9);
        // Vector route agrees with the law of cosines.
        let s = at_central_angle(0.2);
        assert_abs_diff_eq!(
            LinkGeometry::compute(&s, &t, &b).slant_range_km,
            slant_range_km(&s, &t, &b),
            epsilon = 1e-9
        );
    }

    #[test]
    fn elevation_cases() {
        let t = GroundTerminal::default();
        let b = body();
        assert_abs_diff_eq!(elevation_angle_rad(&UnitDirection::north_pole(), &t, &b), FRAC_PI_2, epsilon = 1e-15);
        let tangent = at_central_angle((6371.0f64 / 6971.0).acos());
        assert_abs_diff_eq!(elevation_angle_rad(&tangent, &t, &b), 0.0, epsilon = 1e-9);
        let south = UnitDirection::new(0.0, 0.0, -1.0).unwrap();
        assert!(elevation_angle_rad(&south, &t, &b) < 0.0);
        // max_central_angle inverts the elevation computation.
        for el_deg in [0.0f64, 10.0, 25.0, 60.0] {
            let psi = b.max_central_angle(el_deg.to_radians());
            let s = at_central_angle(psi);
            assert_abs_diff_eq!(elevation_angle_rad(&s, &t, &b), el_deg.to_radians(), epsilon = 1e-9);
        }
    }

    #[test]
    fn visibility_threshold_is_closed() {
        let t = GroundTerminal::default();
        let b = body();
        assert!(is_visible(&UnitDirection::north_pole(), &t, &b, 0.0));
        assert!(!is_visible(&UnitDirection::new(0.0, 0.0, -1.0).unwrap(), &t, &b, 0.0));
        let s = at_central_angle(0.1);
        let el = elevation_angle_rad(&s, &t, &b);
        assert!(is_visible(&s, &t, &b, el));
        assert!(!is_visible(&s, &t, &b, el + 1e-12));
    }

    #[test]
    fn off_boresight_cases() {
        let t = GroundTerminal::default();
        let b = body();
        assert_abs_diff_eq!(off_boresight_angle_rad(&UnitDirection::north_pole(), &t, &b), 0.0, epsilon = 1e-15);
        let horizon = at_central_angle((6371.0f64 / 6971.0).acos());
        let theta = off_boresight_angle_rad(&horizon, &t, &b);
        assert_abs_diff_eq!(theta.to_degrees(), 66.07, epsilon = 0.05);
        assert_abs_diff_eq!(theta, (6371.0f64 / 6971.0).asin(), epsilon = 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for s in sample_sphere_bpp(1000, &mut rng) {
            let th = off_boresight_angle_rad(&s, &t, &b);
            assert!((0.0..=PI).contains(&th));
        }
    }

    #[test]
    fn orbital_period_from_kepler() {
        // Equatorial radius reproduces the commonly quoted ~5801 s at 600 km.
        let equatorial = BodyConstants::new(6378.137, 600.0).unwrap();
        assert_abs_diff_eq!(equatorial.orbital_period_s(), 5801.0, epsilon = 1.0);
        assert!(body().orbital_period_s() < equatorial.orbital_period_s());
    }

    #[test]
    fn invalid_inputs() {
        assert!(BodyConstants::new(-1.0, 600.0).is_err());
        assert!(BodyConstants::new(6371.0, 0.0).is_err());
        assert!(CapSpec::new(UnitDirection::north_pole(), 0.0).is_err());
        assert!(CapSpec::new(UnitDirection::north_pole(), 4.0).is_err());
    }
}
