//! Distance, visibility and range helpers shared by the rest of the crate.
//!
//! All lengths are kilometres and the Earth is a sphere.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cartesian 3-vector in kilometres (or km/s for velocities).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, rhs: f64) -> Vec3 {
        Vec3::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

pub const SPEED_OF_LIGHT_MPS: f64 = 299_792_458.0;
pub const EARTH_RADIUS_KM: f64 = 6378.0;
/// Grazing height above the surface below which a laser beam is considered blocked.
pub const OCCLUSION_CLEARANCE_KM: f64 = 80.0;
pub const NODE_DELAY_MS: f64 = 10.0;

/// Physical constants used for link delays and visibility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub speed_of_light_mps: f64,
    pub earth_radius_km: f64,
    pub occlusion_clearance_km: f64,
    pub node_delay_ms: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            speed_of_light_mps: SPEED_OF_LIGHT_MPS,
            earth_radius_km: EARTH_RADIUS_KM,
            occlusion_clearance_km: OCCLUSION_CLEARANCE_KM,
            node_delay_ms: NODE_DELAY_MS,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("speed_of_light_mps", self.speed_of_light_mps),
            ("earth_radius_km", self.earth_radius_km),
            ("occlusion_clearance_km", self.occlusion_clearance_km),
            ("node_delay_ms", self.node_delay_ms),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(format!(
                    "constants.{name} must be strictly positive, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// Radius of the sphere a satellite-to-satellite beam must stay outside of.
    pub fn occlusion_radius_km(&self) -> f64 {
        self.earth_radius_km + self.occlusion_clearance_km
    }

    /// One-way propagation delay of a link of the given length.
    #[inline]
    pub fn propagation_delay_ms(&self, length_km: f64) -> f64 {
        length_km * 1e6 / self.speed_of_light_mps
    }
}

#[inline]
pub fn distance(p: Vec3, q: Vec3) -> f64 {
    (p - q).norm()
}

/// Squared distance from the origin to the closed segment `p`–`q`.
#[inline]
pub(crate) fn segment_clearance_squared(p: Vec3, q: Vec3) -> f64 {
    let d = q - p;
    let len2 = d.norm_squared();
    if len2 == 0.0 {
        return p.norm_squared();
    }
    let t = (-p.dot(d) / len2).clamp(0.0, 1.0);
    (p + d * t).norm_squared()
}

/// Whether the segment between `p` and `q` stays outside the sphere of
/// `occlusion_radius_km` centred on the origin.
///
/// Returns a domain error when either endpoint lies strictly inside the sphere.
pub fn has_line_of_sight(p: Vec3, q: Vec3, occlusion_radius_km: f64) -> Result<bool> {
    let r2 = occlusion_radius_km * occlusion_radius_km;
    for (label, v) in [("first", p), ("second", q)] {
        if !v.is_finite() {
            return Err(Error::domain(format!("{label} endpoint is not finite")));
        }
        if v.norm_squared() < r2 {
            return Err(Error::domain(format!(
                "{label} endpoint at radius {:.3} km is inside the occlusion sphere of {:.3} km",
                v.norm(),
                occlusion_radius_km
            )));
        }
    }
    Ok(segment_clearance_squared(p, q) >= r2)
}

/// Longest chord between two satellites at `altitude_km` that still clears
/// the Earth by `clearance_km`.
pub fn max_lisl_range(altitude_km: f64, clearance_km: f64) -> f64 {
    max_lisl_range_with_radius(EARTH_RADIUS_KM, altitude_km, clearance_km)
}

pub fn max_lisl_range_with_radius(
    earth_radius_km: f64,
    altitude_km: f64,
    clearance_km: f64,
) -> f64 {
    let orbit = earth_radius_km + altitude_km;
    let grazing = earth_radius_km + clearance_km;
    2.0 * (orbit * orbit - grazing * grazing).max(0.0).sqrt()
}

/// Geodetic point on a spherical Earth, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatLon {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
}

impl LatLon {
    pub fn new(latitude_deg: f64, longitude_deg: f64) -> Self {
        LatLon {
            latitude_deg,
            longitude_deg,
        }
    }

    /// Unit vector in an Earth-fixed frame with +x through (0°, 0°).
    pub fn unit_vector(self) -> Vec3 {
        let (slat, clat) = self.latitude_deg.to_radians().sin_cos();
        let (slon, clon) = self.longitude_deg.to_radians().sin_cos();
        Vec3::new(clat * clon, clat * slon, slat)
    }
}

/// Surface distance along the great circle through `a` and `b`.
///
/// Uses the atan2 form of the central angle, which stays well conditioned
/// for coincident and antipodal points alike.
pub fn great_circle_distance(a: LatLon, b: LatLon, radius_km: f64) -> f64 {
    let u = a.unit_vector();
    let v = b.unit_vector();
    let angle = u.cross(v).norm().atan2(u.dot(v));
    radius_km * angle
}

/// Geocentric latitude in degrees.
pub fn latitude_of(position: Vec3) -> Result<f64> {
    let r = position.norm();
    if r == 0.0 || !r.is_finite() {
        return Err(Error::domain("latitude of a zero or non-finite vector"));
    }
    Ok((position.z / r).clamp(-1.0, 1.0).asin().to_degrees())
}

/// Whether a satellite at `sat` is above the local horizon of a surface
/// point at `site` (strictly positive elevation).
#[inline]
pub fn above_horizon(site: Vec3, sat: Vec3) -> bool {
    (sat - site).dot(site) > 0.0
}

/// Elevation angle of `sat` seen from the surface point `site`, in degrees.
pub fn elevation_deg(site: Vec3, sat: Vec3) -> f64 {
    let los = sat - site;
    let up = site.norm();
    let range = los.norm();
    if up == 0.0 || range == 0.0 {
        return 90.0;
    }
    (los.dot(site) / (up * range))
        .clamp(-1.0, 1.0)
        .asin()
        .to_degrees()
}
