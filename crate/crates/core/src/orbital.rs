//! Walker-delta constellation layout and two-body circular propagation.
//!
//! Inertial frame: right-handed, +z along the polar axis, RAAN measured from
//! +x in the equatorial plane, argument of latitude from the ascending node.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LatLon, Vec3, EARTH_RADIUS_KM};

/// Standard gravitational parameter of the Earth, km^3/s^2.
pub const EARTH_MU_KM3_S2: f64 = 398_600.441_8;
/// Sidereal rotation rate of the Earth, rad/s.
pub const EARTH_ROTATION_RAD_S: f64 = 7.292_115_9e-5;

/// Walker-delta constellation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstellationSpec {
    pub plane_count: usize,
    pub sats_per_plane: usize,
    pub altitude_km: f64,
    pub inclination_deg: f64,
    pub phasing_offset: usize,
    pub raan_spread_deg: f64,
    pub earth_radius_km: f64,
    pub mu_km3s2: f64,
}

impl Default for ConstellationSpec {
    /// Starlink Phase I shell with the phasing offset pinned by the connectivity scan.
    fn default() -> Self {
        ConstellationSpec {
            plane_count: 24,
            sats_per_plane: 66,
            altitude_km: 550.0,
            inclination_deg: 53.0,
            phasing_offset: DEFAULT_PHASING_OFFSET,
            raan_spread_deg: 360.0,
            earth_radius_km: EARTH_RADIUS_KM,
            mu_km3s2: EARTH_MU_KM3_S2,
        }
    }
}

/// Phasing offset that reproduces the reference connectivity census; see
/// [`crate::validation::scan_phasing`].
pub const DEFAULT_PHASING_OFFSET: usize = 15;

impl ConstellationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.plane_count == 0 {
            return Err(Error::config(
                "constellation.plane_count must be at least 1",
            ));
        }
        if self.sats_per_plane == 0 {
            return Err(Error::config(
                "constellation.sats_per_plane must be at least 1",
            ));
        }
        if !(self.altitude_km.is_finite() && self.altitude_km > 0.0) {
            return Err(Error::config(format!(
                "constellation.altitude_km must be positive, got {}",
                self.altitude_km
            )));
        }
        if self.phasing_offset >= self.plane_count {
            return Err(Error::config(format!(
                "constellation.phasing_offset must be in [0, {}), got {}",
                self.plane_count, self.phasing_offset
            )));
        }
        if !(self.earth_radius_km.is_finite() && self.earth_radius_km > 0.0) {
            return Err(Error::config(
                "constellation.earth_radius_km must be positive",
            ));
        }
        if !(self.mu_km3s2.is_finite() && self.mu_km3s2 > 0.0) {
            return Err(Error::config("constellation.mu_km3s2 must be positive"));
        }
        if !self.inclination_deg.is_finite() || !self.raan_spread_deg.is_finite() {
            return Err(Error::config("constellation angles must be finite"));
        }
        Ok(())
    }

    pub fn satellite_count(&self) -> usize {
        self.plane_count * self.sats_per_plane
    }

    pub fn orbit_radius_km(&self) -> f64 {
        self.earth_radius_km + self.altitude_km
    }

    /// Mean motion in rad/s.
    pub fn mean_motion(&self) -> f64 {
        (self.mu_km3s2 / self.orbit_radius_km().powi(3)).sqrt()
    }

    pub fn orbital_period_s(&self) -> f64 {
        TAU / self.mean_motion()
    }

    pub fn orbital_speed_kms(&self) -> f64 {
        (self.mu_km3s2 / self.orbit_radius_km()).sqrt()
    }
}

/// Satellite identity: orbital plane and slot within the plane, both 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SatelliteId {
    pub plane_index: usize,
    pub slot_index: usize,
}

impl SatelliteId {
    pub fn new(plane_index: usize, slot_index: usize) -> Self {
        SatelliteId {
            plane_index,
            slot_index,
        }
    }

    pub fn flat_index(self, sats_per_plane: usize) -> usize {
        self.plane_index * sats_per_plane + self.slot_index
    }

    pub fn from_flat(index: usize, sats_per_plane: usize) -> Self {
        SatelliteId::new(index / sats_per_plane, index % sats_per_plane)
    }

    /// Catalogue label of the form `x1PPSS`, 1-based plane and slot.
    pub fn label(self) -> Result<String> {
        format_id(self)
    }
}

impl fmt::Display for SatelliteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match format_id(*self) {
            Ok(s) => f.write_str(&s),
            Err(_) => write!(f, "p{}s{}", self.plane_index, self.slot_index),
        }
    }
}

pub fn format_id(sat: SatelliteId) -> Result<String> {
    if sat.plane_index >= 99 || sat.slot_index >= 99 {
        return Err(Error::Format(format!(
            "satellite (plane {}, slot {}) does not fit the two-digit label scheme",
            sat.plane_index, sat.slot_index
        )));
    }
    Ok(format!(
        "x1{:02}{:02}",
        sat.plane_index + 1,
        sat.slot_index + 1
    ))
}

/// Inverse of [`format_id`].
pub fn parse_id(label: &str) -> Result<SatelliteId> {
    let digits = label
        .strip_prefix("x1")
        .filter(|d| d.len() == 4 && d.bytes().all(|b| b.is_ascii_digit()))
        .ok_or_else(|| Error::Format(format!("malformed satellite label {label:?}")))?;
    let plane: usize = digits[..2].parse().unwrap_or(0);
    let slot: usize = digits[2..].parse().unwrap_or(0);
    if plane == 0 || slot == 0 {
        return Err(Error::Format(format!(
            "satellite label {label:?} uses a zero index"
        )));
    }
    Ok(SatelliteId::new(plane - 1, slot - 1))
}

/// Circular-orbit elements of one satellite, angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitalElements {
    pub radius_km: f64,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    /// Argument of latitude at t = 0.
    pub initial_phase_deg: f64,
}

/// Inertial position and velocity at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub time_s: f64,
    pub position_km: Vec3,
    pub velocity_kms: Vec3,
}

#[derive(Debug, Clone, Copy)]
struct PlaneBasis {
    node: Vec3,
    normal_in_plane: Vec3,
}

/// An immutable, fully laid-out constellation.
#[derive(Debug, Clone)]
pub struct Constellation {
    spec: ConstellationSpec,
    elements: Vec<OrbitalElements>,
    bases: Vec<PlaneBasis>,
    phases_rad: Vec<f64>,
    mean_motion: f64,
}

/// Lay out every satellite of a Walker-delta constellation.
pub fn build_constellation(
    spec: &ConstellationSpec,
) -> Result<Vec<(SatelliteId, OrbitalElements)>> {
    let c = Constellation::new(spec.clone())?;
    Ok(c.iter_ids().zip(c.elements.iter().copied()).collect())
}

impl Constellation {
    pub fn new(spec: ConstellationSpec) -> Result<Self> {
        spec.validate()?;
        let planes = spec.plane_count;
        let per_plane = spec.sats_per_plane;
        let r = spec.orbit_radius_km();
        let inc = spec.inclination_deg.to_radians();
        let (sin_i, cos_i) = inc.sin_cos();

        let mut elements = Vec::with_capacity(spec.satellite_count());
        let mut bases = Vec::with_capacity(planes);
        let mut phases_rad = Vec::with_capacity(spec.satellite_count());
        for p in 0..planes {
            let raan_deg = p as f64 * spec.raan_spread_deg / planes as f64;
            let (sin_o, cos_o) = raan_deg.to_radians().sin_cos();
            bases.push(PlaneBasis {
                node: Vec3::new(cos_o, sin_o, 0.0),
                normal_in_plane: Vec3::new(-sin_o * cos_i, cos_o * cos_i, sin_i),
            });
            for s in 0..per_plane {
                let phase_deg = s as f64 * (360.0 / per_plane as f64)
                    + (p * spec.phasing_offset) as f64 * (360.0 / (planes * per_plane) as f64);
                elements.push(OrbitalElements {
                    radius_km: r,
                    inclination_deg: spec.inclination_deg,
                    raan_deg,
                    initial_phase_deg: phase_deg,
                });
                phases_rad.push(phase_deg.to_radians());
            }
        }
        let mean_motion = spec.mean_motion();
        Ok(Constellation {
            spec,
            elements,
            bases,
            phases_rad,
            mean_motion,
        })
    }

    pub fn spec(&self) -> &ConstellationSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self, sat: SatelliteId) -> Result<OrbitalElements> {
        Ok(self.elements[self.index_of(sat)?])
    }

    pub fn index_of(&self, sat: SatelliteId) -> Result<usize> {
        if sat.plane_index >= self.spec.plane_count || sat.slot_index >= self.spec.sats_per_plane {
            return Err(Error::lookup(format!(
                "satellite (plane {}, slot {}) is not in a {}x{} constellation",
                sat.plane_index, sat.slot_index, self.spec.plane_count, self.spec.sats_per_plane
            )));
        }
        Ok(sat.flat_index(self.spec.sats_per_plane))
    }

    pub fn id_of(&self, index: usize) -> SatelliteId {
        SatelliteId::from_flat(index, self.spec.sats_per_plane)
    }

    pub fn iter_ids(&self) -> impl Iterator<Item = SatelliteId> + '_ {
        (0..self.len()).map(move |i| self.id_of(i))
    }

    pub fn plane_of(&self, index: usize) -> usize {
        index / self.spec.sats_per_plane
    }

    pub fn slot_of(&self, index: usize) -> usize {
        index % self.spec.sats_per_plane
    }

    pub fn mean_motion(&self) -> f64 {
        self.mean_motion
    }

    pub fn orbital_period_s(&self) -> f64 {
        TAU / self.mean_motion
    }

    /// Unit basis `(node, in-plane normal)` of a plane: position is
    /// `r (cos u * node + sin u * normal)`.
    pub(crate) fn plane_basis(&self, plane: usize) -> (Vec3, Vec3) {
        let b = self.bases[plane];
        (b.node, b.normal_in_plane)
    }

    pub(crate) fn initial_phase_rad(&self, index: usize) -> f64 {
        self.phases_rad[index]
    }

    #[inline]
    fn state_by_index(&self, index: usize, t: f64) -> StateVector {
        let basis = self.bases[index / self.spec.sats_per_plane];
        let u = self.phases_rad[index] + self.mean_motion * t;
        let (su, cu) = u.sin_cos();
        let r = self.spec.orbit_radius_km();
        let v = r * self.mean_motion;
        StateVector {
            time_s: t,
            position_km: (basis.node * cu + basis.normal_in_plane * su) * r,
            velocity_kms: (basis.node * -su + basis.normal_in_plane * cu) * v,
        }
    }

    pub fn state_at(&self, sat: SatelliteId, t: f64) -> Result<StateVector> {
        let index = self.index_of(sat)?;
        check_time(t)?;
        Ok(self.state_by_index(index, t))
    }

    pub fn state_at_index(&self, index: usize, t: f64) -> StateVector {
        self.state_by_index(index, t)
    }

    pub fn positions_at(&self, t: f64) -> Vec<Vec3> {
        (0..self.len())
            .map(|i| self.state_by_index(i, t).position_km)
            .collect()
    }

    pub fn states_at(&self, t: f64) -> Vec<StateVector> {
        (0..self.len()).map(|i| self.state_by_index(i, t)).collect()
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::domain(format!(
            "time must be finite and non-negative, got {t}"
        )));
    }
    Ok(())
}

/// Earth-fixed ground station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundStation {
    pub name: String,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    #[serde(default = "default_station_range")]
    pub range_km: f64,
}

pub const DEFAULT_STATION_RANGE_KM: f64 = 1000.0;

fn default_station_range() -> f64 {
    DEFAULT_STATION_RANGE_KM
}

impl GroundStation {
    pub fn new(name: impl Into<String>, latitude_deg: f64, longitude_deg: f64) -> Self {
        GroundStation {
            name: name.into(),
            latitude_deg,
            longitude_deg,
            range_km: DEFAULT_STATION_RANGE_KM,
        }
    }

    pub fn with_range(mut self, range_km: f64) -> Self {
        self.range_km = range_km;
        self
    }

    pub fn location(&self) -> LatLon {
        LatLon::new(self.latitude_deg, self.longitude_deg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.latitude_deg) {
            return Err(Error::config(format!(
                "station {:?}: latitude {} outside [-90, 90]",
                self.name, self.latitude_deg
            )));
        }
        if !(-180.0..=180.0).contains(&self.longitude_deg) {
            return Err(Error::config(format!(
                "station {:?}: longitude {} outside [-180, 180]",
                self.name, self.longitude_deg
            )));
        }
        if !(self.range_km.is_finite() && self.range_km > 0.0) {
            return Err(Error::config(format!(
                "station {:?}: range_km must be positive, got {}",
                self.name, self.range_km
            )));
        }
        Ok(())
    }
}

/// Rotating-Earth parameters used to place ground stations in the inertial frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EarthFrame {
    pub radius_km: f64,
    pub rotation_rate_rad_s: f64,
    /// Angle between the Earth-fixed prime meridian and inertial +x at t = 0.
    pub rotation_at_epoch_deg: f64,
}

impl Default for EarthFrame {
    fn default() -> Self {
        EarthFrame {
            radius_km: EARTH_RADIUS_KM,
            rotation_rate_rad_s: EARTH_ROTATION_RAD_S,
            rotation_at_epoch_deg: 0.0,
        }
    }
}

impl EarthFrame {
    pub fn with_radius(radius_km: f64) -> Self {
        EarthFrame {
            radius_km,
            ..EarthFrame::default()
        }
    }
}

/// Inertial position of a ground station at time `t`.
pub fn ground_station_position(gs: &GroundStation, t: f64, frame: &EarthFrame) -> Vec3 {
    let lon = gs.longitude_deg.to_radians()
        + frame.rotation_at_epoch_deg.to_radians()
        + frame.rotation_rate_rad_s * t;
    let (slat, clat) = gs.latitude_deg.to_radians().sin_cos();
    let (slon, clon) = lon.sin_cos();
    Vec3::new(clat * clon, clat * slon, slat) * frame.radius_km
}
