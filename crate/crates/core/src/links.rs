//! Link classification and per-slot connectivity graphs.
//!
//! Node indices in a [`GraphSnapshot`] put satellites first (flat index
//! `plane * sats_per_plane + slot`) followed by ground stations in the order
//! they were supplied.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    above_horizon, max_lisl_range_with_radius, segment_clearance_squared, PhysicalConstants, Vec3,
};
use crate::orbital::{
    format_id, ground_station_position, Constellation, ConstellationSpec, EarthFrame,
    GroundStation, SatelliteId, StateVector,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LinkType {
    IntraOP,
    AdjacentOP,
    NearbyOP,
    CrossingOP,
    GroundLink,
}

impl LinkType {
    pub const ALL: [LinkType; 5] = [
        LinkType::IntraOP,
        LinkType::AdjacentOP,
        LinkType::NearbyOP,
        LinkType::CrossingOP,
        LinkType::GroundLink,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LinkType::IntraOP => "IntraOP",
            LinkType::AdjacentOP => "AdjacentOP",
            LinkType::NearbyOP => "NearbyOP",
            LinkType::CrossingOP => "CrossingOP",
            LinkType::GroundLink => "GroundLink",
        }
    }
}

impl fmt::Display for LinkType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Permanence {
    Permanent,
    Temporary,
}

impl Permanence {
    pub fn as_str(self) -> &'static str {
        match self {
            Permanence::Permanent => "Permanent",
            Permanence::Temporary => "Temporary",
        }
    }
}

impl fmt::Display for Permanence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Link policy: permanent links only, or permanent plus temporary links.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mode {
    NG,
    NNG,
}

impl Mode {
    pub const BOTH: [Mode; 2] = [Mode::NG, Mode::NNG];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::NG => "NG",
            Mode::NNG => "NNG",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NG" => Ok(Mode::NG),
            "NNG" => Ok(Mode::NNG),
            _ => Err(Error::config(format!(
                "unknown mode {s:?}, expected NG or NNG"
            ))),
        }
    }
}

/// An undirected link between two snapshot nodes, `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub a: usize,
    pub b: usize,
    pub length_km: f64,
    pub propagation_delay_ms: f64,
    pub link_type: LinkType,
    pub permanence: Permanence,
}

impl Link {
    pub fn is_ground(&self) -> bool {
        self.link_type == LinkType::GroundLink
    }
}

/// Worst-case separation of every satellite pair over an orbit.
///
/// Two satellites on circular orbits of equal radius and period satisfy
/// `cos(angle) = c0 + c1 cos(2nt) + c2 sin(2nt)`, so the largest separation
/// is reached at `cos(angle) = c0 - hypot(c1, c2)`. The result depends only
/// on the two planes and the in-plane slot difference, so the table holds
/// `planes * planes * sats_per_plane` entries.
#[derive(Debug, Clone)]
pub struct PermanenceTable {
    plane_count: usize,
    sats_per_plane: usize,
    max_separation_km: Vec<f64>,
    visibility_limit_km: f64,
}

impl PermanenceTable {
    pub fn new(constellation: &Constellation, constants: &PhysicalConstants) -> Self {
        let spec = constellation.spec();
        let planes = spec.plane_count;
        let per_plane = spec.sats_per_plane;
        let r = spec.orbit_radius_km();
        let mut table = Vec::with_capacity(planes * planes * per_plane);
        for pa in 0..planes {
            let (n_a, m_a) = constellation.plane_basis(pa);
            let alpha = constellation.initial_phase_rad(pa * per_plane);
            for pb in 0..planes {
                let (n_b, m_b) = constellation.plane_basis(pb);
                let e11 = n_a.dot(n_b);
                let e22 = m_a.dot(m_b);
                let e12 = n_a.dot(m_b);
                let e21 = m_a.dot(n_b);
                for ds in 0..per_plane {
                    let beta = constellation.initial_phase_rad(pb * per_plane + ds);
                    let delta = alpha - beta;
                    let (sd, cd) = delta.sin_cos();
                    let c0 = 0.5 * ((e11 + e22) * cd + (e21 - e12) * sd);
                    let amp = 0.5 * (e11 - e22).hypot(e12 + e21);
                    let min_cos = (c0 - amp).clamp(-1.0, 1.0);
                    table.push(r * (2.0 * (1.0 - min_cos)).max(0.0).sqrt());
                }
            }
        }
        PermanenceTable {
            plane_count: planes,
            sats_per_plane: per_plane,
            max_separation_km: table,
            visibility_limit_km: max_lisl_range_with_radius(
                spec.earth_radius_km,
                spec.altitude_km,
                constants.occlusion_clearance_km,
            ),
        }
    }

    #[inline]
    fn key(&self, a: usize, b: usize) -> usize {
        let (pa, sa) = (a / self.sats_per_plane, a % self.sats_per_plane);
        let (pb, sb) = (b / self.sats_per_plane, b % self.sats_per_plane);
        let ds = (sb + self.sats_per_plane - sa) % self.sats_per_plane;
        (pa * self.plane_count + pb) * self.sats_per_plane + ds
    }

    /// Largest distance between satellites `a` and `b` (flat indices) over one orbit.
    #[inline]
    pub fn max_separation_km(&self, a: usize, b: usize) -> f64 {
        self.max_separation_km[self.key(a, b)]
    }

    /// Longest chord that clears the occlusion sphere at this shell's radius.
    pub fn visibility_limit_km(&self) -> f64 {
        self.visibility_limit_km
    }

    /// Whether the pair stays within `lisl_range_km` (and in sight) for the whole orbit.
    #[inline]
    pub fn is_permanent_index(&self, a: usize, b: usize, lisl_range_km: f64) -> bool {
        if a == b {
            return false;
        }
        let worst = self.max_separation_km(a, b);
        worst <= lisl_range_km && worst <= self.visibility_limit_km
    }

    pub fn permanent_neighbours(&self, a: usize, lisl_range_km: f64) -> usize {
        let n = self.plane_count * self.sats_per_plane;
        (0..n)
            .filter(|&b| self.is_permanent_index(a, b, lisl_range_km))
            .count()
    }
}

/// Everything needed to draw the network graph at any instant.
#[derive(Debug, Clone)]
pub struct NetworkModel {
    constellation: Constellation,
    constants: PhysicalConstants,
    earth: EarthFrame,
    permanence: PermanenceTable,
    ground_link_cap: bool,
}

impl NetworkModel {
    pub fn new(
        spec: ConstellationSpec,
        constants: PhysicalConstants,
        earth: EarthFrame,
    ) -> Result<Self> {
        constants.validate()?;
        if (constants.earth_radius_km - spec.earth_radius_km).abs() > 1e-9 {
            return Err(Error::config(format!(
                "constants.earth_radius_km ({}) disagrees with constellation.earth_radius_km ({})",
                constants.earth_radius_km, spec.earth_radius_km
            )));
        }
        let constellation = Constellation::new(spec)?;
        let permanence = PermanenceTable::new(&constellation, &constants);
        Ok(NetworkModel {
            constellation,
            constants,
            earth,
            permanence,
            ground_link_cap: true,
        })
    }

    /// When enabled (the default) a ground-to-satellite link also has to fit
    /// within the LISL range in effect, so the terminal range is
    /// `min(station.range_km, lisl_range_km)`.
    pub fn with_ground_link_cap(mut self, enabled: bool) -> Self {
        self.ground_link_cap = enabled;
        self
    }

    pub fn ground_link_cap(&self) -> bool {
        self.ground_link_cap
    }

    /// Reference shell with default constants and a zero-angle Earth at epoch.
    pub fn reference() -> Self {
        let spec = ConstellationSpec::default();
        let earth = EarthFrame::with_radius(spec.earth_radius_km);
        NetworkModel::new(spec, PhysicalConstants::default(), earth)
            .expect("default model is valid")
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    pub fn earth(&self) -> &EarthFrame {
        &self.earth
    }

    pub fn permanence(&self) -> &PermanenceTable {
        &self.permanence
    }

    pub fn is_permanent(&self, a: SatelliteId, b: SatelliteId, lisl_range_km: f64) -> Result<bool> {
        let ia = self.constellation.index_of(a)?;
        let ib = self.constellation.index_of(b)?;
        Ok(self.permanence.is_permanent_index(ia, ib, lisl_range_km))
    }

    pub fn link_type_at(&self, a: SatelliteId, b: SatelliteId, t: f64) -> Result<LinkType> {
        let sa = self.constellation.state_at(a, t)?;
        let sb = self.constellation.state_at(b, t)?;
        Ok(self.classify(a.plane_index, b.plane_index, &sa, &sb))
    }

    #[inline]
    fn classify(
        &self,
        plane_a: usize,
        plane_b: usize,
        sa: &StateVector,
        sb: &StateVector,
    ) -> LinkType {
        if plane_a == plane_b {
            return LinkType::IntraOP;
        }
        let planes = self.constellation.spec().plane_count;
        let diff = plane_a.abs_diff(plane_b);
        let offset = diff.min(planes - diff);
        if sa.velocity_kms.dot(sb.velocity_kms) <= 0.0 {
            LinkType::CrossingOP
        } else if offset == 1 {
            LinkType::AdjacentOP
        } else {
            LinkType::NearbyOP
        }
    }

    /// Connectivity graph at time `t`.
    pub fn snapshot(
        &self,
        t: f64,
        lisl_range_km: f64,
        mode: Mode,
        stations: &[GroundStation],
    ) -> GraphSnapshot {
        let states = self.constellation.states_at(t);
        let mut links = self.satellite_links(&states, lisl_range_km, mode);
        self.append_ground_links(&states, t, lisl_range_km, stations, &mut links);
        GraphSnapshot {
            time_s: t,
            lisl_range_km,
            mode,
            satellite_count: states.len(),
            sats_per_plane: self.constellation.spec().sats_per_plane,
            station_names: stations.iter().map(|s| s.name.clone()).collect(),
            links,
        }
    }

    fn satellite_links(&self, states: &[StateVector], range: f64, mode: Mode) -> Vec<Link> {
        let mut links = Vec::new();
        if range.is_nan() || range <= 0.0 {
            return links;
        }
        let n = states.len();
        let per_plane = self.constellation.spec().sats_per_plane;
        let occ2 = self.constants.occlusion_radius_km().powi(2);
        let range2 = range * range;
        // Same-shell pairs closer than the visibility chord always clear the
        // occlusion sphere; only pairs near or beyond it need the segment test.
        let los_safe = (self.permanence.visibility_limit_km() - 1.0).max(0.0);
        let los_safe2 = los_safe * los_safe;
        // Loose bound for the vectorised prefilter; hits are re-checked exactly.
        let prefilter = range2 * (1.0 + 1e-9) + 1e-6;

        let xs: Vec<f64> = states.iter().map(|s| s.position_km.x).collect();
        let ys: Vec<f64> = states.iter().map(|s| s.position_km.y).collect();
        let zs: Vec<f64> = states.iter().map(|s| s.position_km.z).collect();
        let norms: Vec<f64> = states
            .iter()
            .map(|s| s.position_km.norm_squared())
            .collect();
        let mut approx = vec![0.0; n];

        for i in 0..n {
            let (xi, yi, zi, ni) = (xs[i], ys[i], zs[i], norms[i]);
            let tail = i + 1..n;
            for (((d, &x), &y), (&z, &nj)) in approx[tail.clone()]
                .iter_mut()
                .zip(&xs[tail.clone()])
                .zip(&ys[tail.clone()])
                .zip(zs[tail.clone()].iter().zip(&norms[tail.clone()]))
            {
                *d = ni + nj - 2.0 * (xi * x + yi * y + zi * z);
            }
            let pi = states[i].position_km;
            let plane_i = i / per_plane;
            for j in tail {
                if approx[j] > prefilter {
                    continue;
                }
                let pj = states[j].position_km;
                let d2 = (pi - pj).norm_squared();
                if d2 > range2 || (d2 > los_safe2 && segment_clearance_squared(pi, pj) < occ2) {
                    continue;
                }
                let permanent = self.permanence.is_permanent_index(i, j, range);
                if mode == Mode::NG && !permanent {
                    continue;
                }
                let length = d2.sqrt();
                links.push(Link {
                    a: i,
                    b: j,
                    length_km: length,
                    propagation_delay_ms: self.constants.propagation_delay_ms(length),
                    link_type: self.classify(plane_i, j / per_plane, &states[i], &states[j]),
                    permanence: if permanent {
                        Permanence::Permanent
                    } else {
                        Permanence::Temporary
                    },
                });
            }
        }
        links
    }

    fn append_ground_links(
        &self,
        states: &[StateVector],
        t: f64,
        lisl_range: f64,
        stations: &[GroundStation],
        links: &mut Vec<Link>,
    ) {
        let n = states.len();
        for (g, gs) in stations.iter().enumerate() {
            let site = ground_station_position(gs, t, &self.earth);
            let reach = if self.ground_link_cap {
                gs.range_km.min(lisl_range)
            } else {
                gs.range_km
            };
            let range2 = reach * reach;
            for (i, s) in states.iter().enumerate() {
                let p = s.position_km;
                let d2 = (p - site).norm_squared();
                if d2 <= range2 && above_horizon(site, p) {
                    let length = d2.sqrt();
                    links.push(Link {
                        a: i,
                        b: n + g,
                        length_km: length,
                        propagation_delay_ms: self.constants.propagation_delay_ms(length),
                        link_type: LinkType::GroundLink,
                        permanence: Permanence::Temporary,
                    });
                }
            }
        }
    }

    pub fn satellite_position(&self, sat: SatelliteId, t: f64) -> Result<Vec3> {
        Ok(self.constellation.state_at(sat, t)?.position_km)
    }
}

/// The network graph at one time slot. Immutable once built.
#[derive(Debug, Clone, Serialize)]
pub struct GraphSnapshot {
    pub time_s: f64,
    pub lisl_range_km: f64,
    pub mode: Mode,
    pub satellite_count: usize,
    pub sats_per_plane: usize,
    pub station_names: Vec<String>,
    pub links: Vec<Link>,
}

impl GraphSnapshot {
    pub fn node_count(&self) -> usize {
        self.satellite_count + self.station_names.len()
    }

    #[inline]
    pub fn is_satellite(&self, node: usize) -> bool {
        node < self.satellite_count
    }

    pub fn station_node(&self, name: &str) -> Result<usize> {
        self.station_names
            .iter()
            .position(|n| n == name)
            .map(|g| self.satellite_count + g)
            .ok_or_else(|| Error::lookup(format!("ground station {name:?} is not in the snapshot")))
    }

    pub fn satellite_node(&self, sat: SatelliteId) -> Result<usize> {
        let node = sat.flat_index(self.sats_per_plane);
        if sat.slot_index >= self.sats_per_plane || node >= self.satellite_count {
            return Err(Error::lookup(format!(
                "satellite {sat} is not in the snapshot"
            )));
        }
        Ok(node)
    }

    /// Printable name of a node: satellite label or station name.
    pub fn node_label(&self, node: usize) -> String {
        if self.is_satellite(node) {
            let id = SatelliteId::from_flat(node, self.sats_per_plane);
            format_id(id).unwrap_or_else(|_| id.to_string())
        } else {
            self.station_names[node - self.satellite_count].clone()
        }
    }

    /// Same instant restricted to permanent links; ground links are kept.
    pub fn permanent_only(&self) -> GraphSnapshot {
        GraphSnapshot {
            mode: Mode::NG,
            links: self
                .links
                .iter()
                .filter(|l| l.is_ground() || l.permanence == Permanence::Permanent)
                .copied()
                .collect(),
            time_s: self.time_s,
            lisl_range_km: self.lisl_range_km,
            satellite_count: self.satellite_count,
            sats_per_plane: self.sats_per_plane,
            station_names: self.station_names.clone(),
        }
    }

    /// Satellite-to-satellite degree of every satellite.
    pub fn satellite_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.satellite_count];
        for l in self.links.iter().filter(|l| !l.is_ground()) {
            deg[l.a] += 1;
            deg[l.b] += 1;
        }
        deg
    }

    pub fn contains_link(&self, a: usize, b: usize) -> bool {
        let key = if a < b { (a, b) } else { (b, a) };
        self.links.iter().any(|l| (l.a, l.b) == key)
    }
}

/// Link counts of one snapshot, split by type and permanence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkCensus {
    pub time_s: f64,
    pub lisl_range_km: f64,
    pub mode: Mode,
    pub counts: BTreeMap<(LinkType, Permanence), usize>,
    pub satellite_links: usize,
    pub ground_links: usize,
}

impl LinkCensus {
    pub fn count(&self, link_type: LinkType, permanence: Permanence) -> usize {
        self.counts
            .get(&(link_type, permanence))
            .copied()
            .unwrap_or(0)
    }

    pub fn undirected_total(&self) -> usize {
        self.satellite_links + self.ground_links
    }

    /// Every link counted once from each end.
    pub fn directed_total(&self) -> usize {
        2 * self.undirected_total()
    }

    pub fn directed_satellite_links(&self) -> usize {
        2 * self.satellite_links
    }
}

pub fn link_census(snapshot: &GraphSnapshot) -> LinkCensus {
    let mut counts = BTreeMap::new();
    for t in LinkType::ALL {
        for p in [Permanence::Permanent, Permanence::Temporary] {
            counts.insert((t, p), 0);
        }
    }
    let mut ground = 0;
    for l in &snapshot.links {
        *counts.entry((l.link_type, l.permanence)).or_insert(0) += 1;
        if l.is_ground() {
            ground += 1;
        }
    }
    LinkCensus {
        time_s: snapshot.time_s,
        lisl_range_km: snapshot.lisl_range_km,
        mode: snapshot.mode,
        counts,
        satellite_links: snapshot.links.len() - ground,
        ground_links: ground,
    }
}

/// Satellite-to-satellite degree of `sat` in `snapshot`.
pub fn degree(snapshot: &GraphSnapshot, sat: SatelliteId) -> Result<usize> {
    let node = snapshot.satellite_node(sat)?;
    Ok(snapshot
        .links
        .iter()
        .filter(|l| !l.is_ground() && (l.a == node || l.b == node))
        .count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::distance;

    const RANGES: [f64; 7] = [659.5, 1319.0, 1500.0, 1700.0, 2500.0, 3500.0, 5016.0];

    fn model() -> NetworkModel {
        NetworkModel::reference()
    }

    fn sampled_max(model: &NetworkModel, a: usize, b: usize, step: f64) -> f64 {
        let c = model.constellation();
        let period = c.orbital_period_s();
        let mut worst: f64 = 0.0;
        let mut t = 0.0;
        while t <= period {
            let d = distance(
                c.state_at_index(a, t).position_km,
                c.state_at_index(b, t).position_km,
            );
            worst = worst.max(d);
            t += step;
        }
        worst
    }

    #[test]
    fn analytic_separation_matches_sampling() {
        let m = model();
        let pairs = [
            (0, 1),
            (0, 3),
            (0, 66),
            (0, 131),
            (0, 12 * 66),
            (100, 900),
            (1583, 5),
            (400, 401),
        ];
        for (a, b) in pairs {
            let analytic = m.permanence().max_separation_km(a, b);
            let sampled = sampled_max(&m, a, b, 1.0);
            assert!(
                sampled <= analytic + 1e-6,
                "{a}-{b}: sampled {sampled} > analytic {analytic}"
            );
            assert!(
                analytic - sampled < 0.05,
                "{a}-{b}: analytic {analytic} vs sampled {sampled}"
            );
            let reverse = m.permanence().max_separation_km(b, a);
            assert!((analytic - reverse).abs() < 1e-6);
        }
    }

    #[test]
    fn permanence_examples() {
        let m = model();
        let x = |p, s| SatelliteId::new(p, s);
        assert!(m.is_permanent(x(0, 0), x(0, 1), 659.5).unwrap());
        // Three slots apart: chord 2 * 6928 * sin(3 pi / 66) ~ 1972 km.
        let chord3 = 2.0 * 6928.0 * (3.0 * std::f64::consts::PI / 66.0).sin();
        assert!((chord3 - 1972.0).abs() < 1.0);
        assert!(!m.is_permanent(x(0, 0), x(0, 3), 1319.0).unwrap());
        assert!(!m.is_permanent(x(0, 0), x(12, 0), 1319.0).unwrap());
        assert!(m.is_permanent(x(0, 0), x(30, 0), 1319.0).is_err());
    }

    #[test]
    fn opposing_plane_pair_leaves_range() {
        let m = model();
        let b = 12 * 66;
        let c = m.constellation();
        let period = c.orbital_period_s();
        let mut worst: f64 = 0.0;
        for k in 0..=(period as usize) {
            let t = k as f64;
            worst = worst.max(distance(
                c.state_at_index(0, t).position_km,
                c.state_at_index(b, t).position_km,
            ));
        }
        assert!(worst > 1319.0);
    }

    #[test]
    fn link_type_examples() {
        let m = model();
        let x = |p, s| SatelliteId::new(p, s);
        assert_eq!(
            m.link_type_at(x(0, 0), x(0, 1), 0.0).unwrap(),
            LinkType::IntraOP
        );
        assert_eq!(
            m.link_type_at(x(0, 0), x(1, 64), 0.0).unwrap(),
            LinkType::AdjacentOP
        );
        // Same slot, opposite side of the RAAN circle at the node: velocities point apart.
        let sa = m.constellation().state_at(x(0, 0), 0.0).unwrap();
        let sb = m.constellation().state_at(x(12, 0), 0.0).unwrap();
        let ty = m.link_type_at(x(0, 0), x(12, 0), 0.0).unwrap();
        assert_eq!(
            sa.velocity_kms.dot(sb.velocity_kms) <= 0.0,
            ty == LinkType::CrossingOP
        );
    }

    #[test]
    fn crossing_for_antiparallel_velocities() {
        let m = model();
        let c = m.constellation();
        let sa = c.state_at_index(0, 0.0);
        let b = (66..c.len())
            .find(|&b| sa.velocity_kms.dot(c.state_at_index(b, 0.0).velocity_kms) < 0.0)
            .expect("some satellite moves against x10101");
        let ty = m
            .link_type_at(SatelliteId::new(0, 0), c.id_of(b), 0.0)
            .unwrap();
        assert_eq!(ty, LinkType::CrossingOP);
    }

    #[test]
    fn ng_degrees_are_uniform() {
        let m = model();
        for (range, expected) in [(659.5, 2), (1319.0, 4)] {
            let snap = m.snapshot(0.0, range, Mode::NG, &[]);
            assert!(
                snap.satellite_degrees().iter().all(|&d| d == expected),
                "range {range}"
            );
        }
        let snap = m.snapshot(0.0, 1700.0, Mode::NG, &[]);
        assert_eq!(degree(&snap, SatelliteId::new(0, 0)).unwrap(), 10);
        assert!(degree(&snap, SatelliteId::new(40, 0)).is_err());
    }

    #[test]
    fn ng_is_subset_of_nng_and_monotone_in_range() {
        let m = model();
        for t in [0.0, 777.0] {
            type Keys = Vec<(usize, usize)>;
            let mut previous: Option<(Keys, Keys)> = None;
            for range in RANGES {
                let ng = m.snapshot(t, range, Mode::NG, &[]);
                let nng = m.snapshot(t, range, Mode::NNG, &[]);
                let ng_keys: Vec<_> = ng.links.iter().map(|l| (l.a, l.b)).collect();
                let nng_keys: Vec<_> = nng.links.iter().map(|l| (l.a, l.b)).collect();
                let nng_set: std::collections::HashSet<_> = nng_keys.iter().copied().collect();
                assert!(ng_keys.iter().all(|k| nng_set.contains(k)));
                assert_eq!(nng.permanent_only().links, ng.links);
                if let Some((prev_ng, prev_nng)) = &previous {
                    let ng_set: std::collections::HashSet<_> = ng_keys.iter().copied().collect();
                    assert!(prev_ng.iter().all(|k| ng_set.contains(k)));
                    assert!(prev_nng.iter().all(|k| nng_set.contains(k)));
                }
                previous = Some((ng_keys, nng_keys));
            }
        }
    }

    #[test]
    fn snapshot_is_simple_graph_with_consistent_delays() {
        let m = model();
        let stations = [GroundStation::new("A", -33.8614, 151.2099)];
        let snap = m.snapshot(42.0, 2500.0, Mode::NNG, &stations);
        let mut keys: Vec<_> = snap.links.iter().map(|l| (l.a, l.b)).collect();
        let n = keys.len();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), n);
        for l in &snap.links {
            assert!(l.a < l.b);
            let expected = l.length_km * 1e6 / 299_792_458.0;
            assert!((l.propagation_delay_ms - expected).abs() <= 1e-9 * expected);
            if l.is_ground() {
                assert!(l.length_km <= 1000.0);
                assert_eq!(l.permanence, Permanence::Temporary);
            } else {
                assert!(l.length_km <= 2500.0);
            }
        }
        assert!(snap.links.iter().any(|l| l.is_ground()));
    }

    #[test]
    fn ground_links_capped_by_lisl_range() {
        let stations = [GroundStation::new("A", -33.8614, 151.2099)];
        let capped = model();
        let uncapped = model().with_ground_link_cap(false);
        let mut saw_difference = false;
        for t in [0.0, 300.0, 600.0, 900.0] {
            let a = capped.snapshot(t, 659.5, Mode::NNG, &stations);
            let b = uncapped.snapshot(t, 659.5, Mode::NNG, &stations);
            let ga: Vec<_> = a.links.iter().filter(|l| l.is_ground()).collect();
            let gb: Vec<_> = b.links.iter().filter(|l| l.is_ground()).collect();
            assert!(ga.iter().all(|l| l.length_km <= 659.5));
            assert!(gb.iter().all(|l| l.length_km <= 1000.0));
            assert!(ga.iter().all(|l| gb.contains(l)));
            saw_difference |= ga.len() < gb.len();
            // Above the station range the cap has no effect.
            let c = capped.snapshot(t, 1700.0, Mode::NNG, &stations);
            let d = uncapped.snapshot(t, 1700.0, Mode::NNG, &stations);
            assert_eq!(c.links, d.links);
        }
        assert!(saw_difference);
    }

    #[test]
    fn no_stations_no_ground_links() {
        let m = model();
        let snap = m.snapshot(0.0, 1700.0, Mode::NNG, &[]);
        assert_eq!(link_census(&snap).ground_links, 0);
    }

    #[test]
    fn census_examples() {
        let m = model();
        let snap = m.snapshot(0.0, 659.5, Mode::NG, &[]);
        let census = link_census(&snap);
        assert_eq!(census.satellite_links, 1584);
        assert_eq!(census.count(LinkType::IntraOP, Permanence::Permanent), 1584);
        assert_eq!(census.directed_satellite_links(), 3168);
        let total: usize = census.counts.values().sum();
        assert_eq!(total, census.undirected_total());

        let zero = m.snapshot(0.0, 0.0, Mode::NNG, &[]);
        assert_eq!(link_census(&zero).undirected_total(), 0);
    }

    #[test]
    fn all_link_types_present_in_dense_snapshot() {
        let m = model();
        let snap = m.snapshot(0.0, 1319.0, Mode::NNG, &[]);
        let census = link_census(&snap);
        for ty in [
            LinkType::IntraOP,
            LinkType::AdjacentOP,
            LinkType::NearbyOP,
            LinkType::CrossingOP,
        ] {
            let n =
                census.count(ty, Permanence::Permanent) + census.count(ty, Permanence::Temporary);
            assert!(n > 0, "{ty} missing");
        }
    }

    #[test]
    fn permanence_soundness_against_fine_resampling() {
        use rand::{Rng, SeedableRng};
        let m = model();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let snap = m.snapshot(0.0, 1700.0, Mode::NNG, &[]);
        let mut checked = 0;
        while checked < 50 {
            let l = snap.links[rng.gen_range(0..snap.links.len())];
            let fine = sampled_max(&m, l.a, l.b, 0.1);
            match l.permanence {
                Permanence::Permanent => assert!(fine <= 1700.0, "{}-{} reaches {fine}", l.a, l.b),
                Permanence::Temporary => assert!(fine > 1700.0, "{}-{} peaks at {fine}", l.a, l.b),
            }
            checked += 1;
        }
    }
}
