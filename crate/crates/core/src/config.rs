//! Run configuration: a TOML file where every key is optional.
//!
//! ```toml
//! output_dir = "results"
//! parallelism = 0            # worker threads, 0 = all cores
//!
//! [constellation]            # 24 planes x 66 sats, 550 km, 53 deg, F = 15
//! phasing_offset = 15
//!
//! [constants]
//! speed_of_light_mps = 299792458.0
//! occlusion_clearance_km = 80.0
//! node_delay_ms = 10.0
//!
//! [links]
//! ground_link_cap = true     # ground links limited to min(station range, LISL range)
//!
//! [epoch]
//! start_time_s = 0.0
//! earth_rotation_deg = 0.0
//!
//! [[stations]]               # defaults to the bundled exchange list
//! name = "Sydney"
//! latitude_deg = -33.8614
//! longitude_deg = 151.2099
//! range_km = 1000.0
//!
//! [[scenarios]]              # defaults to the four inter-continental pairs
//! src = "Sydney"
//! dst = "SaoPaulo"
//! ranges_km = [659.5, 1319, 1500, 1700, 2500, 3500, 5016]
//! modes = ["NG", "NNG"]
//! slot_count = 3600
//! slot_duration_s = 1.0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    PhysicalConstants, NODE_DELAY_MS, OCCLUSION_CLEARANCE_KM, SPEED_OF_LIGHT_MPS,
};
use crate::links::{Mode, NetworkModel};
use crate::orbital::{ConstellationSpec, EarthFrame, GroundStation, EARTH_ROTATION_RAD_S};
use crate::scenario::{ScenarioConfig, StationPair, DEFAULT_SLOT_COUNT, DEFAULT_SLOT_DURATION_S};
use crate::validation::REFERENCE_RANGES_KM;

const BUNDLED_STATIONS: &str = include_str!("../stations.toml");

/// Ranges used for the multi-city comparison.
pub const INTERCONTINENTAL_RANGES_KM: [f64; 2] = [1700.0, 5016.0];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StationFile {
    stations: Vec<GroundStation>,
}

pub fn bundled_stations() -> Result<Vec<GroundStation>> {
    let file: StationFile = toml::from_str(BUNDLED_STATIONS)
        .map_err(|e| Error::config(format!("bundled station list: {e}")))?;
    Ok(file.stations)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    output_dir: Option<PathBuf>,
    parallelism: Option<usize>,
    constellation: Option<ConstellationSpec>,
    constants: Option<RawConstants>,
    links: Option<RawLinks>,
    epoch: Option<RawEpoch>,
    stations: Option<Vec<GroundStation>>,
    scenarios: Option<Vec<RawScenario>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstants {
    speed_of_light_mps: Option<f64>,
    occlusion_clearance_km: Option<f64>,
    node_delay_ms: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLinks {
    ground_link_cap: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEpoch {
    start_time_s: Option<f64>,
    earth_rotation_deg: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    src: String,
    dst: String,
    ranges_km: Option<Vec<f64>>,
    modes: Option<Vec<String>>,
    slot_count: Option<usize>,
    slot_duration_s: Option<f64>,
}

/// One configured connection with the ranges and modes to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub src: String,
    pub dst: String,
    pub ranges_km: Vec<f64>,
    pub modes: Vec<Mode>,
    pub slot_count: usize,
    pub slot_duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Epoch {
    pub start_time_s: f64,
    pub earth_rotation_deg: f64,
}

/// Fully validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub constellation: ConstellationSpec,
    pub constants: PhysicalConstants,
    /// Limit ground-to-satellite links to the LISL range as well as the
    /// station's own range.
    pub ground_link_cap: bool,
    pub epoch: Epoch,
    pub stations: Vec<GroundStation>,
    pub scenarios: Vec<ScenarioSpec>,
    pub output_dir: PathBuf,
    /// Worker threads; 0 means one per available core.
    pub parallelism: usize,
}

fn default_scenarios() -> Vec<ScenarioSpec> {
    let mut out = vec![ScenarioSpec {
        name: "Sydney-SaoPaulo".into(),
        src: "Sydney".into(),
        dst: "SaoPaulo".into(),
        ranges_km: REFERENCE_RANGES_KM.to_vec(),
        modes: Mode::BOTH.to_vec(),
        slot_count: DEFAULT_SLOT_COUNT,
        slot_duration_s: DEFAULT_SLOT_DURATION_S,
    }];
    for (src, dst) in [
        ("Toronto", "Istanbul"),
        ("Madrid", "Tokyo"),
        ("NewYork", "Jakarta"),
    ] {
        out.push(ScenarioSpec {
            name: format!("{src}-{dst}"),
            src: src.into(),
            dst: dst.into(),
            ranges_km: INTERCONTINENTAL_RANGES_KM.to_vec(),
            modes: Mode::BOTH.to_vec(),
            slot_count: DEFAULT_SLOT_COUNT,
            slot_duration_s: DEFAULT_SLOT_DURATION_S,
        });
    }
    out
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_raw(RawConfig::default()).expect("defaults are valid")
    }
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| Error::config(e.to_string().trim_end().to_string()))?;
    RunConfig::from_raw(raw)
}

fn positive(key: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::config(format!(
            "{key} must be positive, got {value}"
        )))
    }
}

impl RunConfig {
    fn from_raw(raw: RawConfig) -> Result<Self> {
        let constellation = raw.constellation.unwrap_or_default();
        constellation.validate()?;

        let rc = raw.constants.unwrap_or_default();
        let constants = PhysicalConstants {
            speed_of_light_mps: positive(
                "constants.speed_of_light_mps",
                rc.speed_of_light_mps.unwrap_or(SPEED_OF_LIGHT_MPS),
            )?,
            earth_radius_km: constellation.earth_radius_km,
            occlusion_clearance_km: positive(
                "constants.occlusion_clearance_km",
                rc.occlusion_clearance_km.unwrap_or(OCCLUSION_CLEARANCE_KM),
            )?,
            node_delay_ms: positive(
                "constants.node_delay_ms",
                rc.node_delay_ms.unwrap_or(NODE_DELAY_MS),
            )?,
        };

        let re = raw.epoch.unwrap_or_default();
        let epoch = Epoch {
            start_time_s: re.start_time_s.unwrap_or(0.0),
            earth_rotation_deg: re.earth_rotation_deg.unwrap_or(0.0),
        };
        if !(epoch.start_time_s.is_finite() && epoch.start_time_s >= 0.0) {
            return Err(Error::config(format!(
                "epoch.start_time_s must be non-negative, got {}",
                epoch.start_time_s
            )));
        }
        if !epoch.earth_rotation_deg.is_finite() {
            return Err(Error::config("epoch.earth_rotation_deg must be finite"));
        }

        let stations = match raw.stations {
            Some(s) => s,
            None => bundled_stations()?,
        };
        for (i, s) in stations.iter().enumerate() {
            s.validate().map_err(|e| match e {
                Error::Config(msg) => Error::Config(format!("stations[{i}]: {msg}")),
                other => other,
            })?;
            if stations[..i].iter().any(|o| o.name == s.name) {
                return Err(Error::config(format!(
                    "stations[{i}]: duplicate station name {:?}",
                    s.name
                )));
            }
        }

        let scenarios = match raw.scenarios {
            None => default_scenarios(),
            Some(list) => list
                .into_iter()
                .enumerate()
                .map(|(i, s)| Self::scenario_from_raw(i, s))
                .collect::<Result<_>>()?,
        };
        for (i, s) in scenarios.iter().enumerate() {
            for (role, name) in [("src", &s.src), ("dst", &s.dst)] {
                if !stations.iter().any(|st| &st.name == name) {
                    return Err(Error::config(format!(
                        "scenarios[{i}].{role}: unknown station {name:?}"
                    )));
                }
            }
            if s.src == s.dst {
                return Err(Error::config(format!(
                    "scenarios[{i}]: src and dst are both {:?}",
                    s.src
                )));
            }
        }

        Ok(RunConfig {
            constellation,
            constants,
            ground_link_cap: raw.links.and_then(|l| l.ground_link_cap).unwrap_or(true),
            epoch,
            stations,
            scenarios,
            output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("results")),
            parallelism: raw.parallelism.unwrap_or(0),
        })
    }

    fn scenario_from_raw(i: usize, s: RawScenario) -> Result<ScenarioSpec> {
        let ranges_km = s.ranges_km.unwrap_or_else(|| REFERENCE_RANGES_KM.to_vec());
        if ranges_km.is_empty() {
            return Err(Error::config(format!(
                "scenarios[{i}].ranges_km must not be empty"
            )));
        }
        for (j, &r) in ranges_km.iter().enumerate() {
            positive(&format!("scenarios[{i}].ranges_km[{j}]"), r)?;
        }
        let modes = match s.modes {
            None => Mode::BOTH.to_vec(),
            Some(m) if m.is_empty() => {
                return Err(Error::config(format!(
                    "scenarios[{i}].modes must not be empty"
                )))
            }
            Some(m) => {
                let mut parsed = Vec::with_capacity(m.len());
                for (j, name) in m.iter().enumerate() {
                    let mode: Mode = name.parse().map_err(|_| {
                        Error::config(format!("scenarios[{i}].modes[{j}]: unknown mode {name:?}"))
                    })?;
                    if !parsed.contains(&mode) {
                        parsed.push(mode);
                    }
                }
                parsed.sort();
                parsed
            }
        };
        let slot_count = s.slot_count.unwrap_or(DEFAULT_SLOT_COUNT);
        if slot_count == 0 {
            return Err(Error::config(format!(
                "scenarios[{i}].slot_count must be at least 1"
            )));
        }
        let slot_duration_s = positive(
            &format!("scenarios[{i}].slot_duration_s"),
            s.slot_duration_s.unwrap_or(DEFAULT_SLOT_DURATION_S),
        )?;
        Ok(ScenarioSpec {
            name: s.name.unwrap_or_else(|| format!("{}-{}", s.src, s.dst)),
            src: s.src,
            dst: s.dst,
            ranges_km,
            modes,
            slot_count,
            slot_duration_s,
        })
    }

    pub fn earth_frame(&self) -> EarthFrame {
        EarthFrame {
            radius_km: self.constellation.earth_radius_km,
            rotation_rate_rad_s: EARTH_ROTATION_RAD_S,
            rotation_at_epoch_deg: self.epoch.earth_rotation_deg,
        }
    }

    pub fn network_model(&self) -> Result<NetworkModel> {
        Ok(NetworkModel::new(
            self.constellation.clone(),
            self.constants,
            self.earth_frame(),
        )?
        .with_ground_link_cap(self.ground_link_cap))
    }

    pub fn station(&self, name: &str) -> Result<&GroundStation> {
        self.stations
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::lookup(format!("unknown station {name:?}")))
    }

    pub fn scenario(&self, name: &str) -> Result<&ScenarioSpec> {
        self.scenarios
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::lookup(format!("unknown scenario {name:?}")))
    }

    pub fn station_pair(&self, scenario: &ScenarioSpec) -> Result<StationPair> {
        Ok(StationPair {
            name: scenario.name.clone(),
            src: self.station(&scenario.src)?.clone(),
            dst: self.station(&scenario.dst)?.clone(),
        })
    }

    /// Concrete single-range scenario.
    pub fn scenario_config(
        &self,
        scenario: &ScenarioSpec,
        range_km: f64,
        mode: Mode,
    ) -> Result<ScenarioConfig> {
        let pair = self.station_pair(scenario)?;
        Ok(ScenarioConfig {
            name: scenario.name.clone(),
            src: pair.src,
            dst: pair.dst,
            lisl_range_km: range_km,
            mode,
            slot_duration_s: scenario.slot_duration_s,
            slot_count: scenario.slot_count,
            node_delay_ms: self.constants.node_delay_ms,
            start_time_s: self.epoch.start_time_s,
        })
    }
}
