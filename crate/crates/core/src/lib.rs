//! Connectivity and latency simulation for laser-linked LEO satellite networks.
//!
//! The crate lays out a Walker-delta shell, classifies every satellite pair
//! as a permanent or temporary laser link at a given range, builds one
//! connectivity graph per time slot and routes inter-continental traffic
//! over it with Dijkstra.

pub mod config;
pub mod error;
pub mod geometry;
pub mod links;
pub mod orbital;
pub mod report;
pub mod routing;
pub mod scenario;
pub mod validation;

pub use error::{Error, Result};
pub use geometry::{LatLon, PhysicalConstants, Vec3};
pub use links::{
    link_census, GraphSnapshot, Link, LinkCensus, LinkType, Mode, NetworkModel, Permanence,
};
pub use orbital::{
    Constellation, ConstellationSpec, EarthFrame, GroundStation, SatelliteId, StateVector,
};
pub use routing::{shortest_path, PathResult};
