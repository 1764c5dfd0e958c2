//! CSV and JSON writers. Floats are printed with a fixed number of decimals
//! so repeated runs produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::links::{LinkCensus, LinkType, Permanence};
use crate::scenario::{Comparison, MetricsSummary, SlotRecord};
use crate::validation::ConnectivityRow;

fn fixed(v: f64) -> String {
    format!("{v:.6}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fixed).unwrap_or_default()
}

fn create(path: &Path) -> Result<File> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map_err(|e| Error::io(path, e))
}

fn write_rows(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_writer(BufWriter::new(create(path)?));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub const SLOTS_HEADER: [&str; 7] = [
    "slot_index",
    "path_found",
    "latency_ms",
    "propagation_ms",
    "node_delay_ms",
    "hop_count",
    "path",
];

pub fn write_slots_csv(path: &Path, records: &[SlotRecord]) -> Result<()> {
    write_rows(
        path,
        &SLOTS_HEADER,
        records.iter().map(|r| {
            vec![
                r.slot_index.to_string(),
                r.path_found.to_string(),
                opt(r.latency_ms),
                opt(r.propagation_ms),
                opt(r.node_delay_ms),
                r.hop_count.map(|h| h.to_string()).unwrap_or_default(),
                r.node_sequence.join(";"),
            ]
        }),
    )
}

pub const SUMMARY_HEADER: [&str; 7] = [
    "scenario",
    "mode",
    "range_km",
    "avg_latency_ms",
    "avg_hops",
    "slots_with_path",
    "slot_count",
];

pub fn write_summary_csv(path: &Path, summaries: &[MetricsSummary]) -> Result<()> {
    write_rows(
        path,
        &SUMMARY_HEADER,
        summaries.iter().map(|s| {
            vec![
                s.scenario.clone(),
                s.mode.to_string(),
                fixed(s.range_km),
                opt(s.avg_latency_ms),
                opt(s.avg_hops),
                s.slots_with_path.to_string(),
                s.slot_count.to_string(),
            ]
        }),
    )
}

pub const COMPARISON_HEADER: [&str; 11] = [
    "scenario",
    "range_km",
    "ng_avg_latency_ms",
    "nng_avg_latency_ms",
    "latency_improvement_ms",
    "ng_avg_hops",
    "nng_avg_hops",
    "hop_improvement",
    "ng_slots_with_path",
    "nng_slots_with_path",
    "slot_count",
];

pub fn write_comparison_csv(path: &Path, rows: &[Comparison]) -> Result<()> {
    write_rows(
        path,
        &COMPARISON_HEADER,
        rows.iter().map(|c| {
            vec![
                c.scenario.clone(),
                fixed(c.range_km),
                opt(c.ng.avg_latency_ms),
                opt(c.nng.avg_latency_ms),
                opt(c.latency_improvement_ms),
                opt(c.ng.avg_hops),
                opt(c.nng.avg_hops),
                opt(c.hop_improvement),
                c.ng.slots_with_path.to_string(),
                c.nng.slots_with_path.to_string(),
                c.ng.slot_count.to_string(),
            ]
        }),
    )
}

pub const CENSUS_HEADER: [&str; 6] = [
    "time_s",
    "range_km",
    "mode",
    "link_type",
    "permanence",
    "count",
];

/// One row per (type, permanence) bucket, then `Total` rows with the
/// undirected and directed link counts.
pub fn write_census_csv(path: &Path, censuses: &[LinkCensus]) -> Result<()> {
    let mut rows = Vec::new();
    for c in censuses {
        let prefix = || vec![fixed(c.time_s), fixed(c.lisl_range_km), c.mode.to_string()];
        for ty in LinkType::ALL {
            for perm in [Permanence::Permanent, Permanence::Temporary] {
                let mut row = prefix();
                row.extend([
                    ty.to_string(),
                    perm.to_string(),
                    c.count(ty, perm).to_string(),
                ]);
                rows.push(row);
            }
        }
        for (label, count) in [
            ("TotalUndirected", c.undirected_total()),
            ("TotalDirected", c.directed_total()),
            ("SatelliteUndirected", c.satellite_links),
            ("SatelliteDirected", c.directed_satellite_links()),
        ] {
            let mut row = prefix();
            row.extend([label.to_string(), "Any".to_string(), count.to_string()]);
            rows.push(row);
        }
    }
    write_rows(path, &CENSUS_HEADER, rows)
}

pub fn write_connectivity_csv(
    path: &Path,
    satellite: &str,
    rows: &[ConnectivityRow],
) -> Result<()> {
    write_rows(
        path,
        &[
            "satellite",
            "range_km",
            "permanent",
            "equator",
            "high_latitude",
            "equator_gain",
            "high_latitude_gain",
        ],
        rows.iter().map(|r| {
            vec![
                satellite.to_string(),
                fixed(r.range_km),
                r.permanent.to_string(),
                r.equator.to_string(),
                r.high_latitude.to_string(),
                r.equator_gain().to_string(),
                r.high_latitude_gain().to_string(),
            ]
        }),
    )
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// File-name friendly rendering of a range, e.g. `659.5` -> `659p5`.
pub fn range_tag(range_km: f64) -> String {
    let s = format!("{range_km}");
    s.replace('.', "p")
}
