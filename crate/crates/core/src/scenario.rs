//! Time-slotted runs of inter-continental connections.
//!
//! Each slot gets its own snapshot and shortest path. Slots are independent
//! and may be evaluated in parallel; results are always returned in slot
//! order and aggregated sequentially.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::links::{GraphSnapshot, Mode, NetworkModel};
use crate::orbital::GroundStation;
use crate::routing::{shortest_path_with, Adjacency, PathResult};

pub const DEFAULT_SLOT_COUNT: usize = 3600;
pub const DEFAULT_SLOT_DURATION_S: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub src: GroundStation,
    pub dst: GroundStation,
    pub lisl_range_km: f64,
    pub mode: Mode,
    pub slot_duration_s: f64,
    pub slot_count: usize,
    pub node_delay_ms: f64,
    /// Time of slot 0, seconds after the constellation epoch.
    pub start_time_s: f64,
}

impl ScenarioConfig {
    pub fn new(src: GroundStation, dst: GroundStation, lisl_range_km: f64, mode: Mode) -> Self {
        ScenarioConfig {
            name: format!("{}-{}", src.name, dst.name),
            src,
            dst,
            lisl_range_km,
            mode,
            slot_duration_s: DEFAULT_SLOT_DURATION_S,
            slot_count: DEFAULT_SLOT_COUNT,
            node_delay_ms: crate::geometry::NODE_DELAY_MS,
            start_time_s: 0.0,
        }
    }

    pub fn with_slots(mut self, slot_count: usize) -> Self {
        self.slot_count = slot_count;
        self
    }

    pub fn with_range(mut self, lisl_range_km: f64) -> Self {
        self.lisl_range_km = lisl_range_km;
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.slot_duration_s.is_finite() && self.slot_duration_s > 0.0) {
            return Err(Error::config(format!(
                "slot_duration_s must be positive, got {}",
                self.slot_duration_s
            )));
        }
        if self.slot_count == 0 {
            return Err(Error::config("slot_count must be at least 1"));
        }
        if !(self.lisl_range_km.is_finite() && self.lisl_range_km > 0.0) {
            return Err(Error::config(format!(
                "lisl_range_km must be positive, got {}",
                self.lisl_range_km
            )));
        }
        if !(self.node_delay_ms.is_finite() && self.node_delay_ms >= 0.0) {
            return Err(Error::config("node_delay_ms must be non-negative"));
        }
        if !(self.start_time_s.is_finite() && self.start_time_s >= 0.0) {
            return Err(Error::config("start_time_s must be non-negative"));
        }
        if self.src.name == self.dst.name {
            return Err(Error::config(format!(
                "scenario {:?} connects {:?} to itself",
                self.name, self.src.name
            )));
        }
        self.src.validate()?;
        self.dst.validate()
    }

    pub fn slot_time(&self, slot: usize) -> f64 {
        self.start_time_s + slot as f64 * self.slot_duration_s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotRecord {
    pub slot_index: usize,
    pub time_s: f64,
    pub path_found: bool,
    pub latency_ms: Option<f64>,
    pub propagation_ms: Option<f64>,
    pub node_delay_ms: Option<f64>,
    pub hop_count: Option<usize>,
    pub node_sequence: Vec<String>,
}

impl SlotRecord {
    fn from_path(
        slot_index: usize,
        time_s: f64,
        path: Option<&PathResult>,
        snapshot: &GraphSnapshot,
    ) -> Self {
        match path {
            Some(p) => SlotRecord {
                slot_index,
                time_s,
                path_found: true,
                latency_ms: Some(p.latency_ms),
                propagation_ms: Some(p.propagation_delay_ms),
                node_delay_ms: Some(p.node_delay_ms),
                hop_count: Some(p.hop_count),
                node_sequence: p.labels(snapshot),
            },
            None => SlotRecord {
                slot_index,
                time_s,
                path_found: false,
                latency_ms: None,
                propagation_ms: None,
                node_delay_ms: None,
                hop_count: None,
                node_sequence: Vec::new(),
            },
        }
    }
}

/// Averages over the slots where a path was found.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsSummary {
    pub scenario: String,
    pub mode: Mode,
    pub range_km: f64,
    pub avg_latency_ms: Option<f64>,
    pub avg_propagation_ms: Option<f64>,
    pub avg_hops: Option<f64>,
    pub slots_with_path: usize,
    pub slot_count: usize,
}

impl MetricsSummary {
    pub fn from_records(scenario: &str, mode: Mode, range_km: f64, records: &[SlotRecord]) -> Self {
        let mut latency = 0.0;
        let mut propagation = 0.0;
        let mut hops = 0usize;
        let mut found = 0usize;
        for r in records.iter().filter(|r| r.path_found) {
            latency += r.latency_ms.unwrap_or_default();
            propagation += r.propagation_ms.unwrap_or_default();
            hops += r.hop_count.unwrap_or_default();
            found += 1;
        }
        let avg = |total: f64| (found > 0).then(|| total / found as f64);
        MetricsSummary {
            scenario: scenario.to_string(),
            mode,
            range_km,
            avg_latency_ms: avg(latency),
            avg_propagation_ms: avg(propagation),
            avg_hops: avg(hops as f64),
            slots_with_path: found,
            slot_count: records.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioRun {
    pub config: ScenarioConfig,
    pub records: Vec<SlotRecord>,
    pub summary: MetricsSummary,
}

/// One source/destination pair routed in a shared batch.
#[derive(Debug, Clone, PartialEq)]
pub struct StationPair {
    pub name: String,
    pub src: GroundStation,
    pub dst: GroundStation,
}

/// Slot timing and delay settings shared by every pair of a batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotPlan {
    pub slot_count: usize,
    pub slot_duration_s: f64,
    pub start_time_s: f64,
    pub node_delay_ms: f64,
}

impl SlotPlan {
    fn time(&self, slot: usize) -> f64 {
        self.start_time_s + slot as f64 * self.slot_duration_s
    }
}

/// Records of one (pair, mode) combination of a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchResult {
    pub pair: String,
    pub mode: Mode,
    pub records: Vec<SlotRecord>,
}

/// Route several station pairs in one or both modes, building each slot's
/// snapshot once and deriving the permanent-only graph from it.
pub fn run_batch(
    model: &NetworkModel,
    pairs: &[StationPair],
    lisl_range_km: f64,
    modes: &[Mode],
    plan: SlotPlan,
) -> Result<Vec<BatchResult>> {
    let mut stations: Vec<GroundStation> = Vec::new();
    for p in pairs {
        for gs in [&p.src, &p.dst] {
            match stations.iter().find(|s| s.name == gs.name) {
                Some(existing) if existing != gs => {
                    return Err(Error::config(format!(
                        "station {:?} defined twice with different data",
                        gs.name
                    )))
                }
                Some(_) => {}
                None => stations.push(gs.clone()),
            }
        }
    }
    let want_ng = modes.contains(&Mode::NG);
    let want_nng = modes.contains(&Mode::NNG);
    let base_mode = if want_nng { Mode::NNG } else { Mode::NG };

    let per_slot: Vec<Vec<SlotRecord>> = (0..plan.slot_count)
        .into_par_iter()
        .map(|slot| -> Result<Vec<SlotRecord>> {
            let t = plan.time(slot);
            let base = model.snapshot(t, lisl_range_km, base_mode, &stations);
            let mut out = Vec::with_capacity(pairs.len() * modes.len());
            let derived;
            let mut graphs: Vec<(Mode, &GraphSnapshot)> = Vec::with_capacity(2);
            if want_ng {
                if base_mode == Mode::NNG {
                    derived = base.permanent_only();
                    graphs.push((Mode::NG, &derived));
                } else {
                    graphs.push((Mode::NG, &base));
                }
            }
            if want_nng {
                graphs.push((Mode::NNG, &base));
            }
            for &mode in modes {
                let graph = graphs
                    .iter()
                    .find(|(m, _)| *m == mode)
                    .map(|(_, g)| *g)
                    .expect("mode was built");
                let adjacency = Adjacency::from_snapshot(graph);
                for p in pairs {
                    let src = graph.station_node(&p.src.name)?;
                    let dst = graph.station_node(&p.dst.name)?;
                    let path = shortest_path_with(graph, &adjacency, src, dst, plan.node_delay_ms)?;
                    out.push(SlotRecord::from_path(slot, t, path.as_ref(), graph));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut results: Vec<BatchResult> = modes
        .iter()
        .flat_map(|&mode| {
            pairs.iter().map(move |p| BatchResult {
                pair: p.name.clone(),
                mode,
                records: Vec::with_capacity(plan.slot_count),
            })
        })
        .collect();
    for slot_records in per_slot {
        for (result, record) in results.iter_mut().zip(slot_records) {
            result.records.push(record);
        }
    }
    Ok(results)
}

pub fn run_scenario(model: &NetworkModel, cfg: &ScenarioConfig) -> Result<ScenarioRun> {
    cfg.validate()?;
    let pair = StationPair {
        name: cfg.name.clone(),
        src: cfg.src.clone(),
        dst: cfg.dst.clone(),
    };
    let plan = SlotPlan {
        slot_count: cfg.slot_count,
        slot_duration_s: cfg.slot_duration_s,
        start_time_s: cfg.start_time_s,
        node_delay_ms: cfg.node_delay_ms,
    };
    let mut batch = run_batch(
        model,
        std::slice::from_ref(&pair),
        cfg.lisl_range_km,
        &[cfg.mode],
        plan,
    )?;
    let records = batch.pop().expect("one result per pair and mode").records;
    let summary = MetricsSummary::from_records(&cfg.name, cfg.mode, cfg.lisl_range_km, &records);
    Ok(ScenarioRun {
        config: cfg.clone(),
        records,
        summary,
    })
}

/// NG against NNG for the same geometry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub scenario: String,
    pub range_km: f64,
    pub ng: MetricsSummary,
    pub nng: MetricsSummary,
    /// NG minus NNG average latency; `None` when either mode never found a path.
    pub latency_improvement_ms: Option<f64>,
    pub hop_improvement: Option<f64>,
}

impl Comparison {
    pub fn from_summaries(
        scenario: &str,
        range_km: f64,
        ng: MetricsSummary,
        nng: MetricsSummary,
    ) -> Self {
        let diff = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(a), Some(b)) => Some(a - b),
            _ => None,
        };
        Comparison {
            scenario: scenario.to_string(),
            range_km,
            latency_improvement_ms: diff(ng.avg_latency_ms, nng.avg_latency_ms),
            hop_improvement: diff(ng.avg_hops, nng.avg_hops),
            ng,
            nng,
        }
    }
}

/// Comparison plus the per-slot records of both modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRun {
    pub comparison: Comparison,
    pub ng_records: Vec<SlotRecord>,
    pub nng_records: Vec<SlotRecord>,
}

pub fn compare_detailed(model: &NetworkModel, cfg: &ScenarioConfig) -> Result<ComparisonRun> {
    cfg.validate()?;
    let pair = StationPair {
        name: cfg.name.clone(),
        src: cfg.src.clone(),
        dst: cfg.dst.clone(),
    };
    let plan = SlotPlan {
        slot_count: cfg.slot_count,
        slot_duration_s: cfg.slot_duration_s,
        start_time_s: cfg.start_time_s,
        node_delay_ms: cfg.node_delay_ms,
    };
    let mut batch = run_batch(
        model,
        std::slice::from_ref(&pair),
        cfg.lisl_range_km,
        &Mode::BOTH,
        plan,
    )?;
    let nng_records = batch.pop().expect("NNG result").records;
    let ng_records = batch.pop().expect("NG result").records;
    let ng = MetricsSummary::from_records(&cfg.name, Mode::NG, cfg.lisl_range_km, &ng_records);
    let nng = MetricsSummary::from_records(&cfg.name, Mode::NNG, cfg.lisl_range_km, &nng_records);
    Ok(ComparisonRun {
        comparison: Comparison::from_summaries(&cfg.name, cfg.lisl_range_km, ng, nng),
        ng_records,
        nng_records,
    })
}

/// Run both modes on `cfg` (its mode is ignored).
pub fn compare(model: &NetworkModel, cfg: &ScenarioConfig) -> Result<Comparison> {
    Ok(compare_detailed(model, cfg)?.comparison)
}

/// One comparison per range, ascending.
pub fn range_sweep(
    model: &NetworkModel,
    cfg: &ScenarioConfig,
    ranges: &[f64],
) -> Result<Vec<Comparison>> {
    if ranges.is_empty() {
        return Err(Error::config("range sweep needs at least one range"));
    }
    let mut sorted = ranges.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    sorted
        .into_iter()
        .map(|range| compare(model, &cfg.clone().with_range(range)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> NetworkModel {
        NetworkModel::reference()
    }

    fn sydney() -> GroundStation {
        GroundStation::new("Sydney", -33.8614, 151.2099)
    }

    fn sao_paulo() -> GroundStation {
        GroundStation::new("SaoPaulo", -23.5475, -46.6361)
    }

    #[test]
    fn single_slot_summary_equals_record() {
        // Two stations a few km apart share the satellites overhead.
        let a = GroundStation::new("A", 10.0, 20.0);
        let b = GroundStation::new("B", 10.05, 20.05);
        let cfg = ScenarioConfig::new(a, b, 1700.0, Mode::NNG).with_slots(1);
        let run = run_scenario(&model(), &cfg).unwrap();
        assert_eq!(run.records.len(), 1);
        let r = &run.records[0];
        assert!(r.path_found);
        assert_eq!(r.hop_count, Some(1));
        assert_eq!(run.summary.slots_with_path, 1);
        assert_eq!(run.summary.avg_latency_ms, r.latency_ms);
        assert_eq!(run.summary.avg_hops, Some(1.0));
    }

    #[test]
    fn pathless_slots_have_no_delays() {
        let cfg = ScenarioConfig::new(sydney(), sao_paulo(), 659.5, Mode::NG).with_slots(20);
        let run = run_scenario(&model(), &cfg).unwrap();
        assert_eq!(run.summary.slots_with_path, 0);
        assert_eq!(run.summary.avg_latency_ms, None);
        for r in &run.records {
            assert!(!r.path_found);
            assert!(r.latency_ms.is_none() && r.hop_count.is_none() && r.node_sequence.is_empty());
        }
    }

    #[test]
    fn comparison_marks_unavailable_and_dominates() {
        let cfg = ScenarioConfig::new(sydney(), sao_paulo(), 1319.0, Mode::NNG).with_slots(10);
        let c = compare_detailed(&model(), &cfg).unwrap();
        assert_eq!(c.comparison.ng.slots_with_path, 0);
        assert_eq!(c.comparison.latency_improvement_ms, None);
        assert_eq!(c.comparison.nng.slots_with_path, 10);

        let cfg = cfg.with_range(2500.0);
        let c = compare_detailed(&model(), &cfg).unwrap();
        for (ng, nng) in c.ng_records.iter().zip(&c.nng_records) {
            if let (Some(a), Some(b)) = (ng.latency_ms, nng.latency_ms) {
                assert!(b <= a);
            }
        }
        assert!(c.comparison.latency_improvement_ms.unwrap() >= 0.0);
    }

    #[test]
    fn identical_modes_give_zero_improvement() {
        let ng = MetricsSummary {
            scenario: "s".into(),
            mode: Mode::NG,
            range_km: 1.0,
            avg_latency_ms: Some(100.0),
            avg_propagation_ms: Some(60.0),
            avg_hops: Some(4.0),
            slots_with_path: 3,
            slot_count: 3,
        };
        let nng = MetricsSummary {
            mode: Mode::NNG,
            ..ng.clone()
        };
        let c = Comparison::from_summaries("s", 1.0, ng, nng);
        assert_eq!(c.latency_improvement_ms, Some(0.0));
        assert_eq!(c.hop_improvement, Some(0.0));
    }

    #[test]
    fn sweep_orders_rows_and_handles_tiny_station_range() {
        let cfg = ScenarioConfig::new(
            sydney().with_range(1e-3),
            sao_paulo().with_range(1e-3),
            1700.0,
            Mode::NNG,
        )
        .with_slots(3);
        let rows = range_sweep(&model(), &cfg, &[5016.0, 1700.0, 2500.0]).unwrap();
        let ranges: Vec<f64> = rows.iter().map(|r| r.range_km).collect();
        assert_eq!(ranges, vec![1700.0, 2500.0, 5016.0]);
        assert!(rows
            .iter()
            .all(|r| r.ng.slots_with_path == 0 && r.nng.slots_with_path == 0));
        assert!(range_sweep(&model(), &cfg, &[]).is_err());
    }

    #[test]
    fn accounting_identity_holds_per_slot() {
        let cfg = ScenarioConfig::new(sydney(), sao_paulo(), 2500.0, Mode::NNG).with_slots(5);
        let run = run_scenario(&model(), &cfg).unwrap();
        for r in run.records.iter().filter(|r| r.path_found) {
            let hops = r.hop_count.unwrap();
            assert_eq!(r.node_delay_ms.unwrap(), hops as f64 * 10.0);
            assert_eq!(
                r.latency_ms.unwrap(),
                r.propagation_ms.unwrap() + r.node_delay_ms.unwrap()
            );
            assert_eq!(r.node_sequence.len(), hops + 2);
            assert_eq!(r.node_sequence.first().unwrap(), "Sydney");
            assert_eq!(r.node_sequence.last().unwrap(), "SaoPaulo");
        }
    }

    #[test]
    fn batch_matches_individual_runs() {
        let m = model();
        let pairs = vec![
            StationPair {
                name: "a".into(),
                src: sydney(),
                dst: sao_paulo(),
            },
            StationPair {
                name: "b".into(),
                src: GroundStation::new("Madrid", 40.4168, -3.7038),
                dst: GroundStation::new("Tokyo", 35.6795, 139.7770),
            },
        ];
        let plan = SlotPlan {
            slot_count: 4,
            slot_duration_s: 1.0,
            start_time_s: 0.0,
            node_delay_ms: 10.0,
        };
        let batch = run_batch(&m, &pairs, 1700.0, &Mode::BOTH, plan).unwrap();
        assert_eq!(batch.len(), 4);
        for res in &batch {
            let p = pairs.iter().find(|p| p.name == res.pair).unwrap();
            let cfg =
                ScenarioConfig::new(p.src.clone(), p.dst.clone(), 1700.0, res.mode).with_slots(4);
            let single = run_scenario(&m, &cfg).unwrap();
            assert_eq!(single.records, res.records);
        }
    }

    #[test]
    fn invalid_configs_rejected() {
        let base = ScenarioConfig::new(sydney(), sao_paulo(), 1700.0, Mode::NG);
        let mut c = base.clone();
        c.slot_count = 0;
        assert!(run_scenario(&model(), &c).is_err());
        let mut c = base.clone();
        c.slot_duration_s = 0.0;
        assert!(c.validate().is_err());
        assert!(base.clone().with_range(-5.0).validate().is_err());
        let same = ScenarioConfig::new(sydney(), sydney(), 1700.0, Mode::NG);
        assert!(same.validate().is_err());
    }
}
