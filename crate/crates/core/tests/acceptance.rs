//! Acceptance suite. Runs as a plain binary (`harness = false`) so every
//! criterion prints one PASS/FAIL line; the process fails if any criterion does.
//!
//!     cargo test --release --test acceptance

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fsosn::config::RunConfig;
use fsosn::geometry::{great_circle_distance, max_lisl_range};
use fsosn::links::{link_census, GraphSnapshot, Link, LinkType, Mode, NetworkModel, Permanence};
use fsosn::orbital::SatelliteId;
use fsosn::routing::oracle::oracle_shortest_path;
use fsosn::routing::shortest_path;
use fsosn::scenario::{
    run_batch, run_scenario, BatchResult, MetricsSummary, SlotPlan, StationPair,
};
use fsosn::validation::{
    connectivity_table, scan_phasing, LatitudeSlots, PL_WIDE_RANGE_TOLERANCE, REFERENCE_PL_DEGREES,
    REFERENCE_RANGES_KM,
};

type Outcome = Result<String, String>;

struct Context {
    config: RunConfig,
    model: NetworkModel,
}

impl Context {
    fn new() -> Self {
        let config = RunConfig::default();
        let model = config.network_model().expect("default model");
        Context { config, model }
    }

    fn pair(&self, src: &str, dst: &str) -> StationPair {
        StationPair {
            name: format!("{src}-{dst}"),
            src: self.config.station(src).expect("bundled station").clone(),
            dst: self.config.station(dst).expect("bundled station").clone(),
        }
    }

    fn plan(&self) -> SlotPlan {
        SlotPlan {
            slot_count: 3600,
            slot_duration_s: 1.0,
            start_time_s: self.config.epoch.start_time_s,
            node_delay_ms: self.config.constants.node_delay_ms,
        }
    }

    fn city_pairs(&self) -> Vec<StationPair> {
        [
            ("Sydney", "SaoPaulo"),
            ("Toronto", "Istanbul"),
            ("Madrid", "Tokyo"),
            ("NewYork", "Jakarta"),
        ]
        .iter()
        .map(|(a, b)| self.pair(a, b))
        .collect()
    }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn geometry_constants(ctx: &Context) -> Outcome {
    let spec = &ctx.config.constellation;
    let c = ctx.model.constellation();
    let chord =
        (c.state_at_index(0, 0.0).position_km - c.state_at_index(1, 0.0).position_km).norm();
    let max_range = max_lisl_range(
        spec.altitude_km,
        ctx.config.constants.occlusion_clearance_km,
    );
    check(
        (chord - 659.5).abs() <= 1.0 && (max_range - 5016.0).abs() <= 1.0,
        format!("chord {chord:.3} km, max LISL range {max_range:.3} km"),
    )
}

fn permanent_degrees(ctx: &Context) -> Outcome {
    let scan = scan_phasing(
        &ctx.config.constellation,
        &ctx.config.constants,
        ctx.model.earth(),
    )
    .map_err(|e| e.to_string())?;
    let Some(pinned) = scan.pinned else {
        return Err("no phasing offset reproduces the permanent-link column".into());
    };
    let spec = fsosn::ConstellationSpec {
        phasing_offset: pinned,
        ..ctx.config.constellation.clone()
    };
    let model = NetworkModel::new(spec, ctx.config.constants, *ctx.model.earth())
        .map_err(|e| e.to_string())?;
    let mut found = Vec::new();
    let mut ok = pinned == ctx.config.constellation.phasing_offset;
    for (i, (&range, want)) in REFERENCE_RANGES_KM
        .iter()
        .zip(REFERENCE_PL_DEGREES)
        .enumerate()
    {
        let degrees = model
            .snapshot(0.0, range, Mode::NG, &[])
            .satellite_degrees();
        let (lo, hi) = (
            degrees.iter().min().copied().unwrap_or(0),
            degrees.iter().max().copied().unwrap_or(0),
        );
        let tolerance = if i < 4 { 0 } else { PL_WIDE_RANGE_TOLERANCE };
        ok &= degrees.iter().all(|d| d.abs_diff(want) <= tolerance);
        found.push(if lo == hi {
            lo.to_string()
        } else {
            format!("{lo}..{hi}")
        });
    }
    check(
        ok,
        format!("pinned F = {pinned}, NG degrees {}", found.join("/")),
    )
}

fn temporary_degrees(ctx: &Context) -> Outcome {
    let sat = SatelliteId::new(0, 0);
    let slots = LatitudeSlots::find(&ctx.model, sat).map_err(|e| e.to_string())?;
    let rows = connectivity_table(&ctx.model, sat, &REFERENCE_RANGES_KM, slots)
        .map_err(|e| e.to_string())?;
    let at_1700 = rows
        .iter()
        .find(|r| r.range_km == 1700.0)
        .expect("1700 km row");
    let mut ok = at_1700.equator.abs_diff(22) <= 3 && at_1700.high_latitude.abs_diff(40) <= 3;
    ok &= rows
        .iter()
        .filter(|r| r.range_km >= 1319.0)
        .all(|r| r.high_latitude > r.equator);
    let eq: Vec<_> = rows.iter().map(|r| r.equator.to_string()).collect();
    let hi: Vec<_> = rows.iter().map(|r| r.high_latitude.to_string()).collect();
    check(
        ok,
        format!(
            "x10101 equator {} / 47.33 deg {}",
            eq.join("/"),
            hi.join("/")
        ),
    )
}

fn census_ratio(ctx: &Context) -> Outcome {
    let mut ok = true;
    let mut ratios = Vec::new();
    for &range in &REFERENCE_RANGES_KM {
        let ng = link_census(&ctx.model.snapshot(0.0, range, Mode::NG, &[])).undirected_total();
        let nng = link_census(&ctx.model.snapshot(0.0, range, Mode::NNG, &[])).undirected_total();
        let ratio = nng as f64 / ng as f64;
        ok &= ng > 0 && ratio >= 2.0;
        ratios.push(format!("{ratio:.2}"));
    }
    check(ok, format!("NNG/NG ratios {}", ratios.join("/")))
}

struct SweepRow {
    range_km: f64,
    ng: MetricsSummary,
    nng: MetricsSummary,
}

fn summarise(results: &[BatchResult], pair: &str, mode: Mode, range_km: f64) -> MetricsSummary {
    let r = results
        .iter()
        .find(|r| r.pair == pair && r.mode == mode)
        .expect("batch result");
    MetricsSummary::from_records(pair, mode, range_km, &r.records)
}

fn sydney_sweep(ctx: &Context, city_runs: &[(f64, Vec<BatchResult>)]) -> Vec<SweepRow> {
    let pair = ctx.pair("Sydney", "SaoPaulo");
    REFERENCE_RANGES_KM
        .iter()
        .map(|&range| {
            // The 1700 and 5016 km runs are shared with the dominance check.
            let owned;
            let results = match city_runs.iter().find(|(r, _)| *r == range) {
                Some((_, res)) => res,
                None => {
                    owned = run_batch(
                        &ctx.model,
                        std::slice::from_ref(&pair),
                        range,
                        &Mode::BOTH,
                        ctx.plan(),
                    )
                    .expect("sweep run");
                    &owned
                }
            };
            SweepRow {
                range_km: range,
                ng: summarise(results, &pair.name, Mode::NG, range),
                nng: summarise(results, &pair.name, Mode::NNG, range),
            }
        })
        .collect()
}

fn feasibility(rows: &[SweepRow]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for row in rows {
        let (ng, nng) = (row.ng.slots_with_path, row.nng.slots_with_path);
        if row.range_km <= 1319.0 {
            ok &= ng == 0;
        }
        if row.range_km >= 1319.0 {
            ok &= nng == 3600;
        } else {
            ok &= (1500..=2700).contains(&nng);
        }
        parts.push(format!("{}: NG {ng} NNG {nng}", row.range_km));
    }
    check(ok, parts.join(", "))
}

fn magnitudes(rows: &[SweepRow]) -> Outcome {
    const REFERENCE: [(f64, f64); 5] = [
        (1500.0, 171.61),
        (1700.0, 157.35),
        (2500.0, 124.17),
        (3500.0, 109.19),
        (5016.0, 90.89),
    ];
    let mut ok = true;
    let mut latencies = Vec::new();
    for (range, want) in REFERENCE {
        let row = rows
            .iter()
            .find(|r| r.range_km == range)
            .expect("sweep row");
        match row.nng.avg_latency_ms {
            Some(got) => {
                ok &= (got - want).abs() <= 0.3 * want;
                latencies.push(got);
            }
            None => ok = false,
        }
    }
    ok &= latencies.windows(2).all(|w| w[1] < w[0]);
    let mut best: Option<(f64, f64)> = None;
    for row in rows {
        if let (Some(ng), Some(nng)) = (row.ng.avg_latency_ms, row.nng.avg_latency_ms) {
            let gain = ng - nng;
            ok &= gain > 0.0;
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((row.range_km, gain));
            }
        }
    }
    ok &= best.is_some_and(|(r, _)| [1500.0, 1700.0, 2500.0].contains(&r));
    let shown: Vec<_> = latencies.iter().map(|l| format!("{l:.2}")).collect();
    let (best_range, best_gain) = best.unwrap_or((f64::NAN, f64::NAN));
    check(
        ok,
        format!(
            "NNG avg {} ms, largest improvement {best_gain:.2} ms at {best_range} km",
            shown.join("/")
        ),
    )
}

fn dominance(ctx: &Context, city_runs: &[(f64, Vec<BatchResult>)]) -> Outcome {
    let nd = ctx.config.constants.node_delay_ms;
    let mut checked = 0usize;
    let mut failures = Vec::new();
    for (range, results) in city_runs {
        for pair in ctx.city_pairs() {
            let find = |mode| {
                results
                    .iter()
                    .find(|r| r.pair == pair.name && r.mode == mode)
                    .expect("batch result")
            };
            let (ng, nng) = (find(Mode::NG), find(Mode::NNG));
            for (a, b) in ng.records.iter().zip(&nng.records) {
                for r in [a, b].into_iter().filter(|r| r.path_found) {
                    let hops = r.hop_count.unwrap_or_default();
                    if r.latency_ms != Some(r.propagation_ms.unwrap_or_default() + nd * hops as f64)
                    {
                        failures.push(format!(
                            "{} {range} slot {} accounting",
                            pair.name, r.slot_index
                        ));
                    }
                }
                if let Some(ng_latency) = a.latency_ms {
                    checked += 1;
                    if !b.latency_ms.is_some_and(|l| l <= ng_latency) {
                        failures.push(format!(
                            "{} {range} slot {} NNG worse",
                            pair.name, a.slot_index
                        ));
                    }
                }
            }
        }
    }
    check(
        failures.is_empty() && checked > 0,
        format!(
            "{checked} slot comparisons, {} violations {:?}",
            failures.len(),
            failures.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn terrestrial_distances(ctx: &Context) -> Outcome {
    let re = ctx.config.constellation.earth_radius_km;
    let mut ok = true;
    let mut parts = Vec::new();
    for (a, b, want) in [
        ("Toronto", "Istanbul", 8198.0),
        ("Madrid", "Tokyo", 10_778.0),
        ("NewYork", "Jakarta", 16_198.0),
    ] {
        let (sa, sb) = (
            ctx.config.station(a).expect("station"),
            ctx.config.station(b).expect("station"),
        );
        let d = great_circle_distance(sa.location(), sb.location(), re);
        ok &= (d - want).abs() <= 0.01 * want;
        parts.push(format!("{a}-{b} {d:.1} km"));
    }
    check(ok, parts.join(", "))
}

fn random_graph(rng: &mut ChaCha8Rng) -> GraphSnapshot {
    let nodes = rng.gen_range(2..=12);
    let stations = rng.gen_range(2..=nodes.min(4));
    let satellites = nodes - stations;
    let density: f64 = rng.gen_range(0.15..0.8);
    let mut links = Vec::new();
    for a in 0..nodes {
        for b in a + 1..nodes {
            if rng.gen_bool(density) {
                let length_km: f64 = rng.gen_range(1.0..5000.0);
                links.push(Link {
                    a,
                    b,
                    length_km,
                    propagation_delay_ms: length_km / 299.792458,
                    link_type: if b >= satellites {
                        LinkType::GroundLink
                    } else {
                        LinkType::IntraOP
                    },
                    permanence: Permanence::Temporary,
                });
            }
        }
    }
    GraphSnapshot {
        time_s: 0.0,
        lisl_range_km: 5000.0,
        mode: Mode::NNG,
        satellite_count: satellites,
        sats_per_plane: satellites.max(1),
        station_names: (0..stations).map(|g| format!("gs{g}")).collect(),
        links,
    }
}

fn routing_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut with_path = 0;
    for i in 0..500 {
        let g = random_graph(&mut rng);
        let (src, dst) = (g.satellite_count, g.satellite_count + 1);
        let nd = if i % 5 == 0 { 0.0 } else { 10.0 };
        let fast = shortest_path(&g, src, dst, nd).map_err(|e| e.to_string())?;
        let slow = oracle_shortest_path(&g, src, dst, nd).map_err(|e| e.to_string())?;
        match (&fast, &slow) {
            (Some(f), Some(s)) if f.latency_ms == s.latency_ms => with_path += 1,
            (None, None) => {}
            _ => return Err(format!("graph {i}: router {fast:?} vs oracle {slow:?}")),
        }
    }
    Ok(format!("500 graphs agree exactly ({with_path} connected)"))
}

fn performance(ctx: &Context) -> Outcome {
    let pair = ctx.pair("Sydney", "SaoPaulo");
    let cfg = ctx
        .config
        .scenario_config(
            ctx.config.scenario("Sydney-SaoPaulo").expect("scenario"),
            5016.0,
            Mode::NNG,
        )
        .map_err(|e| e.to_string())?;
    let start = Instant::now();
    let run = run_scenario(&ctx.model, &cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(
        elapsed < Duration::from_secs(600) && run.records.len() == 3600,
        format!(
            "{} 5016 km NNG, {} slots in {:.1} s",
            pair.name,
            run.records.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn report(results: &mut Vec<bool>, n: usize, name: &str, outcome: Outcome, elapsed: Duration) {
    let (status, detail, pass) = match outcome {
        Ok(d) => ("PASS", d, true),
        Err(d) => ("FAIL", d, false),
    };
    println!(
        "criterion {n:>2} [{status}] {name}: {detail} ({:.1} s)",
        elapsed.as_secs_f64()
    );
    results.push(pass);
}

macro_rules! run {
    ($results:expr, $n:expr, $name:expr, $body:expr) => {{
        let start = Instant::now();
        let outcome = $body;
        report(&mut $results, $n, $name, outcome, start.elapsed());
    }};
}

fn main() {
    // `cargo test -- --list` and filters are not meaningful for this target.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let ctx = Context::new();
    let mut results = Vec::new();

    run!(results, 1, "geometry constants", geometry_constants(&ctx));
    run!(
        results,
        2,
        "permanent-link degrees",
        permanent_degrees(&ctx)
    );
    run!(
        results,
        3,
        "temporary-link degrees",
        temporary_degrees(&ctx)
    );
    run!(results, 4, "link census ratio", census_ratio(&ctx));

    let start = Instant::now();
    let city_runs: Vec<(f64, Vec<BatchResult>)> = [1700.0, 5016.0]
        .iter()
        .map(|&range| {
            let res = run_batch(
                &ctx.model,
                &ctx.city_pairs(),
                range,
                &Mode::BOTH,
                ctx.plan(),
            )
            .expect("city run");
            (range, res)
        })
        .collect();
    let rows = sydney_sweep(&ctx, &city_runs);
    let shared = start.elapsed();
    println!("(full-day runs: {:.1} s)", shared.as_secs_f64());

    run!(
        results,
        5,
        "Sydney-SaoPaulo feasibility",
        feasibility(&rows)
    );
    run!(
        results,
        6,
        "Sydney-SaoPaulo latency magnitudes",
        magnitudes(&rows)
    );
    run!(
        results,
        7,
        "per-slot dominance and accounting",
        dominance(&ctx, &city_runs)
    );
    run!(
        results,
        8,
        "terrestrial distances",
        terrestrial_distances(&ctx)
    );
    run!(results, 9, "routing oracle", routing_oracle());
    run!(results, 10, "performance envelope", performance(&ctx));

    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
