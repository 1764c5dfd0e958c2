//! Exhaustive simple-path search, used to cross-check [`super::shortest_path`].

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::links::GraphSnapshot;

use super::{check_endpoints, folded_cost, path_result, Adjacency, PathResult};

pub const MAX_ORACLE_NODES: usize = 12;

struct Best {
    cost: f64,
    hops: usize,
    sequence: Vec<usize>,
}

/// Enumerate every simple station-to-station path and keep the cheapest,
/// with the same tie-breaking as the Dijkstra router.
pub fn oracle_shortest_path(
    snapshot: &GraphSnapshot,
    src: usize,
    dst: usize,
    node_delay_per_hop_ms: f64,
) -> Result<Option<PathResult>> {
    let nodes = snapshot.node_count();
    if nodes > MAX_ORACLE_NODES {
        return Err(Error::OracleTooLarge {
            nodes,
            limit: MAX_ORACLE_NODES,
        });
    }
    check_endpoints(snapshot, src, dst)?;

    // Plain edge list so the search does not share traversal code with the router.
    let mut edges: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nodes];
    for l in &snapshot.links {
        edges[l.a].push((l.b, l.propagation_delay_ms));
        edges[l.b].push((l.a, l.propagation_delay_ms));
    }

    let mut best: Option<Best> = None;
    let mut on_path = vec![false; nodes];
    let mut path = vec![src];
    on_path[src] = true;
    explore(
        snapshot,
        &edges,
        dst,
        node_delay_per_hop_ms,
        &mut path,
        &mut on_path,
        0.0,
        0,
        &mut best,
    );

    Ok(best.map(|b| {
        path_result(
            snapshot,
            &Adjacency::from_snapshot(snapshot),
            b.sequence,
            node_delay_per_hop_ms,
        )
    }))
}

#[allow(clippy::too_many_arguments)]
fn explore(
    snapshot: &GraphSnapshot,
    edges: &[Vec<(usize, f64)>],
    dst: usize,
    node_delay: f64,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    cost: f64,
    hops: usize,
    best: &mut Option<Best>,
) {
    let u = *path.last().expect("path starts at the source");
    if u == dst {
        let better = match best {
            None => true,
            Some(b) => {
                cost.total_cmp(&b.cost)
                    .then(hops.cmp(&b.hops))
                    .then_with(|| path.as_slice().cmp(b.sequence.as_slice()))
                    == Ordering::Less
            }
        };
        if better {
            *best = Some(Best {
                cost,
                hops,
                sequence: path.clone(),
            });
        }
        return;
    }
    if path.len() > 1 && !snapshot.is_satellite(u) {
        return;
    }
    for &(v, delay) in &edges[u] {
        if on_path[v] || (!snapshot.is_satellite(v) && v != dst) {
            continue;
        }
        on_path[v] = true;
        path.push(v);
        let next_cost = cost + folded_cost(snapshot, v, delay, node_delay);
        let next_hops = hops + usize::from(snapshot.is_satellite(v));
        explore(
            snapshot, edges, dst, node_delay, path, on_path, next_cost, next_hops, best,
        );
        path.pop();
        on_path[v] = false;
    }
}
