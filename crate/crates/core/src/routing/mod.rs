//! Minimum-latency routing between two ground stations over a snapshot.
//!
//! Latency of a path is the sum of its link propagation delays plus a fixed
//! node delay for every satellite it visits. The node delay is folded into
//! the weight of each edge that enters a satellite, so a plain Dijkstra over
//! non-negative edge weights gives the optimum. Ground stations other than
//! the endpoints never relay traffic.
//!
//! Ties on latency are broken by fewer satellite hops, then by the
//! lexicographically smallest node sequence.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::links::GraphSnapshot;

pub mod oracle;

/// One shortest path with its delay breakdown.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathResult {
    pub node_sequence: Vec<usize>,
    /// Number of satellites on the path.
    pub hop_count: usize,
    pub propagation_delay_ms: f64,
    pub node_delay_ms: f64,
    pub latency_ms: f64,
}

impl PathResult {
    pub fn labels(&self, snapshot: &GraphSnapshot) -> Vec<String> {
        self.node_sequence
            .iter()
            .map(|&n| snapshot.node_label(n))
            .collect()
    }
}

/// Undirected adjacency in compressed form, with per-edge propagation delay.
#[derive(Debug, Clone)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    delays_ms: Vec<f64>,
}

impl Adjacency {
    pub fn from_snapshot(snapshot: &GraphSnapshot) -> Self {
        let n = snapshot.node_count();
        let mut counts = vec![0usize; n + 1];
        for l in &snapshot.links {
            counts[l.a + 1] += 1;
            counts[l.b + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let offsets = counts.clone();
        let mut cursor = counts;
        let total = offsets[n];
        let mut targets = vec![0; total];
        let mut delays_ms = vec![0.0; total];
        for l in &snapshot.links {
            for (from, to) in [(l.a, l.b), (l.b, l.a)] {
                let slot = cursor[from];
                targets[slot] = to;
                delays_ms[slot] = l.propagation_delay_ms;
                cursor[from] += 1;
            }
        }
        Adjacency {
            offsets,
            targets,
            delays_ms,
        }
    }

    #[inline]
    pub fn neighbours(&self, node: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[node]..self.offsets[node + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.delays_ms[range].iter().copied())
    }

    pub fn delay_between(&self, a: usize, b: usize) -> Option<f64> {
        self.neighbours(a).find(|&(t, _)| t == b).map(|(_, d)| d)
    }
}

#[derive(Debug, Clone, Copy)]
struct QueueEntry {
    cost: f64,
    hops: usize,
    node: usize,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueEntry {}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueueEntry {
    // Reversed so that BinaryHeap pops the smallest entry.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.hops.cmp(&self.hops))
            .then_with(|| other.node.cmp(&self.node))
    }
}

pub(crate) fn check_endpoints(snapshot: &GraphSnapshot, src: usize, dst: usize) -> Result<()> {
    for (label, node) in [("source", src), ("destination", dst)] {
        if node >= snapshot.node_count() || snapshot.is_satellite(node) {
            return Err(Error::lookup(format!(
                "{label} node {node} is not a ground station of the snapshot"
            )));
        }
    }
    if src == dst {
        return Err(Error::lookup("source and destination are the same station"));
    }
    Ok(())
}

/// Edge cost used for ordering: propagation plus the node delay of the head satellite.
#[inline]
pub(crate) fn folded_cost(
    snapshot: &GraphSnapshot,
    head: usize,
    delay_ms: f64,
    node_delay_ms: f64,
) -> f64 {
    if snapshot.is_satellite(head) {
        delay_ms + node_delay_ms
    } else {
        delay_ms
    }
}

/// Minimum-latency path between ground stations `src` and `dst` (node indices).
pub fn shortest_path(
    snapshot: &GraphSnapshot,
    src: usize,
    dst: usize,
    node_delay_per_hop_ms: f64,
) -> Result<Option<PathResult>> {
    let adjacency = Adjacency::from_snapshot(snapshot);
    shortest_path_with(snapshot, &adjacency, src, dst, node_delay_per_hop_ms)
}

/// As [`shortest_path`], reusing a prebuilt adjacency of the same snapshot.
pub fn shortest_path_with(
    snapshot: &GraphSnapshot,
    adjacency: &Adjacency,
    src: usize,
    dst: usize,
    node_delay_per_hop_ms: f64,
) -> Result<Option<PathResult>> {
    check_endpoints(snapshot, src, dst)?;
    let n = snapshot.node_count();
    let mut cost = vec![f64::INFINITY; n];
    let mut hops = vec![usize::MAX; n];
    let mut pred = vec![usize::MAX; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();

    cost[src] = 0.0;
    hops[src] = 0;
    heap.push(QueueEntry {
        cost: 0.0,
        hops: 0,
        node: src,
    });

    while let Some(QueueEntry {
        cost: c,
        hops: h,
        node: u,
    }) = heap.pop()
    {
        if settled[u] || c != cost[u] || h != hops[u] {
            continue;
        }
        settled[u] = true;
        if u == dst {
            break;
        }
        // Stations only originate or terminate traffic.
        if u != src && !snapshot.is_satellite(u) {
            continue;
        }
        for (v, delay) in adjacency.neighbours(u) {
            if settled[v] {
                continue;
            }
            if !snapshot.is_satellite(v) && v != dst {
                continue;
            }
            let cand_cost = c + folded_cost(snapshot, v, delay, node_delay_per_hop_ms);
            let cand_hops = h + usize::from(snapshot.is_satellite(v));
            match cand_cost.total_cmp(&cost[v]).then(cand_hops.cmp(&hops[v])) {
                Ordering::Less => {
                    cost[v] = cand_cost;
                    hops[v] = cand_hops;
                    pred[v] = u;
                    heap.push(QueueEntry {
                        cost: cand_cost,
                        hops: cand_hops,
                        node: v,
                    });
                }
                Ordering::Equal => {
                    if extended(&pred, src, u, v) < extended(&pred, src, pred[v], v) {
                        pred[v] = u;
                    }
                }
                Ordering::Greater => {}
            }
        }
    }

    if !settled[dst] {
        return Ok(None);
    }
    let mut sequence = trace(&pred, src, dst);
    sequence.shrink_to_fit();
    Ok(Some(path_result(
        snapshot,
        adjacency,
        sequence,
        node_delay_per_hop_ms,
    )))
}

fn trace(pred: &[usize], src: usize, end: usize) -> Vec<usize> {
    let mut path = vec![end];
    let mut cur = end;
    while cur != src {
        cur = pred[cur];
        path.push(cur);
    }
    path.reverse();
    path
}

fn extended(pred: &[usize], src: usize, via: usize, head: usize) -> Vec<usize> {
    let mut path = trace(pred, src, via);
    path.push(head);
    path
}

/// Delay breakdown of a node sequence. Panics if consecutive nodes are not linked.
pub(crate) fn path_result(
    snapshot: &GraphSnapshot,
    adjacency: &Adjacency,
    node_sequence: Vec<usize>,
    node_delay_per_hop_ms: f64,
) -> PathResult {
    let propagation: f64 = node_sequence
        .windows(2)
        .map(|w| {
            adjacency
                .delay_between(w[0], w[1])
                .expect("path follows snapshot links")
        })
        .fold(0.0, |acc, d| acc + d);
    let hop_count = node_sequence
        .iter()
        .filter(|&&n| snapshot.is_satellite(n))
        .count();
    let node_delay = hop_count as f64 * node_delay_per_hop_ms;
    PathResult {
        node_sequence,
        hop_count,
        propagation_delay_ms: propagation,
        node_delay_ms: node_delay,
        latency_ms: propagation + node_delay,
    }
}
