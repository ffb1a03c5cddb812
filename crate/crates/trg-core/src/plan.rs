//! Risk-aware A* on the TRG, sub-goal selection, replanning checks, and
//! moving-average path smoothing.
//!
//! Edge costs are `d * (Gamma * w + 1)`; the heuristic is the straight-line
//! 3D distance to the goal node, which never exceeds the remaining cost
//! (every edge costs at least its length).

use std::collections::{BinaryHeap, HashMap};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::elevation::{median_height, ElevationMap};
use crate::error::{Result, TrgError};
use crate::geom::{dist2, dist3, polyline_len, xy};
use crate::graph::{NodeId, NodeState, TrgGraph};
use crate::params::TrgParams;

#[derive(Debug, Clone, Copy)]
pub struct PlanQuery {
    pub start_xy: [f64; 2],
    pub goal_xy: [f64; 2],
    /// Safety factor Gamma >= 0 trading distance against risk.
    pub safety_factor: f64,
    /// Moving-average window for post-smoothing (odd).
    pub smooth_window: usize,
}

impl PlanQuery {
    pub fn new(start_xy: [f64; 2], goal_xy: [f64; 2], safety_factor: f64) -> Self {
        Self {
            start_xy,
            goal_xy,
            safety_factor,
            smooth_window: 5,
        }
    }
}

/// Distance and weight of one traversed edge, in path order.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct EdgeCost {
    pub d: f64,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub node_path: Vec<NodeId>,
    /// Smoothed waypoints, z re-sampled from the terrain.
    pub waypoints: Vec<[f64; 3]>,
    pub edge_costs: Vec<EdgeCost>,
    pub total_cost: f64,
    pub l_path: f64,
    /// Normalized path risk: sum of edge weights over l_path.
    pub w_norm: f64,
    pub is_subgoal: bool,
    pub planning_time: Duration,
}

impl PlanResult {
    pub fn sum_d(&self) -> f64 {
        self.edge_costs.iter().map(|e| e.d).sum()
    }

    pub fn sum_dw(&self) -> f64 {
        self.edge_costs.iter().map(|e| e.d * e.w).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanOutcome {
    Planned(PlanResult),
    Unreachable,
}

impl PlanOutcome {
    pub fn planned(&self) -> Option<&PlanResult> {
        match self {
            PlanOutcome::Planned(r) => Some(r),
            PlanOutcome::Unreachable => None,
        }
    }
}

/// Frontier node nearest to `goal_xy` in xy; ties by smaller id.
pub fn select_subgoal(graph: &TrgGraph, goal_xy: [f64; 2]) -> Option<NodeId> {
    graph
        .nodes()
        .filter(|n| n.state == NodeState::Frontier)
        .min_by(|a, b| {
            let da = dist2(xy(a.position), goal_xy);
            let db = dist2(xy(b.position), goal_xy);
            da.total_cmp(&db).then(a.id.cmp(&b.id))
        })
        .map(|n| n.id)
}

/// True iff every path node is traversable and consecutive pairs are still
/// edge-connected.
pub fn path_valid(graph: &TrgGraph, result: &PlanResult) -> bool {
    if result
        .node_path
        .iter()
        .any(|id| !matches!(graph.node(*id), Some(n) if n.state.is_traversable()))
    {
        return false;
    }
    result
        .node_path
        .windows(2)
        .all(|w| graph.edge(w[0], w[1]).is_some())
}

/// Centered moving average over xy with the window clamped symmetrically
/// near the ends (endpoints stay fixed). Each smoothed z is re-sampled as
/// the median terrain height in a disk of `sample_radius` at the new xy;
/// points with no terrain samples keep their original z.
pub fn smooth_path(
    map: &ElevationMap,
    waypoints: &[[f64; 3]],
    window: usize,
    sample_radius: f64,
) -> Vec<[f64; 3]> {
    assert!(window >= 1 && window % 2 == 1, "window must be odd");
    let n = waypoints.len();
    if n <= 2 || window == 1 {
        return waypoints.to_vec();
    }
    let half = window / 2;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let h = half.min(i).min(n - 1 - i);
        let lo = i - h;
        let hi = i + h;
        let m = (hi - lo + 1) as f64;
        let sx: f64 = waypoints[lo..=hi].iter().map(|p| p[0]).sum();
        let sy: f64 = waypoints[lo..=hi].iter().map(|p| p[1]).sum();
        let p = [sx / m, sy / m];
        let samples = map.heights_in_disk(p, sample_radius);
        let z = if samples.is_empty() {
            waypoints[i][2]
        } else {
            median_height(&samples).expect("non-empty")
        };
        out.push([p[0], p[1], z]);
    }
    out
}

/// Priority-queue entry ordered by (f, g, id) ascending.
#[derive(PartialEq)]
struct QueueEntry {
    f: f64,
    g: f64,
    id: NodeId,
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Reversed so BinaryHeap pops the smallest.
        other
            .f
            .total_cmp(&self.f)
            .then(other.g.total_cmp(&self.g))
            .then(other.id.cmp(&self.id))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A* from the node nearest the query start to the goal (or a frontier
/// sub-goal when the goal is off-graph). Only traversable nodes are
/// expanded.
pub fn plan(
    graph: &TrgGraph,
    map: &ElevationMap,
    params: &TrgParams,
    query: &PlanQuery,
) -> Result<PlanOutcome> {
    if query.safety_factor < 0.0 {
        return Err(TrgError::InvalidParam("Gamma must be >= 0".into()));
    }
    let t0 = Instant::now();
    let Some(start) = graph.nearest_traversable_within(query.start_xy, params.r_exp) else {
        return Err(TrgError::StartUnattachable);
    };
    let (goal, is_subgoal) =
        match graph.nearest_traversable_within(query.goal_xy, params.r_exp) {
            Some(id) => (id, false),
            None => match select_subgoal(graph, query.goal_xy) {
                Some(id) => (id, true),
                None => return Ok(PlanOutcome::Unreachable),
            },
        };
    let goal_pos = graph.node(goal).unwrap().position;
    let gamma_big = query.safety_factor;

    let mut g_cost: HashMap<NodeId, f64> = HashMap::new();
    let mut parent: HashMap<NodeId, NodeId> = HashMap::new();
    let mut heap = BinaryHeap::new();
    g_cost.insert(start, 0.0);
    heap.push(QueueEntry {
        f: dist3(graph.node(start).unwrap().position, goal_pos),
        g: 0.0,
        id: start,
    });
    let mut found = false;
    while let Some(entry) = heap.pop() {
        if entry.g > g_cost.get(&entry.id).copied().unwrap_or(f64::INFINITY) {
            continue;
        }
        if entry.id == goal {
            found = true;
            break;
        }
        for (nb, edge) in graph.neighbors(entry.id) {
            if !graph.node(nb).unwrap().state.is_traversable() {
                continue;
            }
            let g = entry.g + edge.dist * (gamma_big * edge.weight + 1.0);
            if g < g_cost.get(&nb).copied().unwrap_or(f64::INFINITY) - 1e-15 {
                g_cost.insert(nb, g);
                parent.insert(nb, entry.id);
                heap.push(QueueEntry {
                    f: g + dist3(graph.node(nb).unwrap().position, goal_pos),
                    g,
                    id: nb,
                });
            }
        }
    }
    if !found {
        return Ok(PlanOutcome::Unreachable);
    }

    let mut node_path = vec![goal];
    while let Some(&p) = parent.get(node_path.last().unwrap()) {
        node_path.push(p);
    }
    node_path.reverse();

    let positions: Vec<[f64; 3]> = node_path
        .iter()
        .map(|id| graph.node(*id).unwrap().position)
        .collect();
    let edge_costs: Vec<EdgeCost> = node_path
        .windows(2)
        .map(|w| {
            let e = graph.edge(w[0], w[1]).unwrap();
            EdgeCost { d: e.dist, w: e.weight }
        })
        .collect();
    let l_path = polyline_len(&positions);
    let w_norm = if l_path > 0.0 {
        edge_costs.iter().map(|e| e.w).sum::<f64>() / l_path
    } else {
        0.0
    };
    let waypoints = smooth_path(map, &positions, query.smooth_window, params.r_robot);
    Ok(PlanOutcome::Planned(PlanResult {
        node_path,
        waypoints,
        edge_costs,
        total_cost: g_cost[&goal],
        l_path,
        w_norm,
        is_subgoal,
        planning_time: t0.elapsed(),
    }))
}
