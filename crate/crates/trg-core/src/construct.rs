//! Wavefront TRG construction: sample rings around reference nodes,
//! classify samples (discard / merge / add), and wire feasible edges until
//! the expansion queue drains.

use std::collections::VecDeque;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::elevation::ElevationMap;
use crate::error::{Result, TrgError};
use crate::geom::{dist3, xy};
use crate::graph::{NodeId, NodeState, TrgGraph};
use crate::params::TrgParams;
use crate::risk::{check_stability, edge_feasible, edge_risk};

/// Outcome of classifying one ring sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleOutcome {
    Discard,
    Merge(NodeId),
    Add(NodeId),
}

/// `n` points at exact radius `r_exp` around `center`, angles uniform on
/// `[0, 2pi)`. Consumes the rng sequentially, so a fixed seed reproduces
/// the sequence.
pub fn sample_ring(
    center: [f64; 2],
    r_exp: f64,
    rng: &mut impl Rng,
    n: usize,
) -> Vec<[f64; 2]> {
    (0..n)
        .map(|_| {
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            [
                center[0] + r_exp * angle.cos(),
                center[1] + r_exp * angle.sin(),
            ]
        })
        .collect()
}

/// Samples drawn per queue pop: enough to cover the expansion ring at
/// roughly node-radius spacing.
pub fn samples_per_expansion(params: &TrgParams) -> usize {
    (std::f64::consts::TAU * params.r_exp / params.r_robot).ceil() as usize
}

/// Attempts to wire an undirected edge; silently skips edges that already
/// exist, are degenerate, or fail the feasibility gates.
fn try_wire(
    graph: &mut TrgGraph,
    map: &ElevationMap,
    a: NodeId,
    b: NodeId,
    params: &TrgParams,
) -> bool {
    if a == b || graph.edge(a, b).is_some() {
        return false;
    }
    let p_a = graph.node(a).unwrap().position;
    let p_b = graph.node(b).unwrap().position;
    let (ok, samples) = match edge_feasible(map, p_a, p_b, params) {
        Ok(r) => r,
        Err(TrgError::DegenerateEdge) => return false,
        Err(_) => return false,
    };
    if !ok {
        return false;
    }
    let Ok(w) = edge_risk(p_a, p_b, &samples, params) else {
        return false;
    };
    graph.add_edge(a, b, dist3(p_a, p_b), w);
    // Both endpoints passed stability when inserted; with an edge they
    // become Valid unless currently Frontier.
    for id in [a, b] {
        if graph.node(id).unwrap().state == NodeState::Invalid {
            graph.set_state(id, NodeState::Valid);
        }
    }
    true
}

/// Classifies one sampled position against the graph and applies the
/// outcome: discard unstable samples, merge samples that land on an
/// existing node (wiring an edge to the reference), or add a new node and
/// wire it to everything within `r_exp`.
pub fn classify_sample(
    graph: &mut TrgGraph,
    map: &ElevationMap,
    sample_xy: [f64; 2],
    v_ref: NodeId,
    params: &TrgParams,
) -> SampleOutcome {
    let (stable, median_z) = check_stability(map, sample_xy, params);
    if !stable {
        return SampleOutcome::Discard;
    }
    if let Some((existing, d)) = graph.nearest_node(sample_xy) {
        if d <= params.r_robot {
            try_wire(graph, map, v_ref, existing, params);
            return SampleOutcome::Merge(existing);
        }
    }
    let z = median_z.expect("stable implies samples");
    let new_id = graph.add_node([sample_xy[0], sample_xy[1], z], NodeState::Invalid);
    try_wire(graph, map, new_id, v_ref, params);
    for other in graph.nodes_within(sample_xy, params.r_exp) {
        if other != new_id && other != v_ref {
            try_wire(graph, map, new_id, other, params);
        }
    }
    if graph.degree(new_id) == 0 {
        // Unwirable node; dropping it now keeps "Valid implies degree >= 1".
        graph.remove_node(new_id);
        return SampleOutcome::Discard;
    }
    SampleOutcome::Add(new_id)
}

/// Runs the expansion loop until the queue drains. Returns ids of nodes
/// added by this call.
pub(crate) fn expand_loop(
    graph: &mut TrgGraph,
    map: &ElevationMap,
    queue: &mut VecDeque<NodeId>,
    params: &TrgParams,
    rng: &mut ChaCha8Rng,
) -> Vec<NodeId> {
    let n = samples_per_expansion(params);
    let mut added = Vec::new();
    while let Some(v_ref) = queue.pop_front() {
        let Some(node) = graph.node(v_ref) else {
            continue;
        };
        let center = xy(node.position);
        for sample in sample_ring(center, params.r_exp, rng, n) {
            if let SampleOutcome::Add(id) = classify_sample(graph, map, sample, v_ref, params) {
                queue.push_back(id);
                added.push(id);
            }
        }
    }
    added
}

/// Builds the initial TRG by wavefront propagation from `p_start`.
/// Deterministic for a fixed seed.
pub fn build_trg(
    map: &ElevationMap,
    p_start: [f64; 2],
    params: &TrgParams,
    seed: u64,
) -> Result<TrgGraph> {
    params.validate()?;
    let (stable, median_z) = check_stability(map, p_start, params);
    if !stable {
        return Err(TrgError::StartNotStandable);
    }
    let mut graph = TrgGraph::new(params.r_exp);
    let start = graph.add_node(
        [p_start[0], p_start[1], median_z.unwrap()],
        NodeState::Invalid,
    );
    let mut queue = VecDeque::from([start]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    expand_loop(&mut graph, map, &mut queue, params, &mut rng);
    debug_assert!(graph.check_consistency());
    Ok(graph)
}
