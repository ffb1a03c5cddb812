//! Comparison planners: 8-connected grid A* and PRM*. Both share the TRG
//! stability test as their free-space notion and the same post-smoothing.

use std::collections::{BinaryHeap, HashMap};
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::elevation::ElevationMap;
use crate::error::Result;
use crate::geom::{dist2, dist3, polyline_len};
use crate::graph::{NodeId, NodeState, TrgGraph};
use crate::params::TrgParams;
use crate::plan::{smooth_path, EdgeCost, PlanOutcome, PlanResult};
use crate::risk::{check_stability, edge_feasible};

/// Lazily evaluated per-cell stability (free-space) cache.
struct Occupancy<'a> {
    map: &'a ElevationMap,
    params: &'a TrgParams,
    cache: HashMap<(usize, usize), Option<f64>>,
}

impl<'a> Occupancy<'a> {
    fn new(map: &'a ElevationMap, params: &'a TrgParams) -> Self {
        Self {
            map,
            params,
            cache: HashMap::new(),
        }
    }

    /// Median height when the cell center is standable, else None.
    fn free(&mut self, cell: (usize, usize)) -> Option<f64> {
        let map = self.map;
        let params = self.params;
        *self.cache.entry(cell).or_insert_with(|| {
            let p = map.cell_center(cell.0, cell.1);
            match check_stability(map, p, params) {
                (true, z) => z,
                _ => None,
            }
        })
    }
}

#[derive(PartialEq)]
struct GridEntry {
    f: f64,
    g: f64,
    cell: (usize, usize),
}

impl Eq for GridEntry {}
impl Ord for GridEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(other.g.total_cmp(&self.g))
            .then(other.cell.cmp(&self.cell).reverse())
    }
}
impl PartialOrd for GridEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

fn octile(a: (usize, usize), b: (usize, usize), res: f64) -> f64 {
    let dx = (a.0 as f64 - b.0 as f64).abs();
    let dy = (a.1 as f64 - b.1 as f64).abs();
    let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
    res * (hi - lo + std::f64::consts::SQRT_2 * lo)
}

/// 8-connected grid A*; a cell is free iff the stability test passes at its
/// center. Diagonal moves cost sqrt(2)*res and require both orthogonal
/// neighbors free.
pub fn baseline_astar_grid(
    map: &ElevationMap,
    start: [f64; 2],
    goal: [f64; 2],
    params: &TrgParams,
    smooth_window: usize,
) -> Result<PlanOutcome> {
    let t0 = Instant::now();
    let (Some(start_cell), Some(goal_cell)) = (map.world_to_cell(start), map.world_to_cell(goal))
    else {
        return Ok(PlanOutcome::Unreachable);
    };
    let mut occ = Occupancy::new(map, params);
    if occ.free(start_cell).is_none() || occ.free(goal_cell).is_none() {
        return Ok(PlanOutcome::Unreachable);
    }
    let res = map.resolution();
    let mut g_cost: HashMap<(usize, usize), f64> = HashMap::new();
    let mut parent: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    let mut heap = BinaryHeap::new();
    g_cost.insert(start_cell, 0.0);
    heap.push(GridEntry {
        f: octile(start_cell, goal_cell, res),
        g: 0.0,
        cell: start_cell,
    });
    let (w, h) = (map.width_cells(), map.height_cells());
    let mut found = false;
    while let Some(e) = heap.pop() {
        if e.g > g_cost.get(&e.cell).copied().unwrap_or(f64::INFINITY) {
            continue;
        }
        if e.cell == goal_cell {
            found = true;
            break;
        }
        for dx in -1i64..=1 {
            for dy in -1i64..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let nx = e.cell.0 as i64 + dx;
                let ny = e.cell.1 as i64 + dy;
                if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                    continue;
                }
                let nb = (nx as usize, ny as usize);
                if occ.free(nb).is_none() {
                    continue;
                }
                let step = if dx != 0 && dy != 0 {
                    // no corner cutting past blocked orthogonals
                    let o1 = (nb.0, e.cell.1);
                    let o2 = (e.cell.0, nb.1);
                    if occ.free(o1).is_none() || occ.free(o2).is_none() {
                        continue;
                    }
                    std::f64::consts::SQRT_2 * res
                } else {
                    res
                };
                let g = e.g + step;
                if g < g_cost.get(&nb).copied().unwrap_or(f64::INFINITY) {
                    g_cost.insert(nb, g);
                    parent.insert(nb, e.cell);
                    heap.push(GridEntry {
                        f: g + octile(nb, goal_cell, res),
                        g,
                        cell: nb,
                    });
                }
            }
        }
    }
    if !found {
        return Ok(PlanOutcome::Unreachable);
    }
    let mut cells = vec![goal_cell];
    while let Some(&p) = parent.get(cells.last().unwrap()) {
        cells.push(p);
    }
    cells.reverse();
    let positions: Vec<[f64; 3]> = cells
        .iter()
        .map(|&c| {
            let p = map.cell_center(c.0, c.1);
            let z = occ.free(c).unwrap_or(0.0);
            [p[0], p[1], z]
        })
        .collect();
    let l_path = polyline_len(&positions);
    let edge_costs: Vec<EdgeCost> = positions
        .windows(2)
        .map(|w| EdgeCost {
            d: dist3(w[0], w[1]),
            w: 0.0,
        })
        .collect();
    let waypoints = smooth_path(map, &positions, smooth_window, params.r_robot);
    Ok(PlanOutcome::Planned(PlanResult {
        node_path: Vec::new(),
        waypoints,
        edge_costs,
        total_cost: g_cost[&goal_cell],
        l_path,
        w_norm: 0.0,
        is_subgoal: false,
        planning_time: t0.elapsed(),
    }))
}

/// A PRM* roadmap over uniform stable samples, reusable across queries.
pub struct PrmRoadmap {
    pub graph: TrgGraph,
    pub connect_radius: f64,
}

/// Builds the roadmap: `n_samples` uniform stable samples, connected
/// within the PRM* radius `gamma_prm * sqrt(log n / n)`, edges validated by
/// the same feasibility gates as TRG edges. Deterministic per seed.
pub fn build_prm_star(
    map: &ElevationMap,
    n_samples: usize,
    seed: u64,
    params: &TrgParams,
) -> Result<PrmRoadmap> {
    let [min_x, min_y, max_x, max_y] = map.bounds();
    let area = (max_x - min_x) * (max_y - min_y);
    let n = n_samples.max(2);
    // gamma_prm > 2*sqrt(1.5 * area / pi) satisfies the asymptotic
    // optimality bound in 2D (free-space measure approximated by map area).
    let gamma_prm = 2.0 * (1.5 * area / std::f64::consts::PI).sqrt();
    let connect_radius = (gamma_prm * ((n as f64).ln() / n as f64).sqrt())
        .max(2.0 * map.resolution());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut graph = TrgGraph::new(connect_radius.max(params.r_exp));
    let mut attempts = 0usize;
    let budget = 100 * n;
    while graph.node_count() < n && attempts < budget {
        attempts += 1;
        let p = [
            rng.gen_range(min_x..=max_x),
            rng.gen_range(min_y..=max_y),
        ];
        let (stable, z) = check_stability(map, p, params);
        if !stable {
            continue;
        }
        graph.add_node([p[0], p[1], z.unwrap()], NodeState::Valid);
    }
    let ids: Vec<NodeId> = graph.node_ids().collect();
    for &id in &ids {
        let p = graph.node(id).unwrap().position;
        for other in graph.nodes_within([p[0], p[1]], connect_radius) {
            if other <= id || graph.edge(id, other).is_some() {
                continue;
            }
            let q = graph.node(other).unwrap().position;
            if let Ok((true, _)) = edge_feasible(map, p, q, params) {
                graph.add_edge(id, other, dist3(p, q), 0.0);
            }
        }
    }
    // Isolated samples cannot be used.
    for id in ids {
        if graph.degree(id) == 0 {
            graph.set_state(id, NodeState::Invalid);
        }
    }
    Ok(PrmRoadmap { graph, connect_radius })
}

/// Distance-only A* over the roadmap; start/goal attach to the nearest
/// connectable sample within the connection radius.
pub fn prm_star_query(
    roadmap: &PrmRoadmap,
    map: &ElevationMap,
    start: [f64; 2],
    goal: [f64; 2],
    params: &TrgParams,
    smooth_window: usize,
) -> Result<PlanOutcome> {
    let t0 = Instant::now();
    let graph = &roadmap.graph;
    let attach = |p: [f64; 2]| -> Option<NodeId> {
        graph
            .nodes_within(p, roadmap.connect_radius)
            .into_iter()
            .filter(|id| graph.node(*id).unwrap().state.is_traversable())
            .min_by(|a, b| {
                let da = dist2([graph.node(*a).unwrap().position[0], graph.node(*a).unwrap().position[1]], p);
                let db = dist2([graph.node(*b).unwrap().position[0], graph.node(*b).unwrap().position[1]], p);
                da.total_cmp(&db).then(a.cmp(b))
            })
    };
    let (Some(s), Some(g)) = (attach(start), attach(goal)) else {
        return Ok(PlanOutcome::Unreachable);
    };
    let mut query = crate::plan::PlanQuery::new(
        [graph.node(s).unwrap().position[0], graph.node(s).unwrap().position[1]],
        [graph.node(g).unwrap().position[0], graph.node(g).unwrap().position[1]],
        0.0,
    );
    query.smooth_window = smooth_window;
    let outcome = crate::plan::plan(graph, map, params, &query)?;
    // Planning time includes attachment.
    Ok(match outcome {
        PlanOutcome::Planned(mut r) => {
            r.planning_time = t0.elapsed();
            PlanOutcome::Planned(r)
        }
        u => u,
    })
}
