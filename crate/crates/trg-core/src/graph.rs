//! The traversal risk graph: nodes, undirected weighted edges, and a
//! spatial index kept consistent with the node set.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geom::{dist2, xy};
use crate::spatial::GridIndex;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct NodeId(pub u64);

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Undirected edge key, endpoints ordered (smaller id first).
pub type EdgeKey = (NodeId, NodeId);

pub fn edge_key(a: NodeId, b: NodeId) -> EdgeKey {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeState {
    Valid,
    Invalid,
    /// A stable node on the graph boundary; traversable like Valid and a
    /// candidate sub-goal / expansion seed.
    Frontier,
}

impl NodeState {
    /// Frontier is a sub-state of Valid for planning purposes.
    pub fn is_traversable(self) -> bool {
        matches!(self, NodeState::Valid | NodeState::Frontier)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrgNode {
    pub id: NodeId,
    pub position: [f64; 3],
    pub state: NodeState,
    pub edges: BTreeSet<EdgeKey>,
}

impl TrgNode {
    pub fn degree(&self) -> usize {
        self.edges.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrgEdge {
    pub from_id: NodeId,
    pub to_id: NodeId,
    pub dist: f64,
    pub weight: f64,
}

impl TrgEdge {
    pub fn other(&self, id: NodeId) -> NodeId {
        if id == self.from_id {
            self.to_id
        } else {
            self.from_id
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrgGraph {
    nodes: BTreeMap<NodeId, TrgNode>,
    edges: BTreeMap<EdgeKey, TrgEdge>,
    index: GridIndex,
    next_id: u64,
}

impl TrgGraph {
    /// `index_cell` sizes the spatial-index buckets; r_exp works well.
    pub fn new(index_cell: f64) -> Self {
        Self {
            nodes: BTreeMap::new(),
            edges: BTreeMap::new(),
            index: GridIndex::new(index_cell),
            next_id: 0,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node(&self, id: NodeId) -> Option<&TrgNode> {
        self.nodes.get(&id)
    }

    pub fn edge(&self, a: NodeId, b: NodeId) -> Option<&TrgEdge> {
        self.edges.get(&edge_key(a, b))
    }

    pub fn nodes(&self) -> impl Iterator<Item = &TrgNode> {
        self.nodes.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = &TrgEdge> {
        self.edges.values()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn add_node(&mut self, position: [f64; 3], state: NodeState) -> NodeId {
        let id = NodeId(self.next_id);
        self.next_id += 1;
        self.index.insert(id, xy(position));
        self.nodes.insert(
            id,
            TrgNode {
                id,
                position,
                state,
                edges: BTreeSet::new(),
            },
        );
        id
    }

    pub fn set_state(&mut self, id: NodeId, state: NodeState) {
        if let Some(n) = self.nodes.get_mut(&id) {
            n.state = state;
        }
    }

    pub fn set_z(&mut self, id: NodeId, z: f64) {
        if let Some(n) = self.nodes.get_mut(&id) {
            n.position[2] = z;
        }
    }

    /// Removes a node and all incident edges.
    pub fn remove_node(&mut self, id: NodeId) {
        let Some(node) = self.nodes.remove(&id) else {
            return;
        };
        self.index.remove(id, xy(node.position));
        for key in node.edges {
            self.edges.remove(&key);
            let other = if key.0 == id { key.1 } else { key.0 };
            if let Some(n) = self.nodes.get_mut(&other) {
                n.edges.remove(&key);
            }
        }
    }

    /// Inserts an undirected edge; replaces the weight when already present.
    pub fn add_edge(&mut self, a: NodeId, b: NodeId, dist: f64, weight: f64) {
        assert!(a != b, "self-edge");
        assert!(self.nodes.contains_key(&a) && self.nodes.contains_key(&b));
        let key = edge_key(a, b);
        self.edges.insert(
            key,
            TrgEdge {
                from_id: key.0,
                to_id: key.1,
                dist,
                weight,
            },
        );
        self.nodes.get_mut(&a).unwrap().edges.insert(key);
        self.nodes.get_mut(&b).unwrap().edges.insert(key);
    }

    pub fn remove_edge(&mut self, a: NodeId, b: NodeId) {
        let key = edge_key(a, b);
        if self.edges.remove(&key).is_some() {
            if let Some(n) = self.nodes.get_mut(&key.0) {
                n.edges.remove(&key);
            }
            if let Some(n) = self.nodes.get_mut(&key.1) {
                n.edges.remove(&key);
            }
        }
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.nodes.get(&id).map_or(0, |n| n.edges.len())
    }

    /// Neighbor ids with the connecting edge, in deterministic order.
    pub fn neighbors(&self, id: NodeId) -> Vec<(NodeId, &TrgEdge)> {
        let Some(node) = self.nodes.get(&id) else {
            return Vec::new();
        };
        node.edges
            .iter()
            .filter_map(|k| self.edges.get(k))
            .map(|e| (e.other(id), e))
            .collect()
    }

    /// Node ids with xy position within `radius` of `p`, sorted by id.
    pub fn nodes_within(&self, p: [f64; 2], radius: f64) -> Vec<NodeId> {
        self.index.within(p, radius)
    }

    pub fn nearest_node(&self, p: [f64; 2]) -> Option<(NodeId, f64)> {
        self.index.nearest(p)
    }

    /// Nearest traversable (Valid/Frontier) node within `radius` of `p`.
    pub fn nearest_traversable_within(&self, p: [f64; 2], radius: f64) -> Option<NodeId> {
        self.nodes_within(p, radius)
            .into_iter()
            .filter(|id| self.nodes[id].state.is_traversable())
            .min_by(|a, b| {
                let da = dist2(xy(self.nodes[a].position), p);
                let db = dist2(xy(self.nodes[b].position), p);
                da.total_cmp(&db).then(a.cmp(b))
            })
    }

    /// Checks index/edge-set consistency; used after mutation batches.
    pub fn check_consistency(&self) -> bool {
        if self.index.len() != self.nodes.len() {
            return false;
        }
        for (key, edge) in &self.edges {
            if edge_key(edge.from_id, edge.to_id) != *key {
                return false;
            }
            for id in [key.0, key.1] {
                match self.nodes.get(&id) {
                    Some(n) if n.edges.contains(key) => {}
                    _ => return false,
                }
            }
        }
        for (id, node) in &self.nodes {
            for key in &node.edges {
                if !self.edges.contains_key(key) || (key.0 != *id && key.1 != *id) {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_json(&self) -> serde_json::Value {
        let doc = GraphDoc::from(self);
        serde_json::to_value(doc).expect("graph serialization")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&GraphDoc::from(self)).expect("graph serialization")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: GraphDoc = serde_json::from_str(s)?;
        Ok(doc.into_graph())
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        Self::from_json_str(&s)
    }
}

#[derive(Serialize, Deserialize)]
struct NodeDoc {
    id: u64,
    x: f64,
    y: f64,
    z: f64,
    state: NodeState,
}

#[derive(Serialize, Deserialize)]
struct EdgeDoc {
    from: u64,
    to: u64,
    dist: f64,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    index_cell: f64,
    nodes: Vec<NodeDoc>,
    edges: Vec<EdgeDoc>,
}

impl From<&TrgGraph> for GraphDoc {
    fn from(g: &TrgGraph) -> Self {
        GraphDoc {
            index_cell: g.index_cell(),
            nodes: g
                .nodes()
                .map(|n| NodeDoc {
                    id: n.id.0,
                    x: n.position[0],
                    y: n.position[1],
                    z: n.position[2],
                    state: n.state,
                })
                .collect(),
            edges: g
                .edges()
                .map(|e| EdgeDoc {
                    from: e.from_id.0,
                    to: e.to_id.0,
                    dist: e.dist,
                    weight: e.weight,
                })
                .collect(),
        }
    }
}

impl GraphDoc {
    fn into_graph(self) -> TrgGraph {
        let mut g = TrgGraph::new(self.index_cell);
        for n in &self.nodes {
            let id = NodeId(n.id);
            g.index.insert(id, [n.x, n.y]);
            g.nodes.insert(
                id,
                TrgNode {
                    id,
                    position: [n.x, n.y, n.z],
                    state: n.state,
                    edges: BTreeSet::new(),
                },
            );
            g.next_id = g.next_id.max(n.id + 1);
        }
        for e in &self.edges {
            g.add_edge(NodeId(e.from), NodeId(e.to), e.dist, e.weight);
        }
        g
    }
}

impl TrgGraph {
    fn index_cell(&self) -> f64 {
        self.index.cell()
    }
}
