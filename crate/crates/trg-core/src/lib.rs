//! Terrain-aware global path planning on a traversal risk graph (TRG).
//!
//! The pipeline: load a 2.5D elevation map ([`ElevationMap`]), grow a risk
//! graph outward from a start position ([`construct::build_trg`]), keep it
//! fresh as the robot moves ([`manage`]), and search it with a
//! distance-plus-risk cost ([`plan`]). [`sim`] holds the synthetic-terrain
//! benchmark harness with grid A* and PRM* baselines.

pub mod construct;
pub mod elevation;
pub mod error;
pub mod geom;
pub mod graph;
pub mod manage;
pub mod params;
pub mod plan;
pub mod risk;
pub mod sim;
mod spatial;

pub use construct::build_trg;
pub use elevation::{ElevationMap, HeightSample, MapFormat};
pub use error::{Result, TrgError};
pub use graph::{EdgeKey, NodeId, NodeState, TrgEdge, TrgGraph, TrgNode};
pub use params::{LocalUpdateParams, Strategy, TrgParams};
pub use plan::{PlanOutcome, PlanQuery, PlanResult};
