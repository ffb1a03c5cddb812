//! Desk-scale benchmark harness: synthetic terrain, scenario sampling,
//! baseline planners (grid A*, PRM*), a pure-pursuit traversal simulator,
//! metric computation, and sweep aggregation.

pub mod baseline;
pub mod bench;
pub mod metrics;
pub mod scenario;
pub mod terrain;
pub mod traverse;

pub use bench::{run_benchmark, BenchConfig, BenchReport, PlannerSpec};
pub use metrics::compute_metrics;
pub use scenario::{generate_scenarios, Scenario, ScenarioClass};
pub use terrain::{generate_terrain, Feature, TerrainSpec};
pub use traverse::{simulate_traversal, FollowerParams, TraversalResult};
