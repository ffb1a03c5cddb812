//! Start/goal scenario sampling with rejection of unstable endpoints.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::elevation::ElevationMap;
use crate::error::{Result, TrgError};
use crate::params::TrgParams;
use crate::risk::check_stability;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioClass {
    Short,
    Medium,
    Long,
}

impl ScenarioClass {
    pub fn nominal_distance_m(self) -> f64 {
        match self {
            ScenarioClass::Short => 10.0,
            ScenarioClass::Medium => 20.0,
            ScenarioClass::Long => 30.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScenarioClass::Short => "short",
            ScenarioClass::Medium => "medium",
            ScenarioClass::Long => "long",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct Scenario {
    pub start_xy: [f64; 2],
    pub goal_xy: [f64; 2],
    pub start_heading: f64,
    pub goal_heading: f64,
    pub nominal_distance: f64,
}

/// Rejection-samples `n` scenarios: stable endpoints, separation within
/// ±5% of the class nominal. Errors once the per-scenario attempt budget
/// (1000 each) is exhausted.
pub fn generate_scenarios(
    map: &ElevationMap,
    class: ScenarioClass,
    n: usize,
    seed: u64,
    params: &TrgParams,
) -> Result<Vec<Scenario>> {
    let nominal = class.nominal_distance_m();
    let [min_x, min_y, max_x, max_y] = map.bounds();
    let diag = ((max_x - min_x).powi(2) + (max_y - min_y).powi(2)).sqrt();
    if diag < nominal * 0.95 {
        return Err(TrgError::ScenarioBudget(format!(
            "{} (map too small: diag {diag:.1} m < {nominal} m)",
            class.name()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let budget = 1000 * n.max(1);
    let mut attempts = 0usize;
    while out.len() < n {
        if attempts >= budget {
            return Err(TrgError::ScenarioBudget(class.name().to_string()));
        }
        attempts += 1;
        let start = [
            rng.gen_range(min_x..=max_x),
            rng.gen_range(min_y..=max_y),
        ];
        let bearing = rng.gen_range(0.0..std::f64::consts::TAU);
        let d = nominal * rng.gen_range(0.95..=1.05);
        let goal = [start[0] + d * bearing.cos(), start[1] + d * bearing.sin()];
        let start_heading = rng.gen_range(0.0..std::f64::consts::TAU);
        let goal_heading = rng.gen_range(0.0..std::f64::consts::TAU);
        if goal[0] < min_x || goal[0] > max_x || goal[1] < min_y || goal[1] > max_y {
            continue;
        }
        if !check_stability(map, start, params).0 || !check_stability(map, goal, params).0 {
            continue;
        }
        out.push(Scenario {
            start_xy: start,
            goal_xy: goal,
            start_heading,
            goal_heading,
            nominal_distance: nominal,
        });
    }
    Ok(out)
}
