//! Kinematic pure-pursuit traversal of a planned waypoint path, with a
//! slope-proportional lateral slip disturbance. The slip model is the one
//! deliberately unphysical component of the harness: lateral Gaussian noise
//! with sigma = slip_k * sin(local inclination).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::elevation::ElevationMap;
use crate::geom::dist2;
use crate::params::TrgParams;
use crate::plan::PlanResult;
use crate::risk::{check_stability, pca_plane};

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct FollowerParams {
    pub speed_mps: f64,
    pub dt_s: f64,
    pub lookahead_m: f64,
    /// Lateral slip scale (meters per step at 90 deg inclination).
    pub slip_k: f64,
    /// Goal acceptance radius; reaching within this of the final waypoint
    /// counts as arrival.
    pub goal_tolerance_m: f64,
    /// Declared stuck when path progress stalls this long.
    pub stall_timeout_s: f64,
    /// Declared off-path beyond this lateral deviation.
    pub max_deviation_m: f64,
}

impl Default for FollowerParams {
    fn default() -> Self {
        Self {
            speed_mps: 0.5,
            dt_s: 0.05,
            lookahead_m: 0.4,
            slip_k: 0.05,
            goal_tolerance_m: 0.2,
            stall_timeout_s: 5.0,
            max_deviation_m: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    Instability,
    Stuck,
    OffPath,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraversalResult {
    pub success: bool,
    pub l_trav: f64,
    /// Traversed poses as (x, y, heading).
    pub trace: Vec<[f64; 3]>,
    pub failure_reason: Option<FailureReason>,
}

/// Arc-length parameterized polyline in xy.
struct PathRef<'a> {
    pts: &'a [[f64; 3]],
    cum: Vec<f64>,
}

impl<'a> PathRef<'a> {
    fn new(pts: &'a [[f64; 3]]) -> Self {
        let mut cum = vec![0.0];
        for w in pts.windows(2) {
            let d = dist2([w[0][0], w[0][1]], [w[1][0], w[1][1]]);
            cum.push(cum.last().unwrap() + d);
        }
        Self { pts, cum }
    }

    fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    fn point_at(&self, s: f64) -> [f64; 2] {
        let s = s.clamp(0.0, self.total());
        let i = match self.cum.binary_search_by(|c| c.total_cmp(&s)) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        if i + 1 >= self.pts.len() {
            let p = self.pts[self.pts.len() - 1];
            return [p[0], p[1]];
        }
        let seg = self.cum[i + 1] - self.cum[i];
        let t = if seg > 0.0 { (s - self.cum[i]) / seg } else { 0.0 };
        let a = self.pts[i];
        let b = self.pts[i + 1];
        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
    }

    /// Arc length and lateral distance of the projection of `p`, searching
    /// forward from `s_hint` (monotone progress).
    fn project(&self, p: [f64; 2], s_hint: f64) -> (f64, f64) {
        let mut best_s = s_hint;
        let mut best_d = f64::INFINITY;
        // Coarse forward scan bounded to a window past the hint.
        let step = 0.02;
        let lo = s_hint;
        let hi = (s_hint + 2.0).min(self.total());
        let mut s = lo;
        while s <= hi {
            let q = self.point_at(s);
            let d = dist2(p, q);
            if d < best_d {
                best_d = d;
                best_s = s;
            }
            s += step;
        }
        (best_s, best_d)
    }
}

fn local_inclination(map: &ElevationMap, p: [f64; 2], params: &TrgParams) -> f64 {
    let samples = map.heights_in_disk(p, params.r_robot);
    match pca_plane(&samples) {
        Ok(plane) => plane.inclination_rad(),
        Err(_) => 0.0,
    }
}

/// Follows the waypoint path at fixed speed. Failure modes: stability
/// violation at the actual position, stalled progress, or excessive
/// lateral deviation. Deterministic per seed.
pub fn simulate_traversal(
    map: &ElevationMap,
    plan: &PlanResult,
    follower: &FollowerParams,
    params: &TrgParams,
    seed: u64,
) -> TraversalResult {
    let pts = &plan.waypoints;
    assert!(!pts.is_empty(), "empty waypoint path");
    let path = PathRef::new(pts);
    let goal = [pts[pts.len() - 1][0], pts[pts.len() - 1][1]];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();

    let mut pos = [pts[0][0], pts[0][1]];
    let mut z = pts[0][2];
    let mut heading = if pts.len() > 1 {
        (pts[1][1] - pts[0][1]).atan2(pts[1][0] - pts[0][0])
    } else {
        0.0
    };
    let mut trace = vec![[pos[0], pos[1], heading]];
    let mut l_trav = 0.0;
    let mut s_progress = 0.0;
    let mut stall_steps = 0usize;
    let stall_limit = (follower.stall_timeout_s / follower.dt_s).ceil() as usize;
    let max_steps =
        ((path.total() / follower.speed_mps) / follower.dt_s * 4.0).ceil() as usize + stall_limit;

    let mut outcome = None;
    for _ in 0..max_steps {
        if dist2(pos, goal) <= follower.goal_tolerance_m {
            outcome = Some(None);
            break;
        }
        // Pure pursuit toward the point lookahead ahead of our projection.
        let target = path.point_at(s_progress + follower.lookahead_m);
        let desired = (target[1] - pos[1]).atan2(target[0] - pos[0]);
        let mut err = desired - heading;
        while err > std::f64::consts::PI {
            err -= std::f64::consts::TAU;
        }
        while err < -std::f64::consts::PI {
            err += std::f64::consts::TAU;
        }
        // Curvature-limited turn: kappa = 2 sin(err) / lookahead.
        let omega = 2.0 * follower.speed_mps * err.sin() / follower.lookahead_m;
        heading += omega * follower.dt_s;
        let step = follower.speed_mps * follower.dt_s;
        let mut next = [
            pos[0] + step * heading.cos(),
            pos[1] + step * heading.sin(),
        ];
        if follower.slip_k > 0.0 {
            let sigma = follower.slip_k * local_inclination(map, next, params).sin();
            if sigma > 0.0 {
                let lateral = sigma * normal.sample(&mut rng);
                next[0] += -heading.sin() * lateral;
                next[1] += heading.cos() * lateral;
            }
        }
        let disk = map.heights_in_disk(next, params.r_robot);
        let next_z = if disk.is_empty() {
            z
        } else {
            crate::elevation::median_height(&disk).unwrap()
        };
        l_trav += (dist2(pos, next).powi(2) + (next_z - z).powi(2)).sqrt();
        pos = next;
        z = next_z;
        trace.push([pos[0], pos[1], heading]);

        if !check_stability(map, pos, params).0 {
            outcome = Some(Some(FailureReason::Instability));
            break;
        }
        let (s_new, lateral) = path.project(pos, s_progress);
        if lateral > follower.max_deviation_m {
            outcome = Some(Some(FailureReason::OffPath));
            break;
        }
        if s_new > s_progress + 1e-6 {
            s_progress = s_new;
            stall_steps = 0;
        } else {
            stall_steps += 1;
            if stall_steps >= stall_limit {
                outcome = Some(Some(FailureReason::Stuck));
                break;
            }
        }
    }
    let failure = match outcome {
        Some(None) => None,
        Some(Some(reason)) => Some(reason),
        None => Some(FailureReason::Stuck), // ran out of steps
    };
    TraversalResult {
        success: failure.is_none(),
        l_trav,
        trace,
        failure_reason: failure,
    }
}
