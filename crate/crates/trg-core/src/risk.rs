//! Per-node stability, edge feasibility gates, and the PCA-based
//! directional risk weight on edges.

use nalgebra::{Matrix3, Vector3};

use crate::elevation::{median_height, ElevationMap, HeightSample};
use crate::error::{Result, TrgError};
use crate::graph::NodeState;
use crate::params::TrgParams;

/// Geometric stability test over the robot-sized disk at `p_xy`.
///
/// Stable iff the disk holds at least `min_plane_samples` height samples and
/// every sample deviates from the median by less than `h_max`. Returns the
/// median when any samples exist.
pub fn check_stability(
    map: &ElevationMap,
    p_xy: [f64; 2],
    params: &TrgParams,
) -> (bool, Option<f64>) {
    let samples = map.heights_in_disk(p_xy, params.r_robot);
    if samples.is_empty() {
        return (false, None);
    }
    let med = median_height(&samples).expect("non-empty");
    let stable = samples.len() >= params.min_plane_samples
        && samples.iter().all(|s| (s.z - med).abs() < params.h_max);
    (stable, Some(med))
}

/// Node state from the stability and reachability indicators.
pub fn node_state(stable: bool, degree: usize) -> NodeState {
    if stable && degree > 0 {
        NodeState::Valid
    } else {
        NodeState::Invalid
    }
}

/// Feasibility gates for a candidate edge. All three must hold: enough
/// samples in the edge ellipse, every deviation below `h_max`, and the edge
/// inclination below `atan(h_max / r_robot)`. Returns the ellipse samples
/// for reuse by [`edge_risk`].
pub fn edge_feasible(
    map: &ElevationMap,
    p_i: [f64; 3],
    p_j: [f64; 3],
    params: &TrgParams,
) -> Result<(bool, Vec<HeightSample>)> {
    let samples = map.heights_in_ellipse(p_i, p_j, params.r_robot)?;
    if samples.len() < params.min_plane_samples {
        return Ok((false, samples));
    }
    let med = median_height(&samples)?;
    if samples.iter().any(|s| (s.z - med).abs() >= params.h_max) {
        return Ok((false, samples));
    }
    let dz = (p_i[2] - p_j[2]).abs();
    let dxy = ((p_i[0] - p_j[0]).powi(2) + (p_i[1] - p_j[1]).powi(2)).sqrt();
    if (dz / dxy).atan() >= params.max_inclination_rad() {
        return Ok((false, samples));
    }
    Ok((true, samples))
}

/// Result of a plane fit over height samples.
#[derive(Debug, Clone)]
pub struct PcaPlane {
    pub centroid: [f64; 3],
    /// Unit eigenvectors, by descending eigenvalue. The last one is the
    /// plane normal.
    pub eigvecs: [[f64; 3]; 3],
    pub eigvals: [f64; 3],
}

/// Eigendecomposition of the population covariance of the sample points.
/// Errors on fewer than 3 samples or a rank-deficient (collinear) set.
pub fn pca_plane(samples: &[HeightSample]) -> Result<PcaPlane> {
    let n = samples.len();
    if n < 3 {
        return Err(TrgError::PlaneRankDeficient(n));
    }
    let inv = 1.0 / n as f64;
    let mut c = Vector3::zeros();
    for s in samples {
        c += Vector3::new(s.x, s.y, s.z);
    }
    c *= inv;
    let mut cov = Matrix3::zeros();
    for s in samples {
        let d = Vector3::new(s.x, s.y, s.z) - c;
        cov += d * d.transpose();
    }
    cov *= inv;
    let eig = cov.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigvals = [
        eig.eigenvalues[order[0]].max(0.0),
        eig.eigenvalues[order[1]].max(0.0),
        eig.eigenvalues[order[2]].max(0.0),
    ];
    // Collinear samples leave only one significant direction.
    if eigvals[1] <= 1e-12 * eigvals[0].max(1e-12) {
        return Err(TrgError::PlaneRankDeficient(n));
    }
    let vec_at = |i: usize| {
        let v = eig.eigenvectors.column(order[i]).normalize();
        [v[0], v[1], v[2]]
    };
    Ok(PcaPlane {
        centroid: [c[0], c[1], c[2]],
        eigvecs: [vec_at(0), vec_at(1), vec_at(2)],
        eigvals,
    })
}

impl PcaPlane {
    /// Inclination of the fitted plane against horizontal, radians.
    pub fn inclination_rad(&self) -> f64 {
        let nz = self.eigvecs[2][2].abs().min(1.0);
        nz.acos()
    }
}

/// Directional edge risk weight (in [0, 1]).
///
/// The two largest-eigenvalue vectors span the fitted plane; the one more
/// aligned with the edge xy direction is longitudinal, the other lateral.
/// Each directional risk is the |z-component| of the corresponding unit
/// eigenvector (the sign making `-e·g >= 0` with `g = [0,0,-1]`), combined
/// as `gamma*r_lon + (1-gamma)*r_lat`.
pub fn edge_risk(
    p_i: [f64; 3],
    p_j: [f64; 3],
    samples: &[HeightSample],
    params: &TrgParams,
) -> Result<f64> {
    let plane = pca_plane(samples)?;
    let dx = p_j[0] - p_i[0];
    let dy = p_j[1] - p_i[1];
    let d = (dx * dx + dy * dy).sqrt();
    if d == 0.0 {
        return Err(TrgError::DegenerateEdge);
    }
    let (ux, uy) = (dx / d, dy / d);
    let e0 = plane.eigvecs[0];
    let e1 = plane.eigvecs[1];
    let dot0 = (e0[0] * ux + e0[1] * uy).abs();
    let dot1 = (e1[0] * ux + e1[1] * uy).abs();
    let (e_lon, e_lat) = if dot0 >= dot1 { (e0, e1) } else { (e1, e0) };
    let r_lon = e_lon[2].abs();
    let r_lat = e_lat[2].abs();
    let w = params.gamma * r_lon + (1.0 - params.gamma) * r_lat;
    Ok(w.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elevation::ElevationMap;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn plane_samples(angle_rad: f64, azimuth_rad: f64, n: usize) -> Vec<HeightSample> {
        // Grid of points on the plane z = tan(angle) * (x cos az + y sin az).
        let t = angle_rad.tan();
        let mut out = Vec::new();
        let side = (n as f64).sqrt().ceil() as usize;
        for i in 0..side {
            for j in 0..side {
                let x = i as f64 * 0.1;
                let y = j as f64 * 0.1;
                let z = t * (x * azimuth_rad.cos() + y * azimuth_rad.sin());
                out.push(HeightSample { x, y, z });
            }
        }
        out
    }

    #[test]
    fn stability_flat_and_step() {
        let params = TrgParams::default();
        let map = ElevationMap::flat(0.1, [0.0, 0.0], 50, 50, 0.0);
        let (stable, med) = check_stability(&map, [2.5, 2.5], &params);
        assert!(stable);
        assert_eq!(med, Some(0.0));

        // One 0.5 m cell inside the disk breaks the deviation gate.
        let mut heights = vec![0.0; 2500];
        heights[25 * 50 + 25] = 0.5;
        let bumpy = ElevationMap::new(0.1, [0.0, 0.0], 50, 50, heights).unwrap();
        let (stable, _) = check_stability(&bumpy, [2.5, 2.5], &params);
        assert!(!stable);

        // Disk fully off-map.
        let (stable, med) = check_stability(&map, [50.0, 50.0], &params);
        assert!(!stable);
        assert_eq!(med, None);
    }

    #[test]
    fn node_state_truth_table() {
        assert_eq!(node_state(true, 3), NodeState::Valid);
        assert_eq!(node_state(true, 0), NodeState::Invalid);
        assert_eq!(node_state(false, 5), NodeState::Invalid);
    }

    #[test]
    fn pca_exact_planes() {
        let flat = plane_samples(0.0, 0.0, 25);
        let p = pca_plane(&flat).unwrap();
        assert_abs_diff_eq!(p.eigvecs[2][2].abs(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p.eigvals[2], 0.0, epsilon = 1e-12);

        let ramp = plane_samples(15f64.to_radians(), 0.0, 25);
        let p = pca_plane(&ramp).unwrap();
        assert_abs_diff_eq!(p.inclination_rad(), 15f64.to_radians(), epsilon = 1e-6);
    }

    #[test]
    fn pca_rank_conditions() {
        let two = vec![
            HeightSample { x: 0.0, y: 0.0, z: 0.0 },
            HeightSample { x: 1.0, y: 0.0, z: 0.0 },
        ];
        assert!(pca_plane(&two).is_err());
        let collinear: Vec<_> = (0..10)
            .map(|i| HeightSample { x: i as f64, y: 2.0 * i as f64, z: 0.5 * i as f64 })
            .collect();
        assert!(pca_plane(&collinear).is_err());
    }

    #[test]
    fn edge_feasible_flat_and_steep() {
        let params = TrgParams::default();
        let map = ElevationMap::flat(0.1, [0.0, 0.0], 60, 60, 0.0);
        let (ok, samples) =
            edge_feasible(&map, [1.0, 3.0, 0.0], [2.0, 3.0, 0.0], &params).unwrap();
        assert!(ok);
        assert!(samples.len() >= params.min_plane_samples);

        // Eq-3 gate: atan(0.3/0.3) = 45 deg >= atan(0.15/0.2) = 36.87 deg.
        let (ok, _) = edge_feasible(&map, [1.0, 3.0, 0.0], [1.3, 3.0, 0.3], &params).unwrap();
        assert!(!ok);
    }

    #[test]
    fn edge_feasible_cliff_deviation_gate() {
        // 0.4 m step halfway across the map.
        let mut heights = vec![0.0; 60 * 60];
        for row in 0..60 {
            for col in 30..60 {
                heights[row * 60 + col] = 0.4;
            }
        }
        let map = ElevationMap::new(0.1, [0.0, 0.0], 60, 60, heights).unwrap();
        let params = TrgParams::default();
        // Matching node z to the terrain keeps the Eq-3 gate out of play
        // (atan(0.4/1.0) = 21.8 deg < 36.87 deg); gate (ii) must reject.
        let (ok, _) = edge_feasible(&map, [2.5, 3.0, 0.0], [3.5, 3.0, 0.4], &params).unwrap();
        assert!(!ok);
    }

    #[test]
    fn risk_flat_is_zero() {
        let params = TrgParams::default();
        let samples = plane_samples(0.0, 0.0, 25);
        let w = edge_risk([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], &samples, &params).unwrap();
        assert!(w < 1e-9);
    }

    #[test]
    fn risk_up_ramp_is_sin_theta() {
        let mut params = TrgParams::default();
        params.gamma = 1.0;
        let theta = 15f64.to_radians();
        let samples = plane_samples(theta, 0.0, 100);
        let w = edge_risk([0.0, 0.3, 0.0], [0.8, 0.3, 0.8 * theta.tan()], &samples, &params)
            .unwrap();
        assert_abs_diff_eq!(w, theta.sin(), epsilon = 1e-3);
        // Cross-slope edge with gamma=1: longitudinal direction is across
        // the gradient, so r_lon ~ 0.
        let w_lat = edge_risk([0.3, 0.0, 0.0], [0.3, 0.8, 0.0], &samples, &params).unwrap();
        assert!(w_lat < 1e-6);
    }

    #[test]
    fn risk_direct_arithmetic() {
        // r_lon = 0.5, r_lat = 0.2, gamma = 0.6 -> w = 0.38.
        let w = 0.6 * 0.5 + (1.0 - 0.6) * 0.2;
        assert_abs_diff_eq!(w, 0.38, epsilon = 1e-12);
    }

    #[test]
    fn risk_symmetry() {
        let params = TrgParams::default();
        let samples = plane_samples(0.2, 0.7, 64);
        let a = [0.1, 0.2, 0.0];
        let b = [0.7, 0.6, 0.15];
        let w_ab = edge_risk(a, b, &samples, &params).unwrap();
        let w_ba = edge_risk(b, a, &samples, &params).unwrap();
        assert_abs_diff_eq!(w_ab, w_ba, epsilon = 1e-12);
    }

    proptest! {
        // Rotating terrain and edge about z leaves the weight unchanged.
        #[test]
        fn risk_rotation_invariant(
            angle in 0.05..0.45f64,
            az in 0.0..std::f64::consts::TAU,
            rot in 0.0..std::f64::consts::TAU,
            gamma in 0.0..=1.0f64,
        ) {
            let mut params = TrgParams::default();
            params.gamma = gamma;
            let samples = plane_samples(angle, az, 100);
            let edge = [0.9f64, 0.4];
            let w0 = edge_risk([0.2, 0.2, 0.0], [0.2 + edge[0], 0.2 + edge[1], 0.0],
                               &samples, &params).unwrap();

            let (c, s) = (rot.cos(), rot.sin());
            let rotated: Vec<HeightSample> = samples
                .iter()
                .map(|p| HeightSample { x: c * p.x - s * p.y, y: s * p.x + c * p.y, z: p.z })
                .collect();
            let re = [c * edge[0] - s * edge[1], s * edge[0] + c * edge[1]];
            let a = [c * 0.2 - s * 0.2, s * 0.2 + c * 0.2, 0.0];
            let w1 = edge_risk(a, [a[0] + re[0], a[1] + re[1], 0.0], &rotated, &params).unwrap();
            prop_assert!((w0 - w1).abs() < 1e-6, "w0={w0} w1={w1}");
        }

        #[test]
        fn risk_bounded(angle in 0.0..0.5f64, az in 0.0..6.28f64, gamma in 0.0..=1.0f64) {
            let mut params = TrgParams::default();
            params.gamma = gamma;
            let samples = plane_samples(angle, az, 49);
            let w = edge_risk([0.0, 0.0, 0.0], [0.5, 0.3, 0.0], &samples, &params).unwrap();
            prop_assert!((0.0..=1.0).contains(&w));
        }
    }
}
