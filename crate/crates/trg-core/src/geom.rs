//! Small vector helpers shared across the crate. Positions are plain
//! `[f64; 3]` / `[f64; 2]` arrays; nalgebra is only used where an
//! eigendecomposition is actually needed.

pub fn dist_xy(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

pub fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

pub fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

pub fn xy(p: [f64; 3]) -> [f64; 2] {
    [p[0], p[1]]
}

/// Total polyline length in 3D.
pub fn polyline_len(pts: &[[f64; 3]]) -> f64 {
    pts.windows(2).map(|w| dist3(w[0], w[1])).sum()
}
