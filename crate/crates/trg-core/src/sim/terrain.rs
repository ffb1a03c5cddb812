//! Deterministic synthetic terrain: fractal value-noise heightfields plus
//! analytic features (ramps, walls, plateaus).

use serde::{Deserialize, Serialize};

use crate::elevation::ElevationMap;
use crate::error::Result;

/// Analytic terrain features, applied after the fractal base in list order.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Feature {
    /// Planar incline replacing the base height inside an axis-oriented
    /// rectangle rotated by `direction_deg`. Height rises along the
    /// direction at `slope_deg`, starting from `base_z` at the low edge.
    Ramp {
        center: [f64; 2],
        size: [f64; 2],
        direction_deg: f64,
        slope_deg: f64,
        #[serde(default)]
        base_z: f64,
    },
    /// Raised band (axis-aligned rectangle) of the given height.
    Wall {
        center: [f64; 2],
        size: [f64; 2],
        height: f64,
    },
    /// Flat region clamped to a constant height.
    Plateau {
        center: [f64; 2],
        size: [f64; 2],
        height: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TerrainSpec {
    pub size_m: [f64; 2],
    pub resolution_m: f64,
    pub relief_m: f64,
    /// Fractal persistence in (0, 1); higher is rougher.
    pub roughness: f64,
    #[serde(default)]
    pub features: Vec<Feature>,
    pub seed: u64,
}

impl TerrainSpec {
    pub fn flat(size_m: [f64; 2], resolution_m: f64) -> Self {
        Self {
            size_m,
            resolution_m,
            relief_m: 0.0,
            roughness: 0.5,
            features: Vec::new(),
            seed: 0,
        }
    }
}

fn hash2(seed: u64, x: i64, y: i64) -> u64 {
    // splitmix64 over a mixed key; portable and allocation-free.
    let mut h = seed
        ^ (x as u64).wrapping_mul(0x9e3779b97f4a7c15)
        ^ (y as u64).wrapping_mul(0xc2b2ae3d27d4eb4f);
    h = h.wrapping_add(0x9e3779b97f4a7c15);
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d049bb133111eb);
    h ^ (h >> 31)
}

fn lattice_value(seed: u64, x: i64, y: i64) -> f64 {
    (hash2(seed, x, y) >> 11) as f64 / (1u64 << 53) as f64
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Value noise in [0, 1] at lattice scale 1.
fn value_noise(seed: u64, x: f64, y: f64) -> f64 {
    let xi = x.floor();
    let yi = y.floor();
    let (fx, fy) = (smoothstep(x - xi), smoothstep(y - yi));
    let (xi, yi) = (xi as i64, yi as i64);
    let v00 = lattice_value(seed, xi, yi);
    let v10 = lattice_value(seed, xi + 1, yi);
    let v01 = lattice_value(seed, xi, yi + 1);
    let v11 = lattice_value(seed, xi + 1, yi + 1);
    let a = v00 + (v10 - v00) * fx;
    let b = v01 + (v11 - v01) * fx;
    a + (b - a) * fy
}

fn fbm(seed: u64, x: f64, y: f64, octaves: u32, persistence: f64) -> f64 {
    let mut total = 0.0;
    let mut amp = 1.0;
    let mut freq = 1.0;
    let mut norm = 0.0;
    for oct in 0..octaves {
        total += amp * value_noise(seed.wrapping_add(oct as u64), x * freq, y * freq);
        norm += amp;
        amp *= persistence;
        freq *= 2.0;
    }
    total / norm
}

/// Builds the heightfield for a spec; byte-identical per spec.
pub fn generate_terrain(spec: &TerrainSpec) -> Result<ElevationMap> {
    let w = (spec.size_m[0] / spec.resolution_m).round() as usize;
    let h = (spec.size_m[1] / spec.resolution_m).round() as usize;
    let w = w.max(1);
    let h = h.max(1);
    let mut heights = vec![0.0f64; w * h];
    if spec.relief_m > 0.0 {
        // Base wavelength ~ a sixth of the smaller side gives rolling
        // hills at desk scale.
        let wavelength = (spec.size_m[0].min(spec.size_m[1]) / 6.0).max(spec.resolution_m);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in 0..h {
            for col in 0..w {
                let x = col as f64 * spec.resolution_m / wavelength;
                let y = row as f64 * spec.resolution_m / wavelength;
                let v = fbm(spec.seed, x, y, 5, spec.roughness.clamp(0.05, 0.95));
                heights[row * w + col] = v;
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        let span = (hi - lo).max(1e-12);
        for z in &mut heights {
            *z = (*z - lo) / span * spec.relief_m;
        }
    }
    for feature in &spec.features {
        apply_feature(&mut heights, w, h, spec.resolution_m, feature);
    }
    ElevationMap::new(spec.resolution_m, [0.0, 0.0], w, h, heights)
}

fn apply_feature(heights: &mut [f64], w: usize, h: usize, res: f64, feature: &Feature) {
    for row in 0..h {
        for col in 0..w {
            let x = col as f64 * res;
            let y = row as f64 * res;
            let z = &mut heights[row * w + col];
            match feature {
                Feature::Ramp {
                    center,
                    size,
                    direction_deg,
                    slope_deg,
                    base_z,
                } => {
                    let dir = direction_deg.to_radians();
                    let (c, s) = (dir.cos(), dir.sin());
                    let rx = (x - center[0]) * c + (y - center[1]) * s;
                    let ry = -(x - center[0]) * s + (y - center[1]) * c;
                    if rx.abs() <= size[0] / 2.0 && ry.abs() <= size[1] / 2.0 {
                        *z = base_z + (rx + size[0] / 2.0) * slope_deg.to_radians().tan();
                    }
                }
                Feature::Wall { center, size, height } => {
                    if (x - center[0]).abs() <= size[0] / 2.0
                        && (y - center[1]).abs() <= size[1] / 2.0
                    {
                        *z += height;
                    }
                }
                Feature::Plateau { center, size, height } => {
                    if (x - center[0]).abs() <= size[0] / 2.0
                        && (y - center[1]).abs() <= size[1] / 2.0
                    {
                        *z = *height;
                    }
                }
            }
        }
    }
}
