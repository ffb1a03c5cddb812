use serde::{Deserialize, Serialize};

use crate::error::{Result, TrgError};

/// Robot- and graph-specific tuning knobs.
///
/// `r_robot` is the node inscribed-circle radius, `r_exp` the ring radius
/// used for node expansion, `h_max` the largest surmountable height
/// deviation, and `gamma` the longitudinal share of the edge risk.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct TrgParams {
    pub r_robot: f64,
    pub r_exp: f64,
    pub h_max: f64,
    pub gamma: f64,
    pub min_plane_samples: usize,
}

impl Default for TrgParams {
    fn default() -> Self {
        Self {
            r_robot: 0.2,
            r_exp: 0.7,
            h_max: 0.15,
            gamma: 0.5,
            min_plane_samples: 4,
        }
    }
}

impl TrgParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_robot > 0.0 && self.r_robot < self.r_exp) {
            return Err(TrgError::InvalidParam(
                "require 0 < r_robot < r_exp".into(),
            ));
        }
        if self.h_max <= 0.0 {
            return Err(TrgError::InvalidParam("require h_max > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(TrgError::InvalidParam("require 0 <= gamma <= 1".into()));
        }
        if self.min_plane_samples < 3 {
            return Err(TrgError::InvalidParam(
                "require min_plane_samples >= 3".into(),
            ));
        }
        Ok(())
    }

    /// Upper bound on feasible edge inclination, `atan(h_max / r_robot)`.
    pub fn max_inclination_rad(&self) -> f64 {
        (self.h_max / self.r_robot).atan()
    }
}

/// Parameters for the hierarchical local update.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct LocalUpdateParams {
    pub r_local: f64,
}

impl Default for LocalUpdateParams {
    fn default() -> Self {
        Self { r_local: 5.0 }
    }
}

impl LocalUpdateParams {
    pub fn validate(&self, trg: &TrgParams) -> Result<()> {
        if self.r_local < trg.r_exp {
            return Err(TrgError::InvalidParam("require r_local >= r_exp".into()));
        }
        Ok(())
    }
}

/// Named safety-factor presets for the planning cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Optimistic,
    Balanced,
    Conservative,
}

impl Strategy {
    pub fn safety_factor(self) -> f64 {
        match self {
            Strategy::Optimistic => 1.0,
            Strategy::Balanced => 3.0,
            Strategy::Conservative => 10.0,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "optimistic" => Some(Strategy::Optimistic),
            "balanced" => Some(Strategy::Balanced),
            "conservative" => Some(Strategy::Conservative),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Optimistic => "optimistic",
            Strategy::Balanced => "balanced",
            Strategy::Conservative => "conservative",
        }
    }
}
