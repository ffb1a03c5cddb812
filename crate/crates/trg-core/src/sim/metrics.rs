//! Path-quality metrics: traveled path deviation T and normalized path
//! risk W.

use crate::error::{Result, TrgError};
use crate::plan::PlanResult;
use crate::sim::traverse::TraversalResult;

/// `T = max(0, (L_trav - L_path) / L_trav)` and `W = (1/L_path) * sum(w)`.
/// T is clamped at zero so lookahead corner-cutting never scores negative.
pub fn compute_metrics(plan: &PlanResult, trav: &TraversalResult) -> Result<(f64, f64)> {
    if trav.l_trav == 0.0 {
        return Err(TrgError::ZeroTravel);
    }
    let t = ((trav.l_trav - plan.l_path) / trav.l_trav).max(0.0);
    let w = if plan.l_path > 0.0 {
        plan.edge_costs.iter().map(|e| e.w).sum::<f64>() / plan.l_path
    } else {
        0.0
    };
    Ok((t, w))
}
